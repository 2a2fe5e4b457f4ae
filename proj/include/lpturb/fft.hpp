#pragma once

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "lpturb/field.hpp"

namespace lpturb {

namespace detail {

/// Cached FFTW plans for `howmany` interleaved components on an n^3 grid.
/// Planning happens under a lock; execution uses the new-array interface,
/// which FFTW documents as thread-safe.
struct FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  static const FftPlans& get(int n, int howmany) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, FftPlans> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_pair(n, howmany);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const std::size_t real_len = std::size_t(n) * n * n * howmany;
    const std::size_t cplx_len = std::size_t(n) * n * (n / 2 + 1) * howmany;
    double* r = fftw_alloc_real(real_len);
    fftw_complex* c = fftw_alloc_complex(cplx_len);
    const int dims[3] = {n, n, n};
    // Deterministic planning; arrays passed at execution are 64-byte aligned.
    const unsigned flags = FFTW_ESTIMATE;
    FftPlans p;
    p.forward = fftw_plan_many_dft_r2c(3, dims, howmany, r, nullptr, howmany, 1, c, nullptr, howmany, 1, flags);
    p.inverse = fftw_plan_many_dft_c2r(3, dims, howmany, c, nullptr, howmany, 1, r, nullptr, howmany, 1, flags);
    fftw_free(r);
    fftw_free(c);
    require(p.forward && p.inverse, ErrorKind::configuration, "FFTW planning failed");
    return cache.emplace(key, p).first->second;
  }
};

inline void check_alignment(const void* a, const void* b) {
  require(fftw_alignment_of(static_cast<double*>(const_cast<void*>(a))) == 0 &&
              fftw_alignment_of(static_cast<double*>(const_cast<void*>(b))) == 0,
          ErrorKind::configuration, "FFT buffers must be SIMD aligned");
}

inline void r2c(int n, int howmany, const double* in, complex* out) {
  const auto& p = FftPlans::get(n, howmany);
  check_alignment(in, out);
  // FFTW's r2c does not modify its input when planned out of place.
  fftw_execute_dft_r2c(p.forward, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  const std::size_t len = std::size_t(n) * n * (n / 2 + 1) * howmany;
  const double scale = 1.0 / (double(n) * n * n);
  for (std::size_t i = 0; i < len; ++i) out[i] *= scale;
}

inline void c2r(int n, int howmany, const complex* in, double* out) {
  const auto& p = FftPlans::get(n, howmany);
  // c2r destroys its input, so transform a copy.
  AlignedVector<complex> scratch(in, in + std::size_t(n) * n * (n / 2 + 1) * howmany);
  check_alignment(scratch.data(), out);
  fftw_execute_dft_c2r(p.inverse, reinterpret_cast<fftw_complex*>(scratch.data()), out);
}

}  // namespace detail

inline SpectralVectorField forward(const RealVectorField& v) {
  SpectralVectorField s(v.grid);
  detail::r2c(v.grid.n, 3, v.data.data(), s.data.data());
  return s;
}

inline RealVectorField inverse(const SpectralVectorField& s) {
  RealVectorField v(s.grid);
  detail::c2r(s.grid.n, 3, s.data.data(), v.data.data());
  return v;
}

inline SpectralScalarField forward(const RealScalarField& v) {
  SpectralScalarField s(v.grid);
  detail::r2c(v.grid.n, 1, v.data.data(), s.data.data());
  return s;
}

inline RealScalarField inverse(const SpectralScalarField& s) {
  RealScalarField v(s.grid);
  detail::c2r(s.grid.n, 1, s.data.data(), v.data.data());
  return v;
}

enum class Direction { forward, inverse };

}  // namespace lpturb
