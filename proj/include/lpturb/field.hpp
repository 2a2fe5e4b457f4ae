#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <boost/align/aligned_allocator.hpp>

#include "lpturb/grid.hpp"

namespace lpturb {

using complex = std::complex<double>;

/// Field storage is 64-byte aligned so FFTW can use its SIMD codelets.
template <class T>
using AlignedVector = std::vector<T, boost::alignment::aligned_allocator<T, 64>>;

/// Three-component real field on the grid. Sample (i,j,k) component c lives at
/// ((i*n + j)*n + k)*3 + c.
struct RealVectorField {
  GridSpec grid;
  AlignedVector<double> data;

  RealVectorField() = default;
  explicit RealVectorField(const GridSpec& g) : grid(g), data(3 * g.points(), 0.0) { g.validate(); }

  std::size_t points() const { return grid.points(); }
  double& at(std::size_t point, int c) { return data[3 * point + c]; }
  double at(std::size_t point, int c) const { return data[3 * point + c]; }
  std::array<double, 3> vec(std::size_t point) const {
    return {data[3 * point], data[3 * point + 1], data[3 * point + 2]};
  }
  std::size_t index(int i, int j, int k) const { return (std::size_t(i) * grid.n + j) * grid.n + k; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  RealVectorField& operator+=(const RealVectorField& o) {
    require(grid == o.grid, ErrorKind::input, "field grids differ");
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
    return *this;
  }
  RealVectorField& operator-=(const RealVectorField& o) {
    require(grid == o.grid, ErrorKind::input, "field grids differ");
    for (std::size_t i = 0; i < data.size(); ++i) data[i] -= o.data[i];
    return *this;
  }
  RealVectorField& operator*=(double a) {
    for (double& v : data) v *= a;
    return *this;
  }
  friend RealVectorField operator+(RealVectorField a, const RealVectorField& b) { return a += b; }
  friend RealVectorField operator-(RealVectorField a, const RealVectorField& b) { return a -= b; }
  friend RealVectorField operator*(double s, RealVectorField a) { return a *= s; }
};

struct RealScalarField {
  GridSpec grid;
  AlignedVector<double> data;

  RealScalarField() = default;
  explicit RealScalarField(const GridSpec& g) : grid(g), data(g.points(), 0.0) { g.validate(); }
};

/// Half spectrum (last axis kz = 0..n/2) of a real vector field, components
/// interleaved: mode idx component c at idx*3 + c. Coefficients are
/// normalized so that v(x) = sum_m c_m exp(2 pi i m.x / L).
struct SpectralVectorField {
  GridSpec grid;
  AlignedVector<complex> data;

  SpectralVectorField() = default;
  explicit SpectralVectorField(const GridSpec& g) : grid(g), data(3 * g.modes()) { g.validate(); }

  std::size_t modes() const { return grid.modes(); }
  complex& at(std::size_t mode, int c) { return data[3 * mode + c]; }
  const complex& at(std::size_t mode, int c) const { return data[3 * mode + c]; }

  SpectralVectorField& operator+=(const SpectralVectorField& o) {
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
    return *this;
  }
  SpectralVectorField& operator*=(double a) {
    for (auto& v : data) v *= a;
    return *this;
  }
};

struct SpectralScalarField {
  GridSpec grid;
  AlignedVector<complex> data;

  SpectralScalarField() = default;
  explicit SpectralScalarField(const GridSpec& g) : grid(g), data(g.modes()) { g.validate(); }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  require(a == b, ErrorKind::input, std::string(what) + ": grid mismatch");
}

}  // namespace lpturb
