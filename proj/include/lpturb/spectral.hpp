#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "lpturb/fft.hpp"
#include "lpturb/numerics.hpp"

namespace lpturb {

/// i*z without the generic complex multiply (which guards inf/nan via a libcall).
inline complex times_i(const complex& z) { return {-z.imag(), z.real()}; }

/// Calls f(mode_index, angular wavevector) over the half spectrum in storage
/// order. Nyquist-index components of the wavevector are zero.
template <class F>
void for_each_mode(const GridSpec& g, const F& f) {
  const int n = g.n;
  const int nzh = n / 2 + 1;
  const double s = 2.0 * std::numbers::pi / g.L;
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    const double kx = i == n / 2 ? 0.0 : s * SpectralLayout::signed_index(i, n);
    for (int j = 0; j < n; ++j) {
      const double ky = j == n / 2 ? 0.0 : s * SpectralLayout::signed_index(j, n);
      for (int k = 0; k < nzh; ++k, ++idx) {
        const double kz = k == n / 2 ? 0.0 : s * k;
        f(idx, std::array<double, 3>{kx, ky, kz});
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Shell projections

inline void check_shell_range(const GridSpec& g, int q_lo, int q_hi) {
  require(q_lo >= 0 && q_lo <= q_hi, ErrorKind::range,
          "invalid shell range [" + std::to_string(q_lo) + ", " + std::to_string(q_hi) + "]");
  require(q_hi <= g.top_shell(), ErrorKind::range,
          "shell " + std::to_string(q_hi) + " lies beyond the last resolved shell " + std::to_string(g.top_shell()));
}

/// Sharp band-pass: keeps shells q_lo..q_hi (the mean and Nyquist modes are in
/// no shell and are always dropped).
inline SpectralVectorField shell_filter(const SpectralVectorField& s, int q_lo, int q_hi) {
  check_shell_range(s.grid, q_lo, q_hi);
  const auto layout = SpectralLayout::get(s.grid.n);
  SpectralVectorField out(s.grid);
  for (std::size_t m = 0; m < s.modes(); ++m) {
    const int q = layout->shell[m];
    if (q >= q_lo && q <= q_hi)
      for (int c = 0; c < 3; ++c) out.at(m, c) = s.at(m, c);
  }
  return out;
}

/// v_{<q}: all shells below q (zero field for q = 0).
inline SpectralVectorField lowpass(const SpectralVectorField& s, int q) {
  if (q <= 0) return SpectralVectorField(s.grid);
  return shell_filter(s, 0, std::min(q - 1, s.grid.top_shell()));
}

/// v_{>=q}: all shells from q up to the last resolved one.
inline SpectralVectorField highpass(const SpectralVectorField& s, int q) {
  if (q > s.grid.top_shell()) return SpectralVectorField(s.grid);
  return shell_filter(s, std::max(q, 0), s.grid.top_shell());
}

inline RealVectorField shell_project(const RealVectorField& v, int q_lo, int q_hi) {
  check_shell_range(v.grid, q_lo, q_hi);
  return inverse(shell_filter(forward(v), q_lo, q_hi));
}

// ---------------------------------------------------------------------------
// Norms and energies

/// ||v||^2_{L^2} from the spectrum: L^3 * sum over the full spectrum |c_m|^2.
inline double l2_norm_squared(const SpectralVectorField& s) {
  const auto layout = SpectralLayout::get(s.grid.n);
  const double sum = pairwise_sum(s.modes(), [&](std::size_t m) {
    return layout->weight[m] * (std::norm(s.at(m, 0)) + std::norm(s.at(m, 1)) + std::norm(s.at(m, 2)));
  });
  return s.grid.volume() * sum;
}

/// Squared L^2 norms per shell plus the parts that belong to no shell.
struct ShellEnergies {
  std::vector<double> shell;  // ||v_q||^2_{L^2}, q = 0..top_shell
  double mean = 0.0;          // ||mean mode||^2_{L^2}
  double nyquist = 0.0;       // modes with a component at the Nyquist index
  double total = 0.0;         // ||v||^2_{L^2}
};

inline ShellEnergies shell_energies(const SpectralVectorField& s) {
  const auto layout = SpectralLayout::get(s.grid.n);
  const int top = s.grid.top_shell();
  const std::size_t nm = s.modes();
  auto mode_energy = [&](std::size_t m) {
    return layout->weight[m] * (std::norm(s.at(m, 0)) + std::norm(s.at(m, 1)) + std::norm(s.at(m, 2)));
  };
  ShellEnergies e;
  e.shell.assign(top + 1, 0.0);
  const double vol = s.grid.volume();
  for (int q = 0; q <= top; ++q)
    e.shell[q] = vol * pairwise_sum(nm, [&](std::size_t m) { return layout->shell[m] == q ? mode_energy(m) : 0.0; });
  e.mean = vol * mode_energy(0);
  e.nyquist = vol * pairwise_sum(nm, [&](std::size_t m) {
    return layout->shell[m] == SpectralLayout::nyquist_mode ? mode_energy(m) : 0.0;
  });
  e.total = vol * pairwise_sum(nm, mode_energy);
  return e;
}

/// Grid-quadrature L^p norm (sum |v|^p dx^3)^(1/p); p = infinity gives the
/// maximum pointwise Euclidean magnitude.
inline double lp_norm(const RealVectorField& v, double p) {
  require(p >= 1.0, ErrorKind::domain, "lp_norm: exponent must be >= 1");
  const std::size_t np = v.points();
  auto mag2 = [&](std::size_t i) {
    const double a = v.data[3 * i], b = v.data[3 * i + 1], c = v.data[3 * i + 2];
    return a * a + b * b + c * c;
  };
  if (std::isinf(p)) {
    double mx = 0.0;
    for (std::size_t i = 0; i < np; ++i) mx = std::max(mx, mag2(i));
    return std::sqrt(mx);
  }
  const double dv = v.grid.cell_volume();
  if (p == 2.0) return std::sqrt(dv * pairwise_sum(np, mag2));
  const double sum = pairwise_sum(np, [&](std::size_t i) { return std::pow(mag2(i), 0.5 * p); });
  return std::pow(dv * sum, 1.0 / p);
}

inline double lp_norm(const RealScalarField& v, double p) {
  require(p >= 1.0, ErrorKind::domain, "lp_norm: exponent must be >= 1");
  if (std::isinf(p)) {
    double mx = 0.0;
    for (double x : v.data) mx = std::max(mx, std::abs(x));
    return mx;
  }
  const double sum = pairwise_sum(v.data.size(), [&](std::size_t i) { return std::pow(std::abs(v.data[i]), p); });
  return std::pow(v.grid.cell_volume() * sum, 1.0 / p);
}

/// Volume mean of |v|^p (the spatial part of the space-time average).
inline double mean_abs_pow(const RealVectorField& v, double p) {
  const std::size_t np = v.points();
  const double sum = pairwise_sum(np, [&](std::size_t i) {
    const double a = v.data[3 * i], b = v.data[3 * i + 1], c = v.data[3 * i + 2];
    return std::pow(a * a + b * b + c * c, 0.5 * p);
  });
  return sum / double(np);
}

// ---------------------------------------------------------------------------
// Differential operators (exact spectral multipliers i k)

inline SpectralVectorField curl(const SpectralVectorField& s) {
  SpectralVectorField out(s.grid);
  for_each_mode(s.grid, [&](std::size_t m, const std::array<double, 3>& k) {
    const complex a = s.at(m, 0), b = s.at(m, 1), c = s.at(m, 2);
    out.at(m, 0) = times_i(k[1] * c - k[2] * b);
    out.at(m, 1) = times_i(k[2] * a - k[0] * c);
    out.at(m, 2) = times_i(k[0] * b - k[1] * a);
  });
  return out;
}

inline SpectralScalarField divergence(const SpectralVectorField& s) {
  SpectralScalarField out(s.grid);
  for_each_mode(s.grid, [&](std::size_t m, const std::array<double, 3>& k) {
    out.data[m] = times_i(k[0] * s.at(m, 0) + k[1] * s.at(m, 1) + k[2] * s.at(m, 2));
  });
  return out;
}

inline SpectralVectorField gradient(const SpectralScalarField& s) {
  SpectralVectorField out(s.grid);
  for_each_mode(s.grid, [&](std::size_t m, const std::array<double, 3>& k) {
    for (int c = 0; c < 3; ++c) out.at(m, c) = times_i(k[c] * s.data[m]);
  });
  return out;
}

inline RealVectorField curl(const RealVectorField& v) { return inverse(curl(forward(v))); }
inline RealScalarField divergence(const RealVectorField& v) { return inverse(divergence(forward(v))); }
inline RealVectorField gradient(const RealScalarField& v) { return inverse(gradient(forward(v))); }

enum class DifferentialKind { curl, divergence, gradient };

/// ||grad v||^2_{L^2} = L^3 sum |k|^2 |c_m|^2 summed over components.
inline double gradient_norm_squared(const SpectralVectorField& s) {
  const auto layout = SpectralLayout::get(s.grid.n);
  std::vector<double> k2(s.modes());
  for_each_mode(s.grid, [&](std::size_t m, const std::array<double, 3>& k) {
    k2[m] = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
  });
  const double sum = pairwise_sum(s.modes(), [&](std::size_t m) {
    return layout->weight[m] * k2[m] * (std::norm(s.at(m, 0)) + std::norm(s.at(m, 1)) + std::norm(s.at(m, 2)));
  });
  return s.grid.volume() * sum;
}

/// ||div v||_{L^2} / ||grad v||_{L^2}; zero for constant fields.
inline double divergence_ratio(const SpectralVectorField& s) {
  const auto layout = SpectralLayout::get(s.grid.n);
  const auto d = divergence(s);
  const double num = pairwise_sum(s.modes(), [&](std::size_t m) { return layout->weight[m] * std::norm(d.data[m]); });
  const double den = gradient_norm_squared(s) / s.grid.volume();
  return den == 0.0 ? 0.0 : std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// Projections

/// Leray projection onto divergence-free fields: c - k (k.c)/|k|^2.
inline SpectralVectorField leray(const SpectralVectorField& s) {
  SpectralVectorField out = s;
  for_each_mode(s.grid, [&](std::size_t m, const std::array<double, 3>& k) {
    const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if (k2 == 0.0) return;
    const complex kc = (k[0] * s.at(m, 0) + k[1] * s.at(m, 1) + k[2] * s.at(m, 2)) / k2;
    for (int c = 0; c < 3; ++c) out.at(m, c) -= k[c] * kc;
  });
  return out;
}

inline RealVectorField leray_project(const RealVectorField& v) { return inverse(leray(forward(v))); }

/// 2/3 rule: zero every mode with some |m_i| > n/3.
inline SpectralVectorField dealias(const SpectralVectorField& s) {
  const auto layout = SpectralLayout::get(s.grid.n);
  SpectralVectorField out = s;
  for (std::size_t m = 0; m < s.modes(); ++m)
    if (!layout->dealiased[m])
      for (int c = 0; c < 3; ++c) out.at(m, c) = 0.0;
  return out;
}

inline void dealias_in_place(SpectralVectorField& s) {
  const auto layout = SpectralLayout::get(s.grid.n);
  for (std::size_t m = 0; m < s.modes(); ++m)
    if (!layout->dealiased[m])
      for (int c = 0; c < 3; ++c) s.at(m, c) = 0.0;
}

// ---------------------------------------------------------------------------
// Pointwise algebra

inline RealVectorField cross(const RealVectorField& a, const RealVectorField& b) {
  require_same_grid(a.grid, b.grid, "cross");
  RealVectorField out(a.grid);
  for (std::size_t i = 0; i < a.points(); ++i) {
    const double* x = &a.data[3 * i];
    const double* y = &b.data[3 * i];
    double* z = &out.data[3 * i];
    z[0] = x[1] * y[2] - x[2] * y[1];
    z[1] = x[2] * y[0] - x[0] * y[2];
    z[2] = x[0] * y[1] - x[1] * y[0];
  }
  return out;
}

/// Quadrature of a . b over the domain.
inline double inner_product(const RealVectorField& a, const RealVectorField& b) {
  require_same_grid(a.grid, b.grid, "inner_product");
  const double sum = pairwise_sum(a.points(), [&](std::size_t i) {
    return a.data[3 * i] * b.data[3 * i] + a.data[3 * i + 1] * b.data[3 * i + 1] + a.data[3 * i + 2] * b.data[3 * i + 2];
  });
  return a.grid.cell_volume() * sum;
}

}  // namespace lpturb
