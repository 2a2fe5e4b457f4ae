#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "lpturb/error.hpp"

namespace lpturb {

/// Periodic cubic grid [0,L)^3 with n points per dimension.
///
/// Fourier mode m in Z^3 carries wavenumber |m|/L, so that dyadic shell q has
/// outer wavenumber 2^q/L. Derivatives use the angular wavenumber 2*pi*m/L.
struct GridSpec {
  int n = 0;
  double L = 1.0;

  static bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

  void validate() const {
    require(is_power_of_two(n) && n >= 16, ErrorKind::configuration,
            "grid size n must be a power of two >= 16, got " + std::to_string(n));
    require(std::isfinite(L) && L > 0.0, ErrorKind::configuration, "domain length L must be positive");
  }

  std::size_t points() const { return std::size_t(n) * n * n; }
  /// Length of the last (halved) dimension of the real-to-complex spectrum.
  int nz_half() const { return n / 2 + 1; }
  std::size_t modes() const { return std::size_t(n) * n * nz_half(); }
  double dx() const { return L / n; }
  double cell_volume() const { return dx() * dx() * dx(); }
  double volume() const { return L * L * L; }
  /// lambda_q = 2^q / L.
  double shell_wavenumber(int q) const { return std::ldexp(1.0, q) / L; }
  /// Largest shell index that contains a resolved (non-Nyquist) mode.
  int top_shell() const {
    const long mmax = n / 2 - 1;
    return shell_of_norm2(3 * mmax * mmax);
  }
  /// Default analysis range upper end: the last shell fully inside |m| <= n/2.
  int analysis_top_shell() const {
    int q = 0;
    while ((1 << (q + 1)) <= n / 2) ++q;
    return q;
  }
  /// Per-component cutoff of the 2/3 rule: modes with |m_i| > n/3 are removed.
  int dealias_cutoff() const { return n / 3; }

  /// Shell index for integer |m|^2 > 0: q = 0 for |m| <= 1, otherwise
  /// 2^(q-1) < |m| <= 2^q. Exact integer comparison.
  static int shell_of_norm2(long m2) {
    if (m2 <= 1) return 0;
    int q = 1;
    while ((long(1) << (2 * q)) < m2) ++q;
    return q;
  }

  friend bool operator==(const GridSpec& a, const GridSpec& b) { return a.n == b.n && a.L == b.L; }
};

/// Precomputed per-mode metadata for the half spectrum (n x n x (n/2+1)).
/// Mode (i,j,k) maps to m = (i<n/2 ? i : i-n, same for j, k).
struct SpectralLayout {
  static constexpr std::int8_t mean_mode = -1;
  static constexpr std::int8_t nyquist_mode = -2;

  int n = 0;
  std::vector<std::int8_t> shell;    // shell index, or mean/nyquist marker
  std::vector<std::int32_t> norm2;   // |m|^2 (Nyquist components included literally)
  std::vector<std::uint8_t> weight;  // Hermitian multiplicity in the half spectrum (1 or 2)
  std::vector<std::uint8_t> dealiased;  // 1 if kept by the 2/3 rule
  std::vector<std::int64_t> shell_mode_count;  // full-spectrum modes per shell

  static int signed_index(int i, int n) { return i < n / 2 ? i : i - n; }

  std::array<int, 3> mode(std::size_t idx) const {
    const int nzh = n / 2 + 1;
    const int k = int(idx % nzh);
    const int j = int((idx / nzh) % n);
    const int i = int(idx / (std::size_t(nzh) * n));
    return {signed_index(i, n), signed_index(j, n), k};
  }

  static std::shared_ptr<const SpectralLayout> get(int n) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const SpectralLayout>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto layout = std::make_shared<SpectralLayout>(build(n));
    cache.emplace(n, layout);
    return layout;
  }

 private:
  static SpectralLayout build(int n) {
    SpectralLayout s;
    s.n = n;
    const int nzh = n / 2 + 1;
    const std::size_t total = std::size_t(n) * n * nzh;
    s.shell.resize(total);
    s.norm2.resize(total);
    s.weight.resize(total);
    s.dealiased.resize(total);
    const int cut = n / 3;
    int max_shell = 0;
    for (int i = 0; i < n; ++i) {
      const int mx = signed_index(i, n);
      for (int j = 0; j < n; ++j) {
        const int my = signed_index(j, n);
        for (int k = 0; k < nzh; ++k) {
          const std::size_t idx = (std::size_t(i) * n + j) * nzh + k;
          const long m2 = long(mx) * mx + long(my) * my + long(k) * k;
          s.norm2[idx] = std::int32_t(m2);
          s.weight[idx] = (k == 0 || k == n / 2) ? 1 : 2;
          s.dealiased[idx] = (std::abs(mx) <= cut && std::abs(my) <= cut && k <= cut) ? 1 : 0;
          const bool nyq = (i == n / 2) || (j == n / 2) || (k == n / 2);
          if (nyq) {
            s.shell[idx] = nyquist_mode;
          } else if (m2 == 0) {
            s.shell[idx] = mean_mode;
          } else {
            const int q = GridSpec::shell_of_norm2(m2);
            s.shell[idx] = std::int8_t(q);
            max_shell = std::max(max_shell, q);
          }
        }
      }
    }
    s.shell_mode_count.assign(max_shell + 1, 0);
    for (std::size_t idx = 0; idx < total; ++idx)
      if (s.shell[idx] >= 0) s.shell_mode_count[s.shell[idx]] += s.weight[idx];
    return s;
  }
};

/// Angular wavevector 2*pi*m/L used for spectral derivatives. Components at
/// the Nyquist index are zeroed so derivatives of real fields stay real.
inline std::array<double, 3> derivative_wavevector(const GridSpec& g, std::size_t idx) {
  const int n = g.n;
  const int nzh = n / 2 + 1;
  const int k = int(idx % nzh);
  const int j = int((idx / nzh) % n);
  const int i = int(idx / (std::size_t(nzh) * n));
  const double f = 2.0 * std::numbers::pi / g.L;
  auto comp = [&](int ii) { return ii == n / 2 ? 0.0 : f * SpectralLayout::signed_index(ii, n); };
  return {comp(i), comp(j), k == n / 2 ? 0.0 : f * k};
}

}  // namespace lpturb
