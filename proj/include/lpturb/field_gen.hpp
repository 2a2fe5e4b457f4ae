#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "lpturb/rng.hpp"
#include "lpturb/spectral.hpp"

namespace lpturb {

using Vec3 = std::array<double, 3>;

inline Vec3 cross3(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm3(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }
inline Vec3 normalized(const Vec3& a) {
  const double r = norm3(a);
  return {a[0] / r, a[1] / r, a[2] / r};
}

enum class ModeKind { sinusoid, beltrami };

/// Unit vector perpendicular to m: e3 x m normalized, or e1 when m is along e3.
inline Vec3 mode_polarization(const std::array<int, 3>& m) {
  const Vec3 e = cross3({0.0, 0.0, 1.0}, {double(m[0]), double(m[1]), double(m[2])});
  if (norm3(e) == 0.0) return {1.0, 0.0, 0.0};
  return normalized(e);
}

/// Sinusoid: A sin(2 pi m.x / L) e. Beltrami: A (e1 cos - e2 sin) with
/// e2 = m_hat x e1, a curl eigenfield with eigenvalue +2 pi |m| / L.
inline RealVectorField single_mode(const GridSpec& g, const std::array<int, 3>& m, double amplitude, ModeKind kind) {
  g.validate();
  const bool zero = m[0] == 0 && m[1] == 0 && m[2] == 0;
  bool resolved = !zero;
  for (int c = 0; c < 3; ++c) resolved = resolved && std::abs(m[c]) < g.n / 2;
  require(resolved, ErrorKind::range, "single_mode: wavevector is zero or not resolved on this grid");
  const Vec3 e1 = mode_polarization(m);
  const Vec3 e2 = cross3(normalized({double(m[0]), double(m[1]), double(m[2])}), e1);
  RealVectorField v(g);
  const int n = g.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        // Reduce the phase modulo n in integers so large |m| stays exact.
        const long ph = ((long(m[0]) * i + long(m[1]) * j + long(m[2]) * k) % n + n) % n;
        const double th = 2.0 * std::numbers::pi * double(ph) / n;
        const std::size_t p = v.index(i, j, k);
        for (int c = 0; c < 3; ++c) {
          v.at(p, c) = kind == ModeKind::sinusoid ? amplitude * std::sin(th) * e1[c]
                                                  : amplitude * (e1[c] * std::cos(th) - e2[c] * std::sin(th));
        }
      }
  return v;
}

/// Seeded divergence-free field supported on shells q_lo..q_hi with
/// ||v_q||^2 = amplitude^2 L^3 (lambda_q L)^slope exactly.
inline RealVectorField random_solenoidal(const GridSpec& g, double slope, int q_lo, int q_hi, std::uint64_t seed,
                                         double amplitude = 1.0) {
  g.validate();
  require(q_lo <= q_hi, ErrorKind::domain, "random_solenoidal: empty shell range");
  check_shell_range(g, q_lo, q_hi);
  RealVectorField noise(g);
  const CounterRng rng(seed, 0x736f6c656e6f6964ull);
  for (std::size_t i = 0; i < noise.data.size(); ++i) noise.data[i] = rng.normal(i);
  auto s = leray(shell_filter(forward(noise), q_lo, q_hi));
  const auto layout = SpectralLayout::get(g.n);
  const auto e = shell_energies(s);
  std::vector<double> scale(e.shell.size(), 0.0);
  for (int q = q_lo; q <= q_hi; ++q) {
    require(e.shell[q] > 0.0, ErrorKind::degenerate, "random_solenoidal: empty shell " + std::to_string(q));
    const double target = amplitude * amplitude * g.volume() * std::pow(2.0, q * slope);
    scale[q] = std::sqrt(target / e.shell[q]);
  }
  for (std::size_t m = 0; m < s.modes(); ++m) {
    const int q = layout->shell[m];
    if (q >= 0)
      for (int c = 0; c < 3; ++c) s.at(m, c) *= scale[q];
  }
  return inverse(s);
}

/// Multi-scale wave-packet field with prescribed intermittency dimension.
struct PacketLaw {
  double delta = 3.0;
  int q_lo = 1;
  int q_hi = 6;
  double amplitude = 1.0;  // A0: L^infinity amplitude of each shell at lambda_q L = 1
  double alpha = 0.0;      // shell amplitude A_q = A0 (lambda_q L)^alpha
  std::uint64_t seed = 1;

  double shell_amplitude(int q) const { return amplitude * std::pow(2.0, q * alpha); }
  long packets(int q) const {
    const double cells = std::pow(8.0, q);
    return std::max(1L, long(std::min(cells, std::round(std::pow(2.0, q * delta)))));
  }
};

struct PacketField {
  RealVectorField field;
  std::vector<long> packet_counts;  // indexed by q - q_lo
  bool few_shells = false;          // fewer than three shells: a slope fit is not meaningful
};

namespace detail {

/// Picks `count` of the nc^3 cells in a seeded order, preferring cells that
/// share no face with an already chosen cell.
inline std::vector<std::array<int, 3>> choose_packet_cells(int nc, long count, const CounterRng& rng) {
  const std::size_t total = std::size_t(nc) * nc * nc;
  std::vector<std::uint32_t> perm(total);
  for (std::size_t i = 0; i < total; ++i) perm[i] = std::uint32_t(i);
  for (std::size_t i = total; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i, i)]);
  auto unpack = [nc](std::uint32_t c) { return std::array<int, 3>{int(c / (nc * nc)), int(c / nc % nc), int(c % nc)}; };
  std::vector<std::uint8_t> blocked(total, 0);
  std::vector<std::array<int, 3>> chosen;
  std::vector<std::uint32_t> rejected;
  for (std::uint32_t c : perm) {
    if (long(chosen.size()) >= count) break;
    if (blocked[c]) {
      rejected.push_back(c);
      continue;
    }
    const auto ci = unpack(c);
    chosen.push_back(ci);
    blocked[c] = 1;
    for (int axis = 0; axis < 3; ++axis)
      for (int d : {-1, 1}) {
        auto nb = ci;
        nb[axis] = (nb[axis] + d + nc) % nc;
        blocked[(std::size_t(nb[0]) * nc + nb[1]) * nc + nb[2]] = 1;
      }
  }
  for (std::size_t r = 0; long(chosen.size()) < count && r < rejected.size(); ++r) chosen.push_back(unpack(rejected[r]));
  return chosen;
}

}  // namespace detail

/// The shell-q component of the packet field, before amplitude scaling:
/// Gaussian-enveloped carriers (sigma = cell/2, |m| = 0.75 * 2^q) centred in
/// seeded cells of side L 2^-q with alternating checkerboard signs, then
/// band-filtered to shell q and made solenoidal.
inline SpectralVectorField packet_shell(const GridSpec& g, const PacketLaw& law, int q) {
  const int n = g.n;
  const int nc = 1 << q;
  require(nc <= n, ErrorKind::range, "packet shell finer than the grid");
  const int cell = n / nc;
  const CounterRng rng(law.seed, 0x7061636b00000000ull + std::uint64_t(q));
  const auto cells = detail::choose_packet_cells(nc, law.packets(q), rng);

  const Vec3 dir = normalized({1.0, 0.618, 0.382});
  const Vec3 pol = normalized(cross3(dir, {0.0, 0.0, 1.0}));
  const double kmag = 0.75 * double(nc);
  const double sigma = 0.5 * double(cell);  // in grid spacings

  RealScalarField psi(g), train(g);
  for (int i = 0; i < n; ++i) {
    const int di = (i + n / 2) % n - n / 2;
    for (int j = 0; j < n; ++j) {
      const int dj = (j + n / 2) % n - n / 2;
      for (int k = 0; k < n; ++k) {
        const int dk = (k + n / 2) % n - n / 2;
        const double r2 = double(di * di + dj * dj + dk * dk);
        const double phase = 2.0 * std::numbers::pi * kmag * (dir[0] * di + dir[1] * dj + dir[2] * dk) / n;
        psi.data[(std::size_t(i) * n + j) * n + k] = std::exp(-r2 / (2.0 * sigma * sigma)) * std::cos(phase);
      }
    }
  }
  for (const auto& c : cells) {
    const int x = c[0] * cell + cell / 2, y = c[1] * cell + cell / 2, z = c[2] * cell + cell / 2;
    train.data[(std::size_t(x) * n + y) * n + z] += ((c[0] + c[1] + c[2]) % 2 == 0) ? 1.0 : -1.0;
  }
  const auto psi_hat = forward(psi);
  const auto train_hat = forward(train);
  // Circular convolution: coefficients multiply, with one factor n^3 from the
  // normalization convention.
  const double conv = double(n) * n * n;
  const auto layout = SpectralLayout::get(n);
  SpectralVectorField s(g);
  for (std::size_t m = 0; m < s.modes(); ++m) {
    if (layout->shell[m] != q) continue;
    const complex c = conv * psi_hat.data[m] * train_hat.data[m];
    for (int a = 0; a < 3; ++a) s.at(m, a) = c * pol[a];
  }
  return leray(s);
}

inline PacketField intermittent_packets(const GridSpec& g, const PacketLaw& law) {
  g.validate();
  require(law.delta >= 0.0 && law.delta <= 3.0, ErrorKind::domain, "intermittent_packets: delta must lie in [0, 3]");
  require(law.q_lo >= 0 && law.q_lo <= law.q_hi, ErrorKind::domain, "intermittent_packets: empty shell range");
  check_shell_range(g, law.q_lo, law.q_hi);
  PacketField out;
  out.field = RealVectorField(g);
  out.few_shells = law.q_hi - law.q_lo + 1 < 3;
  for (int q = law.q_lo; q <= law.q_hi; ++q) {
    auto shell = inverse(packet_shell(g, law, q));
    const double peak = lp_norm(shell, std::numeric_limits<double>::infinity());
    require(peak > 0.0, ErrorKind::degenerate, "intermittent_packets: shell " + std::to_string(q) + " vanished");
    shell *= law.shell_amplitude(q) / peak;
    out.field += shell;
    out.packet_counts.push_back(law.packets(q));
  }
  return out;
}

}  // namespace lpturb
