#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lpturb/rng.hpp"
#include "lpturb/spectral.hpp"

namespace lpturb {

/// A set of named fields at one instant. Tags are "u" and "B"; "Z+" and "Z-"
/// are derived on request when both are present.
struct Snapshot {
  double t = 0.0;
  std::vector<std::pair<std::string, RealVectorField>> fields;

  const RealVectorField* find(const std::string& tag) const {
    for (const auto& [name, f] : fields)
      if (name == tag) return &f;
    return nullptr;
  }
  bool has(const std::string& tag) const { return find(tag) != nullptr; }

  RealVectorField get(const std::string& tag) const {
    if (const auto* f = find(tag)) return *f;
    if (tag == "Z+" || tag == "Z-") {
      const auto* u = find("u");
      const auto* b = find("B");
      require(u && b, ErrorKind::input, "Elsasser fields need both u and B in the snapshot");
      return tag == "Z+" ? *u + *b : *u - *b;
    }
    fail(ErrorKind::input, "snapshot has no field '" + tag + "'");
  }

  const GridSpec& grid() const {
    require(!fields.empty(), ErrorKind::input, "snapshot holds no fields");
    return fields.front().second.grid;
  }
};

inline const GridSpec& common_grid(const std::vector<Snapshot>& snaps) {
  require(!snaps.empty(), ErrorKind::input, "empty snapshot stream");
  const GridSpec& g = snaps.front().grid();
  for (const auto& s : snaps)
    for (const auto& [name, f] : s.fields) require(f.grid == g, ErrorKind::input, "snapshot grids are inconsistent");
  return g;
}

// ---------------------------------------------------------------------------
// Shell norms

struct ShellNorms {
  double l2 = 0.0;
  double linf = 0.0;
  double l3 = 0.0;
};

struct ShellNormSeries {
  std::string tag;
  GridSpec grid;
  int q_lo = 0;
  int q_hi = 0;
  std::vector<double> times;
  std::vector<std::vector<ShellNorms>> norms;  // [snapshot][q - q_lo]

  int shells() const { return q_hi - q_lo + 1; }
  const ShellNorms& at(std::size_t snap, int q) const { return norms[snap][q - q_lo]; }

  /// Snapshot average of a function of the shell norms.
  template <class F>
  double time_mean(int q, const F& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < norms.size(); ++i) s += f(at(i, q));
    return s / double(norms.size());
  }
};

inline std::vector<ShellNorms> shell_norms(const RealVectorField& v, int q_lo, int q_hi) {
  check_shell_range(v.grid, q_lo, q_hi);
  const auto s = forward(v);
  std::vector<ShellNorms> out;
  for (int q = q_lo; q <= q_hi; ++q) {
    const auto vq = inverse(shell_filter(s, q, q));
    out.push_back({lp_norm(vq, 2), lp_norm(vq, std::numeric_limits<double>::infinity()), lp_norm(vq, 3)});
  }
  return out;
}

inline ShellNormSeries shell_norm_series(const std::vector<Snapshot>& snaps, const std::string& tag, int q_lo,
                                         int q_hi) {
  const GridSpec& g = common_grid(snaps);
  check_shell_range(g, q_lo, q_hi);
  ShellNormSeries out;
  out.tag = tag;
  out.grid = g;
  out.q_lo = q_lo;
  out.q_hi = q_hi;
  for (const auto& s : snaps) {
    out.times.push_back(s.t);
    out.norms.push_back(shell_norms(s.get(tag), q_lo, q_hi));
  }
  return out;
}

inline ShellNormSeries shell_norm_series(const RealVectorField& v, const std::string& tag, int q_lo, int q_hi) {
  return shell_norm_series(std::vector<Snapshot>{Snapshot{0.0, {{tag, v}}}}, tag, q_lo, q_hi);
}

// ---------------------------------------------------------------------------
// Energy spectrum

struct SpectrumRow {
  int q = 0;
  double lambda = 0.0;
  double shell_energy = 0.0;  // e_q = 1/2 <|v_q|^2>
  double spectrum = 0.0;      // E(lambda_q) = <|v_q|^2> / lambda_q
};

struct SpectrumTable {
  std::string tag;
  GridSpec grid;
  std::vector<SpectrumRow> rows;
  double mean_energy = 0.0;     // 1/2 <|mean mode|^2>
  double nyquist_energy = 0.0;  // 1/2 <|Nyquist remainder|^2>
  double total_energy = 0.0;    // 1/2 <|v|^2>
  double t_begin = 0.0, t_end = 0.0;
  std::size_t snapshots = 0;
};

inline SpectrumTable energy_spectrum(const std::vector<Snapshot>& snaps, const std::string& tag) {
  const GridSpec& g = common_grid(snaps);
  SpectrumTable t;
  t.tag = tag;
  t.grid = g;
  t.snapshots = snaps.size();
  t.t_begin = snaps.front().t;
  t.t_end = snaps.back().t;
  const int top = g.top_shell();
  std::vector<double> acc(top + 1, 0.0);
  double mean = 0.0, nyq = 0.0, total = 0.0;
  for (const auto& s : snaps) {
    const auto e = shell_energies(forward(s.get(tag)));
    for (int q = 0; q <= top; ++q) acc[q] += e.shell[q];
    mean += e.mean;
    nyq += e.nyquist;
    total += e.total;
  }
  const double norm = 1.0 / (double(snaps.size()) * g.volume());
  for (int q = 0; q <= top; ++q) {
    const double avg = acc[q] * norm;
    const double lam = g.shell_wavenumber(q);
    t.rows.push_back({q, lam, 0.5 * avg, avg / lam});
  }
  t.mean_energy = 0.5 * mean * norm;
  t.nyquist_energy = 0.5 * nyq * norm;
  t.total_energy = 0.5 * total * norm;
  return t;
}

// ---------------------------------------------------------------------------
// Dissipation

struct DissipationSummary {
  double eps_u = 0.0;
  double eps_b = 0.0;
  double eps_bar_b = 0.0;
  double eps_under_b = 0.0;
};

/// nu <||grad u||^2>/|Omega| and mu <||grad B||^2>/|Omega|; absent fields give 0.
inline DissipationSummary dissipation_rates(const std::vector<Snapshot>& snaps, double nu, double mu) {
  require(nu >= 0.0 && mu >= 0.0, ErrorKind::domain, "dissipation_rates: coefficients must be nonnegative");
  const GridSpec& g = common_grid(snaps);
  DissipationSummary d;
  for (const auto& s : snaps) {
    if (const auto* u = s.find("u")) d.eps_u += gradient_norm_squared(forward(*u));
    if (const auto* b = s.find("B")) d.eps_b += gradient_norm_squared(forward(*b));
  }
  const double norm = 1.0 / (double(snaps.size()) * g.volume());
  d.eps_u *= nu * norm;
  d.eps_b *= mu * norm;
  return d;
}

// ---------------------------------------------------------------------------
// Hall energy flux across shell q

enum class FluxForm { full, triad };

struct FluxResult {
  int q = 0;
  double flux = 0.0;          // Pi_{b,q}
  double density_mean = 0.0;  // spatial mean of pi_{b,q}
  double density_mean_abs = 0.0;
  double density_max_abs = 0.0;
};

namespace detail {

inline FluxResult flux_from_density(int q, const RealVectorField& c, const RealVectorField& j_low, double d_i) {
  FluxResult r;
  r.q = q;
  const std::size_t np = c.points();
  std::vector<double> dens(np);
  for (std::size_t i = 0; i < np; ++i)
    dens[i] = d_i * (c.data[3 * i] * j_low.data[3 * i] + c.data[3 * i + 1] * j_low.data[3 * i + 1] +
                     c.data[3 * i + 2] * j_low.data[3 * i + 2]);
  const double sum = pairwise_sum(dens);
  const double sum_abs = pairwise_sum(np, [&](std::size_t i) { return std::abs(dens[i]); });
  for (double x : dens) r.density_max_abs = std::max(r.density_max_abs, std::abs(x));
  r.flux = sum * c.grid.cell_volume();
  r.density_mean = sum / double(np);
  r.density_mean_abs = sum_abs / double(np);
  return r;
}

}  // namespace detail

/// Full form: d_i int ((curl B_{>=q}) x B) . curl B_{<q}.
/// Triad form: only shell triples p1 >= q, p2 >= q-1, |p1-p2| < 2, p3 < q.
inline FluxResult magnetic_flux(const RealVectorField& B, int q, double d_i, FluxForm form) {
  const GridSpec& g = B.grid;
  require(q >= 0 && q <= g.top_shell(), ErrorKind::range, "magnetic_flux: shell " + std::to_string(q) + " out of range");
  const auto s = forward(B);
  const auto j_low = inverse(curl(lowpass(s, q)));
  if (form == FluxForm::full) {
    const auto j_high = inverse(curl(highpass(s, q)));
    return detail::flux_from_density(q, cross(j_high, B), j_low, d_i);
  }
  RealVectorField c(g);
  const int top = g.top_shell();
  for (int p1 = q; p1 <= top; ++p1) {
    const int lo = std::max({p1 - 1, q - 1, 0});
    const int hi = std::min(p1 + 1, top);
    const auto jp = inverse(curl(shell_filter(s, p1, p1)));
    const auto w = inverse(shell_filter(s, lo, hi));
    c += cross(jp, w);
  }
  return detail::flux_from_density(q, c, j_low, d_i);
}

// ---------------------------------------------------------------------------
// Extremal dissipation rates

struct ExtremeDissipation {
  double eps_bar = 0.0;    // max_q d_i lambda_q^2 <|B_q|^3>
  double eps_under = 0.0;  // min_q <|pi_{b,q}|>
  int q_bar = -1;
  int q_under = -1;
  std::vector<double> cubic;     // d_i lambda_q^2 <|B_q|^3>, indexed q - q_lo
  std::vector<double> mean_abs;  // <|pi_{b,q}|>, indexed q - q_lo
  int q_lo = 0, q_hi = 0;
};

inline ExtremeDissipation extreme_dissipation(const std::vector<Snapshot>& snaps, double d_i, int q_lo, int q_hi,
                                              FluxForm form = FluxForm::triad) {
  require(q_lo <= q_hi, ErrorKind::domain, "extreme_dissipation: empty shell range");
  const GridSpec& g = common_grid(snaps);
  check_shell_range(g, q_lo, q_hi);
  ExtremeDissipation out;
  out.q_lo = q_lo;
  out.q_hi = q_hi;
  const int ns = q_hi - q_lo + 1;
  out.cubic.assign(ns, 0.0);
  out.mean_abs.assign(ns, 0.0);
  for (const auto& snap : snaps) {
    const auto B = snap.get("B");
    const auto s = forward(B);
    for (int q = q_lo; q <= q_hi; ++q) {
      const auto bq = inverse(shell_filter(s, q, q));
      out.cubic[q - q_lo] += mean_abs_pow(bq, 3.0);
      out.mean_abs[q - q_lo] += magnetic_flux(B, q, d_i, form).density_mean_abs;
    }
  }
  const double inv = 1.0 / double(snaps.size());
  for (int i = 0; i < ns; ++i) {
    const double lam = g.shell_wavenumber(q_lo + i);
    out.cubic[i] *= d_i * lam * lam * inv;
    out.mean_abs[i] *= inv;
    if (out.q_bar < 0 || out.cubic[i] > out.eps_bar) {
      out.eps_bar = out.cubic[i];
      out.q_bar = q_lo + i;
    }
    if (out.q_under < 0 || out.mean_abs[i] < out.eps_under) {
      out.eps_under = out.mean_abs[i];
      out.q_under = q_lo + i;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structure functions

enum class Direction3 { axis0, axis1, axis2, isotropic };

struct StructureSampling {
  bool exhaustive = true;
  std::uint64_t samples = 0;  // Monte Carlo sample count per (snapshot, ell)
  std::uint64_t seed = 0;
  Direction3 direction = Direction3::isotropic;
};

struct StructureRow {
  double ell = 0.0;
  double p = 0.0;
  double value = 0.0;
};

struct StructureFunctionTable {
  std::string tag;
  GridSpec grid;
  StructureSampling sampling;
  std::vector<StructureRow> rows;  // ell-major, then p in input order

  double value(double ell, double p) const {
    for (const auto& r : rows)
      if (r.ell == ell && r.p == p) return r.value;
    fail(ErrorKind::input, "structure function row not found");
  }
};

inline StructureFunctionTable structure_function(const std::vector<Snapshot>& snaps, const std::string& tag,
                                                 const std::vector<double>& p_list, const std::vector<double>& ell_list,
                                                 const StructureSampling& sampling) {
  const GridSpec& g = common_grid(snaps);
  for (double p : p_list) require(p >= 0.0, ErrorKind::domain, "structure_function: p must be nonnegative");
  require(sampling.exhaustive || sampling.samples > 0, ErrorKind::configuration,
          "structure_function: Monte Carlo sampling needs a positive sample count");
  StructureFunctionTable t;
  t.tag = tag;
  t.grid = g;
  t.sampling = sampling;
  const int n = g.n;
  std::vector<int> shifts;
  for (double ell : ell_list) {
    const double cells = ell / g.dx();
    const double rounded = std::round(cells);
    const bool ok = std::abs(cells - rounded) <= 1e-9 * std::max(1.0, std::abs(cells));
    if (sampling.exhaustive)
      require(ok, ErrorKind::domain, "structure_function: ell = " + std::to_string(ell) + " is not a multiple of the grid spacing");
    // Monte Carlo mode snaps a non-commensurate ell to the nearest grid displacement.
    shifts.push_back(int(((long(rounded) % n) + n) % n));
  }
  std::vector<int> axes;
  switch (sampling.direction) {
    case Direction3::axis0: axes = {0}; break;
    case Direction3::axis1: axes = {1}; break;
    case Direction3::axis2: axes = {2}; break;
    case Direction3::isotropic: axes = {0, 1, 2}; break;
  }
  std::vector<std::vector<double>> acc(ell_list.size(), std::vector<double>(p_list.size(), 0.0));
  for (std::size_t si = 0; si < snaps.size(); ++si) {
    const auto v = snaps[si].get(tag);
    auto inc2 = [&](std::size_t point, int axis, int shift) {
      int idx[3] = {int(point / (std::size_t(n) * n)), int(point / n % n), int(point % n)};
      idx[axis] = (idx[axis] + shift) % n;
      const std::size_t other = (std::size_t(idx[0]) * n + idx[1]) * n + idx[2];
      double s = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = v.data[3 * other + c] - v.data[3 * point + c];
        s += d * d;
      }
      return s;
    };
    for (std::size_t li = 0; li < ell_list.size(); ++li) {
      for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
        const double half_p = 0.5 * p_list[pi];
        double val = 0.0;
        if (sampling.exhaustive) {
          for (int axis : axes)
            val += pairwise_sum(v.points(), [&](std::size_t x) { return std::pow(inc2(x, axis, shifts[li]), half_p); }) /
                   double(v.points());
          val /= double(axes.size());
        } else {
          const CounterRng rng(sampling.seed, (std::uint64_t(si) << 32) | li);
          val = pairwise_sum(sampling.samples, [&](std::size_t k) {
                  const std::size_t x = rng.below(2 * k, v.points());
                  const int axis = axes[rng.below(2 * k + 1, axes.size())];
                  return std::pow(inc2(x, axis, shifts[li]), half_p);
                }) /
                double(sampling.samples);
        }
        acc[li][pi] += val;
      }
    }
  }
  for (std::size_t li = 0; li < ell_list.size(); ++li)
    for (std::size_t pi = 0; pi < p_list.size(); ++pi)
      t.rows.push_back({ell_list[li], p_list[pi], acc[li][pi] / double(snaps.size())});
  return t;
}

}  // namespace lpturb
