#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lpturb/diagnostics.hpp"
#include "lpturb/field_gen.hpp"

namespace lpturb {

enum class EstimateMethod { sup_form, shell_fit };

inline const char* to_string(EstimateMethod m) { return m == EstimateMethod::sup_form ? "sup_form" : "shell_fit"; }

struct IntermittencyEstimate {
  EstimateMethod method = EstimateMethod::shell_fit;
  double delta = 0.0;
  std::vector<int> shells;
  // shell_fit diagnostics
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  double slope_stderr = 0.0;
  double raw_delta = 0.0;
  bool clamped = false;
  // sup_form diagnostics
  double C = 0.0;
  std::string C_policy;
  bool saturated_low = false;
  bool saturated_high = false;
  bool empty_field = false;
};

/// L^3 ||B||_inf^2 / ||B||_2^2 for the Beltrami mode m = (1,0,0) on this grid:
/// the constant that makes the defining inequality an equality at s = 3 for a
/// space-filling field.
inline double reference_constant(const GridSpec& g) {
  const auto b = single_mode(g, {1, 0, 0}, 1.0, ModeKind::beltrami);
  const double linf = lp_norm(b, std::numeric_limits<double>::infinity());
  const double l2 = lp_norm(b, 2);
  return g.volume() * linf * linf / (l2 * l2);
}

namespace detail {

struct ShellMeans {
  std::vector<int> q;
  std::vector<double> linf2;  // <||u_q||_inf^2>
  std::vector<double> l22;    // <||u_q||_2^2>
};

inline ShellMeans shell_means(const ShellNormSeries& s, int q_lo, int q_hi) {
  require(!s.norms.empty(), ErrorKind::input, "empty shell norm series");
  require(q_lo <= q_hi && q_lo >= s.q_lo && q_hi <= s.q_hi, ErrorKind::range,
          "requested shells are not covered by the norm series");
  ShellMeans m;
  for (int q = q_lo; q <= q_hi; ++q) {
    m.q.push_back(q);
    m.linf2.push_back(s.time_mean(q, [](const ShellNorms& x) { return x.linf * x.linf; }));
    m.l22.push_back(s.time_mean(q, [](const ShellNorms& x) { return x.l2 * x.l2; }));
  }
  return m;
}

}  // namespace detail

/// Largest s in [0,3] with
///   <sum_q lambda_q^(s-1) ||u_q||_inf^2> <= C L^(-s) <sum_q lambda_q^2 ||u_q||_2^2>.
/// C <= 0 selects the ratio-normalized reference constant for the grid.
inline IntermittencyEstimate estimate_delta_sup(const ShellNormSeries& series, double C, int q_lo, int q_hi) {
  const auto m = detail::shell_means(series, q_lo, q_hi);
  IntermittencyEstimate est;
  est.method = EstimateMethod::sup_form;
  est.shells = m.q;
  if (C > 0.0) {
    est.C = C;
    est.C_policy = "user";
  } else {
    est.C = reference_constant(series.grid);
    est.C_policy = "ratio-normalized";
  }
  const double L = series.grid.L;
  double rhs_sum = 0.0, lhs_any = 0.0;
  for (std::size_t i = 0; i < m.q.size(); ++i) {
    const double lam = series.grid.shell_wavenumber(m.q[i]);
    rhs_sum += lam * lam * m.l22[i];
    lhs_any += m.linf2[i];
  }
  if (rhs_sum == 0.0 && lhs_any == 0.0) {
    est.delta = 3.0;
    est.saturated_high = true;
    est.empty_field = true;
    return est;
  }
  auto g = [&](double s) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < m.q.size(); ++i)
      lhs += std::pow(series.grid.shell_wavenumber(m.q[i]), s - 1.0) * m.linf2[i];
    return lhs - est.C * std::pow(L, -s) * rhs_sum;
  };
  constexpr int scan = 64;
  std::vector<double> gs(scan);
  for (int i = 0; i < scan; ++i) gs[i] = g(3.0 * i / (scan - 1));
  if (gs[scan - 1] <= 0.0) {
    est.delta = 3.0;
    est.saturated_high = true;
    return est;
  }
  int last = -1;
  for (int i = scan - 2; i >= 0; --i)
    if (gs[i] <= 0.0) {
      last = i;
      break;
    }
  if (last < 0) {
    est.delta = 0.0;
    est.saturated_low = true;
    return est;
  }
  double a = 3.0 * last / (scan - 1), b = 3.0 * (last + 1) / (scan - 1);
  while (b - a > 1e-6) {
    const double mid = 0.5 * (a + b);
    if (g(mid) <= 0.0)
      a = mid;
    else
      b = mid;
  }
  est.delta = a;
  return est;
}

/// Least-squares slope sigma of log sqrt(<||u_q||_inf^2>/<||u_q||_2^2>) against
/// log lambda_q, mapped to delta = 3 - 2 sigma.
inline IntermittencyEstimate estimate_delta_fit(const ShellNormSeries& series, int q_lo, int q_hi) {
  const auto m = detail::shell_means(series, q_lo, q_hi);
  std::vector<int> usable;
  for (std::size_t i = 0; i < m.q.size(); ++i)
    if (m.linf2[i] > 0.0 && m.l22[i] > 0.0) usable.push_back(m.q[i]);
  if (usable.size() != m.q.size() || usable.size() < 3) {
    std::string list;
    for (int q : usable) list += (list.empty() ? "" : ",") + std::to_string(q);
    fail(ErrorKind::fit, "shell fit needs at least 3 shells, all with nonzero norms; usable shells: [" + list + "]");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < m.q.size(); ++i) {
    x.push_back(std::log(series.grid.shell_wavenumber(m.q[i])));
    y.push_back(0.5 * std::log(m.linf2[i] / m.l22[i]));
  }
  const auto fit = least_squares(x, y);
  IntermittencyEstimate est;
  est.method = EstimateMethod::shell_fit;
  est.shells = m.q;
  est.slope = fit.slope;
  est.intercept = fit.intercept;
  est.residual = fit.residual;
  est.slope_stderr = fit.slope_stderr;
  est.raw_delta = 3.0 - 2.0 * fit.slope;
  est.delta = std::clamp(est.raw_delta, 0.0, 3.0);
  est.clamped = est.delta != est.raw_delta;
  return est;
}

struct BernsteinRow {
  std::size_t snapshot = 0;
  int q = 0;
  std::int64_t modes = 0;
  double lower_ratio = 0.0;  // ||u_q||_inf / (L^{-3/2} ||u_q||_2), must be >= 1
  double upper_ratio = 0.0;  // ||u_q||_inf / (sqrt(M_q) L^{-3/2} ||u_q||_2), must be <= 1
  bool holds = true;
};

struct BernsteinReport {
  std::vector<BernsteinRow> rows;
  bool all_hold = true;
};

/// Discrete two-sided Bernstein inequality per shell and snapshot:
///   L^{-3/2} ||u_q||_2 <= ||u_q||_inf <= sqrt(M_q) L^{-3/2} ||u_q||_2.
inline BernsteinReport bernstein_check(const ShellNormSeries& series) {
  const GridSpec& g = series.grid;
  const auto layout = SpectralLayout::get(g.n);
  const double slack = 1e-12;
  BernsteinReport rep;
  for (std::size_t s = 0; s < series.norms.size(); ++s)
    for (int q = series.q_lo; q <= series.q_hi; ++q) {
      const auto& nq = series.at(s, q);
      BernsteinRow row;
      row.snapshot = s;
      row.q = q;
      row.modes = q < int(layout->shell_mode_count.size()) ? layout->shell_mode_count[q] : 0;
      const double base = nq.l2 / std::pow(g.L, 1.5);
      if (base > 0.0) {
        row.lower_ratio = nq.linf / base;
        row.upper_ratio = nq.linf / (std::sqrt(double(row.modes)) * base);
        row.holds = row.lower_ratio >= 1.0 - slack && row.upper_ratio <= 1.0 + slack;
      } else {
        row.holds = nq.linf == 0.0;
      }
      rep.all_hold = rep.all_hold && row.holds;
      rep.rows.push_back(row);
    }
  return rep;
}

/// Z+ = u + B, Z- = u - B.
inline std::pair<RealVectorField, RealVectorField> elsasser(const RealVectorField& u, const RealVectorField& B) {
  require_same_grid(u.grid, B.grid, "elsasser");
  return {u + B, u - B};
}

}  // namespace lpturb
