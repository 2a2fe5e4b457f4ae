#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lpturb/diagnostics.hpp"

namespace lpturb {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline std::string to_string(const Rational& r) { return r.str(); }

/// Parses "3", "-2.5", "7/3" or "1.25e-2" exactly.
inline Rational parse_rational(const std::string& text) {
  auto bad = [&] { fail(ErrorKind::configuration, "cannot parse '" + text + "' as an exact number"); };
  if (text.empty()) bad();
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const Rational num = parse_rational(text.substr(0, slash));
    const Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) fail(ErrorKind::configuration, "zero denominator in '" + text + "'");
    return num / den;
  }
  std::size_t i = 0;
  bool neg = false;
  if (text[i] == '+' || text[i] == '-') neg = text[i++] == '-';
  BigInt digits = 0;
  int scale = 0;
  bool any = false, dot = false;
  for (; i < text.size() && text[i] != 'e' && text[i] != 'E'; ++i) {
    const char c = text[i];
    if (c == '.' && !dot) {
      dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      any = true;
      if (dot) --scale;
    } else {
      bad();
    }
  }
  if (!any) bad();
  if (i < text.size()) {
    const std::string e = text.substr(i + 1);
    if (e.empty()) bad();
    std::size_t used = 0;
    int ev = 0;
    try {
      ev = std::stoi(e, &used);
    } catch (const std::exception&) {
      bad();
    }
    if (used != e.size()) bad();
    scale += ev;
  }
  Rational r(digits);
  const BigInt ten = boost::multiprecision::pow(BigInt(10), unsigned(std::abs(scale)));
  r = scale >= 0 ? r * Rational(ten) : r / Rational(ten);
  return neg ? -r : r;
}

/// Exact value of a double (binary fractions are exact rationals).
inline Rational exact(double x) {
  require(std::isfinite(x), ErrorKind::domain, "non-finite value");
  return Rational(x);
}

// ---------------------------------------------------------------------------
// Structure-function exponents

enum class StructureFamily { MAGNETIC, VELOCITY_OR_ELSASSER };

inline void check_delta(const Rational& delta, const Rational& lo, const Rational& hi, const char* name) {
  require(delta >= lo && delta <= hi, ErrorKind::domain,
          std::string(name) + " = " + delta.str() + " outside [" + lo.str() + ", " + hi.str() + "]");
}

/// zeta_b(p,d) = 2p/3 + (3-d)(1-p/3); zeta_v(p,d) = p/3 + (3-d)(1-p/3).
inline Rational structure_exponent(const Rational& p, const Rational& delta, StructureFamily family) {
  require(p >= 0, ErrorKind::domain, "structure order p must be nonnegative");
  check_delta(delta, 0, 3, "delta");
  const Rational lead = family == StructureFamily::MAGNETIC ? Rational(2, 3) * p : p / 3;
  return lead + (3 - delta) * (1 - p / 3);
}

/// (d_i^-1 eps)^(p/3) for the magnetic family, eps^(p/3) otherwise.
inline double structure_prefactor(double p, StructureFamily family, double eps, double d_i) {
  require(eps >= 0.0, ErrorKind::domain, "dissipation rate must be nonnegative");
  if (family == StructureFamily::MAGNETIC) {
    require(d_i > 0.0, ErrorKind::configuration, "magnetic structure prefactor needs d_i > 0");
    return std::pow(eps / d_i, p / 3.0);
  }
  return std::pow(eps, p / 3.0);
}

// ---------------------------------------------------------------------------
// Spectra

enum class SpectrumRegime {
  EMHD_SUB_ION,
  HALL_KINETIC,
  HALL_ION_INERTIAL,
  HALL_SUB_ION,
  ELSASSER_PLUS,
  ELSASSER_MINUS,
  PERP_PLUS,
  PERP_MINUS,
  PERP_CRITICAL_BALANCE,
  PERP_ALIGNMENT,
};

inline const char* to_string(SpectrumRegime r) {
  switch (r) {
    case SpectrumRegime::EMHD_SUB_ION: return "emhd-sub-ion";
    case SpectrumRegime::HALL_KINETIC: return "hall-kinetic";
    case SpectrumRegime::HALL_ION_INERTIAL: return "hall-ion-inertial";
    case SpectrumRegime::HALL_SUB_ION: return "hall-sub-ion";
    case SpectrumRegime::ELSASSER_PLUS: return "elsasser-plus";
    case SpectrumRegime::ELSASSER_MINUS: return "elsasser-minus";
    case SpectrumRegime::PERP_PLUS: return "perp-plus";
    case SpectrumRegime::PERP_MINUS: return "perp-minus";
    case SpectrumRegime::PERP_CRITICAL_BALANCE: return "perp-critical-balance";
    case SpectrumRegime::PERP_ALIGNMENT: return "perp-alignment";
  }
  return "unknown";
}

inline SpectrumRegime parse_regime(const std::string& s) {
  for (int i = 0; i <= int(SpectrumRegime::PERP_ALIGNMENT); ++i)
    if (s == to_string(SpectrumRegime(i))) return SpectrumRegime(i);
  fail(ErrorKind::configuration, "unknown spectrum regime '" + s + "'");
}

/// Inputs to the scaling laws. Only the entries a regime uses must be set.
struct ScalingInputs {
  std::optional<Rational> delta_b, delta_u, delta_plus, delta_minus, delta_perp_plus, delta_perp_minus;
  std::optional<double> eps_b, eps_u, eps_plus, eps_minus, eps_perp_plus, eps_perp_minus, eps_perp;
  std::optional<double> nu, mu, d_i, v_A;
};

struct SpectrumPrediction {
  SpectrumRegime regime{};
  double prefactor = 0.0;
  Rational exponent;
  double k = 0.0;
  double value = 0.0;
};

namespace detail {

template <class T>
const T& need(const std::optional<T>& v, const char* name, const char* context) {
  require(v.has_value(), ErrorKind::configuration, std::string(context) + " requires parameter " + name);
  return *v;
}

inline double positive(const std::optional<double>& v, const char* name, const char* context) {
  const double x = need(v, name, context);
  require(x > 0.0 && std::isfinite(x), ErrorKind::domain, std::string(context) + ": " + name + " must be positive");
  return x;
}

inline Rational delta_in(const std::optional<Rational>& v, const char* name, const char* context, int hi) {
  const Rational d = need(v, name, context);
  check_delta(d, 0, hi, name);
  return d;
}

}  // namespace detail

/// Exponent and prefactor of the conjectured spectrum for a regime (unit
/// constants). Hall regimes assume delta_u <= delta_b.
inline SpectrumPrediction predict_spectrum(SpectrumRegime regime, const ScalingInputs& in, double k = 1.0) {
  using detail::delta_in;
  using detail::positive;
  const char* ctx = to_string(regime);
  SpectrumPrediction out;
  out.regime = regime;
  out.k = k;
  switch (regime) {
    case SpectrumRegime::EMHD_SUB_ION:
    case SpectrumRegime::HALL_SUB_ION: {
      const Rational db = delta_in(in.delta_b, "delta_b", ctx, 3);
      if (regime == SpectrumRegime::HALL_SUB_ION) {
        const Rational du = delta_in(in.delta_u, "delta_u", ctx, 3);
        require(du <= db, ErrorKind::domain, "Hall regimes assume delta_u <= delta_b");
      }
      out.exponent = (db - 10) / 3;
      out.prefactor = std::pow(positive(in.eps_b, "eps_b", ctx) / positive(in.d_i, "d_i", ctx), 2.0 / 3.0);
      break;
    }
    case SpectrumRegime::HALL_KINETIC: {
      const Rational du = delta_in(in.delta_u, "delta_u", ctx, 3);
      const Rational db = delta_in(in.delta_b, "delta_b", ctx, 3);
      require(du <= db, ErrorKind::domain, "Hall regimes assume delta_u <= delta_b");
      out.exponent = (du - 8) / 3;
      out.prefactor = std::pow(positive(in.eps_u, "eps_u", ctx), 2.0 / 3.0);
      break;
    }
    case SpectrumRegime::HALL_ION_INERTIAL: {
      const Rational du = delta_in(in.delta_u, "delta_u", ctx, 3);
      const Rational db = delta_in(in.delta_b, "delta_b", ctx, 3);
      require(du <= db, ErrorKind::domain, "Hall regimes assume delta_u <= delta_b");
      out.exponent = (du + 3 * db) / 12 - Rational(8, 3);
      out.prefactor = std::pow(positive(in.eps_b, "eps_b", ctx), 0.5) * std::pow(positive(in.eps_u, "eps_u", ctx), 1.0 / 6.0);
      break;
    }
    case SpectrumRegime::ELSASSER_PLUS:
    case SpectrumRegime::ELSASSER_MINUS: {
      const Rational dp = delta_in(in.delta_plus, "delta_plus", ctx, 3);
      const Rational dm = delta_in(in.delta_minus, "delta_minus", ctx, 3);
      const double ep = positive(in.eps_plus, "eps_plus", ctx);
      const double em = positive(in.eps_minus, "eps_minus", ctx);
      const bool plus = regime == SpectrumRegime::ELSASSER_PLUS;
      out.exponent = plus ? (2 * dm - dp - 8) / 3 : (2 * dp - dm - 8) / 3;
      out.prefactor = plus ? std::pow(ep * ep / em, 2.0 / 3.0) : std::pow(em * em / ep, 2.0 / 3.0);
      break;
    }
    case SpectrumRegime::PERP_PLUS:
    case SpectrumRegime::PERP_MINUS: {
      const Rational dp = delta_in(in.delta_perp_plus, "delta_perp_plus", ctx, 2);
      const Rational dm = delta_in(in.delta_perp_minus, "delta_perp_minus", ctx, 2);
      const double ep = positive(in.eps_perp_plus, "eps_perp_plus", ctx);
      const double em = positive(in.eps_perp_minus, "eps_perp_minus", ctx);
      const bool plus = regime == SpectrumRegime::PERP_PLUS;
      out.exponent = plus ? (2 * dm - dp - 7) / 3 : (2 * dp - dm - 7) / 3;
      out.prefactor = plus ? std::pow(ep * ep / em, 2.0 / 3.0) : std::pow(em * em / ep, 2.0 / 3.0);
      break;
    }
    case SpectrumRegime::PERP_CRITICAL_BALANCE:
      out.exponent = Rational(-5, 3);
      out.prefactor = std::pow(positive(in.eps_perp, "eps_perp", ctx), 2.0 / 3.0);
      break;
    case SpectrumRegime::PERP_ALIGNMENT:
      out.exponent = Rational(-3, 2);
      out.prefactor = std::sqrt(positive(in.eps_perp, "eps_perp", ctx) * positive(in.v_A, "v_A", ctx));
      break;
  }
  require(k > 0.0, ErrorKind::domain, "wavenumber must be positive");
  out.value = out.prefactor * std::pow(k, to_double(out.exponent));
  return out;
}

// ---------------------------------------------------------------------------
// Transition wavenumbers

enum class TransitionKind {
  EMHD_DISSIPATION,
  HALL_KINETIC_DISSIPATION,
  HALL_ION,
  HALL_MAGNETIC_DISSIPATION,
  ELSASSER_PLUS,
  ELSASSER_MINUS,
  PERP_PLUS,
  PERP_MINUS,
};

inline const char* to_string(TransitionKind t) {
  switch (t) {
    case TransitionKind::EMHD_DISSIPATION: return "emhd-dissipation";
    case TransitionKind::HALL_KINETIC_DISSIPATION: return "hall-kinetic-dissipation";
    case TransitionKind::HALL_ION: return "hall-ion";
    case TransitionKind::HALL_MAGNETIC_DISSIPATION: return "hall-magnetic-dissipation";
    case TransitionKind::ELSASSER_PLUS: return "elsasser-plus";
    case TransitionKind::ELSASSER_MINUS: return "elsasser-minus";
    case TransitionKind::PERP_PLUS: return "perp-plus";
    case TransitionKind::PERP_MINUS: return "perp-minus";
  }
  return "unknown";
}

inline TransitionKind parse_transition(const std::string& s) {
  for (int i = 0; i <= int(TransitionKind::PERP_MINUS); ++i)
    if (s == to_string(TransitionKind(i))) return TransitionKind(i);
  fail(ErrorKind::configuration, "unknown transition kind '" + s + "'");
}

struct TransitionPrediction {
  TransitionKind kind{};
  double base = 0.0;
  Rational exponent;  // wavenumber = base^exponent
  double value = 0.0;
};

inline TransitionPrediction predict_transition(TransitionKind kind, const ScalingInputs& in) {
  using detail::delta_in;
  using detail::positive;
  const char* ctx = to_string(kind);
  TransitionPrediction out;
  out.kind = kind;
  switch (kind) {
    case TransitionKind::EMHD_DISSIPATION: {
      const Rational db = delta_in(in.delta_b, "delta_b", ctx, 3);
      if (db == 1) fail(ErrorKind::singular, "emhd-dissipation exponent 1/(delta_b - 1) is singular at delta_b = 1");
      require(db > 1, ErrorKind::domain, "emhd-dissipation requires delta_b > 1");
      const double mu = positive(in.mu, "mu", ctx), di = positive(in.d_i, "d_i", ctx);
      out.base = di * di * positive(in.eps_b, "eps_b", ctx) / (mu * mu * mu);
      out.exponent = 1 / (db - 1);
      break;
    }
    case TransitionKind::HALL_KINETIC_DISSIPATION: {
      const Rational du = delta_in(in.delta_u, "delta_u", ctx, 3);
      const double nu = positive(in.nu, "nu", ctx);
      out.base = positive(in.eps_u, "eps_u", ctx) / (nu * nu * nu);
      out.exponent = 1 / (du + 1);
      break;
    }
    case TransitionKind::HALL_ION:
      out.base = positive(in.d_i, "d_i", ctx);
      out.exponent = -1;
      break;
    case TransitionKind::HALL_MAGNETIC_DISSIPATION: {
      const Rational du = delta_in(in.delta_u, "delta_u", ctx, 3);
      const Rational db = delta_in(in.delta_b, "delta_b", ctx, 3);
      const double mu = positive(in.mu, "mu", ctx);
      out.base = std::pow(positive(in.eps_u, "eps_u", ctx), -0.5) * std::pow(positive(in.eps_b, "eps_b", ctx), 1.5) /
                 (mu * mu * mu);
      out.exponent = 1 / ((3 * db + du) / 4 + 1);
      break;
    }
    case TransitionKind::ELSASSER_PLUS:
    case TransitionKind::ELSASSER_MINUS:
    case TransitionKind::PERP_PLUS:
    case TransitionKind::PERP_MINUS: {
      const double nu = detail::need(in.nu, "nu", ctx), mu = detail::need(in.mu, "mu", ctx);
      require(nu >= 0.0 && mu >= 0.0, ErrorKind::domain, std::string(ctx) + ": nu and mu must be nonnegative");
      if (nu == mu) fail(ErrorKind::singular, std::string(ctx) + " is singular for nu = mu");
      require(nu > mu, ErrorKind::domain, std::string(ctx) + " requires eta_minus = (nu - mu)/2 > 0");
      const bool plus = kind == TransitionKind::ELSASSER_PLUS || kind == TransitionKind::PERP_PLUS;
      const bool perp = kind == TransitionKind::PERP_PLUS || kind == TransitionKind::PERP_MINUS;
      const double denom = plus ? (nu + mu) * (nu - mu) * (nu - mu) : (nu - mu) * (nu + mu) * (nu + mu);
      Rational d;
      double eps = 0.0;
      if (perp) {
        d = plus ? delta_in(in.delta_perp_plus, "delta_perp_plus", ctx, 2)
                 : delta_in(in.delta_perp_minus, "delta_perp_minus", ctx, 2);
        eps = plus ? positive(in.eps_perp_plus, "eps_perp_plus", ctx) : positive(in.eps_perp_minus, "eps_perp_minus", ctx);
      } else {
        d = plus ? delta_in(in.delta_plus, "delta_plus", ctx, 3) : delta_in(in.delta_minus, "delta_minus", ctx, 3);
        eps = plus ? positive(in.eps_plus, "eps_plus", ctx) : positive(in.eps_minus, "eps_minus", ctx);
      }
      out.base = eps / denom;
      out.exponent = 1 / ((perp ? 2 : 1) + d);
      break;
    }
  }
  out.value = std::pow(out.base, to_double(out.exponent));
  return out;
}

// ---------------------------------------------------------------------------
// Shell amplitudes

enum class AmplitudeModel { EMHD, HALL };

struct ShellAmplitude {
  double b = 0.0;                // predicted ||B_q||_{L^2}
  std::optional<double> u;       // predicted ||u_q||_{L^2} (Hall only)
};

/// EMHD: ||B_q|| ~ mu d_i^-1 lambda_q^((delta_b-3)/2).
/// Hall: ||u_q|| ~ nu lambda_q^((delta_u-1)/2), ||B_q||^2 ~ nu lambda_q^((delta_u-1)/2) ||u_q||.
inline ShellAmplitude predict_shell_amplitude(AmplitudeModel model, const ScalingInputs& in, double L, int q) {
  require(L > 0.0, ErrorKind::domain, "L must be positive");
  require(q >= 0, ErrorKind::range, "shell index must be nonnegative");
  const double lam = std::ldexp(1.0, q) / L;
  ShellAmplitude out;
  if (model == AmplitudeModel::EMHD) {
    const Rational db = detail::delta_in(in.delta_b, "delta_b", "emhd amplitude", 3);
    out.b = detail::positive(in.mu, "mu", "emhd amplitude") / detail::positive(in.d_i, "d_i", "emhd amplitude") *
            std::pow(lam, to_double((db - 3) / 2));
  } else {
    const Rational du = detail::delta_in(in.delta_u, "delta_u", "hall amplitude", 3);
    const double nu = detail::positive(in.nu, "nu", "hall amplitude");
    const double f = nu * std::pow(lam, to_double((du - 1) / 2));
    out.u = f;
    out.b = std::sqrt(f * *out.u);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Power-law fits

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double residual = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

inline PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), ErrorKind::input, "fit_power_law: size mismatch");
  require(x.size() >= 3, ErrorKind::fit, "fit_power_law: need at least 3 points, got " + std::to_string(x.size()));
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i]), ErrorKind::fit,
            "fit_power_law: nonpositive value at point " + std::to_string(i));
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const auto f = least_squares(lx, ly);
  return {f.slope, std::exp(f.intercept), f.residual, f.slope_stderr, f.points};
}

inline PowerLawFit fit_power_law(const SpectrumTable& t, int q_lo, int q_hi) {
  std::vector<double> x, y;
  for (const auto& r : t.rows)
    if (r.q >= q_lo && r.q <= q_hi) {
      x.push_back(r.lambda);
      y.push_back(r.spectrum);
    }
  return fit_power_law(x, y);
}

inline PowerLawFit fit_power_law(const StructureFunctionTable& t, double p, double ell_lo, double ell_hi) {
  std::vector<double> x, y;
  for (const auto& r : t.rows)
    if (r.p == p && r.ell >= ell_lo && r.ell <= ell_hi) {
      x.push_back(r.ell);
      y.push_back(r.value);
    }
  return fit_power_law(x, y);
}

// ---------------------------------------------------------------------------
// Bound checkers (thresholds are artifact contracts, not derived constants)

struct SpectrumBoundReport {
  std::vector<int> shells;
  std::vector<double> c_up;         // per shell in range
  std::vector<double> lower_ratio;  // per shell in range
  double max_c_up = 0.0;
  double min_lower_ratio = std::numeric_limits<double>::infinity();
  double c_max = 100.0, c_min = 0.01;
  bool upper_pass = false, lower_pass = false;
  bool pass() const { return upper_pass && lower_pass; }
};

/// Upper: C_up(q) = E(lambda_q) / [(eps_bar/d_i)^(2/3) lambda_q^(-7/3) (L lambda_q)^(delta/3 - 1)].
/// Lower: sum_p K_{q-p}^(2/3) lambda_p^((10-delta)/3) E(lambda_p) / (eps_under/d_i)^(2/3),
/// K_j = lambda_|j|^(-1/3), summed over every shell of the table.
inline SpectrumBoundReport check_spectrum_bounds(const SpectrumTable& spec, double eps_bar, double eps_under,
                                                 double delta_b, double d_i, double L, int q_lo, int q_hi,
                                                 double c_max = 100.0, double c_min = 0.01) {
  require(delta_b >= 0.0 && delta_b <= 3.0, ErrorKind::domain, "delta_b must lie in [0, 3]");
  require(d_i > 0.0 && L > 0.0, ErrorKind::configuration, "d_i and L must be positive");
  require(q_lo <= q_hi, ErrorKind::domain, "empty shell range");
  require(eps_bar >= 0.0 && eps_under >= 0.0, ErrorKind::domain, "dissipation rates must be nonnegative");
  bool nonzero = false;
  for (const auto& r : spec.rows) nonzero = nonzero || r.spectrum > 0.0;
  if (eps_bar == 0.0 && nonzero) fail(ErrorKind::degenerate, "eps_bar = 0 with a nonzero spectrum");
  SpectrumBoundReport rep;
  rep.c_max = c_max;
  rep.c_min = c_min;
  auto lambda = [L](int q) { return std::ldexp(1.0, q) / L; };
  const double up_scale = std::pow(eps_bar / d_i, 2.0 / 3.0);
  const double low_scale = std::pow(eps_under / d_i, 2.0 / 3.0);
  for (int q = q_lo; q <= q_hi; ++q) {
    const SpectrumRow* row = nullptr;
    for (const auto& r : spec.rows)
      if (r.q == q) row = &r;
    require(row != nullptr, ErrorKind::range, "shell " + std::to_string(q) + " missing from spectrum");
    const double lam = lambda(q);
    const double bound = up_scale * std::pow(lam, -7.0 / 3.0) * std::pow(L * lam, delta_b / 3.0 - 1.0);
    const double cu = bound > 0.0 ? row->spectrum / bound : 0.0;
    double sum = 0.0;
    for (const auto& r : spec.rows) {
      const double K = std::pow(lambda(std::abs(q - r.q)), -1.0 / 3.0);
      sum += std::pow(K, 2.0 / 3.0) * std::pow(r.lambda, (10.0 - delta_b) / 3.0) * r.spectrum;
    }
    const double lr = low_scale > 0.0 ? sum / low_scale : std::numeric_limits<double>::infinity();
    rep.shells.push_back(q);
    rep.c_up.push_back(cu);
    rep.lower_ratio.push_back(lr);
    rep.max_c_up = std::max(rep.max_c_up, cu);
    rep.min_lower_ratio = std::min(rep.min_lower_ratio, lr);
  }
  rep.upper_pass = std::isfinite(rep.max_c_up) && rep.max_c_up <= c_max;
  rep.lower_pass = rep.min_lower_ratio >= c_min;
  return rep;
}

struct StructureBoundReport {
  double p = 0.0;
  Rational exponent;
  double prefactor = 0.0;
  std::vector<double> ell;
  std::vector<double> ratio;  // S_p(ell) / (prefactor ell^zeta)
  double c_p = 0.0;
  double cap = 0.0;
  bool pass = false;
};

/// Minimal C_p with S_p(ell) <= C_p prefactor ell^zeta(p, delta) over ell in
/// [ell_lo, ell_hi]. Requires 2 <= p <= 3, and delta in [1,3] for the magnetic family.
inline StructureBoundReport check_structure_bounds(const StructureFunctionTable& table, StructureFamily family,
                                                   const Rational& p, double eps, double d_i, const Rational& delta,
                                                   double ell_lo, double ell_hi, double cap = 1e3) {
  require(p >= 2 && p <= 3, ErrorKind::hypothesis, "structure bound needs 2 <= p <= 3, got p = " + p.str());
  if (family == StructureFamily::MAGNETIC)
    require(delta >= 1 && delta <= 3, ErrorKind::hypothesis,
            "magnetic structure bound needs delta_b in [1, 3], got " + delta.str());
  StructureBoundReport rep;
  rep.p = to_double(p);
  rep.exponent = structure_exponent(p, delta, family);
  rep.prefactor = structure_prefactor(rep.p, family, eps, d_i);
  rep.cap = cap;
  const double zeta = to_double(rep.exponent);
  for (const auto& r : table.rows) {
    if (r.p != rep.p || r.ell < ell_lo || r.ell > ell_hi || r.ell <= 0.0) continue;
    const double denom = rep.prefactor * std::pow(r.ell, zeta);
    const double ratio = r.value == 0.0 ? 0.0 : (denom > 0.0 ? r.value / denom : std::numeric_limits<double>::infinity());
    rep.ell.push_back(r.ell);
    rep.ratio.push_back(ratio);
    rep.c_p = std::max(rep.c_p, ratio);
  }
  require(!rep.ell.empty(), ErrorKind::range, "no structure-function rows for p = " + p.str() + " in the ell range");
  rep.pass = std::isfinite(rep.c_p) && rep.c_p <= cap;
  return rep;
}

}  // namespace lpturb
