#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lpturb/diagnostics.hpp"
#include "lpturb/field_gen.hpp"

namespace lpturb {

struct PhysicalParams {
  double nu = 0.0;
  double mu = 0.0;
  double d_i = 0.0;
  double v_A = 0.0;
  Vec3 B0{0.0, 0.0, 0.0};
  double L = 1.0;

  double eta_plus() const { return 0.5 * (nu + mu); }
  double eta_minus() const { return 0.5 * (nu - mu); }

  void validate() const {
    require(nu >= 0.0 && mu >= 0.0 && d_i >= 0.0, ErrorKind::configuration,
            "nu, mu and d_i must be nonnegative");
    require(L > 0.0, ErrorKind::configuration, "L must be positive");
  }
};

enum class Model { EMHD, MHD, HALL_MHD };

inline const char* to_string(Model m) {
  switch (m) {
    case Model::EMHD: return "emhd";
    case Model::MHD: return "mhd";
    case Model::HALL_MHD: return "hall-mhd";
  }
  return "unknown";
}

/// Fixed-amplitude band forcing F = A B_band / rms(B_band) on the forced field
/// (B for EMHD, u otherwise). When the band is empty a seeded solenoidal
/// pattern with unit rms is used instead.
struct ForcingConfig {
  bool enabled = false;
  int q_lo = 1;
  int q_hi = 2;
  double amplitude = 0.0;
  std::uint64_t seed = 0;
};

struct SolverConfig {
  Model model = Model::EMHD;
  PhysicalParams params;
  double dt = 1e-3;
  double t_end = 0.0;
  ForcingConfig forcing;
  long snapshot_stride = 1;
  double cfl_limit = 0.5;

  long steps() const { return t_end <= 0.0 ? 0 : long(std::llround(t_end / dt)); }
  bool has_velocity() const { return model != Model::EMHD; }
};

struct SolverState {
  double t = 0.0;
  std::optional<RealVectorField> u;  // absent for EMHD
  RealVectorField B;
};

struct BudgetRow {
  double t = 0.0;
  double E_u = 0.0;  // 1/2 <|u|^2>
  double E_b = 0.0;  // 1/2 <|B|^2>
  double eps_u = 0.0;
  double eps_b = 0.0;
  double forcing_input = 0.0;  // per unit volume
  double residual = 0.0;       // energy balance residual of the step ending at t
};

/// Pseudo-spectral integrator: Lawson (integrating factor) RK4 with exact
/// diffusion, 2/3 dealiasing and physical-space products.
class Solver {
 public:
  Solver(const SolverConfig& cfg, const SolverState& init) : cfg_(cfg), grid_(init.B.grid) {
    cfg_.params.validate();
    require(cfg_.dt > 0.0 && std::isfinite(cfg_.dt), ErrorKind::configuration, "dt must be positive");
    require(cfg_.snapshot_stride >= 1, ErrorKind::configuration, "snapshot stride must be >= 1");
    require(std::abs(grid_.L - cfg_.params.L) <= 1e-12 * grid_.L, ErrorKind::configuration,
            "params.L does not match the grid");
    t_ = init.t;
    b_ = dealias(leray(forward(init.B)));
    if (cfg_.has_velocity()) {
      u_ = init.u ? dealias(leray(forward(*init.u))) : SpectralVectorField(grid_);
    }
    if (cfg_.forcing.enabled) {
      check_shell_range(grid_, cfg_.forcing.q_lo, cfg_.forcing.q_hi);
      auto pattern = dealias(forward(
          random_solenoidal(grid_, 0.0, cfg_.forcing.q_lo, cfg_.forcing.q_hi, cfg_.forcing.seed)));
      const double r = std::sqrt(l2_norm_squared(pattern) / grid_.volume());
      if (r > 0.0) pattern *= 1.0 / r;
      fallback_ = std::move(pattern);
    }
    k2_.resize(grid_.modes());
    for_each_mode(grid_, [&](std::size_t m, const std::array<double, 3>& k) {
      k2_[m] = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    });
    const double kmax = 2.0 * std::numbers::pi * grid_.dealias_cutoff() / grid_.L;
    kmax_ = kmax;
  }

  const SolverConfig& config() const { return cfg_; }
  double time() const { return t_; }
  long steps_taken() const { return step_; }

  SolverState state() const {
    SolverState s;
    s.t = t_;
    s.B = inverse(b_);
    if (cfg_.has_velocity()) s.u = inverse(u_);
    return s;
  }

  Snapshot snapshot() const {
    Snapshot s;
    s.t = t_;
    if (cfg_.has_velocity()) s.fields.emplace_back("u", inverse(u_));
    s.fields.emplace_back("B", inverse(b_));
    return s;
  }

  /// Advance by one dt; throws StepError on CFL violation or non-finite data.
  void step() {
    const double h = cfg_.dt;
    const Pair y0{u_, b_};
    Tendency k1 = cached_ ? std::move(*cached_) : rhs(y0, true);
    cached_.reset();
    const double cfl = h * k1.rate;
    if (cfl > cfg_.cfl_limit)
      throw StepError(ErrorKind::step_size,
                      "CFL number " + std::to_string(cfl) + " exceeds " + std::to_string(cfg_.cfl_limit) +
                          "; reduce dt below " + std::to_string(cfg_.cfl_limit / k1.rate),
                      step_);
    const Budget before = budget(y0, k1);

    const Pair e_half_y0 = decay(y0, 0.5 * h);
    Pair y2 = axpy(e_half_y0, 0.5 * h, decay(k1.d, 0.5 * h));
    Tendency k2 = rhs(y2, false);
    Pair y3 = axpy(e_half_y0, 0.5 * h, k2.d);
    Tendency k3 = rhs(y3, false);
    Pair y4 = axpy(decay(y0, h), h, decay(k3.d, 0.5 * h));
    Tendency k4 = rhs(y4, false);

    // y1 = E_h y0 + h/6 (E_h k1 + 2 E_{h/2}(k2 + k3) + k4)
    Pair mid = axpy(k2.d, 1.0, k3.d);
    Pair acc = axpy(decay(k1.d, h), 2.0, decay(mid, 0.5 * h));
    acc = axpy(acc, 1.0, k4.d);
    Pair y1 = axpy(decay(y0, h), h / 6.0, acc);
    if (cfg_.has_velocity()) y1.u = leray(y1.u);
    y1.b = leray(y1.b);

    for (const auto* s : {&y1.u, &y1.b})
      for (const auto& c : s->data)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
          throw StepError(ErrorKind::divergence, "non-finite field values", step_ + 1);

    u_ = std::move(y1.u);
    b_ = std::move(y1.b);
    t_ += h;
    ++step_;
    cached_ = rhs(Pair{u_, b_}, true);
    const Budget after = budget(Pair{u_, b_}, *cached_);
    last_ = make_row(after, residual(before, after, h));
  }

  /// Budget row for the current state (residual of the last step).
  BudgetRow budget_row() {
    if (!cached_) cached_ = rhs(Pair{u_, b_}, true);
    if (step_ == 0 && !last_) last_ = make_row(budget(Pair{u_, b_}, *cached_), 0.0);
    return *last_;
  }

  /// Energy-balance residual of a step from `before` to `after` (see README).
  static double energy_balance_residual(const SolverState& before, const SolverState& after, const SolverConfig& cfg) {
    Solver s0(cfg, before), s1(cfg, after);
    const double h = after.t - before.t;
    const Tendency t0 = s0.rhs(Pair{s0.u_, s0.b_}, true);
    const Tendency t1 = s1.rhs(Pair{s1.u_, s1.b_}, true);
    return residual(s0.budget(Pair{s0.u_, s0.b_}, t0), s1.budget(Pair{s1.u_, s1.b_}, t1), h > 0.0 ? h : cfg.dt);
  }

  /// Nonlinear + forcing tendency of the current state (no diffusion).
  std::pair<SpectralVectorField, SpectralVectorField> nonlinear_tendency() {
    auto t = rhs(Pair{u_, b_}, false);
    return {t.d.u, t.d.b};
  }

 private:
  struct Pair {
    SpectralVectorField u;  // empty for EMHD
    SpectralVectorField b;
  };
  struct Tendency {
    Pair d;
    double rate = 0.0;       // CFL rate: dt * rate must stay below the limit
    double power_in = 0.0;   // integral of F . (forced field)
  };
  struct Budget {
    double energy_u = 0.0, energy_b = 0.0;  // integrals of |.|^2 / 2
    double diss_u = 0.0, diss_b = 0.0;      // nu ||grad u||^2, mu ||grad B||^2
    double power = 0.0;                     // forcing power
    double derivative = 0.0;                // d/dt of (power - diss)
    double t = 0.0;
  };

  SolverConfig cfg_;
  GridSpec grid_;
  double t_ = 0.0;
  long step_ = 0;
  SpectralVectorField u_, b_;
  std::optional<SpectralVectorField> fallback_;
  std::vector<double> k2_;
  double kmax_ = 0.0;
  std::optional<Tendency> cached_;
  std::optional<BudgetRow> last_;
  mutable std::map<std::pair<double, double>, std::vector<double>> decay_cache_;  // (coef, tau) -> factors

  Pair decay(const Pair& y, double tau) const {
    Pair out = y;
    const auto& p = cfg_.params;
    auto apply = [&](SpectralVectorField& s, double coef) {
      if (coef == 0.0 || s.data.empty()) return;
      auto& f = decay_cache_[{coef, tau}];
      if (f.empty()) {
        f.resize(s.modes());
        for (std::size_t m = 0; m < s.modes(); ++m) f[m] = std::exp(-coef * k2_[m] * tau);
      }
      for (std::size_t m = 0; m < s.modes(); ++m)
        for (int c = 0; c < 3; ++c) s.at(m, c) *= f[m];
    };
    apply(out.u, p.nu);
    apply(out.b, p.mu);
    return out;
  }

  static Pair axpy(const Pair& x, double a, const Pair& y) {
    Pair out = x;
    for (std::size_t i = 0; i < out.u.data.size(); ++i) out.u.data[i] += a * y.u.data[i];
    for (std::size_t i = 0; i < out.b.data.size(); ++i) out.b.data[i] += a * y.b.data[i];
    return out;
  }

  double weighted_dot(const SpectralVectorField& a, const SpectralVectorField& b, bool with_k2) const {
    const auto layout = SpectralLayout::get(grid_.n);
    return grid_.volume() * pairwise_sum(a.modes(), [&](std::size_t m) {
             double s = 0.0;
             for (int c = 0; c < 3; ++c) s += (std::conj(a.at(m, c)) * b.at(m, c)).real();
             return layout->weight[m] * (with_k2 ? k2_[m] : 1.0) * s;
           });
  }

  SpectralVectorField forcing_term(const SpectralVectorField& x) const {
    auto band = shell_filter(x, cfg_.forcing.q_lo, cfg_.forcing.q_hi);
    dealias_in_place(band);
    const double rms = std::sqrt(l2_norm_squared(band) / grid_.volume());
    if (rms > 0.0) {
      band *= cfg_.forcing.amplitude / rms;
      return band;
    }
    auto f = *fallback_;
    f *= cfg_.forcing.amplitude;
    return f;
  }

  Tendency rhs(const Pair& y, bool with_rate) const {
    Tendency out;
    const auto& p = cfg_.params;
    auto btot = inverse(y.b);
    for (std::size_t i = 0; i < btot.points(); ++i)
      for (int c = 0; c < 3; ++c) btot.at(i, c) += p.B0[c];
    const bool hall = cfg_.model != Model::MHD && p.d_i > 0.0;
    std::optional<RealVectorField> J;
    if (hall || cfg_.has_velocity()) J = inverse(curl(y.b));

    double umax = 0.0;
    if (cfg_.has_velocity()) {
      const auto u = inverse(y.u);
      const auto w = inverse(curl(y.u));
      auto nu = forward(cross(u, w) + cross(*J, btot));
      dealias_in_place(nu);
      out.d.u = leray(nu);
      RealVectorField e = u;
      if (hall) e -= p.d_i * *J;
      auto nb = forward(cross(e, btot));
      dealias_in_place(nb);
      out.d.b = curl(nb);
      if (with_rate) umax = lp_norm(u, std::numeric_limits<double>::infinity());
    } else {
      if (hall) {
        auto nb = forward(cross(*J, btot));
        dealias_in_place(nb);
        out.d.b = curl(nb);
        out.d.b *= -p.d_i;
      } else {
        out.d.b = SpectralVectorField(grid_);
      }
    }
    if (cfg_.forcing.enabled) {
      auto& target = cfg_.has_velocity() ? y.u : y.b;
      auto f = forcing_term(target);
      out.power_in = weighted_dot(f, target, false);
      (cfg_.has_velocity() ? out.d.u : out.d.b) += f;
    }
    if (with_rate) {
      const double bmax = lp_norm(btot, std::numeric_limits<double>::infinity());
      double rate = 0.0;
      if (cfg_.model != Model::EMHD) rate = (umax + bmax) * kmax_;
      if (hall) rate = std::max(rate, p.d_i * kmax_ * kmax_ * bmax);
      out.rate = rate;
    }
    return out;
  }

  /// Energetics of state y given its tendency; derivative uses the full
  /// time derivative (diffusion + nonlinear + forcing).
  Budget budget(const Pair& y, const Tendency& tend) const {
    const auto& p = cfg_.params;
    Budget b;
    b.t = t_;
    b.energy_b = 0.5 * l2_norm_squared(y.b);
    b.diss_b = p.mu * gradient_norm_squared(y.b);
    // dB/dt = -mu k^2 B + N_B.
    double ddiss = 0.0;
    auto dfield = [&](const SpectralVectorField& x, const SpectralVectorField& n, double coef) {
      if (coef == 0.0) return 0.0;
      // d/dt coef ||grad x||^2 = 2 coef <k^2 x, x_t>, with x_t = -coef k^2 x + n
      const auto layout = SpectralLayout::get(grid_.n);
      return 2.0 * coef * grid_.volume() * pairwise_sum(x.modes(), [&](std::size_t m) {
               double s = 0.0;
               for (int c = 0; c < 3; ++c) {
                 const complex xt = -coef * k2_[m] * x.at(m, c) + n.at(m, c);
                 s += (std::conj(x.at(m, c)) * xt).real();
               }
               return layout->weight[m] * k2_[m] * s;
             });
    };
    ddiss += dfield(y.b, tend.d.b, p.mu);
    if (cfg_.has_velocity()) {
      b.energy_u = 0.5 * l2_norm_squared(y.u);
      b.diss_u = p.nu * gradient_norm_squared(y.u);
      ddiss += dfield(y.u, tend.d.u, p.nu);
    }
    double dpower = 0.0;
    if (cfg_.forcing.enabled) {
      b.power = tend.power_in;
      const auto& x = cfg_.has_velocity() ? y.u : y.b;
      const auto& n = cfg_.has_velocity() ? tend.d.u : tend.d.b;
      const double coef = cfg_.has_velocity() ? p.nu : p.mu;
      auto band = shell_filter(x, cfg_.forcing.q_lo, cfg_.forcing.q_hi);
      dealias_in_place(band);
      const double nb2 = l2_norm_squared(band);
      if (nb2 > 0.0) {
        // P = A sqrt(|Omega|) ||x_band||, so dP/dt = A sqrt(|Omega|) <x_band, x_t> / ||x_band||.
        SpectralVectorField xt = n;
        for (std::size_t m = 0; m < xt.modes(); ++m)
          for (int c = 0; c < 3; ++c) xt.at(m, c) -= coef * k2_[m] * x.at(m, c);
        dpower = cfg_.forcing.amplitude * std::sqrt(grid_.volume()) * weighted_dot(band, xt, false) / std::sqrt(nb2);
      } else {
        // Fallback pattern: P = A <pattern, x>, dP/dt = A <pattern, x_t>.
        SpectralVectorField xt = n;
        for (std::size_t m = 0; m < xt.modes(); ++m)
          for (int c = 0; c < 3; ++c) xt.at(m, c) -= coef * k2_[m] * x.at(m, c);
        dpower = cfg_.forcing.amplitude * weighted_dot(*fallback_, xt, false);
      }
    }
    b.derivative = dpower - ddiss;
    return b;
  }

  /// Corrected-trapezoid check of dE/dt = P - D over one step.
  static double residual(const Budget& a, const Budget& b, double h) {
    const double dE = (b.energy_u + b.energy_b) - (a.energy_u + a.energy_b);
    const double f0 = a.power - a.diss_u - a.diss_b;
    const double f1 = b.power - b.diss_u - b.diss_b;
    const double predicted = 0.5 * h * (f0 + f1) + h * h / 12.0 * (a.derivative - b.derivative);
    const double scale = std::abs(dE) + 0.5 * h * (a.diss_u + a.diss_b + b.diss_u + b.diss_b);
    if (scale == 0.0) return 0.0;
    return std::abs(dE - predicted) / scale;
  }

  BudgetRow make_row(const Budget& b, double res) const {
    const double vol = grid_.volume();
    BudgetRow r;
    r.t = t_;
    r.E_u = b.energy_u / vol;
    r.E_b = b.energy_b / vol;
    r.eps_u = b.diss_u / vol;
    r.eps_b = b.diss_b / vol;
    r.forcing_input = b.power / vol;
    r.residual = res;
    return r;
  }
};

/// One step of the integrator from a given state.
inline SolverState step(const SolverState& state, const SolverConfig& config) {
  Solver s(config, state);
  s.step();
  return s.state();
}

struct RunResult {
  std::vector<Snapshot> snapshots;
  std::vector<BudgetRow> budget;
  double max_divergence_ratio = 0.0;
};

/// Integrates to t_end, calling `sink` with the initial state and then every
/// snapshot_stride steps (and at the final step). Budget rows are recorded for
/// every step.
inline RunResult run(const SolverConfig& config, const SolverState& initial,
                     const std::function<void(const Snapshot&)>& sink = nullptr) {
  Solver solver(config, initial);
  RunResult res;
  auto emit = [&] {
    auto snap = solver.snapshot();
    for (const auto& [tag, f] : snap.fields)
      res.max_divergence_ratio = std::max(res.max_divergence_ratio, divergence_ratio(forward(f)));
    if (sink)
      sink(snap);
    else
      res.snapshots.push_back(std::move(snap));
  };
  res.budget.push_back(solver.budget_row());
  emit();
  const long steps = config.steps();
  for (long i = 1; i <= steps; ++i) {
    solver.step();
    res.budget.push_back(solver.budget_row());
    if (i % config.snapshot_stride == 0 || i == steps) emit();
  }
  return res;
}

}  // namespace lpturb
