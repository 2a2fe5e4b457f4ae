#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lpturb/solver.hpp"

using namespace lpturb;

namespace {

const double pi = std::numbers::pi;

double rel_l2(const RealVectorField& a, const RealVectorField& b) { return lp_norm(a - b, 2) / lp_norm(b, 2); }

SolverConfig base_config(Model model, double L) {
  SolverConfig c;
  c.model = model;
  c.params.L = L;
  return c;
}

double total_energy(const SolverState& s) {
  double e = 0.5 * std::pow(lp_norm(s.B, 2), 2);
  if (s.u) e += 0.5 * std::pow(lp_norm(*s.u, 2), 2);
  return e;
}

}  // namespace

TEST(Solver, ZeroStateIsFixedPoint) {
  GridSpec g{16, 1.0};
  for (Model m : {Model::EMHD, Model::MHD, Model::HALL_MHD}) {
    auto cfg = base_config(m, g.L);
    cfg.params.nu = cfg.params.mu = 0.01;
    cfg.params.d_i = 0.1;
    SolverState s{0.0, RealVectorField(g), RealVectorField(g)};
    if (m == Model::EMHD) s.u.reset();
    auto next = step(s, cfg);
    EXPECT_EQ(lp_norm(next.B, 2), 0.0);
    if (next.u) {
      EXPECT_EQ(lp_norm(*next.u, 2), 0.0);
    }
    EXPECT_EQ(Solver::energy_balance_residual(s, next, cfg), 0.0);
  }
}

TEST(Solver, BeltramiEmhdDecaysExponentially) {
  GridSpec g{32, 2 * pi};
  auto cfg = base_config(Model::EMHD, g.L);
  cfg.params.mu = 0.02;
  cfg.params.d_i = 1.0;
  cfg.dt = 2e-3;
  const std::array<int, 3> m{1, 1, 0};
  auto B0 = single_mode(g, m, 1.0, ModeKind::beltrami);
  Solver s(cfg, SolverState{0.0, std::nullopt, B0});
  for (int i = 0; i < 100; ++i) s.step();
  const double alpha = 2 * pi * std::sqrt(2.0) / g.L;
  auto expected = std::exp(-cfg.params.mu * alpha * alpha * s.time()) * B0;
  EXPECT_LT(rel_l2(s.state().B, expected), 1e-6);
}

TEST(Solver, AlfvenicStateHasNoNonlinearity) {
  GridSpec g{32, 2 * pi};
  auto cfg = base_config(Model::MHD, g.L);
  cfg.params.nu = cfg.params.mu = 0.01;
  cfg.dt = 5e-3;
  auto v = random_solenoidal(g, -2.0, 1, 3, 4, 0.3);
  Solver s(cfg, SolverState{0.0, v, v});
  auto [nu, nb] = s.nonlinear_tendency();
  EXPECT_EQ(l2_norm_squared(nu), 0.0);
  EXPECT_EQ(l2_norm_squared(nb), 0.0);
  for (int i = 0; i < 50; ++i) s.step();
  // Pure diffusion: each mode decays with exp(-nu |k|^2 t).
  auto vs = forward(v);
  for_each_mode(g, [&](std::size_t mm, const std::array<double, 3>& k) {
    const double f = std::exp(-cfg.params.nu * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * s.time());
    for (int c = 0; c < 3; ++c) vs.at(mm, c) *= f;
  });
  auto expected = inverse(vs);
  auto st = s.state();
  EXPECT_LT(rel_l2(st.B, expected), 1e-6);
  EXPECT_LT(rel_l2(*st.u, expected), 1e-6);
}

TEST(Solver, IdealHallMhdConservesEnergy) {
  GridSpec g{32, 2 * pi};
  auto cfg = base_config(Model::HALL_MHD, g.L);
  cfg.params.d_i = 0.5;
  cfg.dt = 1e-3;
  SolverState st{0.0, random_solenoidal(g, -2.0, 1, 2, 8, 0.2), random_solenoidal(g, -2.0, 1, 2, 9, 0.2)};
  Solver s(cfg, st);
  const double e0 = total_energy(s.state());
  for (int i = 0; i < 100; ++i) s.step();
  EXPECT_LT(std::abs(total_energy(s.state()) - e0) / e0, 1e-6);
}

TEST(Solver, StaysSolenoidalWithForcing) {
  GridSpec g{16, 2 * pi};
  auto cfg = base_config(Model::HALL_MHD, g.L);
  cfg.params.nu = cfg.params.mu = 0.05;
  cfg.params.d_i = 0.3;
  cfg.params.B0 = {0.0, 0.0, 0.5};
  cfg.dt = 2e-3;
  cfg.t_end = 0.1;
  cfg.snapshot_stride = 10;
  cfg.forcing = {true, 1, 2, 0.5, 3};
  SolverState st{0.0, random_solenoidal(g, -2.0, 1, 3, 1, 0.3), random_solenoidal(g, -2.0, 1, 3, 2, 0.3)};
  auto r = run(cfg, st);
  EXPECT_EQ(r.snapshots.size(), 6u);
  EXPECT_LT(r.max_divergence_ratio, 1e-10);
  EXPECT_EQ(r.budget.size(), 51u);
  auto again = run(cfg, st);
  for (std::size_t i = 0; i < r.snapshots.size(); ++i)
    EXPECT_EQ(r.snapshots[i].get("B").data, again.snapshots[i].get("B").data);
}

TEST(Solver, ZeroDurationRunEmitsOnlyInitialSnapshot) {
  GridSpec g{16, 1.0};
  auto cfg = base_config(Model::EMHD, g.L);
  auto r = run(cfg, SolverState{0.0, std::nullopt, random_solenoidal(g, 0.0, 1, 2, 1)});
  EXPECT_EQ(r.snapshots.size(), 1u);
}

TEST(Solver, CflViolationAndDivergenceAreReported) {
  GridSpec g{16, 2 * pi};
  auto cfg = base_config(Model::EMHD, g.L);
  cfg.params.d_i = 1.0;
  cfg.dt = 1.0;
  Solver s(cfg, SolverState{0.0, std::nullopt, random_solenoidal(g, 0.0, 1, 2, 1)});
  try {
    s.step();
    FAIL() << "expected a step-size error";
  } catch (const StepError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::step_size);
    EXPECT_EQ(e.step(), 0);
  }
  cfg.cfl_limit = std::numeric_limits<double>::infinity();
  cfg.dt = 10.0;
  Solver blow(cfg, SolverState{0.0, std::nullopt, random_solenoidal(g, 0.0, 1, 2, 1, 1e3)});
  bool diverged = false;
  for (int i = 0; i < 200 && !diverged; ++i) {
    try {
      blow.step();
    } catch (const StepError& e) {
      EXPECT_EQ(e.kind(), ErrorKind::divergence);
      diverged = true;
    }
  }
  EXPECT_TRUE(diverged);
}

TEST(Solver, BeltramiStepResidualIsTiny) {
  GridSpec g{16, 2 * pi};
  auto cfg = base_config(Model::EMHD, g.L);
  cfg.params.mu = 0.01;
  cfg.params.d_i = 1.0;
  cfg.dt = 1e-3;
  SolverState s{0.0, std::nullopt, single_mode(g, {1, 2, 0}, 1.0, ModeKind::beltrami)};
  auto next = step(s, cfg);
  EXPECT_LT(Solver::energy_balance_residual(s, next, cfg), 1e-10);
}

TEST(Solver, ResidualIsFourthOrder) {
  GridSpec g{16, 2 * pi};
  auto cfg = base_config(Model::HALL_MHD, g.L);
  cfg.params.nu = 0.05;
  cfg.params.mu = 0.08;
  cfg.params.d_i = 0.5;
  SolverState s{0.0, random_solenoidal(g, -1.0, 1, 3, 5, 0.3), random_solenoidal(g, -1.0, 1, 3, 6, 0.3)};
  cfg.dt = 0.02;
  const double r1 = Solver::energy_balance_residual(s, step(s, cfg), cfg);
  cfg.dt = 0.01;
  const double r2 = Solver::energy_balance_residual(s, step(s, cfg), cfg);
  EXPECT_NEAR(r1 / r2, 16.0, 2.0) << r1 << " " << r2;
}

TEST(Solver, GlobalErrorConvergesAtFourthOrder) {
  GridSpec g{16, 2 * pi};
  auto cfg = base_config(Model::HALL_MHD, g.L);
  cfg.params.nu = 0.05;
  cfg.params.mu = 0.08;
  cfg.params.d_i = 0.5;
  SolverState s{0.0, random_solenoidal(g, -1.0, 1, 3, 5, 0.3), random_solenoidal(g, -1.0, 1, 3, 6, 0.3)};
  auto integrate = [&](double dt) {
    auto c = cfg;
    c.dt = dt;
    Solver sv(c, s);
    for (int i = 0; i < int(std::lround(0.4 / dt)); ++i) sv.step();
    return sv.state().B;
  };
  auto a = integrate(0.02), b = integrate(0.01), c = integrate(0.005);
  const double ratio = lp_norm(a - b, 2) / lp_norm(b - c, 2);
  EXPECT_NEAR(ratio, 16.0, 2.0);
}
