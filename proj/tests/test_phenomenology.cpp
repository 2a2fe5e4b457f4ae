#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lpturb/phenomenology.hpp"

using namespace lpturb;

namespace {

Rational R(long a, long b = 1) { return Rational(a, b); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::io;
}

SpectrumTable table_from(const GridSpec& g, const std::vector<double>& shell_spectrum) {
  SpectrumTable t;
  t.grid = g;
  for (int q = 0; q < int(shell_spectrum.size()); ++q)
    t.rows.push_back({q, g.shell_wavenumber(q), 0.5 * shell_spectrum[q] * g.shell_wavenumber(q), shell_spectrum[q]});
  return t;
}

}  // namespace

TEST(ParseRational, Forms) {
  EXPECT_EQ(parse_rational("3"), R(3));
  EXPECT_EQ(parse_rational("2.5"), R(5, 2));
  EXPECT_EQ(parse_rational("7/3"), R(7, 3));
  EXPECT_EQ(parse_rational("-0.25"), R(-1, 4));
  EXPECT_EQ(parse_rational("1e-2"), R(1, 100));
  EXPECT_THROW(parse_rational("x"), Error);
  EXPECT_THROW(parse_rational("1/0"), Error);
}

TEST(StructureExponent, SpecialValues) {
  for (int d = 0; d <= 3; ++d) EXPECT_EQ(structure_exponent(3, d, StructureFamily::MAGNETIC), R(2));
  EXPECT_EQ(structure_exponent(3, R(7, 5), StructureFamily::MAGNETIC), R(2));
  EXPECT_EQ(structure_exponent(2, 3, StructureFamily::MAGNETIC), R(4, 3));
  EXPECT_EQ(structure_exponent(2, 0, StructureFamily::MAGNETIC), R(7, 3));
  for (auto p : {R(0), R(1), R(5, 2), R(6)}) EXPECT_EQ(structure_exponent(p, 1, StructureFamily::MAGNETIC), R(2)) << p;
  for (int d = 0; d <= 3; ++d) EXPECT_EQ(structure_exponent(3, d, StructureFamily::VELOCITY_OR_ELSASSER), R(1));
  EXPECT_EQ(structure_exponent(2, 3, StructureFamily::VELOCITY_OR_ELSASSER), R(2, 3));
  EXPECT_EQ(kind_of([] { structure_exponent(2, R(31, 10), StructureFamily::MAGNETIC); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([] { structure_exponent(2, R(-1, 10), StructureFamily::MAGNETIC); }), ErrorKind::domain);
}

TEST(StructureExponent, AffineAndMonotoneInP) {
  const Rational h = R(1, 7);
  for (auto fam : {StructureFamily::MAGNETIC, StructureFamily::VELOCITY_OR_ELSASSER})
    for (auto p : {R(0), R(1, 3), R(2), R(9, 4)})
      for (auto d : {R(0), R(1, 2), R(2), R(19, 7)}) {
        EXPECT_EQ(structure_exponent(p + 2 * h, d, fam) - 2 * structure_exponent(p + h, d, fam) + structure_exponent(p, d, fam), 0);
        EXPECT_EQ(structure_exponent(p, d + 2 * h, fam) - 2 * structure_exponent(p, d + h, fam) + structure_exponent(p, d, fam), 0);
      }
  for (auto d : {R(0), R(1, 2), R(1), R(3, 2), R(3)}) {
    const Rational dz = structure_exponent(R(5, 2), d, StructureFamily::MAGNETIC) - structure_exponent(2, d, StructureFamily::MAGNETIC);
    if (d > 1) EXPECT_GT(dz, 0);
    if (d == 1) EXPECT_EQ(dz, 0);
    if (d < 1) EXPECT_LT(dz, 0);
  }
}

TEST(StructurePrefactor, Values) {
  EXPECT_NEAR(structure_prefactor(3.0, StructureFamily::MAGNETIC, 8.0, 2.0), 4.0, 1e-14);
  EXPECT_NEAR(structure_prefactor(1.5, StructureFamily::VELOCITY_OR_ELSASSER, 4.0, 123.0), 2.0, 1e-14);
}

TEST(PredictSpectrum, ExponentTable) {
  ScalingInputs in;
  in.eps_b = 1.0;
  in.eps_u = 1.0;
  in.d_i = 1.0;
  in.delta_b = R(3);
  EXPECT_EQ(predict_spectrum(SpectrumRegime::EMHD_SUB_ION, in).exponent, R(-7, 3));
  in.delta_u = R(3);
  EXPECT_EQ(predict_spectrum(SpectrumRegime::HALL_ION_INERTIAL, in).exponent, R(-5, 3));
  EXPECT_EQ(predict_spectrum(SpectrumRegime::HALL_SUB_ION, in).exponent, R(-7, 3));
  EXPECT_EQ(predict_spectrum(SpectrumRegime::HALL_KINETIC, in).exponent, R(-5, 3));
  in.delta_b = R(0);
  in.delta_u = R(0);
  EXPECT_EQ(predict_spectrum(SpectrumRegime::HALL_ION_INERTIAL, in).exponent, R(-8, 3));
  EXPECT_EQ(predict_spectrum(SpectrumRegime::HALL_SUB_ION, in).exponent, R(-10, 3));

  ScalingInputs el;
  el.eps_plus = 1.0;
  el.eps_minus = 1.0;
  el.delta_plus = el.delta_minus = R(3);
  EXPECT_EQ(predict_spectrum(SpectrumRegime::ELSASSER_PLUS, el).exponent, R(-5, 3));
  EXPECT_EQ(predict_spectrum(SpectrumRegime::ELSASSER_MINUS, el).exponent, R(-5, 3));
  el.delta_plus = el.delta_minus = R(0);
  EXPECT_EQ(predict_spectrum(SpectrumRegime::ELSASSER_PLUS, el).exponent, R(-8, 3));

  ScalingInputs pp;
  pp.eps_perp_plus = pp.eps_perp_minus = 1.0;
  pp.delta_perp_plus = pp.delta_perp_minus = R(2);
  EXPECT_EQ(predict_spectrum(SpectrumRegime::PERP_PLUS, pp).exponent, R(-5, 3));
  pp.delta_perp_plus = pp.delta_perp_minus = R(0);
  EXPECT_EQ(predict_spectrum(SpectrumRegime::PERP_MINUS, pp).exponent, R(-7, 3));
  pp.delta_perp_plus = R(5, 2);
  EXPECT_EQ(kind_of([&] { predict_spectrum(SpectrumRegime::PERP_PLUS, pp); }), ErrorKind::domain);

  ScalingInputs cb;
  cb.eps_perp = 8.0;
  cb.v_A = 2.0;
  EXPECT_EQ(predict_spectrum(SpectrumRegime::PERP_CRITICAL_BALANCE, cb).exponent, R(-5, 3));
  const auto al = predict_spectrum(SpectrumRegime::PERP_ALIGNMENT, cb, 4.0);
  EXPECT_EQ(al.exponent, R(-3, 2));
  EXPECT_NEAR(al.prefactor, 4.0, 1e-14);
  EXPECT_NEAR(al.value, 0.5, 1e-14);
}

TEST(PredictSpectrum, PrefactorsAndErrors) {
  ScalingInputs el;
  el.eps_plus = 4.0;
  el.eps_minus = 2.0;
  el.delta_plus = R(1);
  el.delta_minus = R(2);
  const auto p = predict_spectrum(SpectrumRegime::ELSASSER_PLUS, el, 2.0);
  EXPECT_NEAR(p.prefactor, std::pow(8.0, 2.0 / 3.0), 1e-13);
  EXPECT_EQ(p.exponent, R(-5, 3));
  EXPECT_NEAR(p.value, p.prefactor * std::pow(2.0, -5.0 / 3.0), 1e-13);

  ScalingInputs e;
  e.delta_b = R(2);
  e.eps_b = 27.0;
  EXPECT_EQ(kind_of([&] { predict_spectrum(SpectrumRegime::EMHD_SUB_ION, e); }), ErrorKind::configuration);
  e.d_i = 1.0;
  EXPECT_NEAR(predict_spectrum(SpectrumRegime::EMHD_SUB_ION, e).prefactor, 9.0, 1e-12);
  e.d_i = 0.0;
  EXPECT_EQ(kind_of([&] { predict_spectrum(SpectrumRegime::EMHD_SUB_ION, e); }), ErrorKind::domain);

  ScalingInputs h;
  h.eps_b = h.eps_u = 1.0;
  h.d_i = 1.0;
  h.delta_b = R(1);
  h.delta_u = R(2);
  EXPECT_EQ(kind_of([&] { predict_spectrum(SpectrumRegime::HALL_ION_INERTIAL, h); }), ErrorKind::domain);
  EXPECT_EQ(parse_regime("hall-sub-ion"), SpectrumRegime::HALL_SUB_ION);
  EXPECT_EQ(kind_of([] { parse_regime("nope"); }), ErrorKind::configuration);
}

TEST(PredictTransition, Examples) {
  ScalingInputs in;
  in.mu = 1.0;
  in.d_i = 1.0;
  in.eps_b = 1.0;
  for (auto d : {R(3, 2), R(2), R(3)}) {
    in.delta_b = d;
    EXPECT_DOUBLE_EQ(predict_transition(TransitionKind::EMHD_DISSIPATION, in).value, 1.0);
  }
  in.eps_b = 16.0;
  in.delta_b = R(3);
  EXPECT_NEAR(predict_transition(TransitionKind::EMHD_DISSIPATION, in).value, 4.0, 1e-14);
  in.delta_b = R(1);
  EXPECT_EQ(kind_of([&] { predict_transition(TransitionKind::EMHD_DISSIPATION, in); }), ErrorKind::singular);
  in.delta_b = R(1, 2);
  EXPECT_EQ(kind_of([&] { predict_transition(TransitionKind::EMHD_DISSIPATION, in); }), ErrorKind::domain);

  ScalingInputs hi;
  hi.d_i = 0.05;
  EXPECT_NEAR(predict_transition(TransitionKind::HALL_ION, hi).value, 20.0, 1e-12);

  ScalingInputs el;
  el.nu = 0.3;
  el.mu = 0.1;
  el.eps_plus = (0.3 + 0.1) * (0.3 - 0.1) * (0.3 - 0.1);
  el.eps_minus = (0.3 - 0.1) * (0.3 + 0.1) * (0.3 + 0.1);
  for (auto d : {R(0), R(1), R(3)}) {
    el.delta_plus = el.delta_minus = d;
    EXPECT_NEAR(predict_transition(TransitionKind::ELSASSER_PLUS, el).value, 1.0, 1e-14);
    EXPECT_NEAR(predict_transition(TransitionKind::ELSASSER_MINUS, el).value, 1.0, 1e-14);
  }
  el.mu = 0.3;
  EXPECT_EQ(kind_of([&] { predict_transition(TransitionKind::ELSASSER_PLUS, el); }), ErrorKind::singular);
  el.mu = 0.5;
  EXPECT_EQ(kind_of([&] { predict_transition(TransitionKind::ELSASSER_MINUS, el); }), ErrorKind::domain);
  EXPECT_EQ(parse_transition("perp-minus"), TransitionKind::PERP_MINUS);
}

TEST(PredictTransition, DecreasesWithDimension) {
  ScalingInputs in;
  in.nu = 0.01;
  in.mu = 0.01;
  in.eps_u = 1.0;
  in.eps_b = 1.0;
  double prev_u = std::numeric_limits<double>::infinity(), prev_b = prev_u;
  for (int i = 0; i <= 6; ++i) {
    in.delta_u = R(i, 2);
    in.delta_b = R(3);
    const double ku = predict_transition(TransitionKind::HALL_KINETIC_DISSIPATION, in).value;
    const double kb = predict_transition(TransitionKind::HALL_MAGNETIC_DISSIPATION, in).value;
    EXPECT_LT(ku, prev_u);
    EXPECT_LT(kb, prev_b);
    prev_u = ku;
    prev_b = kb;
  }
  in.delta_u = R(0);
  prev_b = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 6; ++i) {
    in.delta_b = R(i, 2);
    const double kb = predict_transition(TransitionKind::HALL_MAGNETIC_DISSIPATION, in).value;
    EXPECT_LT(kb, prev_b);
    prev_b = kb;
  }
}

TEST(ShellAmplitude, Scalings) {
  ScalingInputs in;
  in.mu = 0.1;
  in.d_i = 0.5;
  in.delta_b = R(3);
  const double a1 = predict_shell_amplitude(AmplitudeModel::EMHD, in, 1.0, 1).b;
  EXPECT_DOUBLE_EQ(a1, predict_shell_amplitude(AmplitudeModel::EMHD, in, 1.0, 5).b);
  in.mu = 0.2;
  EXPECT_DOUBLE_EQ(predict_shell_amplitude(AmplitudeModel::EMHD, in, 1.0, 3).b, 2 * a1);
  ScalingInputs h;
  h.nu = 0.1;
  h.delta_u = R(3);
  const auto s3 = predict_shell_amplitude(AmplitudeModel::HALL, h, 1.0, 3);
  const auto s4 = predict_shell_amplitude(AmplitudeModel::HALL, h, 1.0, 4);
  EXPECT_NEAR(*s4.u / *s3.u, 2.0, 1e-14);
  EXPECT_NEAR(s3.b * s3.b, 0.1 * std::pow(8.0, 1.0) * *s3.u, 1e-12);
}

TEST(FitPowerLaw, ExactNoisyAndErrors) {
  std::vector<double> k, e;
  for (int q = 0; q < 6; ++q) {
    k.push_back(std::ldexp(1.0, q));
    e.push_back(7.0 * std::pow(k.back(), -5.0 / 3.0));
  }
  auto f = fit_power_law(k, e);
  EXPECT_NEAR(f.exponent, -5.0 / 3.0, 1e-13);
  EXPECT_NEAR(f.prefactor, 7.0, 1e-12);
  EXPECT_LT(f.residual, 1e-13);

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  int within = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> y;
    for (double kk : k) y.push_back(3.0 * std::pow(kk, -2.5) * (1 + noise(gen)));
    auto g = fit_power_law(k, y);
    EXPECT_GT(g.slope_stderr, 0.0);
    if (std::abs(g.exponent + 2.5) <= 3 * g.slope_stderr) ++within;
  }
  EXPECT_GE(within, 48);

  auto bad = e;
  bad[2] = 0.0;
  EXPECT_EQ(kind_of([&] { fit_power_law(k, bad); }), ErrorKind::fit);
  EXPECT_EQ(kind_of([&] { fit_power_law(std::vector<double>{1, 2}, std::vector<double>{1, 2}); }), ErrorKind::fit);
}

TEST(SpectrumBounds, HomogeneityAndDegenerateInput) {
  GridSpec g{32, 1.0};
  std::vector<double> spec{0.0, 1.0, 0.5, 0.1, 0.02, 0.0};
  auto t1 = table_from(g, spec);
  for (auto& x : spec) x *= 4.0;
  auto t4 = table_from(g, spec);
  // Both eps rates are cubic in amplitude, so B -> 2B multiplies them by 8.
  auto r1 = check_spectrum_bounds(t1, 0.3, 0.01, 2.0, 0.5, 1.0, 1, 4);
  auto r4 = check_spectrum_bounds(t4, 2.4, 0.08, 2.0, 0.5, 1.0, 1, 4);
  for (std::size_t i = 0; i < r1.shells.size(); ++i) {
    EXPECT_NEAR(r1.c_up[i], r4.c_up[i], 1e-12 * r1.c_up[i]);
    EXPECT_NEAR(r1.lower_ratio[i], r4.lower_ratio[i], 1e-12 * r1.lower_ratio[i]);
  }
  EXPECT_EQ(r1.pass(), r4.pass());
  EXPECT_EQ(kind_of([&] { check_spectrum_bounds(t1, 0.0, 0.0, 2.0, 0.5, 1.0, 1, 4); }), ErrorKind::degenerate);
  auto z = check_spectrum_bounds(t1, 0.3, 0.0, 2.0, 0.5, 1.0, 1, 4);
  EXPECT_TRUE(std::isinf(z.min_lower_ratio));
}

TEST(SpectrumBounds, HandComputedSingleShell) {
  GridSpec g{32, 2.0};
  std::vector<double> spec(6, 0.0);
  spec[2] = 3.0;
  auto t = table_from(g, spec);
  const double eps = 0.4, di = 0.5, d = 2.0, L = 2.0;
  auto r = check_spectrum_bounds(t, eps, eps, d, di, L, 2, 3);
  const double lam2 = 4.0 / L;
  const double up = 3.0 / (std::pow(eps / di, 2.0 / 3.0) * std::pow(lam2, -7.0 / 3.0) * std::pow(L * lam2, d / 3.0 - 1.0));
  EXPECT_NEAR(r.c_up[0], up, 1e-12 * up);
  EXPECT_EQ(r.c_up[1], 0.0);
  // Shell 3 sees shell 2 through K_1^(2/3) = (2/L)^(-2/9).
  const double low3 = std::pow(2.0 / L, -2.0 / 9.0) * std::pow(lam2, (10.0 - d) / 3.0) * 3.0 / std::pow(eps / di, 2.0 / 3.0);
  EXPECT_NEAR(r.lower_ratio[1], low3, 1e-12 * low3);
}

TEST(StructureBounds, ConstantFieldHypothesesAndHolder) {
  StructureFunctionTable t;
  t.grid = GridSpec{16, 1.0};
  for (double ell : {0.0625, 0.125, 0.25})
    for (double p : {2.0, 2.5, 3.0}) t.rows.push_back({ell, p, 0.0});
  auto r = check_structure_bounds(t, StructureFamily::MAGNETIC, 2, 1.0, 1.0, 3, 0.0, 1.0);
  EXPECT_EQ(r.c_p, 0.0);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(kind_of([&] { check_structure_bounds(t, StructureFamily::MAGNETIC, R(7, 2), 1.0, 1.0, 3, 0.0, 1.0); }),
            ErrorKind::hypothesis);
  EXPECT_EQ(kind_of([&] { check_structure_bounds(t, StructureFamily::MAGNETIC, 2, 1.0, 1.0, R(1, 2), 0.0, 1.0); }),
            ErrorKind::hypothesis);
  EXPECT_NO_THROW(check_structure_bounds(t, StructureFamily::VELOCITY_OR_ELSASSER, 2, 1.0, 1.0, R(1, 2), 0.0, 1.0));

  // Values obeying S_p = a^p ell^(zeta) exactly give C_p = a^p / prefactor.
  StructureFunctionTable s;
  s.grid = t.grid;
  const double eps = 2.0, di = 0.5;
  for (double ell : {0.0625, 0.125, 0.25})
    for (auto p : {R(2), R(5, 2), R(3)}) {
      const double z = to_double(structure_exponent(p, 2, StructureFamily::MAGNETIC));
      s.rows.push_back({ell, to_double(p), std::pow(1.3, to_double(p)) * std::pow(ell, z)});
    }
  double c[3];
  int i = 0;
  for (auto p : {R(2), R(5, 2), R(3)}) {
    auto rep = check_structure_bounds(s, StructureFamily::MAGNETIC, p, eps, di, 2, 0.0, 1.0);
    EXPECT_NEAR(rep.c_p, std::pow(1.3, to_double(p)) / std::pow(eps / di, to_double(p) / 3), 1e-12);
    c[i++] = rep.c_p;
  }
  EXPECT_LE(c[1], 2 * std::sqrt(c[0] * c[2]));
}
