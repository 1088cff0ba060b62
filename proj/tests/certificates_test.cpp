#include "issl2/certificates.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "issl2/errors.hpp"
#include "issl2/simulate.hpp"

namespace issl2 {
namespace {

const GainFn kSq = GainFn::power(2);
const GainFn kId = GainFn::identity();

// For dx = -ax + bw: ||x||^2 <= x0^2 / a + (b / a)^2 ||w||^2.
Certificate linear1d_l2(double a, double b) {
  return Certificate(LinearL2{post_scale(1 / a, kSq), b * b / (a * a)}, CombineMode::kSum);
}

// For dx = -x^3: int x^4 <= x0^2 / 2.
Certificate cubic_alpha() { return Certificate(AlphaIntegrable{GainFn::power(4), post_scale(0.5, kSq)}); }

// For dx = -x + xw: ||x||^2 <= x0^2 e^{||w||^2} <= x0^2 + x0^4 / 2 + (e^{||w||^2} - 1)^2 / 2.
Certificate bilinear_l2() {
  const GainFn beta = sum(kSq, post_scale(0.5, GainFn::power(4)));
  const GainFn gamma = post_scale(0.5, compose(kSq, GainFn::exp_minus_one()));
  return Certificate(NonlinearL2{beta, gamma}, CombineMode::kSum);
}

SamplerSpec short_spec(std::uint64_t seed) {
  SamplerSpec s;
  s.runs = 40;
  s.seed = seed;
  s.t_end = 8.0;
  s.dt = 5e-3;
  s.x0_max = 1.5;
  return s;
}

// The source certificate must hold on every draw; the target must then hold on
// the mapped draws.
void expect_bridge(const Certificate& source, const TransformedCertificate& target, const SystemModel& model,
                   const SamplerSpec& spec) {
  for (std::size_t i = 0; i < spec.runs; ++i) {
    const RunSample s = draw_run(spec, model, i);
    const Trajectory t = integrate(model, s.x0, s.input, spec.t_end, spec.dt);
    ASSERT_TRUE(verify_certificate(source, t).pass) << "source fails on draw " << i;
    const EstimateReport r = verify_transformed(target, t);
    ASSERT_TRUE(r.pass) << "target fails on draw " << i << " at t=" << r.worst_time();
  }
}

GTEST_TEST(CertificateTest, KindsAndAccess) {
  const Certificate c(ISS{kSq, kId, kSq});
  EXPECT_EQ(c.kind(), CertKind::kISS);
  EXPECT_TRUE(c.has_input());
  EXPECT_FALSE(c.l2_left_side());
  EXPECT_EQ(c.fields().size(), 3u);
  EXPECT_EQ(c.fields()[2].first, "sigma");
  EXPECT_THROW(c.as<IISS>(), DomainError);
  const Certificate l2(L2Stable{kSq});
  EXPECT_FALSE(l2.has_input());
  EXPECT_TRUE(l2.l2_left_side());
  EXPECT_NE(c.describe().find("iss [max]"), std::string::npos);
  EXPECT_TRUE(fields_certified(c));
  EXPECT_FALSE(fields_certified(Certificate(LinearL2{kSq, -1.0})));
  EXPECT_FALSE(fields_certified(Certificate(L2Stable{GainFn::log_one_plus()})));
}

GTEST_TEST(EmbeddingTest, L2ToAlphaIntegrable) {
  const Certificate c = l2_to_alpha_integrable(Certificate(L2Stable{post_scale(0.5, kSq)}));
  const auto& a = c.as<AlphaIntegrable>();
  EXPECT_DOUBLE_EQ(a.alpha(3.0), 9.0);
  EXPECT_DOUBLE_EQ(a.beta(2.0), 2.0);
  EXPECT_THROW(l2_to_alpha_integrable(cubic_alpha()), DomainError);
}

GTEST_TEST(EmbeddingTest, LinearL2ToIss) {
  const ISS a = linear_l2_to_iss(Certificate(LinearL2{kId, 1.0})).as<ISS>();
  EXPECT_DOUBLE_EQ(a.sigma(3.0), 9.0);
  const Certificate c = linear_l2_to_iss(Certificate(LinearL2{kSq, 4.0}));
  EXPECT_DOUBLE_EQ(c.as<ISS>().sigma(1.5), 9.0);
  EXPECT_DOUBLE_EQ(c.as<ISS>().beta(1.5), 2.25);
  EXPECT_THROW(linear_l2_to_iss(Certificate(LinearL2{kSq, 0.0})), DomainError);
}

GTEST_TEST(EmbeddingTest, NonlinearL2ToIiss) {
  const IISS c = nonlinear_l2_to_iiss(bilinear_l2()).as<IISS>();
  EXPECT_DOUBLE_EQ(c.alpha(2.0), 4.0);
  EXPECT_DOUBLE_EQ(c.sigma(2.0), 4.0);
  EXPECT_NEAR(c.gamma(1.0), 0.5 * std::pow(std::exp(1.0) - 1, 2), 1e-15);
  const auto round_trip = iiss_to_nonlinear_l2(nonlinear_l2_to_iiss(bilinear_l2()), 1.0, 1, 1);
  EXPECT_NEAR(round_trip.cert.as<NonlinearL2>().gamma(1.0), 0.5 * std::pow(std::exp(1.0) - 1, 2), 1e-15);
}

GTEST_TEST(ConverseTest, AlphaIntegrableToL2) {
  const auto id_chain = alpha_integrable_to_l2(Certificate(AlphaIntegrable{kSq, kId}), 1);
  EXPECT_NEAR(id_chain.cert.as<L2Stable>().beta(3.0), 3.0, 1e-12);
  EXPECT_NEAR(id_chain.state_transform.apply(Vec{-2.0})[0], -2.0, 1e-15);

  const auto quartic = alpha_integrable_to_l2(Certificate(AlphaIntegrable{GainFn::power(4), kId}), 1);
  EXPECT_NEAR(quartic.state_transform.apply(Vec{-3.0})[0], -9.0, 1e-12);
  EXPECT_NEAR(quartic.cert.as<L2Stable>().beta(16.0), 4.0, 1e-12);

  const auto four = alpha_integrable_to_l2(Certificate(AlphaIntegrable{kSq, kId}), 4);
  EXPECT_NEAR(four.cert.as<L2Stable>().beta(1.5), 6.0, 1e-12);
  EXPECT_FALSE(four.input_transform.has_value());
}

GTEST_TEST(ConverseTest, IssToLinearL2) {
  const Certificate iss(ISS{kSq, kId, kSq});
  const auto unit = iss_to_linear_l2(iss, 1.0, 1, 1);
  EXPECT_NEAR(unit.cert.as<LinearL2>().beta(2.0), 2.0, 1e-12);
  EXPECT_EQ(unit.cert.as<LinearL2>().gain_sq, 1.0);
  EXPECT_NEAR(unit.input_transform->apply(Vec{-3.0})[0], -3.0, 1e-15);

  const auto two = iss_to_linear_l2(iss, 2.0, 1, 1);
  EXPECT_EQ(two.cert.as<LinearL2>().gain_sq, 4.0);
  for (double w : {0.1, 1.0, 7.0}) {
    EXPECT_LE(0.5 * w, std::fabs(two.input_transform->apply(Vec{w})[0]) * (1 + 1e-15));
  }

  const auto quartic = iss_to_linear_l2(Certificate(ISS{GainFn::power(4), kId, kSq}), 1.0, 1, 1);
  EXPECT_NEAR(quartic.state_transform.apply(Vec{2.0})[0], 4.0, 1e-12);
  EXPECT_NEAR(quartic.cert.as<LinearL2>().beta(9.0), 3.0, 1e-12);
  EXPECT_THROW(iss_to_linear_l2(iss, 0.0, 1, 1), DomainError);
  EXPECT_THROW(iss_to_linear_l2(iss, 1.0, 1, 0), DomainError);
}

GTEST_TEST(ConverseTest, IissToNonlinearL2Scaling) {
  const Certificate unit(IISS{kSq, kId, kId, kSq});
  const auto same = iiss_to_nonlinear_l2(unit, 1.0, 1, 1);
  EXPECT_NEAR(same.state_transform.apply(Vec{0.7})[0], 0.7, 1e-15);
  EXPECT_NEAR(same.input_transform->apply(Vec{0.7})[0], 0.7, 1e-15);
  EXPECT_NEAR(same.cert.as<NonlinearL2>().gamma(5.0), 5.0, 1e-15);

  const Certificate c(IISS{kSq, kId, GainFn::exp_minus_one(), kSq});
  const auto four = iiss_to_nonlinear_l2(c, 4.0, 1, 1);
  EXPECT_NEAR(four.input_transform->apply(Vec{3.0})[0], 1.5, 1e-15);
  EXPECT_NEAR(four.cert.as<NonlinearL2>().gamma(0.5), std::expm1(2.0), 1e-12);
  EXPECT_THROW(iiss_to_nonlinear_l2(c, -1.0, 1, 1), DomainError);
}

GTEST_TEST(ModeTest, MaxSumConversions) {
  const Certificate iss(ISS{kSq, kId, kSq});
  const Certificate s = max_to_sum(iss);
  EXPECT_EQ(s.mode, CombineMode::kSum);
  EXPECT_EQ(s.as<ISS>().beta(3.0), 3.0);
  const Certificate m = sum_to_max(s);
  EXPECT_EQ(m.mode, CombineMode::kMax);
  EXPECT_EQ(m.as<ISS>().beta(3.0), 6.0);
  EXPECT_EQ(m.as<ISS>().sigma(3.0), 18.0);
  EXPECT_EQ(m.as<ISS>().alpha(3.0), 9.0);
  EXPECT_EQ(sum_to_max(max_to_sum(m)).as<ISS>().beta(3.0), 12.0);
  EXPECT_EQ(sum_to_max(linear1d_l2(1, 1)).as<LinearL2>().gain_sq, 2.0);
  EXPECT_THROW(sum_to_max(iss), DomainError);
  EXPECT_THROW(max_to_sum(s), DomainError);
}

GTEST_TEST(ModeTest, ScalarInequalitiesHoldExactly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> log_u(-20, 20);
  for (int i = 0; i < 10000; ++i) {
    const double a = std::exp(log_u(rng));
    const double b = std::exp(log_u(rng));
    ASSERT_LE(combine(CombineMode::kMax, a, b), combine(CombineMode::kSum, a, b));
    ASSERT_LE(combine(CombineMode::kSum, a, b), combine(CombineMode::kMax, 2 * a, 2 * b));
  }
}

GTEST_TEST(TransformCertTest, IdentityLeavesValuesUnchanged) {
  const Certificate c(ISS{kSq, GainFn::power(3), post_scale(2.0, kId)});
  const ISS out = transform_cert(c, CoordinateTransform::identity(2), CoordinateTransform::identity(1))
                      .as<ISS>();
  for (double s : {0.1, 1.0, 4.0}) {
    EXPECT_NEAR(out.alpha(s), s * s, 1e-12 * s * s);
    EXPECT_NEAR(out.beta(s), s * s * s, 1e-12 * s * s * s);
    EXPECT_NEAR(out.sigma(s), 2 * s, 1e-12 * s);
  }
}

GTEST_TEST(TransformCertTest, StretchedAxes) {
  // (x, y) -> (2x, y/2): |x|/2 <= |T(x)| <= 2|x|.
  const auto t = CoordinateTransform::generic(
      "stretch", 2, [](std::span<const double> z) { return Vec{2 * z[0], z[1] / 2}; },
      [](std::span<const double> z) { return Vec{z[0] / 2, 2 * z[1]}; });
  const Certificate c(ISS{kId, kId, kId});
  // Sampled bounds are lagged by one knot, so the result is conservative by at
  // most one grid ratio.
  const RadiusGrid coarse;
  const double ratio = std::pow(coarse.r_max / coarse.r_min, 1.0 / static_cast<double>(coarse.count - 1));
  const ISS out = transform_cert(c, t, CoordinateTransform::identity(1), coarse).as<ISS>();
  const ISS fine = transform_cert(c, t, CoordinateTransform::identity(1), {1e-3, 1e3, 4000, 8}).as<ISS>();
  for (double s : {0.01, 1.0, 30.0}) {
    EXPECT_LE(out.alpha(s), s / 2 * (1 + 1e-12));
    EXPECT_GE(out.alpha(s), s / 2 / (ratio * ratio));
    EXPECT_GE(out.beta(s), 2 * s * (1 - 1e-12));
    EXPECT_LE(out.beta(s), 2 * s * ratio * ratio);
    EXPECT_NEAR(out.sigma(s), s, 1e-9 * s);
    EXPECT_NEAR(fine.alpha(s), s / 2, 0.01 * s);
    EXPECT_NEAR(fine.beta(s), 2 * s, 0.02 * s);
  }
}

GTEST_TEST(TransformCertTest, Errors) {
  const Certificate iss(ISS{kSq, kId, kSq});
  EXPECT_THROW(transform_cert(iss, CoordinateTransform::identity(1)), DomainError);
  EXPECT_THROW(transform_cert(Certificate(L2Stable{kSq}), CoordinateTransform::identity(1)), DomainError);
  EXPECT_THROW(transform_cert(linear1d_l2(1, 1), CoordinateTransform::identity(1),
                              CoordinateTransform::identity(1)),
               DomainError);
}

GTEST_TEST(OutputPropertyTest, ConstructedFieldsCertify) {
  const Certificate iss(ISS{GainFn::power(3), GainFn::exp_minus_one(), sum(kSq, kId)}, CombineMode::kSum);
  const Certificate iiss(IISS{GainFn::log_one_plus(), kSq, kId, GainFn::power(4)});
  EXPECT_TRUE(fields_certified(iss_to_linear_l2(iss, 0.5, 2, 3).cert));
  EXPECT_TRUE(fields_certified(alpha_integrable_to_l2(cubic_alpha(), 3).cert));
  EXPECT_TRUE(fields_certified(linear_l2_to_iss(linear1d_l2(2.0, 0.5))));
  EXPECT_TRUE(fields_certified(nonlinear_l2_to_iiss(bilinear_l2())));
  EXPECT_TRUE(fields_certified(sum_to_max(iss)));
  EXPECT_TRUE(fields_certified(
      transform_cert(iss, CoordinateTransform::registered("example2"), CoordinateTransform::identity(1))));
  // Square roots of log-growth alphas stay unbounded but slowly; the
  // advisory check is the only one allowed to flag them.
  const auto r = iiss_to_nonlinear_l2(iiss, 2.0, 1, 1);
  for (const auto& [name, rep] : certify_fields(r.cert)) {
    EXPECT_TRUE(rep.zero_at_zero && rep.monotone_on_grid) << name;
  }
}

// ---------------------------------------------------------------------------
// Soundness on simulated trajectories.

GTEST_TEST(BridgeTest, CubicAlphaIntegrableToL2) {
  const SystemModel m = make_model("ex1_cubic");
  expect_bridge(cubic_alpha(), alpha_integrable_to_l2(cubic_alpha(), 1), m, short_spec(11));
}

GTEST_TEST(BridgeTest, LinearIssToLinearL2) {
  const SystemModel m = make_model("linear1d", {{"a", 1.0}, {"b", 1.0}});
  const Certificate iss = linear_l2_to_iss(linear1d_l2(1.0, 1.0));
  for (double gain : {1.0, 0.5, 3.0}) {
    expect_bridge(iss, iss_to_linear_l2(iss, gain, 1, 1), m, short_spec(12));
  }
  expect_bridge(sum_to_max(iss), iss_to_linear_l2(sum_to_max(iss), 1.0, 1, 1), m, short_spec(13));
}

GTEST_TEST(BridgeTest, BilinearIissToNonlinearL2) {
  const SystemModel m = make_model("ex3_bilinear");
  const Certificate iiss = nonlinear_l2_to_iiss(bilinear_l2());
  const SamplerSpec spec = short_spec(14);
  expect_bridge(bilinear_l2(), {CoordinateTransform::identity(1), CoordinateTransform::identity(1), iiss},
                m, spec);
  for (double lambda : {1.0, 4.0, 0.25}) {
    expect_bridge(iiss, iiss_to_nonlinear_l2(iiss, lambda, 1, 1), m, spec);
  }
}

GTEST_TEST(BridgeTest, CubicAlphaIntegrableUnderExample2Transform) {
  const SystemModel m = make_model("ex1_cubic");
  const auto t = CoordinateTransform::registered("example2");
  const Certificate moved = transform_cert(cubic_alpha(), t);
  expect_bridge(cubic_alpha(), {t, std::nullopt, moved}, m, short_spec(15));
}

GTEST_TEST(BridgeTest, LinearIssUnderStateAndInputTransforms) {
  const SystemModel m = make_model("linear1d", {{"a", 2.0}, {"b", 1.0}});
  const Certificate iss = linear_l2_to_iss(linear1d_l2(2.0, 1.0));
  const auto t = CoordinateTransform::diagonal_upper(sum(kId, GainFn::power(3)), 1);
  const auto s = CoordinateTransform::registered("example2");
  expect_bridge(iss, {t, s, transform_cert(iss, t, s)}, m, short_spec(16));
}

}  // namespace
}  // namespace issl2
