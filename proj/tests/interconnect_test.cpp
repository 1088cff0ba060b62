#include "issl2/interconnect.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "issl2/errors.hpp"
#include "issl2/fixtures.hpp"
#include "issl2/sampling.hpp"
#include "issl2/simulate.hpp"

namespace issl2 {
namespace {

const GainFn kId = GainFn::identity();
const GainFn kSq = GainFn::power(2);

Certificate nl2(GainFn beta, GainFn gamma) { return Certificate(NonlinearL2{std::move(beta), std::move(gamma)}); }

Certificate iiss(GainFn alpha, GainFn beta, GainFn gamma, GainFn sigma) {
  return Certificate(IISS{std::move(alpha), std::move(beta), std::move(gamma), std::move(sigma)});
}

Certificate linear_cert(const std::string& name, double a, double b) {
  return builtin_certificate(name, {{"a", a}, {"b", b}}).cert;
}

SystemModel lin(double a, double b) { return make_model("linear1d", {{"a", a}, {"b", b}}); }

SamplerSpec soundness_spec(std::uint64_t seed) {
  SamplerSpec s;
  s.runs = 30;
  s.seed = seed;
  s.t_end = 8.0;
  s.dt = 5e-3;
  s.x0_max = 1.5;
  return s;
}

void expect_sound(const CompositionResult& r, const SystemModel& model, std::uint64_t seed) {
  ASSERT_TRUE(r.ok()) << r.failure;
  ASSERT_TRUE(fields_certified(*r.cert)) << r.cert->describe();
  const MonteCarloReport rep = monte_carlo_verify(*r.cert, model, soundness_spec(seed));
  EXPECT_TRUE(rep.all_pass()) << model.name << ": " << rep.passes << "/" << rep.runs
                              << ", worst margin " << rep.worst_normalized_margin;
}

// ---------------------------------------------------------------------------

GTEST_TEST(CascadeNl2Test, LinearGains) {
  const auto r = cascade_nl2(nl2(kId, GainFn::linear(2)), nl2(kId, GainFn::linear(3)));
  ASSERT_TRUE(r.ok());
  const auto& c = r.cert->as<NonlinearL2>();
  EXPECT_DOUBLE_EQ(c.gamma(1.5), 18.0);
  EXPECT_DOUBLE_EQ(c.beta(1.5), 6.0);
  EXPECT_FALSE(r.trace.empty());
}

GTEST_TEST(CascadeNl2Test, IdentityCertificates) {
  const auto r = cascade_nl2(nl2(kId, kId), nl2(kId, kId));
  EXPECT_DOUBLE_EQ(r.cert->as<NonlinearL2>().gamma(3.0), 6.0);
  EXPECT_DOUBLE_EQ(r.cert->as<NonlinearL2>().beta(3.0), 6.0);
}

GTEST_TEST(CascadeNl2Test, SmallDriverGainIsDominated) {
  const GainFn g1 = sum(kId, kSq);
  for (double eps : {1e-1, 1e-3, 1e-6}) {
    const auto r = cascade_nl2(nl2(kId, g1), nl2(kId, GainFn::linear(eps)));
    const GainFn& g = r.cert->as<NonlinearL2>().gamma;
    for (double s : GridSpec{}.samples()) {
      const double expected = 2 * std::max(g1(eps * s), eps * s);
      ASSERT_NEAR(g(s), expected, 1e-12 * std::max(1.0, expected));
    }
  }
}

GTEST_TEST(CascadeNl2Test, SumInputsAreConverted) {
  const auto r = cascade_nl2(builtin_certificate("ex3_nonlinear_l2").cert, nl2(kId, kId));
  ASSERT_TRUE(r.ok());
  EXPECT_NE(r.trace[1].find("sum form"), std::string::npos);
  EXPECT_THROW(cascade_nl2(Certificate(ISS{kSq, kSq, kSq}), nl2(kId, kId)), DomainError);
  EXPECT_THROW(cascade_nl2(linear_cert("linear1d_linear_l2", 1, 1), nl2(kId, kId)), DomainError);
}

GTEST_TEST(FeedbackNl2Test, NoInputLinearExample) {
  const auto r = feedback_nl2_no_input(nl2(kId, GainFn::linear(0.5)), nl2(kId, kId));
  ASSERT_TRUE(r.ok()) << r.failure;
  EXPECT_NEAR(r.cert->as<L2Stable>().beta(1.0), 4.0, 1e-9);
  EXPECT_NEAR(r.cert->as<L2Stable>().beta(2.5), 10.0, 1e-9);
}

GTEST_TEST(FeedbackNl2Test, NoInputBoundaryAndViolation) {
  for (double k1 : {1.0, 2.0}) {
    const auto r = feedback_nl2_no_input(nl2(kId, GainFn::linear(k1)), nl2(kId, kId));
    EXPECT_FALSE(r.ok());
    EXPECT_NE(r.failure.find("residual not K-infinity"), std::string::npos);
    ASSERT_TRUE(r.failed_report.has_value());
    EXPECT_FALSE(r.failed_report->verdict());
  }
}

GTEST_TEST(FeedbackNl2Test, LinearReductionGrid) {
  int misclassified = 0;
  for (int i = 1; i <= 10; ++i) {
    for (int j = 1; j <= 10; ++j) {
      const double k1 = 0.2 * i;
      const double k2 = 0.2 * j;
      const auto r = feedback_nl2_no_input(nl2(kId, GainFn::linear(k1)), nl2(kId, GainFn::linear(k2)));
      if (std::abs(k1 * k2 - 1) >= 0.01 && r.ok() != (k1 * k2 < 1)) ++misclassified;
    }
  }
  EXPECT_EQ(misclassified, 0);
}

GTEST_TEST(FeedbackNl2Test, NonlinearGainsAtTheLinearLimit) {
  // gamma_i(s) = k_i (s + delta min(s^2, s)): loop slope is at most k1 k2 (1 + delta)^2.
  const GainFn bump = sum(kId, post_scale(1e-3, compose(kId, pointwise_min(kSq, kId))));
  for (double k : {0.5, 0.9, 0.99}) {
    const auto r = feedback_nl2_no_input(nl2(kId, post_scale(k, bump)), nl2(kId, post_scale(k, bump)));
    EXPECT_TRUE(r.ok()) << k << ": " << r.failure;
  }
  const auto r = feedback_nl2_no_input(nl2(kId, post_scale(1.01, bump)), nl2(kId, kId));
  EXPECT_FALSE(r.ok());
}

GTEST_TEST(FeedbackNl2Test, MaxFormLinearReduction) {
  // gamma_hat(s) = 4 k s for rho = 2s, eps = 1; condition 16 k^2 < 1.
  for (double k : {0.05, 0.2, 0.24, 0.26, 0.3, 1.0}) {
    const auto r = feedback_nl2_max(nl2(kId, GainFn::linear(k)), nl2(kId, GainFn::linear(k)));
    EXPECT_EQ(r.ok(), 16 * k * k < 1) << k;
  }
}

GTEST_TEST(FeedbackNl2Test, MaxFormNonlinearGainWithSmallPartner) {
  const GainFn g1 = sum(kId, post_scale(0.5, GainFn::power(1.5)));
  const auto r = feedback_nl2_max(nl2(kId, g1), nl2(kId, GainFn::linear(1e-3)));
  EXPECT_FALSE(r.ok()) << "superlinear loop gain cannot satisfy the condition globally";
  const GainFn g2 = pointwise_min(GainFn::linear(0.01), GainFn::log_one_plus());
  const auto ok = feedback_nl2_max(nl2(kId, g1), nl2(kId, g2));
  EXPECT_TRUE(ok.ok()) << ok.failure;
}

GTEST_TEST(FeedbackNl2Test, MaxFormRejectsBadParameters) {
  SmallGainParams p;
  p.rho = GainFn::linear(1.0);
  const auto r = feedback_nl2_max(nl2(kId, GainFn::linear(0.01)), nl2(kId, GainFn::linear(0.01)), p);
  EXPECT_FALSE(r.ok());
  SmallGainParams q;
  q.epsilon2 = -1.0;
  EXPECT_FALSE(feedback_nl2_max(nl2(kId, GainFn::linear(0.01)), nl2(kId, GainFn::linear(0.01)), q).ok());
}

GTEST_TEST(FeedbackNl2Test, SumFormLinearReduction) {
  // gt = 8 k s, gh = 4 k s: condition 64 k^2 < 1.
  const auto small = feedback_nl2_sum(nl2(kId, GainFn::linear(0.1)), nl2(kId, GainFn::linear(0.1)));
  EXPECT_TRUE(small.ok()) << small.failure;
  EXPECT_EQ(small.cert->mode, CombineMode::kSum);
  EXPECT_FALSE(feedback_nl2_sum(nl2(kId, GainFn::linear(0.2)), nl2(kId, GainFn::linear(0.2))).ok());
  for (double k : {0.05, 0.12, 0.124, 0.126, 0.13}) {
    const auto r = feedback_nl2_sum(nl2(kId, GainFn::linear(k)), nl2(kId, GainFn::linear(k)));
    EXPECT_EQ(r.ok(), 64 * k * k < 1) << k;
  }
}

GTEST_TEST(FeedbackNl2Test, PerSubsystemOverrides) {
  SmallGainParams p;
  p.epsilon1 = 0.5;
  p.rho2 = GainFn::linear(3.0);
  EXPECT_DOUBLE_EQ(p.eps(1), 0.5);
  EXPECT_DOUBLE_EQ(p.eps(2), 1.0);
  EXPECT_DOUBLE_EQ(p.rho_at(1)(1.0), 2.0);
  EXPECT_DOUBLE_EQ(p.rho_at(2)(1.0), 3.0);
  // gh1 = k rho1(1.25 s) = 2.5 k s, gh2 = k rho2(2 s) = 6 k s; condition 15 k^2 < 1.
  EXPECT_TRUE(feedback_nl2_max(nl2(kId, GainFn::linear(0.25)), nl2(kId, GainFn::linear(0.25)), p).ok());
  EXPECT_FALSE(feedback_nl2_max(nl2(kId, GainFn::linear(0.26)), nl2(kId, GainFn::linear(0.26)), p).ok());
}

// ---------------------------------------------------------------------------

GTEST_TEST(SectorTest, Examples) {
  const auto id = CoordinateTransform::identity(1);
  EXPECT_TRUE(sector_check(id, id, 1.0).pass);
  const auto twice = CoordinateTransform::diagonal_upper(GainFn::linear(2), 1);
  EXPECT_FALSE(sector_check(twice, id, 1.0).pass);
  EXPECT_TRUE(sector_check(twice, std::nullopt, 4.0).pass);
  EXPECT_NEAR(sector_check(twice, id, 4.0).worst_ratio, 4.0, 1e-12);
}

GTEST_TEST(SectorTest, SupRatioMatchesDenseSweep) {
  const auto s = CoordinateTransform::diagonal_upper(kId, 1);
  const auto t = CoordinateTransform::diagonal_lower(kSq, 1);
  const SectorSpec spec;
  // |z| / z^2 is largest at the smallest radius.
  double oracle = 0;
  for (int k = 0; k <= 100000; ++k) {
    const double r = spec.r_min * std::pow(spec.r_max / spec.r_min, k / 100000.0);
    oracle = std::max(oracle, 1 / (r * r));
  }
  const SectorReport rep = sector_check(s, t, 1.0, spec);
  EXPECT_FALSE(rep.pass);
  EXPECT_NEAR(rep.worst_ratio / oracle, 1.0, 1e-9);
  EXPECT_TRUE(sector_check(s, t, oracle * (1 + 1e-6), spec).pass);
}

GTEST_TEST(SectorTest, MultiDimensional) {
  const auto s = CoordinateTransform::diagonal_upper(GainFn::linear(0.5), 3);
  const auto id = CoordinateTransform::identity(3);
  // The upper diagonal construction in R^3 scales every axis by sqrt(3) / 2.
  const SectorReport rep = sector_check(s, id, 0.75);
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.worst_ratio, 0.75, 1e-12);
  EXPECT_FALSE(sector_check(s, id, 0.7).pass);
  EXPECT_GT(rep.samples, 1000u);
  EXPECT_THROW(sector_check(s, CoordinateTransform::identity(2), 1.0), DomainError);
}

// ---------------------------------------------------------------------------

GTEST_TEST(SmallGainSolveTest, LinearExamples) {
  EXPECT_NEAR(small_gain_solve(kId, GainFn::linear(0.5))(3.0), 6.0, 1e-12);
  EXPECT_NEAR(small_gain_solve(kSq, GainFn::linear(0.5))(3.0), 18.0, 1e-12);
  EXPECT_THROW(small_gain_solve(kId, kId), PreconditionError);
  EXPECT_THROW(small_gain_solve(kId, GainFn::power(0.5)), PreconditionError);
}

// g = k min(u, u^p) with k p < 1 keeps Id - g strictly increasing.
GainFn random_loop_gain(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pu(1.0, 3.0);
  const double p = pu(rng);
  std::uniform_real_distribution<double> ku(0.01, 0.95 / p);
  return post_scale(ku(rng), pointwise_min(kId, GainFn::power(p)));
}

GTEST_TEST(SmallGainSolveTest, FixedPointConsistencyAndMinimality) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> log_s(std::log(1e-3), std::log(1e3));
  for (int i = 0; i < 1000; ++i) {
    const GainFn a = random_simple_gain(rng);
    const GainFn g = random_loop_gain(rng);
    const double s = std::exp(log_s(rng));
    const double u = small_gain_solve(a, g)(s);
    if (u > 1e290) continue;  // saturated
    const double scale = std::max(1.0, u);
    ASSERT_GE(u, a(s) + g(u) - 1e-8 * scale) << i;
    const double below = u * (1 - 1e-6);
    ASSERT_LT(below, a(s) + g(below) + 1e-12 * scale) << i;
  }
}

GTEST_TEST(SmallGainSolveTest, MatchesFixedPointIteration) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const GainFn a = random_simple_gain(rng);
    const GainFn g = random_loop_gain(rng);
    const double s = 0.5 + i * 0.01;
    double u = 0;
    for (int it = 0; it < 100000; ++it) {
      const double next = a(s) + g(u);
      if (std::abs(next - u) <= 1e-14 * std::max(1.0, next)) break;
      u = next;
    }
    ASSERT_NEAR(small_gain_solve(a, g)(s), u, 1e-6 * std::max(1.0, u)) << i;
  }
}

// ---------------------------------------------------------------------------

GTEST_TEST(IssFeedbackTest, ScaledInputCoordinates) {
  const Certificate c(ISS{kSq, kSq, post_scale(0.25, kSq)});
  SectorConstants k;
  k.c1 = k.c2 = 0.25;
  const auto r = feedback_iss_via_linear(c, c, k);
  ASSERT_TRUE(r.ok()) << r.failure;
  // beta_tilde = (s^2 + s^2) / (1 - 1/16), rho = mu = 2s.
  const double expected = 2.0 / (1 - 1.0 / 16) * 4.0;
  const GainFn& beta = r.cert->as<AlphaIntegrable>().beta;
  for (double s : {0.01, 0.5, 3.0}) {
    EXPECT_GE(beta(s), expected * s * s * (1 - 1e-9));
    EXPECT_LE(beta(s), expected * s * s * 1.6);
  }
}

GTEST_TEST(IssFeedbackTest, FailsAtUnitLoopOrBadSector) {
  const Certificate c(ISS{kSq, kSq, post_scale(0.25, kSq)});
  SectorConstants k;
  k.c1 = 4.0;
  k.c2 = 0.25;
  const auto loop = feedback_iss_via_linear(c, c, k);
  EXPECT_FALSE(loop.ok());
  EXPECT_NE(loop.failure.find("c1 c2 < 1"), std::string::npos);
  k.c1 = 0.1;
  const auto sector = feedback_iss_via_linear(c, c, k);
  EXPECT_FALSE(sector.ok());
  EXPECT_NE(sector.failure.find("|S2| <= sqrt(c1)|T1|"), std::string::npos);
}

GTEST_TEST(IissCascadeTest, DirectConditions) {
  const Certificate driven = iiss(kSq, kId, kId, kSq);
  EXPECT_TRUE(cascade_iiss_direct(driven, iiss(kSq, kId, kId, kSq), 1.0).ok());
  const Certificate heavy = iiss(kSq, kId, kId, post_scale(2, kSq));
  const auto fail = cascade_iiss_direct(heavy, iiss(kSq, kId, kId, kSq), 1.0);
  EXPECT_FALSE(fail.ok());
  EXPECT_NE(fail.failure.find("fails at s ="), std::string::npos);
  EXPECT_TRUE(cascade_iiss_direct(heavy, iiss(kSq, kId, kId, kSq), 2.0).ok());

  const auto ids = cascade_iiss_direct(iiss(kId, kId, kId, kId), iiss(kId, kId, kId, kId), 1.0);
  ASSERT_TRUE(ids.ok());
  EXPECT_DOUBLE_EQ(ids.cert->as<IISS>().beta(2.0), 4.0);
  EXPECT_DOUBLE_EQ(ids.cert->as<IISS>().gamma(2.0), 4.0);
  EXPECT_DOUBLE_EQ(ids.cert->as<IISS>().sigma(2.0), 2.0);
}

GTEST_TEST(IissCascadeTest, ThroughCoordinatesIdentityReduction) {
  const Certificate c = iiss(kSq, kId, kId, kSq);
  SectorConstants k;
  const auto r = cascade_iiss_via_nl2(c, c, k);
  ASSERT_TRUE(r.ok()) << r.failure;
  const auto& out = r.cert->as<IISS>();
  for (double s : {0.01, 1.0, 50.0}) {
    EXPECT_GE(out.beta(s), 2 * s * (1 - 1e-12));
    EXPECT_LE(out.beta(s), 2 * s * 1.3);
    EXPECT_NEAR(out.gamma(s), 2 * s, 1e-12 * s);
  }
}

GTEST_TEST(IissCascadeTest, GammaMonotoneInSectorConstant) {
  const Certificate c = iiss(kSq, kId, kSq, kSq);
  SectorConstants k;
  k.c = 1.0;
  const auto a = cascade_iiss_via_nl2(c, c, k);
  k.c = 2.0;
  const auto b = cascade_iiss_via_nl2(c, c, k);
  ASSERT_TRUE(a.ok() && b.ok());
  for (double s : GridSpec{}.samples()) {
    ASSERT_LE(a.cert->as<IISS>().gamma(s), b.cert->as<IISS>().gamma(s)) << s;
  }
  k.c = 0.5;
  EXPECT_FALSE(cascade_iiss_via_nl2(c, c, k).ok());
}

GTEST_TEST(IissFeedbackTest, NoInputReductions) {
  SectorConstants k;
  EXPECT_TRUE(feedback_iiss_no_input(iiss(kSq, kId, GainFn::linear(0.5), kSq),
                                     iiss(kSq, kId, GainFn::linear(0.5), kSq), k)
                  .ok());
  EXPECT_FALSE(feedback_iiss_no_input(iiss(kSq, kId, kId, kSq), iiss(kSq, kId, kId, kSq), k).ok());
  k.c1 = k.c2 = 2.0;
  const auto r = feedback_iiss_no_input(iiss(kSq, kId, GainFn::linear(0.125), kSq),
                                        iiss(kSq, kId, GainFn::linear(0.125), kSq), k);
  EXPECT_TRUE(r.ok()) << r.failure;
}

GTEST_TEST(IissFeedbackTest, WithInputReductions) {
  SectorConstants k;
  const auto r = feedback_iiss_with_input(iiss(kSq, kId, GainFn::linear(0.05), kSq),
                                          iiss(kSq, kId, GainFn::linear(0.05), kSq), k);
  ASSERT_TRUE(r.ok()) << r.failure;
  EXPECT_EQ(r.cert->kind(), CertKind::kIISS);
  EXPECT_FALSE(feedback_iiss_with_input(iiss(kSq, kId, kId, kSq), iiss(kSq, kId, kId, kSq), k).ok());

  k.cS1 = 2.0;
  const auto doubled = feedback_iiss_with_input(iiss(kSq, kId, GainFn::linear(0.05), kSq),
                                                iiss(kSq, kId, GainFn::linear(0.05), kSq), k);
  ASSERT_TRUE(doubled.ok());
  for (double s : GridSpec{}.samples()) {
    ASSERT_LE(r.cert->as<IISS>().gamma(s), doubled.cert->as<IISS>().gamma(s) * (1 + 1e-12)) << s;
  }
}

GTEST_TEST(IissFeedbackTest, DirectConditions) {
  DirectFeedbackParams p;
  const Certificate c = iiss(post_scale(4, kSq), kId, GainFn::linear(0.1), kSq);
  const auto r = feedback_iiss_direct(c, c, p);
  ASSERT_TRUE(r.ok()) << r.failure;
  const Certificate unit = iiss(post_scale(4, kSq), kId, kId, kSq);
  EXPECT_FALSE(feedback_iiss_direct(unit, unit, p).ok());
  p.k1 = 0.5;
  const auto grid = feedback_iiss_direct(c, c, p);
  EXPECT_FALSE(grid.ok());
  EXPECT_NE(grid.failure.find("sigma2 o rho2 <= k1 alpha1"), std::string::npos);
}

// ---------------------------------------------------------------------------

GTEST_TEST(MonotonicityTest, ComposedGainsGrowWithInputGains) {
  std::mt19937_64 rng(21);
  const std::vector<double> grid = GridSpec{1e3, 64}.samples();
  for (int i = 0; i < 50; ++i) {
    const GainFn b = random_simple_gain(rng);
    const GainFn g = post_scale(0.05, pointwise_min(kId, random_simple_gain(rng)));
    const GainFn b_big = post_scale(1.5, b);
    const GainFn g_big = post_scale(1.5, g);
    const auto base = cascade_nl2(nl2(b, g), nl2(b, g));
    const auto more = cascade_nl2(nl2(b_big, g_big), nl2(b, g));
    const auto fb = feedback_nl2_max(nl2(b, g), nl2(b, g));
    const auto fb_more = feedback_nl2_max(nl2(b_big, g), nl2(b, g_big));
    ASSERT_TRUE(fb.ok() && fb_more.ok()) << fb.failure << fb_more.failure;
    for (double s : grid) {
      ASSERT_LE(base.cert->as<NonlinearL2>().beta(s), more.cert->as<NonlinearL2>().beta(s));
      ASSERT_LE(base.cert->as<NonlinearL2>().gamma(s), more.cert->as<NonlinearL2>().gamma(s));
      const double tol = 1e-9;
      ASSERT_LE(fb.cert->as<NonlinearL2>().beta(s),
                fb_more.cert->as<NonlinearL2>().beta(s) * (1 + tol) + tol);
      ASSERT_LE(fb.cert->as<NonlinearL2>().gamma(s),
                fb_more.cert->as<NonlinearL2>().gamma(s) * (1 + tol) + tol);
    }
  }
}

// ---------------------------------------------------------------------------
// Composed certificates on simulated interconnections.

GTEST_TEST(SoundnessTest, CascadeNl2) {
  const auto r = cascade_nl2(linear_cert("linear1d_nonlinear_l2", 1, 1), linear_cert("linear1d_nonlinear_l2", 2, 1));
  expect_sound(r, cascade_model(lin(1, 1), lin(2, 1)), 101);
}

GTEST_TEST(SoundnessTest, FeedbackNl2NoInput) {
  const auto r = feedback_nl2_no_input(linear_cert("linear1d_nonlinear_l2", 1, 0.3),
                                       linear_cert("linear1d_nonlinear_l2", 1, 0.5));
  expect_sound(r, feedback_model(lin(1, 0.3), lin(1, 0.5), false), 102);
}

GTEST_TEST(SoundnessTest, FeedbackNl2Max) {
  const Certificate c = linear_cert("linear1d_nonlinear_l2", 1, 0.2);
  expect_sound(feedback_nl2_max(c, c), feedback_model(lin(1, 0.2), lin(1, 0.2), true), 103);
}

GTEST_TEST(SoundnessTest, FeedbackNl2Sum) {
  const Certificate c = linear_cert("linear1d_nonlinear_l2", 1, 0.2);
  expect_sound(feedback_nl2_sum(c, c), feedback_model(lin(1, 0.2), lin(1, 0.2), true), 104);
}

GTEST_TEST(SoundnessTest, FeedbackIssViaLinear) {
  const Certificate c = linear_cert("linear1d_iss", 1, 0.5);
  SectorConstants k;
  k.c1 = k.c2 = 2 * 0.5 * 0.5;
  expect_sound(feedback_iss_via_linear(c, c, k), feedback_model(lin(1, 0.5), lin(1, 0.5), false), 105);
}

GTEST_TEST(SoundnessTest, CascadeIissViaCoordinates) {
  const Certificate driven = nonlinear_l2_to_iiss(sum_to_max(builtin_certificate("ex3_nonlinear_l2").cert));
  SectorConstants k;
  const auto r = cascade_iiss_via_nl2(driven, linear_cert("linear1d_iiss", 1, 1), k);
  expect_sound(r, cascade_model(make_model("ex3_bilinear"), lin(1, 1)), 106);
}

GTEST_TEST(SoundnessTest, CascadeIissDirect) {
  const Certificate driven = nonlinear_l2_to_iiss(sum_to_max(builtin_certificate("ex3_nonlinear_l2").cert));
  const auto r = cascade_iiss_direct(driven, linear_cert("linear1d_iiss", 1, 1), 1.0);
  expect_sound(r, cascade_model(make_model("ex3_bilinear"), lin(1, 1)), 107);
}

GTEST_TEST(SoundnessTest, FeedbackIissNoInput) {
  const Certificate c = linear_cert("linear1d_iiss", 1, 0.5);
  expect_sound(feedback_iiss_no_input(c, c, SectorConstants{}), feedback_model(lin(1, 0.5), lin(1, 0.5), false),
               108);
}

GTEST_TEST(SoundnessTest, FeedbackIissWithInput) {
  const Certificate c = linear_cert("linear1d_iiss", 1, 0.3);
  expect_sound(feedback_iiss_with_input(c, c, SectorConstants{}), feedback_model(lin(1, 0.3), lin(1, 0.3), true),
               109);
}

GTEST_TEST(SoundnessTest, FeedbackIissDirect) {
  DirectFeedbackParams p;
  p.k1 = p.k2 = 4.0;
  const Certificate c = linear_cert("linear1d_iiss", 1, 0.1);
  expect_sound(feedback_iiss_direct(c, c, p), feedback_model(lin(1, 0.1), lin(1, 0.1), true), 110);
}

}  // namespace
}  // namespace issl2
