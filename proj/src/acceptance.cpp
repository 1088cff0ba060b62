#include "issl2/acceptance.hpp"

#include <chrono>
#include <cstdio>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "issl2/certificates.hpp"
#include "issl2/errors.hpp"
#include "issl2/fixtures.hpp"
#include "issl2/interconnect.hpp"
#include "issl2/sampling.hpp"
#include "issl2/simulate.hpp"

namespace issl2 {

namespace {

std::string fmt(double v) { return format_number(v); }

struct Check {
  bool pass = true;
  std::ostringstream detail;
};

// C1: ||x||^2 on [0, 1] for dx = -x^3, x0 = 1, against log(3) / 2.
void example1_closed_form(Check& c, const AcceptanceOptions&) {
  const auto start = std::chrono::steady_clock::now();
  const SystemModel m = make_model("ex1_cubic");
  const Vec x0{1.0};
  const Trajectory t = integrate(m, x0, InputSignal::zero(), 1.0, 1e-4);
  const double l2 = truncated_l2_sq(t.states, 1, t.dt);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double oracle = 0.5 * std::log(3.0);
  const double rel = std::abs(l2 - oracle) / oracle;
  c.pass = rel <= 1e-5 && elapsed < 1.0;
  c.detail << "||x||^2 = " << fmt(l2) << ", log(3)/2 = " << fmt(oracle) << ", rel err " << fmt(rel)
           << " (tol 1e-5), runtime " << fmt(elapsed) << " s (limit 1 s)";
}

// C2: unbounded ||x||^2 growth for dx = -x^3 and the z-coordinate L2 bound.
void example1_growth(Check& c, const AcceptanceOptions&) {
  const double t_end = 1e4;
  const double dt = 1e-2;
  const Trajectory x = integrate(make_model("ex1_cubic"), Vec{1.0}, InputSignal::zero(), t_end, dt);
  const double l2 = truncated_l2_sq(x.states, 1, dt);
  const double z0 = example2_map(1.0);
  const Trajectory z = integrate(make_model("ex1_transformed"), Vec{z0}, InputSignal::zero(), t_end, dt);
  const std::vector<double> running = running_integral(GainFn::power(2), z.states, 1, dt);
  const double bound = 0.5 * z0 * z0;
  double worst = 0.0;
  bool z_ok = true;
  for (std::size_t k = 0; k < running.size(); ++k) {
    worst = std::max(worst, running[k] / bound);
    if (running[k] > bound * (1 + 1e-6)) z_ok = false;
  }
  c.pass = l2 > 4.9 && z_ok;
  c.detail << "||x||^2 at t=1e4 is " << fmt(l2) << " (> 4.9; closed form " << fmt(0.5 * std::log(1 + 2e4))
           << "), max ||z||^2 / (z0^2/2) = " << fmt(worst) << " (<= 1 + 1e-6)";
}

MonteCarloReport monte_carlo(const Certificate& cert, const SystemModel& m, SamplerSpec spec,
                             const AcceptanceOptions& opts) {
  spec.threads = opts.threads;
  return monte_carlo_verify(cert, m, spec);
}

void describe_mc(Check& c, const MonteCarloReport& r) {
  c.detail << "pass rate " << fmt(r.pass_rate) << " (" << r.passes << "/" << r.runs << ", blow-ups "
           << r.blow_ups << "), worst normalized margin " << fmt(r.worst_normalized_margin);
}

// C3: linear L2-gain 2 for the ex2_transformed system.
void example2_linear_gain(Check& c, const AcceptanceOptions& opts) {
  const Certificate cert = builtin_certificate("ex2_transformed_linear_l2").cert;
  SamplerSpec s;
  s.runs = 200;
  s.seed = opts.seed + 3;
  s.t_end = 20.0;
  s.dt = 1e-2;
  s.amplitude_min = -2.0;
  s.amplitude_max = 2.0;
  s.tolerance = 1e-6;
  const MonteCarloReport r = monte_carlo(cert, make_model("ex2_transformed"), s, opts);
  c.pass = r.runs == 200 && r.all_pass();
  describe_mc(c, r);
  c.detail << ", N=200, amplitudes [-2, 2], t_end=20, dt=1e-2, tol 1e-6";
}

// C4: the nonlinear L2-gain bound for the bilinear system.
void example3_nonlinear_gain(Check& c, const AcceptanceOptions& opts) {
  const Certificate cert = builtin_certificate("ex3_nonlinear_l2").cert;
  SamplerSpec s;
  s.runs = 500;
  s.seed = opts.seed + 4;
  s.t_end = 10.0;
  s.dt = 1e-3;
  s.amplitude_min = -1.5;
  s.amplitude_max = 1.5;
  s.tolerance = 1e-6;
  const MonteCarloReport r = monte_carlo(cert, make_model("ex3_bilinear"), s, opts);
  c.pass = r.runs == 500 && r.all_pass();
  describe_mc(c, r);
  c.detail << ", N=500, amplitudes [-1.5, 1.5], t_end=10, dt=1e-3, tol 1e-6";
}

// C5: no linear L2-gain bound beta(s) = s^2, gain 1 holds for the bilinear system.
void example3_falsification(Check& c, const AcceptanceOptions&) {
  const Counterexample w = falsify_linear_l2_bilinear(GainFn::power(2), 1.0);
  const double analytic_lhs = 1 + 2 * 2.0;
  const double analytic_rhs = 0.25 * std::expm1(4.0);
  c.pass = w.confirmed && std::abs(w.x0 - 1.0) <= 1e-9 && w.t_star <= 3.0 && w.relative_margin > 0.1 &&
           analytic_lhs < analytic_rhs;
  c.detail << "x0 = " << fmt(w.x0) << ", t* = " << fmt(w.t_star) << " (<= 3), simulated ||x||^2 = "
           << fmt(w.simulated_l2_sq) << " vs claimed " << fmt(w.claimed_bound) << ", margin "
           << fmt(100 * w.relative_margin) << "% (> 10%); at t*=2: 5 < " << fmt(analytic_rhs);
}

// C6: the scalar and signal inequalities behind every construction.
void lemma_suites(Check& c, const AcceptanceOptions& opts) {
  constexpr int kCases = 10000;
  std::mt19937_64 rng(opts.seed + 6);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto log_uniform = [&](double lo, double hi) {
    return std::exp(std::log(lo) + unit(rng) * (std::log(hi) - std::log(lo)));
  };
  int bounds_bad = 0, triangle_bad = 0, envelope_bad = 0, sum_bad = 0, young_bad = 0, saturated = 0;

  // Sandwich alpha_l(|z|) <= |T(z)| <= alpha_u(|z|).
  const CoordinateTransform skew = CoordinateTransform::generic(
      "skew", 2, [](std::span<const double> z) { return Vec{2 * z[0] + z[0] * z[0] * z[0], z[1]}; },
      [](std::span<const double> p) {
        const double x = solve_increasing([](double s) { return 2 * s + s * s * s; }, std::fabs(p[0]));
        return Vec{p[0] < 0 ? -x : x, p[1]};
      });
  const TransformBounds skew_bounds = numeric_bounds(skew);
  const CoordinateTransform ex2 = CoordinateTransform::registered("example2");
  const TransformBounds ex2_bounds = numeric_bounds(ex2);
  for (int i = 0; i < kCases; ++i) {
    const std::size_t p = 1 + i % 4;
    CoordinateTransform t;
    TransformBounds b;
    switch (i % 4) {
      case 0: t = CoordinateTransform::diagonal_lower(random_simple_gain(rng), p); b = numeric_bounds(t); break;
      case 1: t = CoordinateTransform::diagonal_upper(random_simple_gain(rng), p); b = numeric_bounds(t); break;
      case 2: t = skew; b = skew_bounds; break;
      default: t = ex2; b = ex2_bounds; break;
    }
    Vec z(t.dim());
    for (double& v : z) v = gauss(rng);
    const double scale = log_uniform(1e-3, 1e3) / euclidean_norm(z);
    for (double& v : z) v *= scale;
    const double r = euclidean_norm(z);
    const double image = euclidean_norm(t.apply(z));
    // Gains clamp at kSaturation; the sandwich is only meaningful below it.
    if (b.upper(r) >= kSaturation || image >= kSaturation) {
      ++saturated;
      continue;
    }
    if (b.lower(r) > image * (1 + 1e-9) + 1e-300 || image > b.upper(r) * (1 + 1e-9) + 1e-300) ++bounds_bad;
  }

  std::uniform_real_distribution<double> slope(1.05, 5.0);
  for (int i = 0; i < kCases; ++i) {
    const GainFn gamma = random_simple_gain(rng);
    const GainFn rho = GainFn::linear(slope(rng));
    const double a = log_uniform(1e-3, 1e2);
    const double b = log_uniform(1e-3, 1e2);
    const double lhs = gamma(a + b);
    if (lhs > weak_triangle_bound(gamma, rho, a, b) + 1e-9 * (1 + lhs)) ++triangle_bad;
  }

  for (int i = 0; i < kCases; ++i) {
    const GainFn a1 = random_simple_gain(rng);
    const GainFn a2 = random_simple_gain(rng);
    const double s1 = log_uniform(1e-3, 1e2);
    const double s2 = log_uniform(1e-3, 1e2);
    const double rhs = a1(s1) + a2(s2);
    if (sum_lower_envelope(a1, a2)(s1 + s2) > rhs + 1e-9 * (1 + rhs)) ++envelope_bad;
  }

  // Signal pairs: ||(x1, x2)||^2 <= 2 max ||xi||^2 and Young's split of ||x + eta||^2.
  constexpr std::size_t kSamples = 64;
  const double dt = 0.05;
  for (int i = 0; i < kCases; ++i) {
    std::vector<double> x1(kSamples), x2(kSamples), joint(2 * kSamples), plus(kSamples);
    const double a = log_uniform(1e-2, 1e2);
    const double b = log_uniform(1e-2, 1e2);
    for (std::size_t k = 0; k < kSamples; ++k) {
      x1[k] = a * gauss(rng);
      x2[k] = b * gauss(rng);
      joint[2 * k] = x1[k];
      joint[2 * k + 1] = x2[k];
      plus[k] = x1[k] + x2[k];
    }
    const double n1 = truncated_l2_sq(x1, 1, dt);
    const double n2 = truncated_l2_sq(x2, 1, dt);
    const double nj = truncated_l2_sq(joint, 2, dt);
    if (nj > 2 * std::max(n1, n2) * (1 + 1e-12)) ++sum_bad;
    const double eps = log_uniform(0.1, 10.0);
    if (truncated_l2_sq(plus, 1, dt) > young_split(n1, n2, eps) * (1 + 1e-12)) ++young_bad;
  }

  c.pass = bounds_bad + triangle_bad + envelope_bad + sum_bad + young_bad == 0;
  c.detail << "violations in 1e4 cases each: transform sandwich " << bounds_bad << " (" << saturated
           << " saturated cases skipped), weak triangle "
           << triangle_bad << ", sum lower envelope " << envelope_bad << ", sum bound " << sum_bad
           << ", Young split " << young_bad;
}

// C7: linear gains reduce the small-gain condition to k1 k2 < 1.
void linear_small_gain(Check& c, const AcceptanceOptions&) {
  int wrong = 0, checked = 0, succeeded = 0;
  for (int i = 1; i <= 10; ++i) {
    for (int j = 1; j <= 10; ++j) {
      const double k1 = 0.2 * i;
      const double k2 = 0.2 * j;
      const auto r = feedback_nl2_no_input(Certificate(NonlinearL2{GainFn::identity(), GainFn::linear(k1)}),
                                           Certificate(NonlinearL2{GainFn::identity(), GainFn::linear(k2)}));
      if (r.ok()) ++succeeded;
      if (std::abs(k1 * k2 - 1) < 0.01) continue;
      ++checked;
      if (r.ok() != (k1 * k2 < 1)) ++wrong;
    }
  }
  c.pass = wrong == 0;
  c.detail << wrong << " misclassified of " << checked << " pairs at margin >= 0.01 (" << succeeded
           << " of 100 certified)";
}

// C8: composed certificates on simulated interconnections.
void composition_soundness(Check& c, const AcceptanceOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const auto lin = [](double a, double b) { return make_model("linear1d", {{"a", a}, {"b", b}}); };
  const auto cert = [](const char* name, double a, double b) {
    return builtin_certificate(name, {{"a", a}, {"b", b}}).cert;
  };
  struct Case {
    const char* name;
    CompositionResult result;
    SystemModel model;
  };
  const Certificate bilinear = nonlinear_l2_to_iiss(sum_to_max(builtin_certificate("ex3_nonlinear_l2").cert));
  std::vector<Case> cases;
  cases.push_back({"cascade_nl2",
                   cascade_nl2(cert("linear1d_nonlinear_l2", 1, 1), cert("linear1d_nonlinear_l2", 2, 1)),
                   cascade_model(lin(1, 1), lin(2, 1))});
  cases.push_back({"feedback_nl2_no_input",
                   feedback_nl2_no_input(cert("linear1d_nonlinear_l2", 1, 0.3), cert("linear1d_nonlinear_l2", 1, 0.5)),
                   feedback_model(lin(1, 0.3), lin(1, 0.5), false)});
  cases.push_back({"feedback_nl2_max",
                   feedback_nl2_max(cert("linear1d_nonlinear_l2", 1, 0.2), cert("linear1d_nonlinear_l2", 1, 0.2)),
                   feedback_model(lin(1, 0.2), lin(1, 0.2), true)});
  cases.push_back({"cascade_iiss_direct", cascade_iiss_direct(bilinear, cert("linear1d_iiss", 1, 1), 1.0),
                   cascade_model(make_model("ex3_bilinear"), lin(1, 1))});
  std::uint64_t seed = opts.seed + 80;
  for (const Case& k : cases) {
    if (!k.result.ok()) {
      c.pass = false;
      c.detail << k.name << ": composition failed (" << k.result.failure << "); ";
      continue;
    }
    SamplerSpec s;
    s.runs = 200;
    s.seed = ++seed;
    s.t_end = 10.0;
    s.dt = 2e-3;
    s.x0_max = 1.5;
    s.tolerance = 1e-6;
    const MonteCarloReport r = monte_carlo(*k.result.cert, k.model, s, opts);
    if (!r.all_pass() || r.runs != 200) c.pass = false;
    c.detail << k.name << " " << r.passes << "/" << r.runs << "; ";
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (elapsed >= 60.0) c.pass = false;
  c.detail << "tol 1e-6, runtime " << fmt(elapsed) << " s (limit 60 s)";
}

// C9: ISS for ex2_cubic_forced pulled into linear L2-gain coordinates, checked on
// transformed trajectories.
void equivalence_soundness(Check& c, const AcceptanceOptions& opts) {
  const Certificate iss = builtin_certificate("ex2_iss").cert;
  const TransformedCertificate tc = iss_to_linear_l2(iss, 1.0, 1, 1);
  SamplerSpec s;
  s.runs = 100;
  s.seed = opts.seed + 9;
  s.t_end = 10.0;
  s.dt = 5e-3;
  s.tolerance = 1e-6;
  s.threads = opts.threads;
  const MonteCarloReport r = monte_carlo_verify(tc, make_model("ex2_cubic_forced"), s);
  c.pass = r.runs == 100 && r.all_pass();
  describe_mc(c, r);
  c.detail << ", N=100, t_end=10, dt=5e-3, tol 1e-6";
}

struct Entry {
  const char* title;
  void (*fn)(Check&, const AcceptanceOptions&);
};

const Entry kEntries[] = {
    {"ex1_cubic closed-form L2 norm", example1_closed_form},
    {"ex1_cubic unbounded L2 norm, transformed bound", example1_growth},
    {"ex2_transformed linear L2-gain 2", example2_linear_gain},
    {"ex3_bilinear nonlinear L2-gain", example3_nonlinear_gain},
    {"ex3_bilinear linear L2-gain falsification", example3_falsification},
    {"Inequality property suites", lemma_suites},
    {"Linear small-gain reduction", linear_small_gain},
    {"Composition soundness", composition_soundness},
    {"Equivalence-constructor soundness", equivalence_soundness},
};

}  // namespace

CriterionResult acceptance_criterion(int id, const AcceptanceOptions& opts) {
  if (id < 1 || id > 9) throw DomainError("acceptance criteria are numbered 1 to 9");
  const Entry& e = kEntries[id - 1];
  CriterionResult r;
  r.id = id;
  r.title = e.title;
  Check c;
  const auto start = std::chrono::steady_clock::now();
  try {
    e.fn(c, opts);
  } catch (const std::exception& ex) {
    c.pass = false;
    c.detail << "error: " << ex.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.pass = c.pass;
  r.detail = c.detail.str();
  return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 9; ++id) out.push_back(acceptance_criterion(id, opts));
  return out;
}

std::string format_criterion(const CriterionResult& r) {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f", r.seconds);
  return std::string(r.pass ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.title + " | " + r.detail +
         " (" + secs + " s)";
}

}  // namespace issl2
