#include "issl2/interconnect.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "issl2/errors.hpp"
#include "issl2/sampling.hpp"

namespace issl2 {

namespace {

using Trace = std::vector<std::string>;

std::string num(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

Certificate as_max(const Certificate& c, const char* which, Trace& trace) {
  if (c.mode == CombineMode::kMax) return c;
  trace.push_back(std::string(which) + ": sum form converted to max form (right side doubled)");
  return sum_to_max(c);
}

Certificate as_sum(const Certificate& c, const char* which, Trace& trace) {
  if (c.mode == CombineMode::kSum) return c;
  trace.push_back(std::string(which) + ": max form read as sum form (max{a,b} <= a + b)");
  return max_to_sum(c);
}

CompositionResult fail(Trace trace, std::string why, std::optional<KinfCertReport> report = std::nullopt) {
  CompositionResult r;
  trace.push_back("FAILED: " + why);
  r.failure = std::move(why);
  r.trace = std::move(trace);
  r.failed_report = std::move(report);
  return r;
}

CompositionResult success(Certificate c, Trace trace) {
  CompositionResult r;
  trace.push_back("result: " + c.describe());
  r.cert = std::move(c);
  r.trace = std::move(trace);
  return r;
}

// Certifies Id - g and records it; returns the failure message or "".
std::string check_sgc(const GainFn& g, const std::string& label, const CertifyOptions& opts, Trace& trace,
                      std::optional<KinfCertReport>& failed) {
  const KinfCertReport rep = small_gain_condition(g, opts);
  if (!rep.verdict()) {
    failed = rep;
    return "small-gain condition " + label + " failed: residual not K-infinity (" + rep.summary() + ")";
  }
  trace.push_back("small-gain condition " + label + ": Id - " + g.describe() + " certified K-infinity");
  return "";
}

// (Id - g)^{-1} without re-certifying.
GainFn loop_inverse(const GainFn& g) { return numeric_inverse(residual(g)); }

GainFn scaled_arg(double k, const GainFn& f) { return pre_scale(k, f); }

struct SubsystemCoords {
  TransformedCertificate tc;
  TransformBounds state_bounds;
};

SubsystemCoords to_linear_coords(const Certificate& iss, std::size_t n, std::size_t m, const char* which,
                                 Trace& trace) {
  SubsystemCoords out{iss_to_linear_l2(iss, 1.0, n, m), {}};
  out.state_bounds = numeric_bounds(out.tc.state_transform);
  trace.push_back(std::string(which) + ": ISS to linear L2-gain 1 in coordinates z = " +
                  out.tc.state_transform.describe() + ", v = " + out.tc.input_transform->describe());
  return out;
}

SubsystemCoords to_nl2_coords(const Certificate& iiss, std::size_t n, std::size_t m, const char* which,
                              Trace& trace) {
  SubsystemCoords out{iiss_to_nonlinear_l2(iiss, 1.0, n, m), {}};
  out.state_bounds = numeric_bounds(out.tc.state_transform);
  trace.push_back(std::string(which) + ": iISS to nonlinear L2-gain in coordinates z = " +
                  out.tc.state_transform.describe() + ", v = " + out.tc.input_transform->describe());
  return out;
}

std::string check_sector(const CoordinateTransform& a, const std::optional<CoordinateTransform>& b, double c,
                         const std::string& label, const SectorSpec& spec, SectorConstants& k, Trace& trace) {
  if (!(c > 0)) return "sector constant for " + label + " must be positive";
  const SectorReport rep = sector_check(a, b, c, spec);
  k.sample_evidence += rep.samples;
  if (!rep.pass) {
    return "sector bound " + label + " violated: needs c >= " + num(rep.worst_ratio) + ", given " + num(c);
  }
  trace.push_back("sector bound " + label + " holds on " + std::to_string(rep.samples) +
                  " samples (c = " + num(c) + ", sampled sup " + num(rep.worst_ratio) + ")");
  return "";
}

// int alpha(|x|) <= sum of squared lower bounds of the transformed states.
GainFn squared_lower_envelope(const TransformBounds& b1, const TransformBounds& b2, Trace& trace) {
  trace.push_back("lower bound on a sum of K-infinity functions applied to squared coordinate lower bounds");
  return sum_lower_envelope(square_of(b1.lower), square_of(b2.lower));
}

// b(|xi|) <= max{b rho (|xi1|), b mu (|xi2|)} <= max{b rho a_u1(|x0|), b mu a_u2(|x0|)}.
GainFn split_initial(const GainFn& b, const GainFn& rho, const GainFn& mu, const TransformBounds& b1,
                     const TransformBounds& b2) {
  return pointwise_max(compose({b, rho, b1.upper}), compose({b, mu, b2.upper}));
}

}  // namespace

double SmallGainParams::eps(int i) const {
  if (i == 1 && epsilon1) return *epsilon1;
  if (i == 2 && epsilon2) return *epsilon2;
  return epsilon;
}

const GainFn& SmallGainParams::rho_at(int i) const {
  if (i == 1 && rho1) return *rho1;
  if (i == 2 && rho2) return *rho2;
  return rho;
}

std::string SmallGainParams::validate(const CertifyOptions& opts) const {
  for (int i : {1, 2}) {
    if (!(eps(i) > 0)) return "epsilon must be positive";
    const KinfCertReport rep = certify_kinf(excess(rho_at(i)), opts);
    if (!rep.verdict()) return "rho - Id is not K-infinity for " + rho_at(i).describe() + " (" + rep.summary() + ")";
  }
  return "";
}

SectorReport sector_check(const CoordinateTransform& a, const std::optional<CoordinateTransform>& b, double c,
                          const SectorSpec& spec) {
  const std::size_t p = a.dim();
  if (b && b->dim() != p) throw DomainError("sector check needs maps of equal dimension");
  if (!(c > 0)) throw DomainError("sector constant must be positive");
  const std::vector<Vec> dirs = sphere_directions(p, std::max<std::size_t>(2 * p, spec.directions_per_dim * p));
  SectorReport rep;
  const std::size_t radii = std::max<std::size_t>(spec.radii, 2);
  const double step = std::log(spec.r_max / spec.r_min) / static_cast<double>(radii - 1);
  const double root_c = std::sqrt(c);
  for (std::size_t k = 0; k < radii; ++k) {
    const double r = spec.r_min * std::exp(step * static_cast<double>(k));
    for (const Vec& d : dirs) {
      Vec z(d);
      for (double& v : z) v *= r;
      const double lhs = euclidean_norm(a.apply(z));
      const double base = b ? euclidean_norm(b->apply(z)) : euclidean_norm(z);
      ++rep.samples;
      const double ratio = base > 0 ? (lhs / base) * (lhs / base) : (lhs > 0 ? kSaturation : 0.0);
      if (ratio > rep.worst_ratio) {
        rep.worst_ratio = ratio;
        rep.worst_point = z;
      }
      if (lhs > root_c * base * (1 + spec.tolerance)) rep.pass = false;
    }
  }
  return rep;
}

KinfCertReport small_gain_condition(const GainFn& g, const CertifyOptions& opts) {
  return certify_kinf(residual(g), opts);
}

GainFn small_gain_solve(const GainFn& a, const GainFn& g, const CertifyOptions& opts) {
  const KinfCertReport rep = small_gain_condition(g, opts);
  if (!rep.verdict()) throw PreconditionError("Id - g " + rep.summary());
  return compose(loop_inverse(g), a);
}

GridComparison compare_on_grid(const GainFn& lhs, const GainFn& rhs, const CertifyOptions& opts) {
  GridComparison out;
  out.worst_excess = -kSaturation;
  for (double s : opts.grid.samples()) {
    const double r = rhs.value(s);
    const double excess_ratio = (lhs.value(s) - r) / std::max(1.0, r);
    if (excess_ratio > out.worst_excess) {
      out.worst_excess = excess_ratio;
      out.worst_s = s;
    }
  }
  out.holds = out.worst_excess <= opts.tolerance;
  return out;
}

// ---------------------------------------------------------------------------

CompositionResult cascade_nl2(const Certificate& c1_in, const Certificate& c2_in) {
  Trace trace{"cascade of nonlinear L2-gain systems (w1 = x2)"};
  const NonlinearL2 a = as_max(c1_in, "driven system", trace).as<NonlinearL2>();
  const NonlinearL2 b = as_max(c2_in, "driving system", trace).as<NonlinearL2>();
  trace.push_back("||x||^2 = ||x1||^2 + ||x2||^2 <= 2 max of both bounds (sum bound)");
  const GainFn beta = post_scale(2.0, pointwise_max({a.beta, compose(a.gamma, b.beta), b.beta}));
  const GainFn gamma = post_scale(2.0, pointwise_max(compose(a.gamma, b.gamma), b.gamma));
  return success(Certificate(NonlinearL2{beta, gamma}), std::move(trace));
}

CompositionResult feedback_nl2_no_input(const Certificate& c1_in, const Certificate& c2_in,
                                        const CertifyOptions& opts) {
  Trace trace{"feedback of nonlinear L2-gain systems without external inputs (w1 = x2, w2 = x1)"};
  const NonlinearL2 s[2] = {as_max(c1_in, "system 1", trace).as<NonlinearL2>(),
                            as_max(c2_in, "system 2", trace).as<NonlinearL2>()};
  std::optional<KinfCertReport> failed;
  GainFn bar[2];
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const GainFn loop = compose(s[i].gamma, s[j].gamma);
    const std::string label = "Id - g" + std::to_string(i + 1) + " o g" + std::to_string(j + 1);
    if (auto why = check_sgc(loop, label, opts, trace, failed); !why.empty()) {
      return fail(std::move(trace), why, failed);
    }
    // ||xi||^2 <= max{bi, gi o bj} + gi o gj(||xi||^2)
    bar[i] = compose(loop_inverse(loop), pointwise_max(s[i].beta, compose(s[i].gamma, s[j].beta)));
  }
  trace.push_back("solved each loop bound with (Id - gi o gj)^{-1} and summed over subsystems");
  return success(Certificate(L2Stable{sum(bar[0], bar[1])}), std::move(trace));
}

CompositionResult feedback_nl2_max(const Certificate& c1_in, const Certificate& c2_in, const SmallGainParams& p,
                                   const CertifyOptions& opts) {
  Trace trace{"max-form small-gain theorem with external inputs (w1 = x2 + eta1, w2 = x1 + eta2)"};
  if (auto why = p.validate(opts); !why.empty()) return fail(std::move(trace), why);
  const NonlinearL2 s[2] = {as_max(c1_in, "system 1", trace).as<NonlinearL2>(),
                            as_max(c2_in, "system 2", trace).as<NonlinearL2>()};
  GainFn hat[2], input_term[2];
  for (int i = 0; i < 2; ++i) {
    const double e = p.eps(i + 1);
    const GainFn& rho = p.rho_at(i + 1);
    const GainFn mu = weak_triangle_companion(rho, opts);
    hat[i] = compose(s[i].gamma, scaled_arg(1 + e * e, rho));
    // gi o mu((1 + 1/eps^2) ||eta_i||^2)
    input_term[i] = compose(s[i].gamma, scaled_arg(1 + 1 / (e * e), mu));
    trace.push_back("system " + std::to_string(i + 1) + ": Young's inequality (eps = " + num(e) +
                    ") and weak triangle inequality (rho = " + rho.describe() + ")");
  }
  std::optional<KinfCertReport> failed;
  GainFn B[2], G[2];
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const GainFn loop = compose(hat[i], hat[j]);
    const std::string label = "Id - gh" + std::to_string(i + 1) + " o gh" + std::to_string(j + 1);
    if (auto why = check_sgc(loop, label, opts, trace, failed); !why.empty()) {
      return fail(std::move(trace), why, failed);
    }
    const GainFn r = loop_inverse(loop);
    B[i] = compose(r, pointwise_max(s[i].beta, compose(hat[i], s[j].beta)));
    G[i] = compose(r, pointwise_max(input_term[i], compose(hat[i], input_term[j])));
  }
  trace.push_back("summed the two solved bounds: ||x||^2 <= 2 max of the four terms");
  const GainFn beta = post_scale(2.0, pointwise_max(B[0], B[1]));
  const GainFn gamma = post_scale(2.0, pointwise_max(G[0], G[1]));
  return success(Certificate(NonlinearL2{beta, gamma}), std::move(trace));
}

CompositionResult feedback_nl2_sum(const Certificate& c1_in, const Certificate& c2_in, const SmallGainParams& p,
                                   const CertifyOptions& opts) {
  Trace trace{"sum-form small-gain theorem with external inputs (w1 = x2 + eta1, w2 = x1 + eta2)"};
  if (auto why = p.validate(opts); !why.empty()) return fail(std::move(trace), why);
  const NonlinearL2 s[2] = {as_sum(c1_in, "system 1", trace).as<NonlinearL2>(),
                            as_sum(c2_in, "system 2", trace).as<NonlinearL2>()};
  GainFn hat[2], tilde[2], input_term[2], mu[2];
  for (int i = 0; i < 2; ++i) {
    const double e = p.eps(i + 1);
    const GainFn& rho = p.rho_at(i + 1);
    mu[i] = weak_triangle_companion(rho, opts);
    hat[i] = compose(s[i].gamma, scaled_arg(1 + e * e, rho));
    tilde[i] = compose({s[i].gamma, rho, scaled_arg(1 + e * e, rho)});
    input_term[i] = compose(s[i].gamma, scaled_arg(1 + 1 / (e * e), mu[i]));
    trace.push_back("system " + std::to_string(i + 1) + ": Young's inequality (eps = " + num(e) +
                    ") and weak triangle inequality (rho = " + rho.describe() + ")");
  }
  std::optional<KinfCertReport> failed;
  GainFn bi[2], gi[2];
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const GainFn& rho = p.rho_at(i + 1);
    // gh_i o rho o gh_j <= g~_i o rho o gh_j since rho >= Id.
    const GainFn loop = compose({tilde[i], rho, hat[j]});
    const std::string label = "Id - gt" + std::to_string(i + 1) + " o rho o gh" + std::to_string(j + 1);
    if (auto why = check_sgc(loop, label, opts, trace, failed); !why.empty()) {
      return fail(std::move(trace), why, failed);
    }
    const GainFn h = compose(hat[i], mu[i]);
    const GainFn pi = sum(s[i].beta, compose({h, rho, s[j].beta}));
    const GainFn qi = sum(input_term[i], compose(h, compose(mu[i], input_term[j])));
    const GainFn r = loop_inverse(loop);
    // R(a + b) <= R rho(a) + R mu(b)
    bi[i] = compose({r, rho, pi});
    gi[i] = compose({r, mu[i], qi});
  }
  trace.push_back("solved each loop bound, split transient and input parts, and summed over subsystems");
  return success(Certificate(NonlinearL2{sum(bi[0], bi[1]), sum(gi[0], gi[1])}, CombineMode::kSum),
                 std::move(trace));
}

// ---------------------------------------------------------------------------

CompositionResult feedback_iss_via_linear(const Certificate& c1_in, const Certificate& c2_in, SectorConstants k,
                                          const SmallGainParams& p, std::size_t n1, std::size_t n2,
                                          const SectorSpec& spec) {
  Trace trace{"feedback of ISS systems through linear L2-gain coordinates (w1 = x2, w2 = x1)"};
  if (auto why = p.validate(); !why.empty()) return fail(std::move(trace), why);
  const Certificate c1 = as_max(c1_in, "system 1", trace);
  const Certificate c2 = as_max(c2_in, "system 2", trace);
  c1.as<ISS>();
  c2.as<ISS>();
  const SubsystemCoords s1 = to_linear_coords(c1, n1, n2, "system 1", trace);
  const SubsystemCoords s2 = to_linear_coords(c2, n2, n1, "system 2", trace);
  if (auto why = check_sector(*s1.tc.input_transform, s2.tc.state_transform, k.c2, "|S1| <= sqrt(c2)|T2|",
                              spec, k, trace);
      !why.empty()) {
    return fail(std::move(trace), why);
  }
  if (auto why = check_sector(*s2.tc.input_transform, s1.tc.state_transform, k.c1, "|S2| <= sqrt(c1)|T1|",
                              spec, k, trace);
      !why.empty()) {
    return fail(std::move(trace), why);
  }
  const double loop = k.c1 * k.c2;
  if (!(loop < 1.0)) return fail(std::move(trace), "small-gain condition c1 c2 < 1 failed: c1 c2 = " + num(loop));
  trace.push_back("small-gain condition c1 c2 = " + num(loop) + " < 1");

  const GainFn& b1 = s1.tc.cert.as<LinearL2>().beta;
  const GainFn& b2 = s2.tc.cert.as<LinearL2>().beta;
  // ||psi_i||^2 <= max{b_i, c_j b_j}(|xi|) / (1 - c1 c2)
  const GainFn beta1 = pointwise_max(b1, post_scale(k.c2, b2));
  const GainFn beta2 = pointwise_max(b2, post_scale(k.c1, b1));
  const GainFn beta_tilde = post_scale(1.0 / (1.0 - loop), sum(beta1, beta2));
  const GainFn& rho = p.rho;
  const GainFn mu = weak_triangle_companion(rho);
  trace.push_back("weak triangle inequality on |xi| <= |xi1| + |xi2| with rho = " + rho.describe());
  const GainFn beta = split_initial(beta_tilde, rho, mu, s1.state_bounds, s2.state_bounds);
  const GainFn alpha = squared_lower_envelope(s1.state_bounds, s2.state_bounds, trace);
  return success(Certificate(AlphaIntegrable{alpha, beta}), std::move(trace));
}

CompositionResult cascade_iiss_via_nl2(const Certificate& c1_in, const Certificate& c2_in, SectorConstants k,
                                       std::size_t n1, std::size_t n2, std::size_t m2, const SectorSpec& spec) {
  Trace trace{"cascade of iISS systems through nonlinear L2-gain coordinates (w1 = x2)"};
  const Certificate c1 = as_max(c1_in, "driven system", trace);
  const Certificate c2 = as_max(c2_in, "driving system", trace);
  c1.as<IISS>();
  c2.as<IISS>();
  const SubsystemCoords s1 = to_nl2_coords(c1, n1, n2, "driven system", trace);
  const SubsystemCoords s2 = to_nl2_coords(c2, n2, m2, "driving system", trace);
  if (auto why = check_sector(*s1.tc.input_transform, s2.tc.state_transform, k.c, "|S1| <= sqrt(c)|T2|", spec,
                              k, trace);
      !why.empty()) {
    return fail(std::move(trace), why);
  }
  const auto& a = s1.tc.cert.as<NonlinearL2>();
  const auto& b = s2.tc.cert.as<NonlinearL2>();
  const GainFn u1 = s1.state_bounds.upper;
  const GainFn u2 = s2.state_bounds.upper;
  const GainFn beta = post_scale(
      2.0, pointwise_max({compose(a.beta, u1), compose(a.gamma, post_scale(k.c, compose(b.beta, u2))),
                          compose(b.beta, u2)}));
  const GainFn gamma = post_scale(2.0, pointwise_max(compose(a.gamma, post_scale(k.c, b.gamma)), b.gamma));
  const TransformBounds sb = numeric_bounds(*s2.tc.input_transform);
  trace.push_back("input scaling from the upper bound of the driving system's input coordinates");
  const GainFn sigma = square_of(sb.upper);
  const GainFn alpha = squared_lower_envelope(s1.state_bounds, s2.state_bounds, trace);
  return success(Certificate(IISS{alpha, beta, gamma, sigma}), std::move(trace));
}

CompositionResult cascade_iiss_direct(const Certificate& c1_in, const Certificate& c2_in, double c,
                                      const CertifyOptions& opts) {
  Trace trace{"cascade of iISS systems, direct condition sigma1 <= c alpha2 (w1 = x2)"};
  if (!(c > 0)) return fail(std::move(trace), "constant c must be positive");
  const IISS a = as_max(c1_in, "driven system", trace).as<IISS>();
  const IISS b = as_max(c2_in, "driving system", trace).as<IISS>();
  const GridComparison cmp = compare_on_grid(a.sigma, post_scale(c, b.alpha), opts);
  if (!cmp.holds) {
    return fail(std::move(trace), "condition sigma1 <= c alpha2 fails at s = " + num(cmp.worst_s) +
                                      " (relative excess " + num(cmp.worst_excess) + ")");
  }
  trace.push_back("condition sigma1 <= " + num(c) + " alpha2 holds on the certification grid");
  trace.push_back("lower bound on a sum of K-infinity functions for alpha1, alpha2");
  const GainFn beta =
      post_scale(2.0, pointwise_max({a.beta, compose(a.gamma, post_scale(c, b.beta)), b.beta}));
  const GainFn gamma = post_scale(2.0, pointwise_max(compose(a.gamma, post_scale(c, b.gamma)), b.gamma));
  return success(Certificate(IISS{sum_lower_envelope(a.alpha, b.alpha), beta, gamma, b.sigma}),
                 std::move(trace));
}

CompositionResult feedback_iiss_no_input(const Certificate& c1_in, const Certificate& c2_in, SectorConstants k,
                                         const SmallGainParams& p, std::size_t n1, std::size_t n2,
                                         const SectorSpec& spec) {
  Trace trace{"feedback of iISS systems through nonlinear L2-gain coordinates (w1 = x2, w2 = x1)"};
  if (auto why = p.validate(); !why.empty()) return fail(std::move(trace), why);
  const Certificate c1 = as_max(c1_in, "system 1", trace);
  const Certificate c2 = as_max(c2_in, "system 2", trace);
  c1.as<IISS>();
  c2.as<IISS>();
  const SubsystemCoords s[2] = {to_nl2_coords(c1, n1, n2, "system 1", trace),
                                to_nl2_coords(c2, n2, n1, "system 2", trace)};
  if (auto why = check_sector(*s[0].tc.input_transform, s[1].tc.state_transform, k.c2, "|S1| <= sqrt(c2)|T2|",
                              spec, k, trace);
      !why.empty()) {
    return fail(std::move(trace), why);
  }
  if (auto why = check_sector(*s[1].tc.input_transform, s[0].tc.state_transform, k.c1, "|S2| <= sqrt(c1)|T1|",
                              spec, k, trace);
      !why.empty()) {
    return fail(std::move(trace), why);
  }
  const double c[2] = {k.c1, k.c2};
  const NonlinearL2 h[2] = {s[0].tc.cert.as<NonlinearL2>(), s[1].tc.cert.as<NonlinearL2>()};
  std::optional<KinfCertReport> failed;
  GainFn bound[2];
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    // ||psi_i||^2 <= max{b_i, g_i(c_j b_j)} + g_i(c_j g_j(c_i ||psi_i||^2))
    const GainFn loop = compose({h[i].gamma, post_scale(c[j], h[j].gamma), GainFn::linear(c[i])});
    const std::string label = "Id - gh" + std::to_string(i + 1) + "(c" + std::to_string(j + 1) + " gh" +
                              std::to_string(j + 1) + "(c" + std::to_string(i + 1) + " .))";
    if (auto why = check_sgc(loop, label, {}, trace, failed); !why.empty()) {
      return fail(std::move(trace), why, failed);
    }
    bound[i] = compose(loop_inverse(loop),
                       pointwise_max(h[i].beta, compose(h[i].gamma, post_scale(c[j], h[j].beta))));
  }
  const GainFn mu = weak_triangle_companion(p.rho);
  trace.push_back("weak triangle inequality on |xi| <= |xi1| + |xi2| with rho = " + p.rho.describe());
  const GainFn beta = split_initial(sum(bound[0], bound[1]), p.rho, mu, s[0].state_bounds, s[1].state_bounds);
  const GainFn alpha = squared_lower_envelope(s[0].state_bounds, s[1].state_bounds, trace);
  return success(Certificate(AlphaIntegrable{alpha, beta}), std::move(trace));
}

CompositionResult feedback_iiss_with_input(const Certificate& c1_in, const Certificate& c2_in, SectorConstants k,
                                           const SmallGainParams& p, std::size_t n1, std::size_t n2,
                                           const SectorSpec& spec) {
  Trace trace{"feedback of iISS systems through nonlinear L2-gain coordinates (w1 = x2 + eta1, w2 = x1 + eta2)"};
  if (auto why = p.validate(); !why.empty()) return fail(std::move(trace), why);
  const Certificate c1 = as_max(c1_in, "system 1", trace);
  const Certificate c2 = as_max(c2_in, "system 2", trace);
  c1.as<IISS>();
  c2.as<IISS>();
  const SubsystemCoords s[2] = {to_nl2_coords(c1, n1, n2, "system 1", trace),
                                to_nl2_coords(c2, n2, n1, "system 2", trace)};
  const double cs[2] = {k.cS1, k.cS2};
  const double ct[2] = {k.cT1, k.cT2};
  for (int i = 0; i < 2; ++i) {
    const std::string idx = std::to_string(i + 1);
    if (auto why = check_sector(*s[i].tc.input_transform, std::nullopt, cs[i], "|S" + idx + "(z)| <= sqrt(cS" +
                                idx + ")|z|", spec, k, trace);
        !why.empty()) {
      return fail(std::move(trace), why);
    }
    const CoordinateTransform id = CoordinateTransform::identity(s[i].tc.state_transform.dim());
    if (auto why = check_sector(id, s[i].tc.state_transform, ct[i], "|z| <= sqrt(cT" + idx + ")|T" + idx + "(z)|",
                                spec, k, trace);
        !why.empty()) {
      return fail(std::move(trace), why);
    }
  }
  const NonlinearL2 h[2] = {s[0].tc.cert.as<NonlinearL2>(), s[1].tc.cert.as<NonlinearL2>()};
  GainFn tilde[2], input_term[2];
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const double e = p.eps(i + 1);
    const GainFn& rho = p.rho_at(i + 1);
    const GainFn mu = weak_triangle_companion(rho);
    // ||S_i(w_i)||^2 <= cS_i (1+eps^2) cT_j ||psi_j||^2 + cS_i (1 + 1/eps^2) ||eta_i||^2
    tilde[i] = compose(h[i].gamma, scaled_arg(cs[i] * ct[j] * (1 + e * e), rho));
    input_term[i] = compose(h[i].gamma, scaled_arg(cs[i] * (1 + 1 / (e * e)), mu));
    trace.push_back("system " + std::to_string(i + 1) + ": sector bounds, Young's inequality (eps = " + num(e) +
                    ") and weak triangle inequality (rho = " + rho.describe() + ")");
  }
  std::optional<KinfCertReport> failed;
  GainFn B[2], G[2];
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const GainFn loop = compose(tilde[i], tilde[j]);
    const std::string label = "Id - gt" + std::to_string(i + 1) + " o gt" + std::to_string(j + 1);
    if (auto why = check_sgc(loop, label, {}, trace, failed); !why.empty()) {
      return fail(std::move(trace), why, failed);
    }
    const GainFn r = loop_inverse(loop);
    B[i] = compose(r, pointwise_max(h[i].beta, compose(tilde[i], h[j].beta)));
    G[i] = compose(r, pointwise_max(input_term[i], compose(tilde[i], input_term[j])));
  }
  const GainFn mu = weak_triangle_companion(p.rho);
  trace.push_back("weak triangle inequality on |xi| <= |xi1| + |xi2| with rho = " + p.rho.describe());
  const GainFn beta = post_scale(2.0, pointwise_max(split_initial(B[0], p.rho, mu, s[0].state_bounds,
                                                                  s[1].state_bounds),
                                                    split_initial(B[1], p.rho, mu, s[0].state_bounds,
                                                                  s[1].state_bounds)));
  const GainFn gamma = post_scale(2.0, pointwise_max(G[0], G[1]));
  const GainFn alpha = squared_lower_envelope(s[0].state_bounds, s[1].state_bounds, trace);
  return success(Certificate(IISS{alpha, beta, gamma, GainFn::power(2)}), std::move(trace));
}

CompositionResult feedback_iiss_direct(const Certificate& c1_in, const Certificate& c2_in,
                                       const DirectFeedbackParams& p, const CertifyOptions& opts) {
  Trace trace{"feedback of iISS systems, direct conditions (w1 = x2 + eta1, w2 = x1 + eta2)"};
  const IISS s[2] = {as_max(c1_in, "system 1", trace).as<IISS>(), as_max(c2_in, "system 2", trace).as<IISS>()};
  const GainFn rho_i[2] = {p.rho1, p.rho2};
  const double c[2] = {p.k1, p.k2};
  if (!(p.k1 > 0) || !(p.k2 > 0)) return fail(std::move(trace), "constants k1, k2 must be positive");
  const GainFn inner = p.rho_inner.value_or(p.rho);
  for (const GainFn& r : {rho_i[0], rho_i[1], p.rho, inner}) {
    const KinfCertReport rep = certify_kinf(excess(r), opts);
    if (!rep.verdict()) {
      return fail(std::move(trace), "rho - Id is not K-infinity for " + r.describe() + " (" + rep.summary() + ")",
                  rep);
    }
  }
  GainFn mu_i[2];
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const GridComparison cmp = compare_on_grid(compose(s[i].sigma, rho_i[i]), post_scale(c[j], s[j].alpha), opts);
    const std::string label = "sigma" + std::to_string(i + 1) + " o rho" + std::to_string(i + 1) + " <= k" +
                              std::to_string(j + 1) + " alpha" + std::to_string(j + 1);
    if (!cmp.holds) {
      return fail(std::move(trace), "condition " + label + " fails at s = " + num(cmp.worst_s) +
                                        " (relative excess " + num(cmp.worst_excess) + ")");
    }
    trace.push_back("condition " + label + " holds on the certification grid");
    mu_i[i] = weak_triangle_companion(rho_i[i], opts);
  }
  trace.push_back("weak triangle inequality splits sigma_i(|x_j| + |eta_i|)");
  const GainFn mu = weak_triangle_companion(p.rho, opts);
  const GainFn mu_in = weak_triangle_companion(inner, opts);
  std::optional<KinfCertReport> failed;
  GainFn B[2], G[2];
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    // A_i <= max{b_i, g_i rho(c_j b_j), g_i mu(E_i), g_i rho c_j g_j mu_in(E_j)} + g_i rho c_j g_j rho_in(c_i A_i)
    const GainFn outer = compose({s[i].gamma, p.rho, post_scale(c[j], s[j].gamma)});
    const GainFn loop = compose(outer, scaled_arg(c[i], inner));
    const std::string label = "Id - g" + std::to_string(i + 1) + " o rho o k" + std::to_string(j + 1) + " g" +
                              std::to_string(j + 1) + " o rho_in(k" + std::to_string(i + 1) + " .)";
    if (auto why = check_sgc(loop, label, opts, trace, failed); !why.empty()) {
      return fail(std::move(trace), why, failed);
    }
    const GainFn r = loop_inverse(loop);
    B[i] = compose(r, pointwise_max(s[i].beta, compose({s[i].gamma, p.rho, post_scale(c[j], s[j].beta)})));
    G[i] = compose(r, pointwise_max(compose(s[i].gamma, mu), compose(outer, mu_in)));
  }
  trace.push_back("lower bound on a sum of K-infinity functions for alpha1, alpha2");
  const GainFn beta = post_scale(2.0, pointwise_max(B[0], B[1]));
  const GainFn gamma = post_scale(2.0, pointwise_max(G[0], G[1]));
  const GainFn sigma = pointwise_max(compose(s[0].sigma, mu_i[0]), compose(s[1].sigma, mu_i[1]));
  return success(Certificate(IISS{sum_lower_envelope(s[0].alpha, s[1].alpha), beta, gamma, sigma}),
                 std::move(trace));
}

}  // namespace issl2
