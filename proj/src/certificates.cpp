#include "issl2/certificates.hpp"

#include <cmath>

#include "issl2/errors.hpp"

namespace issl2 {

namespace {

const CoordinateTransform& require_input_transform(const std::optional<CoordinateTransform>& s) {
  if (!s) throw DomainError("certificate has an input term but no input transform was given");
  return *s;
}

void require_dim(std::size_t d, const char* what) {
  if (d < 1) throw DomainError(std::string(what) + " must be at least 1");
}

// T = diagonal_lower(alpha^{1/2}, n) and beta o lower_T^{-1}.
std::pair<CoordinateTransform, GainFn> state_change(const GainFn& alpha, const GainFn& beta,
                                                    std::size_t n) {
  require_dim(n, "state dimension");
  const CoordinateTransform t = CoordinateTransform::diagonal_lower(sqrt_of(alpha), n);
  const TransformBounds b = numeric_bounds(t);
  return {t, compose(beta, numeric_inverse(b.lower))};
}

}  // namespace

const char* to_string(CombineMode mode) { return mode == CombineMode::kMax ? "max" : "sum"; }

const char* to_string(CertKind kind) {
  switch (kind) {
    case CertKind::kAlphaIntegrable: return "alpha_integrable";
    case CertKind::kL2Stable: return "l2_stable";
    case CertKind::kISS: return "iss";
    case CertKind::kIISS: return "iiss";
    case CertKind::kLinearL2: return "linear_l2";
    case CertKind::kNonlinearL2: return "nonlinear_l2";
  }
  return "unknown";
}

void throw_kind_mismatch(CertKind got, CertKind wanted) {
  throw DomainError(std::string("expected a ") + to_string(wanted) + " certificate, got " +
                    to_string(got));
}

bool Certificate::has_input() const {
  const CertKind k = kind();
  return k != CertKind::kAlphaIntegrable && k != CertKind::kL2Stable;
}

bool Certificate::l2_left_side() const {
  const CertKind k = kind();
  return k == CertKind::kL2Stable || k == CertKind::kLinearL2 || k == CertKind::kNonlinearL2;
}

std::vector<std::pair<std::string, GainFn>> Certificate::fields() const {
  struct Visitor {
    std::vector<std::pair<std::string, GainFn>> operator()(const AlphaIntegrable& c) const {
      return {{"alpha", c.alpha}, {"beta", c.beta}};
    }
    std::vector<std::pair<std::string, GainFn>> operator()(const L2Stable& c) const {
      return {{"beta", c.beta}};
    }
    std::vector<std::pair<std::string, GainFn>> operator()(const ISS& c) const {
      return {{"alpha", c.alpha}, {"beta", c.beta}, {"sigma", c.sigma}};
    }
    std::vector<std::pair<std::string, GainFn>> operator()(const IISS& c) const {
      return {{"alpha", c.alpha}, {"beta", c.beta}, {"gamma", c.gamma}, {"sigma", c.sigma}};
    }
    std::vector<std::pair<std::string, GainFn>> operator()(const LinearL2& c) const {
      return {{"beta", c.beta}};
    }
    std::vector<std::pair<std::string, GainFn>> operator()(const NonlinearL2& c) const {
      return {{"beta", c.beta}, {"gamma", c.gamma}};
    }
  };
  return std::visit(Visitor{}, body);
}

std::string Certificate::describe() const {
  std::string out = std::string(to_string(kind())) + " [" + to_string(mode) + "]";
  for (const auto& [name, f] : fields()) out += "\n  " + name + " = " + f.describe();
  if (kind() == CertKind::kLinearL2) {
    out += "\n  gain_sq = " + std::to_string(as<LinearL2>().gain_sq);
  }
  return out;
}

std::vector<std::pair<std::string, KinfCertReport>> certify_fields(const Certificate& c,
                                                                   const CertifyOptions& opts) {
  std::vector<std::pair<std::string, KinfCertReport>> out;
  for (const auto& [name, f] : c.fields()) out.emplace_back(name, certify_kinf(f, opts));
  if (c.kind() == CertKind::kLinearL2 && !(c.as<LinearL2>().gain_sq >= 0)) {
    out.emplace_back("gain_sq", KinfCertReport{});
  }
  return out;
}

bool fields_certified(const Certificate& c, const CertifyOptions& opts) {
  for (const auto& [name, rep] : certify_fields(c, opts)) {
    if (!rep.verdict()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

Certificate l2_to_alpha_integrable(const Certificate& l2_stable) {
  const auto& c = l2_stable.as<L2Stable>();
  return Certificate(AlphaIntegrable{GainFn::power(2), c.beta}, l2_stable.mode);
}

TransformedCertificate alpha_integrable_to_l2(const Certificate& alpha_integrable, std::size_t n) {
  const auto& c = alpha_integrable.as<AlphaIntegrable>();
  auto [t, beta] = state_change(c.alpha, c.beta, n);
  return {t, std::nullopt, Certificate(L2Stable{beta}, alpha_integrable.mode)};
}

Certificate linear_l2_to_iss(const Certificate& linear_l2) {
  const auto& c = linear_l2.as<LinearL2>();
  if (!(c.gain_sq > 0)) throw DomainError("linear gain must be positive to form an ISS sigma");
  return Certificate(ISS{GainFn::power(2), c.beta, post_scale(c.gain_sq, GainFn::power(2))},
                     linear_l2.mode);
}

TransformedCertificate iss_to_linear_l2(const Certificate& iss, double gain, std::size_t n,
                                        std::size_t m) {
  const auto& c = iss.as<ISS>();
  if (!(gain > 0)) throw DomainError("linear gain must be positive");
  require_dim(m, "input dimension");
  auto [t, beta] = state_change(c.alpha, c.beta, n);
  const CoordinateTransform s =
      CoordinateTransform::diagonal_upper(post_scale(1.0 / gain, sqrt_of(c.sigma)), m);
  return {t, s, Certificate(LinearL2{beta, gain * gain}, iss.mode)};
}

Certificate nonlinear_l2_to_iiss(const Certificate& nonlinear_l2) {
  const auto& c = nonlinear_l2.as<NonlinearL2>();
  return Certificate(IISS{GainFn::power(2), c.beta, c.gamma, GainFn::power(2)}, nonlinear_l2.mode);
}

TransformedCertificate iiss_to_nonlinear_l2(const Certificate& iiss, double lambda, std::size_t n,
                                            std::size_t m) {
  const auto& c = iiss.as<IISS>();
  if (!(lambda > 0)) throw DomainError("lambda must be positive");
  require_dim(m, "input dimension");
  auto [t, beta] = state_change(c.alpha, c.beta, n);
  const CoordinateTransform s =
      CoordinateTransform::diagonal_upper(post_scale(1.0 / std::sqrt(lambda), sqrt_of(c.sigma)), m);
  return {t, s, Certificate(NonlinearL2{beta, pre_scale(lambda, c.gamma)}, iiss.mode)};
}

Certificate max_to_sum(const Certificate& c) {
  if (c.mode != CombineMode::kMax) throw DomainError("max_to_sum needs a max-form certificate");
  Certificate out = c;
  out.mode = CombineMode::kSum;
  return out;
}

Certificate sum_to_max(const Certificate& c) {
  if (c.mode != CombineMode::kSum) throw DomainError("sum_to_max needs a sum-form certificate");
  struct Doubler {
    static GainFn dbl(const GainFn& f) { return post_scale(2.0, f); }
    Certificate::Body operator()(const AlphaIntegrable& x) const { return x; }
    Certificate::Body operator()(const L2Stable& x) const { return x; }
    Certificate::Body operator()(const ISS& x) const { return ISS{x.alpha, dbl(x.beta), dbl(x.sigma)}; }
    Certificate::Body operator()(const IISS& x) const {
      return IISS{x.alpha, dbl(x.beta), dbl(x.gamma), x.sigma};
    }
    Certificate::Body operator()(const LinearL2& x) const { return LinearL2{dbl(x.beta), 2.0 * x.gain_sq}; }
    Certificate::Body operator()(const NonlinearL2& x) const {
      return NonlinearL2{dbl(x.beta), dbl(x.gamma)};
    }
  };
  return Certificate(std::visit(Doubler{}, c.body), CombineMode::kMax);
}

Certificate transform_cert(const Certificate& c, const CoordinateTransform& t,
                           const std::optional<CoordinateTransform>& s, const RadiusGrid& grid) {
  const TransformBounds tb = numeric_bounds(t, grid);
  const GainFn upper_inv = numeric_inverse(tb.upper);
  const GainFn lower_inv = numeric_inverse(tb.lower);
  switch (c.kind()) {
    case CertKind::kAlphaIntegrable: {
      const auto& x = c.as<AlphaIntegrable>();
      return Certificate(AlphaIntegrable{compose(x.alpha, upper_inv), compose(x.beta, lower_inv)}, c.mode);
    }
    case CertKind::kISS: {
      const auto& x = c.as<ISS>();
      const TransformBounds sb = numeric_bounds(require_input_transform(s), grid);
      return Certificate(ISS{compose(x.alpha, upper_inv), compose(x.beta, lower_inv),
                             compose(x.sigma, numeric_inverse(sb.lower))},
                         c.mode);
    }
    case CertKind::kIISS: {
      const auto& x = c.as<IISS>();
      const TransformBounds sb = numeric_bounds(require_input_transform(s), grid);
      return Certificate(IISS{compose(x.alpha, upper_inv), compose(x.beta, lower_inv), x.gamma,
                              compose(x.sigma, numeric_inverse(sb.lower))},
                         c.mode);
    }
    default:
      throw DomainError(std::string("transform_cert does not apply to ") + to_string(c.kind()) +
                        " certificates (squared-norm estimates are not coordinate invariant)");
  }
}

}  // namespace issl2
