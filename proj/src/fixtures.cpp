#include "issl2/fixtures.hpp"

#include "issl2/errors.hpp"

namespace issl2 {

namespace {

double param_or(const ModelParams& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

const GainFn kSq = GainFn::power(2);

}  // namespace

std::vector<std::string> builtin_certificate_names() {
  return {"linear1d_linear_l2", "linear1d_nonlinear_l2", "linear1d_iss",      "linear1d_iiss",
          "linear1d_auto_l2",   "ex1_alpha",             "ex1_transformed_l2", "ex2_transformed_linear_l2",
          "ex2_iss",            "ex3_nonlinear_l2"};
}

BuiltinCertificate builtin_certificate(const std::string& name, const ModelParams& params) {
  const double a = param_or(params, "a", 1.0);
  const double b = param_or(params, "b", 1.0);
  if (name.rfind("linear1d", 0) == 0 && !(a > 0)) throw DomainError("linear1d certificates need a > 0");
  // d/dt x^2 = -2a x^2 + 2b x w <= -a x^2 + (b^2/a) w^2
  const double g = b * b / (a * a);
  if (name == "linear1d_linear_l2") {
    return {name, "linear1d", Certificate(LinearL2{post_scale(1 / a, kSq), g}, CombineMode::kSum)};
  }
  if (name == "linear1d_nonlinear_l2") {
    return {name, "linear1d", Certificate(NonlinearL2{post_scale(2 / a, kSq), GainFn::linear(2 * g)})};
  }
  if (name == "linear1d_iss") {
    return {name, "linear1d", Certificate(ISS{kSq, post_scale(2 / a, kSq), post_scale(2 * g, kSq)})};
  }
  if (name == "linear1d_iiss") {
    return {name, "linear1d", Certificate(IISS{kSq, post_scale(2 / a, kSq), GainFn::linear(2 * g), kSq})};
  }
  if (name == "linear1d_auto_l2") {
    return {name, "linear1d_auto", Certificate(L2Stable{post_scale(0.5 / a, kSq)})};
  }
  if (name == "ex1_alpha") {
    return {name, "ex1_cubic", Certificate(AlphaIntegrable{GainFn::power(4), post_scale(0.5, kSq)})};
  }
  if (name == "ex1_transformed_l2") {
    return {name, "ex1_transformed", Certificate(L2Stable{post_scale(0.5, kSq)})};
  }
  if (name == "ex2_transformed_linear_l2") {
    return {name, "ex2_transformed", Certificate(LinearL2{post_scale(4.0, kSq), 4.0})};
  }
  if (name == "ex2_iss") {
    // z = T(x) satisfies the linear L2-gain bound; pull the ISS form back through T^{-1}.
    const Certificate z_iss = linear_l2_to_iss(builtin_certificate("ex2_transformed_linear_l2").cert);
    const Certificate x_iss = transform_cert(z_iss, CoordinateTransform::registered("example2").inverted(),
                                            CoordinateTransform::identity(1));
    return {name, "ex2_cubic_forced", x_iss};
  }
  if (name == "ex3_nonlinear_l2") {
    const GainFn beta = sum(kSq, post_scale(0.5, GainFn::power(4)));
    const GainFn gamma = post_scale(0.5, compose(kSq, GainFn::exp_minus_one()));
    return {name, "ex3_bilinear", Certificate(NonlinearL2{beta, gamma}, CombineMode::kSum)};
  }
  throw DomainError("unknown built-in certificate: " + name);
}

}  // namespace issl2
