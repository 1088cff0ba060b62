#pragma once

// Hand-derived certificates for the built-in models. Each one is a sound
// estimate for the model named in its description; the test suite confirms
// them by simulation.

#include <string>
#include <vector>

#include "issl2/certificates.hpp"
#include "issl2/simulate.hpp"

namespace issl2 {

struct BuiltinCertificate {
  std::string name;
  std::string model;  // built-in model the certificate is stated for
  Certificate cert;
};

/// Names:
///   linear1d_linear_l2     sum  ||x||^2 <= s^2/a + (b/a)^2 ||w||^2
///   linear1d_nonlinear_l2  max  beta = 2 s^2/a, gamma = 2 (b/a)^2 s
///   linear1d_iss           max  alpha = s^2, beta = 2 s^2/a, sigma = 2 (b/a)^2 s^2
///   linear1d_iiss          max  alpha = s^2, beta = 2 s^2/a, gamma = 2 (b/a)^2 s, sigma = s^2
///   linear1d_auto_l2            ||x||^2 <= s^2 / (2a)
///   ex1_alpha                   int x^4 <= s^2 / 2
///   ex1_transformed_l2          ||z||^2 <= s^2 / 2
///   ex2_transformed_linear_l2  max  ||z||^2 <= 4 s^2 (max) 4 ||w||^2
///   ex2_iss                max  ex2_transformed_linear_l2 as ISS, pulled back to x
///   ex3_nonlinear_l2       sum  beta = s^2 + s^4/2, gamma = (e^s - 1)^2 / 2
/// Parameters a (1) and b (1) apply to the linear1d entries. Throws
/// DomainError for unknown names or a <= 0.
BuiltinCertificate builtin_certificate(const std::string& name, const ModelParams& params = {});
std::vector<std::string> builtin_certificate_names();

}  // namespace issl2
