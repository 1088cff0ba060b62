#include "issl2/fixtures.hpp"

#include <gtest/gtest.h>

#include "issl2/errors.hpp"

namespace issl2 {
namespace {

GTEST_TEST(FixturesTest, EveryCertificateCertifiesAndVerifies) {
  for (const std::string& name : builtin_certificate_names()) {
    const ModelParams params{{"a", 1.5}, {"b", 0.7}};
    const BuiltinCertificate b = builtin_certificate(name, params);
    EXPECT_TRUE(fields_certified(b.cert)) << name;
    SamplerSpec spec;
    spec.runs = 12;
    spec.seed = 5;
    spec.t_end = 6.0;
    spec.dt = 5e-4;
    spec.x0_max = 1.5;
    const MonteCarloReport rep = monte_carlo_verify(b.cert, make_model(b.model, params), spec);
    EXPECT_TRUE(rep.all_pass()) << name << ": worst margin " << rep.worst_normalized_margin;
  }
}

GTEST_TEST(FixturesTest, UnknownNamesAndParameters) {
  EXPECT_THROW(builtin_certificate("nope"), DomainError);
  EXPECT_THROW(builtin_certificate("linear1d_iss", {{"a", 0.0}}), DomainError);
}

}  // namespace
}  // namespace issl2
