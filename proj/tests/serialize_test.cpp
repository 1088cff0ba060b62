#include "issl2/serialize.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "issl2/errors.hpp"
#include "issl2/fixtures.hpp"

namespace issl2 {
namespace {

std::vector<double> probe_points() {
  std::vector<double> s;
  for (double x = 1e-4; x < 1e4; x *= 1.7) s.push_back(x);
  s.push_back(0.0);
  return s;
}

void expect_same_values(const GainFn& a, const GainFn& b) {
  for (double s : probe_points()) {
    const double va = a(s), vb = b(s);
    if (std::isnan(va)) {
      EXPECT_TRUE(std::isnan(vb)) << "s = " << s;
    } else {
      EXPECT_EQ(va, vb) << "s = " << s << " for " << a.describe();
    }
  }
}

GTEST_TEST(SerializeTest, FunctionRoundTripIsExact) {
  const GainFn t = GainFn::table({0.5, 1.0, 3.0}, {1.0, 2.0, 2.5});
  const std::vector<GainFn> fns = {
      GainFn::identity(),
      GainFn::power(2.5),
      GainFn::linear(0.3),
      GainFn::exp_minus_one(),
      GainFn::log_one_plus(),
      t,
      compose(GainFn::power(2), GainFn::exp_minus_one()),
      pointwise_max(GainFn::linear(2), GainFn::power(3)),
      pointwise_min(GainFn::linear(2), GainFn::power(3)),
      sum(GainFn::power(2), post_scale(0.5, GainFn::power(4))),
      pre_scale(3.0, GainFn::log_one_plus()),
      residual(GainFn::linear(0.5)),
      excess(GainFn::linear(2.0)),
      numeric_inverse(GainFn::exp_minus_one()),
      GainFn::registered("example2"),
  };
  for (const GainFn& f : fns) {
    const Json j = to_json(f);
    const GainFn back = gain_from_json(Json::parse(j.dump()));
    EXPECT_EQ(to_json(back), j) << f.describe();
    expect_same_values(f, back);
  }
}

GTEST_TEST(SerializeTest, NaryOperatorsAndReferences) {
  const FunctionTable refs = {{"sq", GainFn::power(2)}};
  const GainFn f = gain_from_json(
      Json::parse(R"({"op":"sum","args":[{"ref":"sq"},{"op":"linear","k":1},{"op":"identity"}]})"), refs);
  EXPECT_DOUBLE_EQ(f(3.0), 9.0 + 3.0 + 3.0);
  const GainFn c = gain_from_json(Json::parse(
      R"({"op":"compose","args":[{"op":"linear","k":2},{"op":"power","p":2},{"op":"linear","k":3}]})"));
  EXPECT_DOUBLE_EQ(c(1.0), 18.0);
}

GTEST_TEST(SerializeTest, MalformedFunctionsAreConfigErrors) {
  for (const char* text : {R"({"op":"power"})", R"({"op":"nope"})", R"({"ref":"missing"})", R"([1,2])",
                           R"({"op":"compose","args":[]})", R"({"op":"registered","name":"nope"})",
                           R"({"op":"table","knots":[0,1],"values":[0]})", R"({"op":"power","p":-1})"}) {
    EXPECT_THROW(gain_from_json(Json::parse(text)), ConfigError) << text;
  }
}

GTEST_TEST(SerializeTest, TransformRoundTrip) {
  const std::vector<CoordinateTransform> ts = {
      CoordinateTransform::identity(3),
      CoordinateTransform::registered("example2", 1),
      CoordinateTransform::diagonal_upper(GainFn::power(0.5), 2),
      CoordinateTransform::diagonal_lower(GainFn::linear(3.0), 2),
  };
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (const CoordinateTransform& t : ts) {
    const CoordinateTransform back = transform_from_json(Json::parse(to_json(t).dump()));
    ASSERT_EQ(back.dim(), t.dim());
    for (int k = 0; k < 50; ++k) {
      Vec x(t.dim());
      for (double& v : x) v = d(rng);
      EXPECT_EQ(back.apply(x), t.apply(x)) << t.describe();
    }
  }
}

GTEST_TEST(SerializeTest, CertificateDocumentRoundTrip) {
  for (const std::string& name : builtin_certificate_names()) {
    const Certificate c = builtin_certificate(name).cert;
    const Json j = to_json(CertificateDocument{c, std::nullopt, std::nullopt});
    const CertificateDocument back = document_from_json(Json::parse(j.dump()));
    EXPECT_FALSE(back.transformed());
    EXPECT_EQ(back.cert.kind(), c.kind()) << name;
    EXPECT_EQ(back.cert.mode, c.mode) << name;
    EXPECT_EQ(to_json(back.cert), to_json(c)) << name;
  }
  const TransformedCertificate tc = iss_to_linear_l2(builtin_certificate("linear1d_iss").cert, 1.0, 1, 1);
  const Json j = to_json(CertificateDocument{tc.cert, tc.state_transform, tc.input_transform});
  const CertificateDocument back = document_from_json(Json::parse(j.dump()));
  ASSERT_TRUE(back.transformed());
  ASSERT_TRUE(back.input_transform.has_value());
  EXPECT_EQ(to_json(back), j);
}

GTEST_TEST(SerializeTest, CertificateErrors) {
  EXPECT_THROW(certificate_from_json(Json::parse(R"({"kind":"iss","fields":{}})")), ConfigError);
  EXPECT_THROW(certificate_from_json(Json::parse(R"({"kind":"bogus"})")), ConfigError);
  EXPECT_THROW(certificate_from_json(Json::parse(R"({"kind":"l2_stable","mode":"avg","fields":{"beta":{"op":"identity"}}})")),
               ConfigError);
  EXPECT_THROW(certificate_from_json(
                   Json::parse(R"({"kind":"linear_l2","fields":{"beta":{"op":"identity"}},"gain_sq":-1})")),
               ConfigError);
  EXPECT_THROW(document_from_json(Json::parse(
                   R"({"certificate":{"kind":"l2_stable","fields":{"beta":{"op":"identity"}}},
                       "input_transform":{"kind":"identity"}})")),
               ConfigError);
}

}  // namespace
}  // namespace issl2
