#include "issl2/serialize.hpp"

#include <cmath>

#include "issl2/errors.hpp"

namespace issl2 {

namespace {

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

double number_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) bad(std::string("function needs numeric field '") + key + "'");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) bad(std::string("field '") + key + "' must be finite");
  return v;
}

std::vector<GainFn> args_of(const Json& j, const FunctionTable& refs, std::size_t min_count, std::size_t max_count) {
  if (!j.contains("args") || !j.at("args").is_array()) bad("function '" + j.value("op", "") + "' needs 'args'");
  const Json& a = j.at("args");
  if (a.size() < min_count || a.size() > max_count) {
    bad("function '" + j.value("op", "") + "' has " + std::to_string(a.size()) + " args");
  }
  std::vector<GainFn> out;
  for (const Json& e : a) out.push_back(gain_from_json(e, refs));
  return out;
}

GainFn registered_or_bound(const std::string& name) {
  if (has_registered_gain_fn(name)) return GainFn::registered(name);
  if (name.find(':') != std::string::npos) {
    try {
      return scalar_transform_bound(name);
    } catch (const DomainError& e) {
      bad(e.what());
    }
  }
  bad("unknown registered function '" + name + "'");
}

std::size_t dim_of(const Json& j) {
  if (!j.contains("dim")) return 1;
  if (!j.at("dim").is_number_integer() || j.at("dim").get<long long>() < 1) bad("transform 'dim' must be >= 1");
  return j.at("dim").get<std::size_t>();
}

CertKind kind_from(const std::string& s) {
  for (CertKind k : {CertKind::kAlphaIntegrable, CertKind::kL2Stable, CertKind::kISS, CertKind::kIISS,
                     CertKind::kLinearL2, CertKind::kNonlinearL2}) {
    if (s == to_string(k)) return k;
  }
  bad("unknown certificate kind '" + s + "'");
}

}  // namespace

Json to_json(const GainFn& f) {
  Json j;
  j["op"] = to_string(f.op());
  switch (f.op()) {
    case GainOp::kPower:
      j["p"] = f.param();
      break;
    case GainOp::kLinear:
      j["k"] = f.param();
      break;
    case GainOp::kRegistered:
      j["name"] = f.name();
      break;
    case GainOp::kTable:
      j["knots"] = f.knots();
      j["values"] = f.knot_values();
      break;
    case GainOp::kPostScale:
    case GainOp::kPreScale:
      j["k"] = f.param();
      break;
    default:
      break;
  }
  if (!f.children().empty()) {
    Json args = Json::array();
    for (const GainFn& c : f.children()) args.push_back(to_json(c));
    j["args"] = std::move(args);
  }
  return j;
}

GainFn gain_from_json(const Json& j, const FunctionTable& refs) {
  if (!j.is_object()) bad("function must be an object");
  if (j.contains("ref")) {
    const std::string name = j.at("ref").get<std::string>();
    const auto it = refs.find(name);
    if (it == refs.end()) bad("unresolved function reference '" + name + "'");
    return it->second;
  }
  if (!j.contains("op") || !j.at("op").is_string()) bad("function needs 'op' or 'ref'");
  const std::string op = j.at("op").get<std::string>();
  try {
    if (op == "identity") return GainFn::identity();
    if (op == "exp_minus_one") return GainFn::exp_minus_one();
    if (op == "log_one_plus") return GainFn::log_one_plus();
    if (op == "power") return GainFn::power(number_field(j, "p"));
    if (op == "linear") return GainFn::linear(number_field(j, "k"));
    if (op == "registered") return registered_or_bound(j.value("name", ""));
    if (op == "table") {
      return GainFn::table(j.at("knots").get<std::vector<double>>(), j.at("values").get<std::vector<double>>());
    }
    if (op == "compose" || op == "max" || op == "min" || op == "sum") {
      std::vector<GainFn> a = args_of(j, refs, 1, SIZE_MAX);
      GainFn acc = a.back();
      for (std::size_t i = a.size() - 1; i-- > 0;) {
        if (op == "compose") acc = compose(a[i], acc);
        else if (op == "max") acc = pointwise_max(a[i], acc);
        else if (op == "min") acc = pointwise_min(a[i], acc);
        else acc = sum(a[i], acc);
      }
      return acc;
    }
    if (op == "post_scale") return post_scale(number_field(j, "k"), args_of(j, refs, 1, 1)[0]);
    if (op == "pre_scale") return pre_scale(number_field(j, "k"), args_of(j, refs, 1, 1)[0]);
    if (op == "residual") return residual(args_of(j, refs, 1, 1)[0]);
    if (op == "excess") return excess(args_of(j, refs, 1, 1)[0]);
    if (op == "inverse") return numeric_inverse(args_of(j, refs, 1, 1)[0]);
  } catch (const DomainError& e) {
    bad(std::string("invalid function '") + op + "': " + e.what());
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("invalid function '") + op + "': " + e.what());
  }
  bad("unknown function op '" + op + "'");
}

// ---------------------------------------------------------------------------

Json to_json(const CoordinateTransform& t) {
  Json j;
  j["dim"] = t.dim();
  if (t.is_identity()) {
    j["kind"] = "identity";
  } else if (t.is_registered_scalar()) {
    j["kind"] = "registered";
    j["name"] = t.name();
  } else if (t.kind() != TransformKind::kGeneric) {
    j["kind"] = to_string(t.kind());
    j["fn"] = to_json(t.axis_fn());
  } else {
    throw DomainError("transform '" + t.describe() + "' is not serializable");
  }
  return j;
}

CoordinateTransform transform_from_json(const Json& j, const FunctionTable& refs) {
  if (!j.is_object()) bad("transform must be an object");
  const std::string kind = j.value("kind", "");
  const std::size_t p = dim_of(j);
  if (kind == "identity") return CoordinateTransform::identity(p);
  if (kind == "registered") {
    const std::string name = j.value("name", "");
    if (!has_scalar_transform(name) && name != "identity") bad("unknown registered transform '" + name + "'");
    return CoordinateTransform::registered(name, p);
  }
  if (kind == "diagonal_upper" || kind == "diagonal_lower") {
    if (!j.contains("fn")) bad("diagonal transform needs 'fn'");
    const GainFn f = gain_from_json(j.at("fn"), refs);
    return kind == "diagonal_upper" ? CoordinateTransform::diagonal_upper(f, p)
                                    : CoordinateTransform::diagonal_lower(f, p);
  }
  bad("unknown transform kind '" + kind + "'");
}

// ---------------------------------------------------------------------------

Json to_json(const Certificate& c) {
  Json j;
  j["kind"] = to_string(c.kind());
  j["mode"] = to_string(c.mode);
  Json fields = Json::object();
  for (const auto& [name, f] : c.fields()) fields[name] = to_json(f);
  j["fields"] = std::move(fields);
  if (c.kind() == CertKind::kLinearL2) j["gain_sq"] = c.as<LinearL2>().gain_sq;
  return j;
}

Certificate certificate_from_json(const Json& j, const FunctionTable& refs) {
  if (!j.is_object()) bad("certificate must be an object");
  const CertKind kind = kind_from(j.value("kind", ""));
  const std::string mode_s = j.value("mode", "max");
  if (mode_s != "max" && mode_s != "sum") bad("certificate mode must be 'max' or 'sum'");
  const CombineMode mode = mode_s == "max" ? CombineMode::kMax : CombineMode::kSum;
  const Json fields = j.value("fields", Json::object());
  const auto field = [&](const char* name) {
    if (!fields.contains(name)) bad(std::string("certificate of kind ") + to_string(kind) + " needs field '" + name + "'");
    return gain_from_json(fields.at(name), refs);
  };
  switch (kind) {
    case CertKind::kAlphaIntegrable:
      return Certificate(AlphaIntegrable{field("alpha"), field("beta")}, mode);
    case CertKind::kL2Stable:
      return Certificate(L2Stable{field("beta")}, mode);
    case CertKind::kISS:
      return Certificate(ISS{field("alpha"), field("beta"), field("sigma")}, mode);
    case CertKind::kIISS:
      return Certificate(IISS{field("alpha"), field("beta"), field("gamma"), field("sigma")}, mode);
    case CertKind::kLinearL2: {
      if (!j.contains("gain_sq") || !j.at("gain_sq").is_number()) bad("linear_l2 certificate needs 'gain_sq'");
      const double g = j.at("gain_sq").get<double>();
      if (!(g >= 0) || !std::isfinite(g)) bad("gain_sq must be finite and nonnegative");
      return Certificate(LinearL2{field("beta"), g}, mode);
    }
    case CertKind::kNonlinearL2:
      return Certificate(NonlinearL2{field("beta"), field("gamma")}, mode);
  }
  bad("unknown certificate kind");
}

TransformedCertificate CertificateDocument::as_transformed() const {
  return {state_transform.value_or(CoordinateTransform::identity(1)), input_transform, cert};
}

Json to_json(const CertificateDocument& d) {
  Json j;
  j["format"] = "issl2-certificate";
  j["version"] = 1;
  j["certificate"] = to_json(d.cert);
  if (d.state_transform) j["state_transform"] = to_json(*d.state_transform);
  if (d.input_transform) j["input_transform"] = to_json(*d.input_transform);
  return j;
}

CertificateDocument document_from_json(const Json& j, const FunctionTable& refs) {
  if (!j.is_object()) bad("certificate document must be an object");
  CertificateDocument d;
  // A bare certificate object is accepted as a document without coordinates.
  const Json& body = j.contains("certificate") ? j.at("certificate") : j;
  d.cert = certificate_from_json(body, refs);
  if (j.contains("state_transform")) d.state_transform = transform_from_json(j.at("state_transform"), refs);
  if (j.contains("input_transform")) {
    d.input_transform = transform_from_json(j.at("input_transform"), refs);
    if (!d.state_transform) bad("an input transform needs a state transform");
  }
  return d;
}

}  // namespace issl2
