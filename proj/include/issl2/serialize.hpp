#pragma once

// JSON documents for functions, transforms and certificates.
//
// Function grammar:
//   {"op": "identity" | "exp_minus_one" | "log_one_plus"}
//   {"op": "power", "p": x}            {"op": "linear", "k": x}
//   {"op": "registered", "name": s}    {"op": "table", "knots": [...], "values": [...]}
//   {"op": "compose", "args": [f1, ..., fn]}   f1 applied last
//   {"op": "max" | "min" | "sum", "args": [f1, ..., fn]}
//   {"op": "post_scale" | "pre_scale", "k": x, "args": [f]}
//   {"op": "residual" | "excess" | "inverse", "args": [f]}
//   {"ref": name}                      entry of the surrounding name table
//
// Writing then reading any serializable tree reproduces its values bit for
// bit. Trees holding unnamed closures are not serializable.

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "issl2/certificates.hpp"
#include "issl2/comparison_fn.hpp"
#include "issl2/transforms.hpp"

namespace issl2 {

using Json = nlohmann::json;
using FunctionTable = std::map<std::string, GainFn>;

Json to_json(const GainFn& f);
/// Throws ConfigError on malformed documents or unresolved references.
GainFn gain_from_json(const Json& j, const FunctionTable& refs = {});

/// {"kind": "identity" | "registered" | "diagonal_upper" | "diagonal_lower",
///  "dim": p, "name": s (registered), "fn": f (diagonal)}
Json to_json(const CoordinateTransform& t);
CoordinateTransform transform_from_json(const Json& j, const FunctionTable& refs = {});

/// {"kind": ..., "mode": "max" | "sum", "fields": {name: f, ...}, "gain_sq": x}
Json to_json(const Certificate& c);
Certificate certificate_from_json(const Json& j, const FunctionTable& refs = {});

/// Certificate document with optional coordinates:
/// {"format": "issl2-certificate", "version": 1, "certificate": {...},
///  "state_transform": {...}, "input_transform": {...}}
struct CertificateDocument {
  Certificate cert;
  std::optional<CoordinateTransform> state_transform;
  std::optional<CoordinateTransform> input_transform;

  bool transformed() const { return state_transform.has_value(); }
  TransformedCertificate as_transformed() const;
};

Json to_json(const CertificateDocument& d);
CertificateDocument document_from_json(const Json& j, const FunctionTable& refs = {});

}  // namespace issl2
