#pragma once

// Sign-preserving coordinate changes and their K-infinity sandwich bounds
//   lower(|z|) <= |T(z)| <= upper(|z|).

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "issl2/comparison_fn.hpp"

namespace issl2 {

using Vec = std::vector<double>;
using VectorMap = std::function<Vec(std::span<const double>)>;
using ScalarMap = std::function<double(double)>;

enum class TransformKind { kDiagonalUpper, kDiagonalLower, kGeneric };

const char* to_string(TransformKind kind);

/// Origin-fixing homeomorphism of R^p. Immutable and cheap to copy.
class CoordinateTransform {
 public:
  /// The identity on R^1.
  CoordinateTransform();

  /// T_i(z) = sgn(z_i) alpha(|z_i| sqrt(p)); alpha(|z|) <= |T(z)|.
  static CoordinateTransform diagonal_upper(GainFn alpha, std::size_t p);
  /// T_i(z) = sgn(z_i) alpha(|z_i|) / sqrt(p); |T(z)| <= alpha(|z|).
  static CoordinateTransform diagonal_lower(GainFn alpha, std::size_t p);
  /// User-supplied pair; `backward` must invert `forward`.
  static CoordinateTransform generic(std::string name, std::size_t p, VectorMap forward,
                                     VectorMap backward);
  static CoordinateTransform identity(std::size_t p);
  /// Componentwise application of a registered scalar pair (see
  /// register_scalar_transform). Built-ins: "identity", "example2",
  /// "example2_inv".
  static CoordinateTransform registered(const std::string& name, std::size_t p = 1);

  std::size_t dim() const;
  TransformKind kind() const;
  /// Axis function of a diagonal transform (identity for generic ones).
  const GainFn& axis_fn() const;
  /// Registry name for generic transforms, empty otherwise.
  const std::string& name() const;
  std::string describe() const;
  bool is_identity() const;
  /// True for transforms built from a registered scalar pair.
  bool is_registered_scalar() const;

  Vec apply(std::span<const double> z) const;
  Vec apply_inverse(std::span<const double> psi) const;
  /// Generic transform computing T^{-1}, with inverse T.
  CoordinateTransform inverted() const;

 private:
  struct Impl;
  explicit CoordinateTransform(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

/// Adds or replaces a scalar forward/backward pair for
/// CoordinateTransform::registered. The inverse of a registered pair is
/// available under "<name>_inv" unless that name is already taken.
void register_scalar_transform(const std::string& name, ScalarMap forward, ScalarMap backward);
bool has_scalar_transform(const std::string& name);

enum class BoundsProvenance { kAnalytic, kSampled };

struct TransformBounds {
  GainFn lower;
  GainFn upper;
  BoundsProvenance provenance = BoundsProvenance::kAnalytic;
  /// Sampled bounds are valid on [r_min, r_max]; analytic ones everywhere.
  double r_min = 0.0;
  double r_max = kSaturation;
};

struct RadiusGrid {
  double r_min = 1e-6;
  double r_max = 1e6;
  std::size_t count = 128;
  /// Directions per sphere are directions_per_dim * p (at least 2p).
  std::size_t directions_per_dim = 64;
};

/// Sandwich bounds for T. Diagonal kinds and identity get exact formulas;
/// scalar registered transforms with |T| monotone get exact closures named
/// "abs_min:<name>" / "abs_max:<name>"; everything else is sphere-sampled.
/// Throws CertificationError if a sampled envelope is not a usable bound.
TransformBounds numeric_bounds(const CoordinateTransform& t, const RadiusGrid& grid = {});

/// Exact closure bound for a registered scalar transform, by the naming
/// scheme above. Throws DomainError for unknown names.
GainFn scalar_transform_bound(const std::string& bound_name);

double euclidean_norm(std::span<const double> v);

}  // namespace issl2
