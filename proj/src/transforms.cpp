#include "issl2/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "issl2/errors.hpp"
#include "issl2/sampling.hpp"

namespace issl2 {

struct CoordinateTransform::Impl {
  TransformKind kind = TransformKind::kGeneric;
  std::size_t p = 1;
  GainFn axis;
  std::string name;
  VectorMap forward;
  VectorMap backward;
  bool identity = false;
  bool registered_scalar = false;
};

namespace {

struct ScalarPair {
  ScalarMap forward;
  ScalarMap backward;
};

struct TransformRegistry {
  std::mutex mu;
  std::map<std::string, ScalarPair> pairs;

  TransformRegistry() {
    const ScalarMap id = [](double x) { return x; };
    pairs["identity"] = {id, id};
    pairs["example2"] = {example2_map, example2_inverse};
    pairs["example2_inv"] = {example2_inverse, example2_map};
  }
};

TransformRegistry& transform_registry() {
  static TransformRegistry r;
  return r;
}

ScalarPair lookup_pair(const std::string& name) {
  auto& reg = transform_registry();
  std::lock_guard<std::mutex> lock(reg.mu);
  const auto it = reg.pairs.find(name);
  if (it == reg.pairs.end()) throw DomainError("unknown transform '" + name + "'");
  return it->second;
}

void check_dim(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw DomainError("transform dimension mismatch: expected " + std::to_string(expected) +
                      ", got " + std::to_string(got));
  }
}

void check_p(std::size_t p) {
  if (p < 1) throw DomainError("transform dimension must be at least 1");
}

double sgn(double x) { return x < 0 ? -1.0 : 1.0; }

}  // namespace

const char* to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::kDiagonalUpper: return "diagonal_upper";
    case TransformKind::kDiagonalLower: return "diagonal_lower";
    case TransformKind::kGeneric: return "generic";
  }
  return "unknown";
}

CoordinateTransform::CoordinateTransform() : CoordinateTransform(identity(1)) {}

CoordinateTransform::CoordinateTransform(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

CoordinateTransform CoordinateTransform::diagonal_upper(GainFn alpha, std::size_t p) {
  check_p(p);
  auto impl = std::make_shared<Impl>();
  impl->kind = TransformKind::kDiagonalUpper;
  impl->p = p;
  impl->identity = p == 1 && alpha.op() == GainOp::kIdentity;
  impl->axis = std::move(alpha);
  return CoordinateTransform(std::move(impl));
}

CoordinateTransform CoordinateTransform::diagonal_lower(GainFn alpha, std::size_t p) {
  check_p(p);
  auto impl = std::make_shared<Impl>();
  impl->kind = TransformKind::kDiagonalLower;
  impl->p = p;
  impl->identity = p == 1 && alpha.op() == GainOp::kIdentity;
  impl->axis = std::move(alpha);
  return CoordinateTransform(std::move(impl));
}

CoordinateTransform CoordinateTransform::generic(std::string name, std::size_t p, VectorMap forward,
                                                 VectorMap backward) {
  check_p(p);
  if (!forward || !backward) throw DomainError("generic transform '" + name + "' needs both maps");
  auto impl = std::make_shared<Impl>();
  impl->kind = TransformKind::kGeneric;
  impl->p = p;
  impl->name = std::move(name);
  impl->forward = std::move(forward);
  impl->backward = std::move(backward);
  return CoordinateTransform(std::move(impl));
}

CoordinateTransform CoordinateTransform::identity(std::size_t p) {
  check_p(p);
  auto impl = std::make_shared<Impl>();
  impl->kind = TransformKind::kGeneric;
  impl->p = p;
  impl->name = "identity";
  impl->identity = true;
  impl->registered_scalar = true;
  impl->forward = [](std::span<const double> z) { return Vec(z.begin(), z.end()); };
  impl->backward = impl->forward;
  return CoordinateTransform(std::move(impl));
}

CoordinateTransform CoordinateTransform::registered(const std::string& name, std::size_t p) {
  if (name == "identity") return identity(p);
  const ScalarPair pair = lookup_pair(name);
  const auto componentwise = [](ScalarMap f) {
    return [f = std::move(f)](std::span<const double> z) {
      Vec out(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) out[i] = f(z[i]);
      return out;
    };
  };
  CoordinateTransform t = generic(name, p, componentwise(pair.forward), componentwise(pair.backward));
  std::const_pointer_cast<Impl>(t.impl_)->registered_scalar = true;
  return t;
}

std::size_t CoordinateTransform::dim() const { return impl_->p; }
TransformKind CoordinateTransform::kind() const { return impl_->kind; }
const GainFn& CoordinateTransform::axis_fn() const { return impl_->axis; }
const std::string& CoordinateTransform::name() const { return impl_->name; }
bool CoordinateTransform::is_identity() const { return impl_->identity; }
bool CoordinateTransform::is_registered_scalar() const { return impl_->registered_scalar; }

std::string CoordinateTransform::describe() const {
  const std::string dim = std::to_string(impl_->p);
  if (impl_->kind == TransformKind::kGeneric) return impl_->name + "[p=" + dim + "]";
  return std::string(to_string(impl_->kind)) + "(" + impl_->axis.describe() + ", p=" + dim + ")";
}

Vec CoordinateTransform::apply(std::span<const double> z) const {
  check_dim(impl_->p, z.size());
  if (impl_->identity) return Vec(z.begin(), z.end());
  const double root_p = std::sqrt(static_cast<double>(impl_->p));
  Vec out(z.size());
  switch (impl_->kind) {
    case TransformKind::kDiagonalUpper:
      for (std::size_t i = 0; i < z.size(); ++i) out[i] = sgn(z[i]) * impl_->axis(std::fabs(z[i]) * root_p);
      return out;
    case TransformKind::kDiagonalLower:
      for (std::size_t i = 0; i < z.size(); ++i) out[i] = sgn(z[i]) * impl_->axis(std::fabs(z[i])) / root_p;
      return out;
    case TransformKind::kGeneric:
      out = impl_->forward(z);
      check_dim(impl_->p, out.size());
      return out;
  }
  return out;
}

Vec CoordinateTransform::apply_inverse(std::span<const double> psi) const {
  check_dim(impl_->p, psi.size());
  if (impl_->identity) return Vec(psi.begin(), psi.end());
  const double root_p = std::sqrt(static_cast<double>(impl_->p));
  Vec out(psi.size());
  switch (impl_->kind) {
    case TransformKind::kDiagonalUpper:
      for (std::size_t i = 0; i < psi.size(); ++i) {
        out[i] = sgn(psi[i]) * inverse_eval(impl_->axis, std::fabs(psi[i])) / root_p;
      }
      return out;
    case TransformKind::kDiagonalLower:
      for (std::size_t i = 0; i < psi.size(); ++i) {
        out[i] = sgn(psi[i]) * inverse_eval(impl_->axis, std::fabs(psi[i]) * root_p);
      }
      return out;
    case TransformKind::kGeneric:
      out = impl_->backward(psi);
      check_dim(impl_->p, out.size());
      return out;
  }
  return out;
}

CoordinateTransform CoordinateTransform::inverted() const {
  if (impl_->identity) return *this;
  if (impl_->registered_scalar) {
    const std::string inv = impl_->name + "_inv";
    if (has_scalar_transform(inv)) return registered(inv, impl_->p);
    const std::string base = impl_->name.size() > 4 ? impl_->name.substr(0, impl_->name.size() - 4) : "";
    if (impl_->name.ends_with("_inv") && has_scalar_transform(base)) return registered(base, impl_->p);
  }
  const CoordinateTransform self = *this;
  return generic("inverse(" + describe() + ")", impl_->p,
                 [self](std::span<const double> z) { return self.apply_inverse(z); },
                 [self](std::span<const double> z) { return self.apply(z); });
}

void register_scalar_transform(const std::string& name, ScalarMap forward, ScalarMap backward) {
  if (!forward || !backward) throw DomainError("scalar transform '" + name + "' needs both maps");
  auto& reg = transform_registry();
  std::lock_guard<std::mutex> lock(reg.mu);
  reg.pairs[name] = {forward, backward};
  const std::string inv = name + "_inv";
  if (reg.pairs.count(inv) == 0) reg.pairs[inv] = {backward, forward};
}

bool has_scalar_transform(const std::string& name) {
  auto& reg = transform_registry();
  std::lock_guard<std::mutex> lock(reg.mu);
  return reg.pairs.count(name) > 0;
}

// Scaled by the largest entry so squares neither overflow nor underflow.
double euclidean_norm(std::span<const double> v) {
  double big = 0.0;
  for (double x : v) big = std::max(big, std::fabs(x));
  if (big == 0.0 || !std::isfinite(big)) return big;
  double acc = 0.0;
  for (double x : v) acc += (x / big) * (x / big);
  return big * std::sqrt(acc);
}

// ---------------------------------------------------------------------------

GainFn scalar_transform_bound(const std::string& bound_name) {
  const auto colon = bound_name.find(':');
  if (colon == std::string::npos) throw DomainError("malformed transform bound name '" + bound_name + "'");
  const std::string which = bound_name.substr(0, colon);
  const ScalarPair pair = lookup_pair(bound_name.substr(colon + 1));
  const ScalarMap f = pair.forward;
  if (which == "abs_min") {
    return GainFn::custom(bound_name, [f](double r) { return std::min(std::fabs(f(r)), std::fabs(f(-r))); });
  }
  if (which == "abs_max") {
    return GainFn::custom(bound_name, [f](double r) { return std::max(std::fabs(f(r)), std::fabs(f(-r))); });
  }
  throw DomainError("unknown transform bound kind '" + which + "'");
}

namespace {

TransformBounds diagonal_bounds(const CoordinateTransform& t) {
  const double root_p = std::sqrt(static_cast<double>(t.dim()));
  const GainFn& alpha = t.axis_fn();
  TransformBounds b;
  b.provenance = BoundsProvenance::kAnalytic;
  if (t.kind() == TransformKind::kDiagonalLower) {
    b.lower = post_scale(1.0 / root_p, pre_scale(1.0 / root_p, alpha));
    b.upper = alpha;
  } else {
    b.lower = alpha;
    b.upper = post_scale(root_p, pre_scale(root_p, alpha));
  }
  return b;
}

bool usable_bound(const GainFn& f, const RadiusGrid& grid) {
  CertifyOptions opts;
  opts.grid.s_min = grid.r_min;
  opts.grid.s_max = grid.r_max;
  opts.grid.points = std::max<std::size_t>(grid.count, 2);
  opts.unbounded_threshold = 0.0;
  const KinfCertReport rep = certify_kinf(f, opts);
  return rep.verdict() && f.value(grid.r_max) > f.value(grid.r_min);
}

TransformBounds sampled_bounds(const CoordinateTransform& t, const RadiusGrid& grid) {
  const std::size_t p = t.dim();
  const std::size_t k = std::max<std::size_t>(grid.count, 3);
  if (!(grid.r_min > 0) || !(grid.r_max > grid.r_min)) {
    throw DomainError("radius grid needs 0 < r_min < r_max");
  }
  const auto dirs = sphere_directions(p, std::max(2 * p, grid.directions_per_dim * p));
  GridSpec gs;
  gs.s_min = grid.r_min;
  gs.s_max = grid.r_max;
  gs.points = k;
  const std::vector<double> radii = gs.samples();

  std::vector<double> mins(k), maxs(k);
  Vec z(p);
  for (std::size_t i = 0; i < k; ++i) {
    double lo = kSaturation;
    double hi = 0.0;
    for (const auto& d : dirs) {
      for (std::size_t j = 0; j < p; ++j) z[j] = radii[i] * d[j];
      const double v = euclidean_norm(t.apply(z));
      if (!std::isfinite(v)) {
        throw CertificationError("transform " + t.describe() + " is not finite at radius " +
                                 std::to_string(radii[i]));
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    mins[i] = lo;
    maxs[i] = hi;
  }
  // Running envelopes: min over |x| >= r and max over |x| <= r.
  for (std::size_t i = k - 1; i-- > 0;) mins[i] = std::min(mins[i], mins[i + 1]);
  for (std::size_t i = 1; i < k; ++i) maxs[i] = std::max(maxs[i], maxs[i - 1]);

  // Lag by one cell so each interpolated segment stays on the safe side.
  std::vector<double> lo_knots(radii.begin() + 1, radii.end());
  std::vector<double> lo_vals(mins.begin(), mins.end() - 1);
  std::vector<double> hi_knots(radii.begin(), radii.end() - 1);
  std::vector<double> hi_vals(maxs.begin() + 1, maxs.end());
  if (!(lo_vals.back() > 0) || !(lo_vals.back() > lo_vals.front())) {
    throw CertificationError("sampled lower envelope of " + t.describe() + " does not grow");
  }
  TransformBounds b;
  b.provenance = BoundsProvenance::kSampled;
  b.r_min = grid.r_min;
  b.r_max = grid.r_max;
  b.lower = GainFn::table(std::move(lo_knots), std::move(lo_vals));
  b.upper = GainFn::table(std::move(hi_knots), std::move(hi_vals));
  return b;
}

}  // namespace

TransformBounds numeric_bounds(const CoordinateTransform& t, const RadiusGrid& grid) {
  if (t.is_identity()) {
    TransformBounds b;
    b.lower = GainFn::identity();
    b.upper = GainFn::identity();
    return b;
  }
  if (t.kind() != TransformKind::kGeneric) return diagonal_bounds(t);
  if (t.is_registered_scalar() && t.dim() == 1) {
    const ScalarPair pair = lookup_pair(t.name());
    const ScalarMap f = pair.forward;
    const GainFn right = GainFn::custom("right", [f](double r) { return std::fabs(f(r)); });
    const GainFn left = GainFn::custom("left", [f](double r) { return std::fabs(f(-r)); });
    if (usable_bound(right, grid) && usable_bound(left, grid)) {
      TransformBounds b;
      b.lower = scalar_transform_bound("abs_min:" + t.name());
      b.upper = scalar_transform_bound("abs_max:" + t.name());
      return b;
    }
  }
  return sampled_bounds(t, grid);
}

}  // namespace issl2
