#pragma once

// Scalar comparison functions (candidate class-K-infinity gains) as immutable
// expression trees, plus the numerical machinery around them: inversion by
// bracketing and bisection, grid certification of K-infinity membership, and
// the three inequality helpers used by every interconnection argument.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace issl2 {

/// Every evaluation result and inverse bracket is clamped to +-kSaturation.
inline constexpr double kSaturation = 1e300;

enum class GainOp {
  kIdentity,
  kPower,        // s^p
  kLinear,       // k*s
  kExpMinusOne,  // e^s - 1
  kLogOnePlus,   // log(1 + s)
  kRegistered,   // named closure, odd-extended
  kTable,        // monotone piecewise-linear interpolation through knots
  kCompose,      // outer(inner(s))
  kMax,
  kMin,
  kSum,
  kPostScale,    // k*f(s)
  kPreScale,     // f(k*s)
  kResidual,     // s - f(s)
  kExcess,       // f(s) - s
  kInverse,      // f^{-1}(s) by bisection
};

const char* to_string(GainOp op);

/// Immutable, cheaply copyable handle to a scalar function tree.
///
/// Evaluation is total: atoms are extended oddly to negative arguments (which
/// only arise below residual/excess nodes), and every node clamps its result
/// to [-kSaturation, kSaturation], so no input produces NaN or infinity.
class GainFn {
 public:
  /// The identity function.
  GainFn();

  static GainFn identity();
  static GainFn power(double p);
  static GainFn linear(double k);
  static GainFn exp_minus_one();
  static GainFn log_one_plus();
  /// Looks `name` up in the scalar registry; throws DomainError if absent.
  static GainFn registered(const std::string& name);
  /// Wraps an arbitrary increasing map on [0, inf) under a display name.
  /// The name is what serialization emits.
  static GainFn custom(std::string name, std::function<double(double)> fn);
  /// Knots must be strictly increasing and positive; values nondecreasing and
  /// nonnegative. Below the first knot the table is linear through the
  /// origin; past the last knot it continues with the last slope.
  static GainFn table(std::vector<double> knots, std::vector<double> values);

  static GainFn compose(GainFn outer, GainFn inner);
  static GainFn max(GainFn a, GainFn b);
  static GainFn min(GainFn a, GainFn b);
  static GainFn sum(GainFn a, GainFn b);
  static GainFn post_scale(double k, GainFn f);
  static GainFn pre_scale(double k, GainFn f);
  static GainFn residual(GainFn f);
  static GainFn excess(GainFn f);
  static GainFn inverse(GainFn f);

  /// f(s) for s >= 0. Throws DomainError for negative or NaN s.
  double operator()(double s) const;
  /// Unchecked evaluation on the whole real line.
  double value(double s) const noexcept;

  GainOp op() const;
  double param() const;
  const std::string& name() const;
  std::span<const GainFn> children() const;
  const std::vector<double>& knots() const;
  const std::vector<double>& knot_values() const;

  /// Human-readable expression, e.g. "post_scale(0.5, compose(power(2), exp_minus_one))".
  std::string describe() const;

  /// True if the tree contains a residual or excess node anywhere.
  bool contains_difference() const;
  std::size_t depth() const;

 private:
  struct Node;
  explicit GainFn(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

using ScalarGainFn = GainFn;

/// Shorthands used throughout the certificate algebra.
GainFn compose(GainFn outer, GainFn inner);
GainFn compose(std::initializer_list<GainFn> chain);  // left-most applied last
GainFn pointwise_max(GainFn a, GainFn b);
GainFn pointwise_max(std::initializer_list<GainFn> fs);
GainFn pointwise_min(GainFn a, GainFn b);
GainFn sum(GainFn a, GainFn b);
GainFn post_scale(double k, GainFn f);
GainFn pre_scale(double k, GainFn f);
GainFn residual(GainFn f);
GainFn excess(GainFn f);
GainFn numeric_inverse(GainFn f);
GainFn sqrt_of(GainFn f);    // f^{1/2}
GainFn square_of(GainFn f);  // f^2

/// Registers a named scalar map for GainFn::registered. Built-ins:
///   "example2"     s -> s*exp(-1/(2 s^2))
///   "example2_inv" inverse of the above
void register_gain_fn(const std::string& name, std::function<double(double)> fn);
bool has_registered_gain_fn(const std::string& name);

/// Scalar map s -> s*exp(-1/(2 s^2)) (odd, with value 0 at 0) and its inverse.
double example2_map(double x);
double example2_inverse(double z);

// ---------------------------------------------------------------------------
// Inversion

struct BisectionOptions {
  int max_iterations = 200;
  double relative_width = 1e-15;
};

/// Smallest-bracket solution s >= 0 of f(s) = y for increasing f. Returns the
/// upper end of the final bracket, so f(result) >= y up to rounding.
/// Throws DomainError for y < 0, RangeError if y cannot be bracketed below
/// kSaturation.
double inverse_eval(const GainFn& f, double y, const BisectionOptions& opts = {});

/// Same algorithm for an arbitrary increasing callable on [0, inf).
double solve_increasing(const std::function<double(double)>& g, double y,
                        const BisectionOptions& opts = {});

// ---------------------------------------------------------------------------
// Certification

enum class GridSpacing { kLinear, kLog };

struct GridSpec {
  double s_max = 1e9;
  std::size_t points = 512;
  GridSpacing spacing = GridSpacing::kLog;
  double s_min = 1e-9;  // first point of a log grid; linear grids start at 0

  std::vector<double> samples() const;
};

struct KinfCertReport {
  bool zero_at_zero = false;
  bool monotone_on_grid = false;
  bool unbounded_advisory = false;
  GridSpec grid;
  double tolerance = 0.0;
  double unbounded_threshold = 0.0;
  /// First grid point where monotonicity failed (or NaN).
  double first_violation = 0.0;
  double value_at_zero = 0.0;
  double value_at_max = 0.0;

  bool verdict() const { return zero_at_zero && monotone_on_grid && unbounded_advisory; }
  std::string summary() const;
};

struct CertifyOptions {
  GridSpec grid{};
  double tolerance = 1e-10;
  double unbounded_threshold = 1e6;
};

/// Numerical proxy for membership in K-infinity. Never throws.
KinfCertReport certify_kinf(const GainFn& f, const CertifyOptions& opts = {});

// ---------------------------------------------------------------------------
// Inequality helpers

/// max{ gamma(rho(a)), gamma(rho((rho - Id)^{-1}(b))) }, an upper bound for
/// gamma(a + b). Throws PreconditionError unless rho - Id certifies.
double weak_triangle_bound(const GainFn& gamma, const GainFn& rho, double a, double b,
                           const CertifyOptions& opts = {});

/// mu = rho o (rho - Id)^{-1}, the companion of rho in the weak triangle
/// inequality. Throws PreconditionError unless rho - Id certifies.
GainFn weak_triangle_companion(const GainFn& rho, const CertifyOptions& opts = {});

/// alpha(s) = min{alpha1(s/2), alpha2(s/2)}; alpha(s1 + s2) <= alpha1(s1) + alpha2(s2).
GainFn sum_lower_envelope(const GainFn& alpha1, const GainFn& alpha2);

/// (1 + eps^2) a_sq + (1 + 1/eps^2) b_sq. Throws DomainError for eps <= 0.
double young_split(double a_sq, double b_sq, double eps);

}  // namespace issl2
