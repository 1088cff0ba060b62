#include "issl2/comparison_fn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "issl2/errors.hpp"

namespace issl2 {

struct GainFn::Node {
  GainOp op = GainOp::kIdentity;
  double param = 0.0;
  std::string name;
  std::function<double(double)> fn;
  std::vector<GainFn> kids;
  std::vector<double> knots;
  std::vector<double> values;
};

namespace {

double clamp_sat(double v) {
  if (std::isnan(v)) return kSaturation;
  return std::clamp(v, -kSaturation, kSaturation);
}

double odd(double s, double magnitude) { return s < 0 ? -magnitude : magnitude; }

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void require_positive(double k, const char* what) {
  if (!(k > 0) || !std::isfinite(k)) {
    throw DomainError(std::string(what) + " must be a positive finite number, got " + fmt(k));
  }
}

double table_eval(const std::vector<double>& r, const std::vector<double>& v, double s) {
  const std::size_t n = r.size();
  if (s <= r[0]) return v[0] * s / r[0];
  if (s >= r[n - 1]) {
    double slope = v[n - 1] / r[n - 1];
    if (n >= 2) {
      const double last = (v[n - 1] - v[n - 2]) / (r[n - 1] - r[n - 2]);
      if (last > 0) slope = last;
    }
    return v[n - 1] + slope * (s - r[n - 1]);
  }
  const auto it = std::upper_bound(r.begin(), r.end(), s);
  const std::size_t k = static_cast<std::size_t>(it - r.begin());
  const double w = (s - r[k - 1]) / (r[k] - r[k - 1]);
  return v[k - 1] + w * (v[k] - v[k - 1]);
}

struct Registry {
  std::mutex mu;
  std::map<std::string, std::function<double(double)>> fns;

  Registry() {
    fns["example2"] = [](double x) { return example2_map(x); };
    fns["example2_inv"] = [](double z) { return example2_inverse(z); };
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

const char* to_string(GainOp op) {
  switch (op) {
    case GainOp::kIdentity: return "identity";
    case GainOp::kPower: return "power";
    case GainOp::kLinear: return "linear";
    case GainOp::kExpMinusOne: return "exp_minus_one";
    case GainOp::kLogOnePlus: return "log_one_plus";
    case GainOp::kRegistered: return "registered";
    case GainOp::kTable: return "table";
    case GainOp::kCompose: return "compose";
    case GainOp::kMax: return "max";
    case GainOp::kMin: return "min";
    case GainOp::kSum: return "sum";
    case GainOp::kPostScale: return "post_scale";
    case GainOp::kPreScale: return "pre_scale";
    case GainOp::kResidual: return "residual";
    case GainOp::kExcess: return "excess";
    case GainOp::kInverse: return "inverse";
  }
  return "unknown";
}

GainFn::GainFn() : GainFn(identity()) {}

GainFn::GainFn(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

GainFn GainFn::identity() {
  static const auto node = std::make_shared<const Node>();
  return GainFn(node);
}

GainFn GainFn::power(double p) {
  require_positive(p, "power exponent");
  if (p == 1.0) return identity();
  auto n = std::make_shared<Node>();
  n->op = GainOp::kPower;
  n->param = p;
  return GainFn(std::move(n));
}

GainFn GainFn::linear(double k) {
  require_positive(k, "linear slope");
  auto n = std::make_shared<Node>();
  n->op = GainOp::kLinear;
  n->param = k;
  return GainFn(std::move(n));
}

GainFn GainFn::exp_minus_one() {
  auto n = std::make_shared<Node>();
  n->op = GainOp::kExpMinusOne;
  return GainFn(std::move(n));
}

GainFn GainFn::log_one_plus() {
  auto n = std::make_shared<Node>();
  n->op = GainOp::kLogOnePlus;
  return GainFn(std::move(n));
}

GainFn GainFn::registered(const std::string& name) {
  auto& reg = registry();
  std::function<double(double)> fn;
  {
    std::lock_guard<std::mutex> lock(reg.mu);
    const auto it = reg.fns.find(name);
    if (it == reg.fns.end()) throw DomainError("unknown registered function '" + name + "'");
    fn = it->second;
  }
  return custom(name, std::move(fn));
}

GainFn GainFn::custom(std::string name, std::function<double(double)> fn) {
  if (!fn) throw DomainError("custom function '" + name + "' is empty");
  auto n = std::make_shared<Node>();
  n->op = GainOp::kRegistered;
  n->name = std::move(name);
  n->fn = std::move(fn);
  return GainFn(std::move(n));
}

GainFn GainFn::table(std::vector<double> knots, std::vector<double> values) {
  if (knots.empty() || knots.size() != values.size()) {
    throw DomainError("table needs equally many knots and values (at least one)");
  }
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i]) || !std::isfinite(values[i]) || values[i] < 0) {
      throw DomainError("table entries must be finite with nonnegative values");
    }
    if (i == 0 ? !(knots[0] > 0) : !(knots[i] > knots[i - 1])) {
      throw DomainError("table knots must be positive and strictly increasing");
    }
    if (i > 0 && values[i] < values[i - 1]) {
      throw DomainError("table values must be nondecreasing");
    }
  }
  auto n = std::make_shared<Node>();
  n->op = GainOp::kTable;
  n->knots = std::move(knots);
  n->values = std::move(values);
  return GainFn(std::move(n));
}

namespace {

template <typename Node>
std::shared_ptr<Node> combinator(GainOp op, std::vector<GainFn> kids, double param = 0.0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->param = param;
  n->kids = std::move(kids);
  return n;
}

}  // namespace

GainFn GainFn::compose(GainFn outer, GainFn inner) {
  if (outer.op() == GainOp::kIdentity) return inner;
  if (inner.op() == GainOp::kIdentity) return outer;
  // Exact folds keep chains like sqrt(s^2) exact.
  if (outer.op() == GainOp::kPower && inner.op() == GainOp::kPower) {
    return power(outer.param() * inner.param());
  }
  if (outer.op() == GainOp::kLinear && inner.op() == GainOp::kLinear) {
    return linear(outer.param() * inner.param());
  }
  return GainFn(combinator<Node>(GainOp::kCompose, {std::move(outer), std::move(inner)}));
}

GainFn GainFn::max(GainFn a, GainFn b) {
  return GainFn(combinator<Node>(GainOp::kMax, {std::move(a), std::move(b)}));
}

GainFn GainFn::min(GainFn a, GainFn b) {
  return GainFn(combinator<Node>(GainOp::kMin, {std::move(a), std::move(b)}));
}

GainFn GainFn::sum(GainFn a, GainFn b) {
  return GainFn(combinator<Node>(GainOp::kSum, {std::move(a), std::move(b)}));
}

GainFn GainFn::post_scale(double k, GainFn f) {
  require_positive(k, "post_scale factor");
  if (k == 1.0) return f;
  if (f.op() == GainOp::kIdentity) return linear(k);
  if (f.op() == GainOp::kLinear) return linear(k * f.param());
  return GainFn(combinator<Node>(GainOp::kPostScale, {std::move(f)}, k));
}

GainFn GainFn::pre_scale(double k, GainFn f) {
  require_positive(k, "pre_scale factor");
  if (k == 1.0) return f;
  if (f.op() == GainOp::kIdentity) return linear(k);
  if (f.op() == GainOp::kLinear) return linear(k * f.param());
  return GainFn(combinator<Node>(GainOp::kPreScale, {std::move(f)}, k));
}

GainFn GainFn::residual(GainFn f) {
  if (f.op() == GainOp::kLinear && f.param() < 1.0) return linear(1.0 - f.param());
  return GainFn(combinator<Node>(GainOp::kResidual, {std::move(f)}));
}

GainFn GainFn::excess(GainFn f) {
  if (f.op() == GainOp::kLinear && f.param() > 1.0) return linear(f.param() - 1.0);
  return GainFn(combinator<Node>(GainOp::kExcess, {std::move(f)}));
}

GainFn GainFn::inverse(GainFn f) {
  if (f.op() == GainOp::kIdentity) return f;
  if (f.op() == GainOp::kInverse) return f.children()[0];
  if (f.op() == GainOp::kLinear) return linear(1.0 / f.param());
  return GainFn(combinator<Node>(GainOp::kInverse, {std::move(f)}));
}

double GainFn::operator()(double s) const {
  if (!(s >= 0)) throw DomainError("comparison function evaluated at negative argument " + fmt(s));
  return value(s);
}

double GainFn::value(double s) const noexcept {
  const Node& n = *node_;
  const double a = std::fabs(s);
  double r = 0.0;
  switch (n.op) {
    case GainOp::kIdentity:
      r = s;
      break;
    case GainOp::kPower:
      r = odd(s, std::pow(a, n.param));
      break;
    case GainOp::kLinear:
      r = n.param * s;
      break;
    case GainOp::kExpMinusOne:
      r = odd(s, std::expm1(a));
      break;
    case GainOp::kLogOnePlus:
      r = odd(s, std::log1p(a));
      break;
    case GainOp::kRegistered:
      try {
        r = odd(s, n.fn(a));
      } catch (...) {
        r = odd(s, kSaturation);
      }
      break;
    case GainOp::kTable:
      r = odd(s, table_eval(n.knots, n.values, a));
      break;
    case GainOp::kCompose:
      r = n.kids[0].value(n.kids[1].value(s));
      break;
    case GainOp::kMax:
      r = std::max(n.kids[0].value(s), n.kids[1].value(s));
      break;
    case GainOp::kMin:
      r = std::min(n.kids[0].value(s), n.kids[1].value(s));
      break;
    case GainOp::kSum:
      r = n.kids[0].value(s) + n.kids[1].value(s);
      break;
    case GainOp::kPostScale:
      r = n.param * n.kids[0].value(s);
      break;
    case GainOp::kPreScale:
      r = n.kids[0].value(clamp_sat(n.param * s));
      break;
    case GainOp::kResidual:
      r = s - n.kids[0].value(s);
      break;
    case GainOp::kExcess:
      r = n.kids[0].value(s) - s;
      break;
    case GainOp::kInverse: {
      const GainFn& child = n.kids[0];
      try {
        r = odd(s, solve_increasing([&child](double x) { return child.value(x); }, a));
      } catch (...) {
        r = odd(s, kSaturation);
      }
      break;
    }
  }
  return clamp_sat(r);
}

GainOp GainFn::op() const { return node_->op; }
double GainFn::param() const { return node_->param; }
const std::string& GainFn::name() const { return node_->name; }
std::span<const GainFn> GainFn::children() const { return node_->kids; }
const std::vector<double>& GainFn::knots() const { return node_->knots; }
const std::vector<double>& GainFn::knot_values() const { return node_->values; }

std::string GainFn::describe() const {
  const Node& n = *node_;
  switch (n.op) {
    case GainOp::kIdentity:
    case GainOp::kExpMinusOne:
    case GainOp::kLogOnePlus:
      return to_string(n.op);
    case GainOp::kPower:
    case GainOp::kLinear:
      return std::string(to_string(n.op)) + "(" + fmt(n.param) + ")";
    case GainOp::kRegistered:
      return "registered(" + n.name + ")";
    case GainOp::kTable:
      return "table[" + std::to_string(n.knots.size()) + " knots]";
    case GainOp::kPostScale:
    case GainOp::kPreScale:
      return std::string(to_string(n.op)) + "(" + fmt(n.param) + ", " + n.kids[0].describe() + ")";
    default: {
      std::string out = std::string(to_string(n.op)) + "(";
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i > 0) out += ", ";
        out += n.kids[i].describe();
      }
      return out + ")";
    }
  }
}

bool GainFn::contains_difference() const {
  if (op() == GainOp::kResidual || op() == GainOp::kExcess) return true;
  return std::any_of(node_->kids.begin(), node_->kids.end(),
                     [](const GainFn& k) { return k.contains_difference(); });
}

std::size_t GainFn::depth() const {
  std::size_t d = 0;
  for (const auto& k : node_->kids) d = std::max(d, k.depth());
  return d + 1;
}

GainFn compose(GainFn outer, GainFn inner) {
  return GainFn::compose(std::move(outer), std::move(inner));
}

GainFn compose(std::initializer_list<GainFn> chain) {
  if (chain.size() == 0) return GainFn::identity();
  auto it = chain.end();
  GainFn acc = *--it;
  while (it != chain.begin()) acc = GainFn::compose(*--it, acc);
  return acc;
}

GainFn pointwise_max(GainFn a, GainFn b) { return GainFn::max(std::move(a), std::move(b)); }

GainFn pointwise_max(std::initializer_list<GainFn> fs) {
  if (fs.size() == 0) throw DomainError("pointwise_max of nothing");
  auto it = fs.begin();
  GainFn acc = *it++;
  for (; it != fs.end(); ++it) acc = GainFn::max(acc, *it);
  return acc;
}

GainFn pointwise_min(GainFn a, GainFn b) { return GainFn::min(std::move(a), std::move(b)); }
GainFn sum(GainFn a, GainFn b) { return GainFn::sum(std::move(a), std::move(b)); }
GainFn post_scale(double k, GainFn f) { return GainFn::post_scale(k, std::move(f)); }
GainFn pre_scale(double k, GainFn f) { return GainFn::pre_scale(k, std::move(f)); }
GainFn residual(GainFn f) { return GainFn::residual(std::move(f)); }
GainFn excess(GainFn f) { return GainFn::excess(std::move(f)); }
GainFn numeric_inverse(GainFn f) { return GainFn::inverse(std::move(f)); }
GainFn sqrt_of(GainFn f) { return GainFn::compose(GainFn::power(0.5), std::move(f)); }
GainFn square_of(GainFn f) { return GainFn::compose(GainFn::power(2.0), std::move(f)); }

void register_gain_fn(const std::string& name, std::function<double(double)> fn) {
  if (!fn) throw DomainError("cannot register an empty function as '" + name + "'");
  auto& reg = registry();
  std::lock_guard<std::mutex> lock(reg.mu);
  reg.fns[name] = std::move(fn);
}

bool has_registered_gain_fn(const std::string& name) {
  auto& reg = registry();
  std::lock_guard<std::mutex> lock(reg.mu);
  return reg.fns.count(name) > 0;
}

double example2_map(double x) {
  if (x == 0.0) return 0.0;
  return x * std::exp(-1.0 / (2.0 * x * x));
}

double example2_inverse(double z) {
  if (z == 0.0 || std::isnan(z)) return 0.0;
  const double a = std::fabs(z);
  // Newton on g(x) = ln x - 1/(2x^2) - ln a. g is increasing and concave, so
  // iterates started left of the root increase monotonically to it.
  const auto g = [a](double x) { return std::log(x) - 0.5 / (x * x) - std::log(a); };
  double x = a;
  if (a < 1.0) {
    const double guess = 1.0 / std::sqrt(2.0 * std::log(1.0 / a));
    if (guess > x && g(guess) <= 0) x = guess;
  }
  for (int i = 0; i < 200; ++i) {
    const double gp = 1.0 / x + 1.0 / (x * x * x);
    const double step = -g(x) / gp;
    if (!(step > 0)) break;
    x += step;
    if (step <= 1e-16 * x) break;
  }
  return z < 0 ? -x : x;
}

// ---------------------------------------------------------------------------

double solve_increasing(const std::function<double(double)>& g, double y,
                        const BisectionOptions& opts) {
  if (!(y >= 0)) throw DomainError("inverse requested for negative value " + fmt(y));
  if (y == 0.0) return 0.0;
  constexpr double kTiny = 1e-300;
  double lo = 0.0;
  double hi = 1.0;
  if (g(hi) >= y) {
    while (hi > kTiny && g(hi * 0.5) >= y) hi *= 0.5;
    lo = hi > kTiny ? hi * 0.5 : 0.0;
  } else {
    while (g(hi) < y) {
      lo = hi;
      hi *= 2.0;
      if (hi > kSaturation) {
        throw RangeError("value " + fmt(y) + " not reached below the saturation bound");
      }
    }
  }
  for (int i = 0; i < opts.max_iterations; ++i) {
    if (hi - lo <= opts.relative_width * hi) break;
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) >= y) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double inverse_eval(const GainFn& f, double y, const BisectionOptions& opts) {
  switch (f.op()) {
    case GainOp::kIdentity:
      if (!(y >= 0)) throw DomainError("inverse requested for negative value " + fmt(y));
      return y;
    default:
      return solve_increasing([&f](double s) { return f.value(s); }, y, opts);
  }
}

// ---------------------------------------------------------------------------

std::vector<double> GridSpec::samples() const {
  std::vector<double> out;
  if (points < 2 || !(s_max > 0)) return out;
  out.reserve(points);
  if (spacing == GridSpacing::kLog) {
    const double lo = std::log(std::min(s_min, s_max));
    const double hi = std::log(s_max);
    for (std::size_t i = 0; i < points; ++i) {
      out.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1)));
    }
  } else {
    for (std::size_t i = 0; i < points; ++i) {
      out.push_back(s_max * static_cast<double>(i) / static_cast<double>(points - 1));
    }
  }
  out.back() = s_max;
  return out;
}

std::string KinfCertReport::summary() const {
  if (verdict()) return "certified K-infinity on grid";
  std::string out;
  const auto add = [&out](const std::string& part) {
    if (!out.empty()) out += "; ";
    out += part;
  };
  if (!zero_at_zero) add("f(0) = " + fmt(value_at_zero) + " is not zero");
  if (!monotone_on_grid) add("not monotone near s = " + fmt(first_violation));
  if (!unbounded_advisory) {
    add("f(s_max) = " + fmt(value_at_max) + " below unbounded threshold " + fmt(unbounded_threshold));
  }
  return "not certified K-infinity: " + out;
}

KinfCertReport certify_kinf(const GainFn& f, const CertifyOptions& opts) {
  KinfCertReport rep;
  rep.grid = opts.grid;
  rep.tolerance = opts.tolerance;
  rep.unbounded_threshold = opts.unbounded_threshold;
  rep.first_violation = std::nan("");
  rep.value_at_zero = f.value(0.0);
  rep.zero_at_zero = std::fabs(rep.value_at_zero) <= opts.tolerance;

  const std::vector<double> grid = opts.grid.samples();
  if (grid.empty()) return rep;
  rep.monotone_on_grid = true;
  double prev = rep.value_at_zero;
  for (double s : grid) {
    const double v = f.value(s);
    if (v - prev < -opts.tolerance) {
      rep.monotone_on_grid = false;
      rep.first_violation = s;
      break;
    }
    prev = v;
  }
  rep.value_at_max = f.value(opts.grid.s_max);
  rep.unbounded_advisory = rep.value_at_max > opts.unbounded_threshold;
  return rep;
}

// ---------------------------------------------------------------------------

GainFn weak_triangle_companion(const GainFn& rho, const CertifyOptions& opts) {
  const GainFn diff = GainFn::excess(rho);
  const KinfCertReport rep = certify_kinf(diff, opts);
  if (!rep.verdict()) {
    throw PreconditionError("rho - Id must be K-infinity: " + rep.summary());
  }
  return GainFn::compose(rho, GainFn::inverse(diff));
}

double weak_triangle_bound(const GainFn& gamma, const GainFn& rho, double a, double b,
                           const CertifyOptions& opts) {
  if (!(a >= 0) || !(b >= 0)) throw DomainError("weak triangle bound needs nonnegative a, b");
  const KinfCertReport g = certify_kinf(gamma, opts);
  // The bound only uses monotonicity of gamma; unboundedness is not needed.
  if (!g.zero_at_zero || !g.monotone_on_grid) {
    throw PreconditionError("gamma must be zero at zero and increasing: " + g.summary());
  }
  const GainFn diff = GainFn::excess(rho);
  const KinfCertReport d = certify_kinf(diff, opts);
  if (!d.verdict()) throw PreconditionError("rho - Id must be K-infinity: " + d.summary());
  const double first = gamma(rho(a));
  const double second = gamma(rho(inverse_eval(diff, b)));
  return std::max(first, second);
}

GainFn sum_lower_envelope(const GainFn& alpha1, const GainFn& alpha2) {
  return GainFn::min(GainFn::pre_scale(0.5, alpha1), GainFn::pre_scale(0.5, alpha2));
}

double young_split(double a_sq, double b_sq, double eps) {
  if (!(eps > 0)) throw DomainError("Young splitting needs eps > 0, got " + fmt(eps));
  return (1.0 + eps * eps) * a_sq + (1.0 + 1.0 / (eps * eps)) * b_sq;
}

}  // namespace issl2
