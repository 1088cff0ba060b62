#include "issl2/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "issl2/errors.hpp"
#include "issl2/sampling.hpp"

namespace issl2 {

namespace {

double param_or(const ModelParams& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

double ex2_input_gain(double x) {
  if (x == 0.0) return 0.0;
  const double inv_sq = 1.0 / (x * x);
  return std::exp(-0.5 * inv_sq) * (1.0 + inv_sq);
}

struct WaveformRegistry {
  std::mutex mu;
  std::map<std::string, std::function<double(double, std::size_t)>> fns;

  WaveformRegistry() {
    fns["sine"] = [](double t, std::size_t) { return std::sin(t); };
    fns["decaying"] = [](double t, std::size_t) { return 2.0 * std::exp(-t); };
  }
};

WaveformRegistry& waveforms() {
  static WaveformRegistry r;
  return r;
}

}  // namespace

SystemModel make_model(const std::string& name, const ModelParams& params) {
  SystemModel m;
  m.name = name;
  if (name == "ex1_cubic") {
    m.f = [](auto x, auto, auto dx) { dx[0] = -x[0] * x[0] * x[0]; };
  } else if (name == "ex2_cubic_forced") {
    m.m = 1;
    m.f = [](auto x, auto w, auto dx) { dx[0] = -x[0] * x[0] * x[0] + w[0]; };
  } else if (name == "ex3_bilinear") {
    m.m = 1;
    m.f = [](auto x, auto w, auto dx) { dx[0] = -x[0] + x[0] * w[0]; };
  } else if (name == "ex1_transformed") {
    m.f = [](auto z, auto, auto dx) {
      const double x = example2_inverse(z[0]);
      dx[0] = -z[0] * (1.0 + x * x);
    };
  } else if (name == "ex2_transformed") {
    m.m = 1;
    m.f = [](auto z, auto w, auto dx) {
      const double x = example2_inverse(z[0]);
      dx[0] = -z[0] * (1.0 + x * x) + ex2_input_gain(x) * w[0];
    };
  } else if (name == "linear1d") {
    const double a = param_or(params, "a", 1.0);
    const double b = param_or(params, "b", 1.0);
    m.m = 1;
    m.f = [a, b](auto x, auto w, auto dx) { dx[0] = -a * x[0] + b * w[0]; };
  } else if (name == "linear1d_auto") {
    const double a = param_or(params, "a", 1.0);
    m.f = [a](auto x, auto, auto dx) { dx[0] = -a * x[0]; };
  } else {
    throw DomainError("unknown model '" + name + "'");
  }
  return m;
}

std::vector<std::string> builtin_model_names() {
  return {"ex1_cubic",       "ex2_cubic_forced", "ex3_bilinear", "ex1_transformed",
          "ex2_transformed", "linear1d",         "linear1d_auto"};
}

SystemModel cascade_model(const SystemModel& driven, const SystemModel& driver) {
  if (driven.m != driver.n) {
    throw DomainError("cascade needs the driven input dimension to equal the driver state dimension");
  }
  SystemModel c;
  c.name = "cascade(" + driven.name + ", " + driver.name + ")";
  c.n = driven.n + driver.n;
  c.m = driver.m;
  const std::size_t n1 = driven.n;
  const std::size_t n2 = driver.n;
  c.f = [driven, driver, n1, n2](std::span<const double> x, std::span<const double> w,
                                 std::span<double> dx) {
    const auto x1 = x.subspan(0, n1);
    const auto x2 = x.subspan(n1, n2);
    driven.f(x1, x2, dx.subspan(0, n1));
    driver.f(x2, w, dx.subspan(n1, n2));
  };
  return c;
}

SystemModel feedback_model(const SystemModel& a, const SystemModel& b, bool external_inputs) {
  if (a.m != b.n || b.m != a.n) {
    throw DomainError("feedback needs each input dimension to equal the other state dimension");
  }
  SystemModel c;
  c.name = std::string(external_inputs ? "feedback_eta(" : "feedback(") + a.name + ", " + b.name + ")";
  c.n = a.n + b.n;
  c.m = external_inputs ? a.m + b.m : 0;
  const std::size_t n1 = a.n;
  const std::size_t n2 = b.n;
  c.f = [a, b, n1, n2, external_inputs](std::span<const double> x, std::span<const double> eta,
                                        std::span<double> dx) {
    const auto x1 = x.subspan(0, n1);
    const auto x2 = x.subspan(n1, n2);
    if (!external_inputs) {
      a.f(x1, x2, dx.subspan(0, n1));
      b.f(x2, x1, dx.subspan(n1, n2));
      return;
    }
    Vec w1(x2.begin(), x2.end());
    Vec w2(x1.begin(), x1.end());
    for (std::size_t i = 0; i < n2; ++i) w1[i] += eta[i];
    for (std::size_t i = 0; i < n1; ++i) w2[i] += eta[n2 + i];
    a.f(x1, w1, dx.subspan(0, n1));
    b.f(x2, w2, dx.subspan(n1, n2));
  };
  return c;
}

// ---------------------------------------------------------------------------

InputSignal InputSignal::zero() { return {}; }

InputSignal InputSignal::constant(Vec v) {
  InputSignal s;
  s.kind = Kind::kConstant;
  s.value = std::move(v);
  return s;
}

InputSignal InputSignal::piecewise_constant(std::vector<double> switch_times, std::vector<Vec> values) {
  if (switch_times.empty() || switch_times.size() != values.size()) {
    throw DomainError("piecewise-constant input needs one value per segment");
  }
  if (switch_times.front() != 0.0) throw DomainError("first switch time must be 0");
  for (std::size_t i = 1; i < switch_times.size(); ++i) {
    if (!(switch_times[i] >= switch_times[i - 1])) throw DomainError("switch times must be sorted");
  }
  InputSignal s;
  s.kind = Kind::kPiecewiseConstant;
  s.switch_times = std::move(switch_times);
  s.values = std::move(values);
  return s;
}

InputSignal InputSignal::registered(std::string name) {
  auto& reg = waveforms();
  {
    std::lock_guard<std::mutex> lock(reg.mu);
    if (reg.fns.count(name) == 0) throw DomainError("unknown waveform '" + name + "'");
  }
  InputSignal s;
  s.kind = Kind::kWaveform;
  s.waveform = std::move(name);
  return s;
}

void register_waveform(const std::string& name, std::function<double(double, std::size_t)> fn) {
  auto& reg = waveforms();
  std::lock_guard<std::mutex> lock(reg.mu);
  reg.fns[name] = std::move(fn);
}

void InputSignal::sample(double t, std::span<double> out) const {
  const auto copy_checked = [&out](const Vec& v) {
    if (v.size() != out.size()) {
      throw DomainError("input value has dimension " + std::to_string(v.size()) + ", model expects " +
                        std::to_string(out.size()));
    }
    std::copy(v.begin(), v.end(), out.begin());
  };
  switch (kind) {
    case Kind::kZero:
      std::fill(out.begin(), out.end(), 0.0);
      return;
    case Kind::kConstant:
      copy_checked(value);
      return;
    case Kind::kPiecewiseConstant: {
      const auto it = std::upper_bound(switch_times.begin(), switch_times.end(), t);
      const std::size_t seg = static_cast<std::size_t>(it - switch_times.begin()) - 1;
      copy_checked(values[seg]);
      return;
    }
    case Kind::kWaveform: {
      std::function<double(double, std::size_t)> fn;
      {
        auto& reg = waveforms();
        std::lock_guard<std::mutex> lock(reg.mu);
        fn = reg.fns.at(waveform);
      }
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(t, i);
      return;
    }
  }
}

Trajectory Trajectory::mapped(const CoordinateTransform& t,
                              const std::optional<CoordinateTransform>& s) const {
  if (t.dim() != n) throw DomainError("state transform dimension does not match the trajectory");
  if (m > 0 && s && s->dim() != m) throw DomainError("input transform dimension does not match");
  Trajectory out = *this;
  for (std::size_t k = 0; k < size(); ++k) {
    const Vec z = t.apply(state(k));
    std::copy(z.begin(), z.end(), out.states.begin() + static_cast<std::ptrdiff_t>(k * n));
    if (m > 0 && s) {
      const Vec v = s->apply(input(k));
      std::copy(v.begin(), v.end(), out.inputs.begin() + static_cast<std::ptrdiff_t>(k * m));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Trajectory integrate(const SystemModel& model, std::span<const double> x0, const InputSignal& u,
                     double t_end, double dt, const IntegratorOptions& opts) {
  if (x0.size() != model.n) {
    throw DomainError("initial state has dimension " + std::to_string(x0.size()) + ", model " +
                      model.name + " expects " + std::to_string(model.n));
  }
  if (!(dt > 0) || !(t_end > 0) || dt > t_end * (1 + 1e-12)) {
    throw DomainError("integration needs 0 < dt <= t_end");
  }
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  const std::size_t n = model.n;
  const std::size_t m = model.m;

  Trajectory traj;
  traj.model = model.name;
  traj.n = n;
  traj.m = m;
  traj.dt = dt;
  traj.steps = steps;
  traj.states.resize((steps + 1) * n);
  traj.inputs.resize((steps + 1) * m);
  std::copy(x0.begin(), x0.end(), traj.states.begin());

  Vec x(x0.begin(), x0.end());
  Vec w(m), k1(n), k2(n), k3(n), k4(n), tmp(n);
  const auto eval = [&](const Vec& at, Vec& out, double t) {
    model.f(at, w, out);
    for (double v : out) {
      if (!std::isfinite(v)) throw BlowUpError("vector field of " + model.name + " is not finite", t);
    }
  };
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    u.sample(t, w);
    std::copy(w.begin(), w.end(), traj.inputs.begin() + static_cast<std::ptrdiff_t>(k * m));
    eval(x, k1, t);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    eval(tmp, k2, t);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    eval(tmp, k3, t);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
    eval(tmp, k4, t);
    for (std::size_t i = 0; i < n; ++i) x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    const double norm = euclidean_norm(x);
    if (!std::isfinite(norm) || norm > opts.blow_up) {
      throw BlowUpError("state of " + model.name + " left the simulation envelope", t + dt);
    }
    std::copy(x.begin(), x.end(), traj.states.begin() + static_cast<std::ptrdiff_t>((k + 1) * n));
  }
  u.sample(static_cast<double>(steps) * dt, w);
  std::copy(w.begin(), w.end(), traj.inputs.begin() + static_cast<std::ptrdiff_t>(steps * m));
  return traj;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> norms(std::span<const double> samples, std::size_t dim) {
  if (dim == 0) return {};
  std::vector<double> out(samples.size() / dim);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = euclidean_norm(samples.subspan(k * dim, dim));
  return out;
}

}  // namespace

std::vector<double> running_integral(const GainFn& alpha, std::span<const double> samples,
                                     std::size_t dim, double dt) {
  const std::vector<double> r = norms(samples, dim);
  std::vector<double> out(r.size(), 0.0);
  double prev = r.empty() ? 0.0 : alpha(r[0]);
  for (std::size_t k = 1; k < r.size(); ++k) {
    const double cur = alpha(r[k]);
    out[k] = out[k - 1] + 0.5 * dt * (prev + cur);
    prev = cur;
  }
  return out;
}

std::vector<double> running_hold_integral(const GainFn& sigma, std::span<const double> samples,
                                          std::size_t dim, double dt) {
  const std::vector<double> r = norms(samples, dim);
  std::vector<double> out(r.size(), 0.0);
  for (std::size_t k = 1; k < r.size(); ++k) out[k] = out[k - 1] + dt * sigma(r[k - 1]);
  return out;
}

double truncated_l2_sq(std::span<const double> samples, std::size_t dim, double dt) {
  return integral_of(GainFn::power(2), samples, dim, dt);
}

double integral_of(const GainFn& alpha, std::span<const double> samples, std::size_t dim, double dt) {
  const std::vector<double> run = running_integral(alpha, samples, dim, dt);
  return run.empty() ? 0.0 : run.back();
}

EstimateReport verify_certificate(const Certificate& c, const Trajectory& traj, double tol) {
  const bool has_nonzero_input =
      std::any_of(traj.inputs.begin(), traj.inputs.end(), [](double v) { return v != 0.0; });
  if (c.has_input() && traj.m == 0) {
    throw DomainError(std::string(to_string(c.kind())) + " certificate needs a model with inputs");
  }
  if (!c.has_input() && has_nonzero_input) {
    throw DomainError(std::string(to_string(c.kind())) +
                      " certificate applies to autonomous trajectories only");
  }
  const std::size_t len = traj.size();
  const GainFn square = GainFn::power(2);
  const double x0 = euclidean_norm(traj.state(0));

  EstimateReport rep;
  rep.kind = c.kind();
  rep.mode = c.mode;
  rep.tolerance = tol;
  rep.dt = traj.dt;
  rep.rhs.assign(len, 0.0);

  const auto beta_of = [&](const GainFn& beta) { return beta(x0); };
  std::vector<double> input_term;
  switch (c.kind()) {
    case CertKind::kAlphaIntegrable: {
      const auto& x = c.as<AlphaIntegrable>();
      rep.lhs = running_integral(x.alpha, traj.states, traj.n, traj.dt);
      rep.rhs.assign(len, beta_of(x.beta));
      break;
    }
    case CertKind::kL2Stable: {
      const auto& x = c.as<L2Stable>();
      rep.lhs = running_integral(square, traj.states, traj.n, traj.dt);
      rep.rhs.assign(len, beta_of(x.beta));
      break;
    }
    case CertKind::kISS: {
      const auto& x = c.as<ISS>();
      rep.lhs = running_integral(x.alpha, traj.states, traj.n, traj.dt);
      input_term = running_hold_integral(x.sigma, traj.inputs, traj.m, traj.dt);
      const double b = beta_of(x.beta);
      for (std::size_t k = 0; k < len; ++k) rep.rhs[k] = combine(c.mode, b, input_term[k]);
      break;
    }
    case CertKind::kIISS: {
      const auto& x = c.as<IISS>();
      rep.lhs = running_integral(x.alpha, traj.states, traj.n, traj.dt);
      input_term = running_hold_integral(x.sigma, traj.inputs, traj.m, traj.dt);
      const double b = beta_of(x.beta);
      for (std::size_t k = 0; k < len; ++k) rep.rhs[k] = combine(c.mode, b, x.gamma(input_term[k]));
      break;
    }
    case CertKind::kLinearL2: {
      const auto& x = c.as<LinearL2>();
      rep.lhs = running_integral(square, traj.states, traj.n, traj.dt);
      input_term = running_hold_integral(square, traj.inputs, traj.m, traj.dt);
      const double b = beta_of(x.beta);
      for (std::size_t k = 0; k < len; ++k) rep.rhs[k] = combine(c.mode, b, x.gain_sq * input_term[k]);
      break;
    }
    case CertKind::kNonlinearL2: {
      const auto& x = c.as<NonlinearL2>();
      rep.lhs = running_integral(square, traj.states, traj.n, traj.dt);
      input_term = running_hold_integral(square, traj.inputs, traj.m, traj.dt);
      const double b = beta_of(x.beta);
      for (std::size_t k = 0; k < len; ++k) rep.rhs[k] = combine(c.mode, b, x.gamma(input_term[k]));
      break;
    }
  }

  rep.margin.resize(len);
  rep.worst_normalized_margin = kSaturation;
  for (std::size_t k = 0; k < len; ++k) {
    rep.margin[k] = rep.rhs[k] - rep.lhs[k];
    const double normalized = rep.margin[k] / std::max(1.0, rep.rhs[k]);
    if (normalized < rep.worst_normalized_margin) {
      rep.worst_normalized_margin = normalized;
      rep.worst_index = k;
    }
    if (normalized < -tol) rep.pass = false;
  }
  return rep;
}

EstimateReport verify_transformed(const TransformedCertificate& c, const Trajectory& traj, double tol) {
  return verify_certificate(c.cert, traj.mapped(c.state_transform, c.input_transform), tol);
}

// ---------------------------------------------------------------------------

RunSample draw_run(const SamplerSpec& spec, const SystemModel& model, std::size_t i) {
  RunSample s;
  s.seed = splitmix64(spec.seed + static_cast<std::uint64_t>(i));
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> x0(-spec.x0_max, spec.x0_max);
  s.x0.resize(model.n);
  for (double& v : s.x0) v = x0(rng);
  if (model.m == 0) {
    s.input = InputSignal::zero();
    return s;
  }
  std::uniform_real_distribution<double> when(0.0, spec.t_end);
  std::uniform_real_distribution<double> amp(spec.amplitude_min, spec.amplitude_max);
  std::vector<double> times{0.0};
  for (std::size_t j = 0; j < spec.switches; ++j) times.push_back(when(rng));
  std::sort(times.begin() + 1, times.end());
  std::vector<Vec> values(times.size(), Vec(model.m));
  for (auto& v : values) {
    for (double& a : v) a = amp(rng);
  }
  s.input = InputSignal::piecewise_constant(std::move(times), std::move(values));
  return s;
}

namespace {

struct RunOutcome {
  bool pass = false;
  bool blow_up = false;
  double worst = 0.0;
};

MonteCarloReport run_batch(const SystemModel& model, const SamplerSpec& spec,
                           const std::function<EstimateReport(const Trajectory&)>& check) {
  MonteCarloReport rep;
  rep.runs = spec.runs;
  if (spec.runs == 0) return rep;
  rep.no_evidence = false;

  std::vector<RunOutcome> outcomes(spec.runs);
  std::vector<std::uint64_t> seeds(spec.runs);
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next++; i < spec.runs; i = next++) {
      const RunSample s = draw_run(spec, model, i);
      seeds[i] = s.seed;
      RunOutcome& out = outcomes[i];
      try {
        const Trajectory traj = integrate(model, s.x0, s.input, spec.t_end, spec.dt);
        const EstimateReport r = check(traj);
        out.pass = r.pass;
        out.worst = r.worst_normalized_margin;
      } catch (const BlowUpError&) {
        out.blow_up = true;
        out.worst = -kSaturation;
      }
    }
  };
  std::size_t threads = spec.threads == 0 ? std::thread::hardware_concurrency() : spec.threads;
  threads = std::clamp<std::size_t>(threads, 1, spec.runs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  rep.worst_normalized_margin = kSaturation;
  for (std::size_t i = 0; i < spec.runs; ++i) {
    const RunOutcome& o = outcomes[i];
    if (o.pass) ++rep.passes;
    else rep.failing_seeds.push_back(seeds[i]);
    if (o.blow_up) ++rep.blow_ups;
    if (o.worst < rep.worst_normalized_margin) {
      rep.worst_normalized_margin = o.worst;
      rep.worst_seed = seeds[i];
    }
  }
  rep.pass_rate = static_cast<double>(rep.passes) / static_cast<double>(rep.runs);
  return rep;
}

}  // namespace

MonteCarloReport monte_carlo_verify(const Certificate& c, const SystemModel& model,
                                    const SamplerSpec& spec) {
  const double tol = spec.tolerance;
  return run_batch(model, spec, [&c, tol](const Trajectory& t) { return verify_certificate(c, t, tol); });
}

MonteCarloReport monte_carlo_verify(const TransformedCertificate& c, const SystemModel& model,
                                    const SamplerSpec& spec) {
  const double tol = spec.tolerance;
  return run_batch(model, spec, [&c, tol](const Trajectory& t) { return verify_transformed(c, t, tol); });
}

// ---------------------------------------------------------------------------

Counterexample falsify_linear_l2_bilinear(const GainFn& beta_hat, double gain,
                                          const FalsifyOptions& opts) {
  if (!(gain >= 0)) throw DomainError("gain must be nonnegative");
  Counterexample cx;
  cx.input_level = opts.input_level;
  cx.x0 = inverse_eval(beta_hat, 1.0);
  const double g2 = gain * gain;
  const double x0_sq = cx.x0 * cx.x0;
  // The right side grows exponentially, so the scan terminates.
  for (std::size_t k = 1;; ++k) {
    const double t = static_cast<double>(k) * opts.t_step;
    if (1.0 + 2.0 * g2 * t < 0.25 * x0_sq * std::expm1(2.0 * t)) {
      cx.t_star = t;
      break;
    }
  }
  const SystemModel model = make_model("ex3_bilinear");
  const double x0[] = {cx.x0};
  cx.witness = integrate(model, x0, InputSignal::constant({opts.input_level}), cx.t_star,
                         std::min(opts.dt, cx.t_star));
  cx.simulated_l2_sq = truncated_l2_sq(cx.witness.states, 1, cx.witness.dt);
  const double t_sim = cx.witness.time(cx.witness.steps);
  cx.claimed_bound = beta_hat(std::fabs(cx.x0)) + g2 * opts.input_level * opts.input_level * t_sim;
  cx.relative_margin = (cx.simulated_l2_sq - cx.claimed_bound) / cx.claimed_bound;
  cx.confirmed = cx.simulated_l2_sq > cx.claimed_bound;
  return cx;
}

bool convergence_check(const Trajectory& traj, double window, double threshold) {
  if (traj.size() == 0) return true;
  const double start = euclidean_norm(traj.state(0));
  const auto first = static_cast<std::size_t>(
      std::floor((1.0 - std::clamp(window, 0.0, 1.0)) * static_cast<double>(traj.steps)));
  double tail = 0.0;
  for (std::size_t k = first; k < traj.size(); ++k) tail = std::max(tail, euclidean_norm(traj.state(k)));
  return tail <= threshold * start;
}

Ex1ClosedForm closed_form_ex1(double x0, double t) {
  const double growth = 2.0 * x0 * x0 * t;
  return {x0 / std::sqrt(1.0 + growth), 0.5 * std::log1p(growth)};
}

// ---------------------------------------------------------------------------

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "t";
  for (std::size_t i = 1; i <= traj.n; ++i) out << ",x" << i;
  for (std::size_t i = 1; i <= traj.m; ++i) out << ",w" << i;
  out << "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_number(traj.time(k));
    for (double v : traj.state(k)) out << "," << format_number(v);
    for (double v : traj.input(k)) out << "," << format_number(v);
    out << "\n";
  }
}

void write_report_csv(const EstimateReport& rep, std::ostream& out) {
  out << "t,lhs,rhs,margin\n";
  for (std::size_t k = 0; k < rep.lhs.size(); ++k) {
    out << format_number(static_cast<double>(k) * rep.dt) << "," << format_number(rep.lhs[k]) << ","
        << format_number(rep.rhs[k]) << "," << format_number(rep.margin[k]) << "\n";
  }
}

}  // namespace issl2
