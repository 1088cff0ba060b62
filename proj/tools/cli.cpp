#include "issl2/cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "issl2/acceptance.hpp"
#include "issl2/errors.hpp"
#include "issl2/fixtures.hpp"
#include "issl2/interconnect.hpp"
#include "issl2/simulate.hpp"

namespace issl2::cli {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

const Json kEmpty = Json::object();

const Json& section(const Json& j, const char* key) {
  if (!j.contains(key)) return kEmpty;
  if (!j.at(key).is_object()) bad(std::string("'") + key + "' must be an object");
  return j.at(key);
}

double number(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) bad(std::string("'") + key + "' must be a number");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) bad(std::string("'") + key + "' must be finite");
  return v;
}

double positive(const Json& j, const char* key, double fallback) {
  const double v = number(j, key, fallback);
  if (!(v > 0)) bad(std::string("'") + key + "' must be positive");
  return v;
}

std::size_t count(const Json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer() || j.at(key).get<long long>() < 0) {
    bad(std::string("'") + key + "' must be a nonnegative integer");
  }
  return j.at(key).get<std::size_t>();
}

Vec vector_of(const Json& j, const char* key) {
  if (!j.contains(key)) bad(std::string("missing '") + key + "'");
  const Json& v = j.at(key);
  if (v.is_number()) return Vec{v.get<double>()};
  if (!v.is_array()) bad(std::string("'") + key + "' must be a number or an array");
  Vec out;
  for (const Json& e : v) {
    if (!e.is_number()) bad(std::string("'") + key + "' entries must be numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Json report_json(const KinfCertReport& r) {
  return {{"verdict", r.verdict()},
          {"zero_at_zero", r.zero_at_zero},
          {"monotone_on_grid", r.monotone_on_grid},
          {"unbounded_advisory", r.unbounded_advisory},
          {"first_violation", r.first_violation},
          {"summary", r.summary()}};
}

Json mc_json(const MonteCarloReport& r) {
  Json j = {{"runs", r.runs},
            {"passes", r.passes},
            {"blow_ups", r.blow_ups},
            {"pass_rate", r.pass_rate},
            {"no_evidence", r.no_evidence},
            {"worst_normalized_margin", r.worst_normalized_margin},
            {"failing_seeds", r.failing_seeds}};
  if (r.worst_seed) j["worst_seed"] = *r.worst_seed;
  return j;
}

class Run {
 public:
  Run(const Json& config, fs::path base, const Options& opts, std::ostream& out, std::ostream& err)
      : config_(config), base_(std::move(base)), opts_(opts), out_(out), err_(err) {
    if (!config_.is_object()) bad("config must be a JSON object");
    seed_ = opts.seed ? *opts.seed : static_cast<std::uint64_t>(number(config_, "seed", 1));
    load_functions();
    load_transforms();
  }

  int dispatch() {
    if (!config_.contains("command") || !config_.at("command").is_string()) bad("missing 'command'");
    const std::string cmd = config_.at("command").get<std::string>();
    static const std::map<std::string, int (Run::*)(const Json&)> kCommands = {
        {"simulate", &Run::simulate}, {"verify", &Run::verify},   {"compose", &Run::compose},
        {"smallgain", &Run::smallgain}, {"equiv", &Run::equiv},   {"falsify", &Run::falsify},
        {"selftest", &Run::selftest}};
    const auto it = kCommands.find(cmd);
    if (it == kCommands.end()) bad("unknown command '" + cmd + "'");
    fs::create_directories(opts_.out_dir);
    return (this->*(it->second))(section(config_, cmd.c_str()));
  }

 private:
  // -- definitions ----------------------------------------------------------

  // Entries may reference each other in any order; resolve until no progress.
  void load_functions() {
    const Json& defs = section(config_, "functions");
    std::map<std::string, const Json*> pending;
    for (const auto& [name, j] : defs.items()) pending[name] = &j;
    while (!pending.empty()) {
      std::string last_error;
      bool progress = false;
      for (auto it = pending.begin(); it != pending.end();) {
        try {
          functions_[it->first] = gain_from_json(*it->second, functions_);
          it = pending.erase(it);
          progress = true;
        } catch (const ConfigError& e) {
          last_error = "function '" + it->first + "': " + e.what();
          ++it;
        }
      }
      if (!progress) bad(last_error);
    }
  }

  void load_transforms() {
    for (const auto& [name, j] : section(config_, "transforms").items()) {
      transforms_.emplace(name, transform_from_json(j, functions_));
    }
  }

  GainFn function(const Json& j) const {
    if (j.is_string()) {
      const auto it = functions_.find(j.get<std::string>());
      if (it == functions_.end()) bad("unknown function '" + j.get<std::string>() + "'");
      return it->second;
    }
    return gain_from_json(j, functions_);
  }

  CoordinateTransform transform(const Json& j) const {
    if (j.is_string()) {
      const auto it = transforms_.find(j.get<std::string>());
      if (it == transforms_.end()) bad("unknown transform '" + j.get<std::string>() + "'");
      return it->second;
    }
    return transform_from_json(j, functions_);
  }

  ModelParams params(const Json& j) const {
    ModelParams p;
    for (const auto& [k, v] : section(j, "params").items()) {
      if (!v.is_number()) bad("model parameter '" + k + "' must be a number");
      p[k] = v.get<double>();
    }
    return p;
  }

  CertificateDocument certificate(const Json& j) const {
    if (j.is_string()) {
      const std::string name = j.get<std::string>();
      const Json& table = section(config_, "certificates");
      if (table.contains(name)) return certificate(table.at(name));
      try {
        return {builtin_certificate(name).cert, std::nullopt, std::nullopt};
      } catch (const DomainError&) {
        bad("unknown certificate '" + name + "'");
      }
    }
    if (!j.is_object()) bad("certificate must be a name or an object");
    if (j.contains("builtin")) {
      try {
        return {builtin_certificate(j.at("builtin").get<std::string>(), params(j)).cert, std::nullopt, std::nullopt};
      } catch (const DomainError& e) {
        bad(e.what());
      }
    }
    if (j.contains("file")) {
      const fs::path path = base_ / j.at("file").get<std::string>();
      std::ifstream in(path);
      if (!in) bad("cannot read certificate file '" + path.string() + "'");
      Json doc;
      try {
        doc = Json::parse(in);
      } catch (const Json::exception& e) {
        bad("certificate file '" + path.string() + "': " + e.what());
      }
      return document_from_json(doc, functions_);
    }
    return document_from_json(j, functions_);
  }

  SystemModel model(const Json& j) const {
    if (j.is_string()) {
      const std::string name = j.get<std::string>();
      const Json& table = section(config_, "models");
      if (table.contains(name)) return model(table.at(name));
      try {
        return make_model(name);
      } catch (const DomainError&) {
        bad("unknown model '" + name + "'");
      }
    }
    if (!j.is_object()) bad("model must be a name or an object");
    try {
      if (j.contains("builtin")) return make_model(j.at("builtin").get<std::string>(), params(j));
      if (j.contains("cascade")) {
        const Json& pair = j.at("cascade");
        if (!pair.is_array() || pair.size() != 2) bad("'cascade' needs [driven, driver]");
        return cascade_model(model(pair[0]), model(pair[1]));
      }
      if (j.contains("feedback")) {
        const Json& pair = j.at("feedback");
        if (!pair.is_array() || pair.size() != 2) bad("'feedback' needs two models");
        return feedback_model(model(pair[0]), model(pair[1]), j.value("external_inputs", false));
      }
    } catch (const DomainError& e) {
      bad(e.what());
    }
    bad("model needs 'builtin', 'cascade' or 'feedback'");
  }

  InputSignal signal(const Json& j) const {
    if (j.is_null()) return InputSignal::zero();
    if (j.is_string()) {
      const std::string name = j.get<std::string>();
      const Json& table = section(config_, "signals");
      if (table.contains(name)) return signal(table.at(name));
      if (name == "zero") return InputSignal::zero();
      bad("unknown signal '" + name + "'");
    }
    const std::string kind = j.value("kind", "");
    try {
      if (kind == "zero") return InputSignal::zero();
      if (kind == "constant") return InputSignal::constant(vector_of(j, "value"));
      if (kind == "waveform") return InputSignal::registered(j.value("name", ""));
      if (kind == "piecewise_constant") {
        std::vector<Vec> values;
        for (const Json& v : j.at("values")) values.push_back(v.is_number() ? Vec{v.get<double>()} : v.get<Vec>());
        return InputSignal::piecewise_constant(j.at("switch_times").get<std::vector<double>>(), std::move(values));
      }
    } catch (const DomainError& e) {
      bad(e.what());
    } catch (const Json::exception& e) {
      bad(std::string("signal: ") + e.what());
    }
    bad("signal kind must be zero, constant, waveform or piecewise_constant");
  }

  // -- output ---------------------------------------------------------------

  fs::path out_path(const std::string& name) const { return fs::path(opts_.out_dir) / name; }

  void write_text(const std::string& name, const std::string& text) const {
    std::ofstream f(out_path(name), std::ios::binary);
    if (!f) bad("cannot write '" + out_path(name).string() + "'");
    f << text;
  }

  void write_json(const std::string& name, const Json& j) const { write_text(name, j.dump(2) + "\n"); }

  template <typename Writer>
  void write_csv(const std::string& name, Writer&& w) const {
    std::ofstream f(out_path(name), std::ios::binary);
    if (!f) bad("cannot write '" + out_path(name).string() + "'");
    w(f);
  }

  void say(const std::string& line) const {
    if (!opts_.quiet) out_ << line << "\n";
  }

  // -- commands -------------------------------------------------------------

  int simulate(const Json& s) {
    const SystemModel m = model(s.contains("model") ? s.at("model") : Json());
    const Vec x0 = vector_of(s, "x0");
    const InputSignal u = signal(s.contains("signal") ? s.at("signal") : Json());
    const double t_end = positive(s, "t_end", 10.0);
    const double dt = positive(s, "dt", 1e-3);
    Json summary = {{"command", "simulate"}, {"model", m.name}, {"t_end", t_end}, {"dt", dt}};
    try {
      const Trajectory t = integrate(m, x0, u, t_end, dt);
      write_csv("trajectory.csv", [&](std::ostream& f) { write_trajectory_csv(t, f); });
      const auto last = t.state(t.steps);
      summary["status"] = "ok";
      summary["steps"] = t.steps;
      summary["final_state"] = Vec(last.begin(), last.end());
      summary["state_l2_sq"] = truncated_l2_sq(t.states, t.n, t.dt);
      write_json("summary.json", summary);
      say("simulated " + m.name + ": " + std::to_string(t.steps) + " steps, trajectory.csv written");
      return kOk;
    } catch (const BlowUpError& e) {
      summary["status"] = "blow_up";
      summary["message"] = e.what();
      summary["time"] = e.time();
      write_json("summary.json", summary);
      err_ << "simulation blew up: " << e.what() << "\n";
      return kFailure;
    } catch (const DomainError& e) {
      bad(e.what());
    }
  }

  int verify(const Json& s) {
    if (!s.contains("certificate")) bad("verify needs 'certificate'");
    if (!s.contains("model")) bad("verify needs 'model'");
    const CertificateDocument doc = certificate(s.at("certificate"));
    const SystemModel m = model(s.at("model"));
    const double tol = number(s, "tolerance", 1e-6);
    if (!(tol >= 0)) bad("'tolerance' must be nonnegative");
    const auto check = [&](const Trajectory& t) {
      return doc.transformed() ? verify_transformed(doc.as_transformed(), t, tol) : verify_certificate(doc.cert, t, tol);
    };
    Json summary = {{"command", "verify"}, {"model", m.name}, {"certificate", to_json(doc)}, {"tolerance", tol}};
    try {
      if (s.contains("monte_carlo")) {
        const Json& mc = section(s, "monte_carlo");
        SamplerSpec spec;
        spec.runs = count(mc, "runs", spec.runs);
        spec.seed = seed_;
        spec.t_end = positive(mc, "t_end", spec.t_end);
        spec.dt = positive(mc, "dt", spec.dt);
        spec.x0_max = number(mc, "x0_max", spec.x0_max);
        spec.amplitude_min = number(mc, "amplitude_min", spec.amplitude_min);
        spec.amplitude_max = number(mc, "amplitude_max", spec.amplitude_max);
        spec.switches = count(mc, "switches", spec.switches);
        spec.threads = count(mc, "threads", spec.threads);
        spec.tolerance = tol;
        if (spec.amplitude_max < spec.amplitude_min || spec.x0_max < 0) bad("invalid sampler ranges");
        const MonteCarloReport r = doc.transformed() ? monte_carlo_verify(doc.as_transformed(), m, spec)
                                                     : monte_carlo_verify(doc.cert, m, spec);
        summary["monte_carlo"] = mc_json(r);
        summary["seed"] = seed_;
        // Re-run the worst draw for the per-time report.
        if (r.worst_seed) {
          for (std::size_t i = 0; i < spec.runs; ++i) {
            const RunSample d = draw_run(spec, m, i);
            if (d.seed != *r.worst_seed) continue;
            summary["worst_draw"] = i;
            try {
              const EstimateReport rep = check(integrate(m, d.x0, d.input, spec.t_end, spec.dt));
              write_csv("report.csv", [&](std::ostream& f) { write_report_csv(rep, f); });
            } catch (const BlowUpError& e) {
              summary["worst_draw_blow_up"] = e.what();
            }
            break;
          }
        }
        const bool pass = r.all_pass();
        summary["status"] = pass ? "pass" : "fail";
        write_json("summary.json", summary);
        say(std::string(pass ? "PASS" : "FAIL") + ": " + std::to_string(r.passes) + "/" + std::to_string(r.runs) +
            " runs, worst normalized margin " + format_number(r.worst_normalized_margin));
        return pass ? kOk : kFailure;
      }
      const Vec x0 = vector_of(s, "x0");
      const InputSignal u = signal(s.contains("signal") ? s.at("signal") : Json());
      const Trajectory t = integrate(m, x0, u, positive(s, "t_end", 10.0), positive(s, "dt", 1e-3));
      const EstimateReport rep = check(t);
      write_csv("trajectory.csv", [&](std::ostream& f) { write_trajectory_csv(t, f); });
      write_csv("report.csv", [&](std::ostream& f) { write_report_csv(rep, f); });
      summary["status"] = rep.pass ? "pass" : "fail";
      summary["worst_time"] = rep.worst_time();
      summary["worst_normalized_margin"] = rep.worst_normalized_margin;
      write_json("summary.json", summary);
      say(std::string(rep.pass ? "PASS" : "FAIL") + ": worst normalized margin " +
          format_number(rep.worst_normalized_margin) + " at t = " + format_number(rep.worst_time()));
      return rep.pass ? kOk : kFailure;
    } catch (const BlowUpError& e) {
      summary["status"] = "blow_up";
      summary["message"] = e.what();
      write_json("summary.json", summary);
      err_ << "simulation blew up: " << e.what() << "\n";
      return kFailure;
    } catch (const DomainError& e) {
      bad(e.what());
    }
  }

  SmallGainParams small_gain_params(const Json& s) const {
    SmallGainParams p;
    p.epsilon = positive(s, "epsilon", p.epsilon);
    if (s.contains("rho")) p.rho = function(s.at("rho"));
    if (s.contains("epsilon1")) p.epsilon1 = positive(s, "epsilon1", 1.0);
    if (s.contains("epsilon2")) p.epsilon2 = positive(s, "epsilon2", 1.0);
    if (s.contains("rho1")) p.rho1 = function(s.at("rho1"));
    if (s.contains("rho2")) p.rho2 = function(s.at("rho2"));
    return p;
  }

  SectorConstants sector_constants(const Json& s) const {
    const Json& k = section(s, "sector");
    SectorConstants c;
    c.c = positive(k, "c", c.c);
    c.c1 = positive(k, "c1", c.c1);
    c.c2 = positive(k, "c2", c.c2);
    c.cS1 = positive(k, "cS1", c.cS1);
    c.cS2 = positive(k, "cS2", c.cS2);
    c.cT1 = positive(k, "cT1", c.cT1);
    c.cT2 = positive(k, "cT2", c.cT2);
    return c;
  }

  int compose(const Json& s) {
    const std::string op = s.value("op", "");
    if (!s.contains("inputs") || !s.at("inputs").is_array() || s.at("inputs").size() != 2) {
      bad("compose needs 'inputs': [certificate, certificate]");
    }
    const auto plain = [&](const Json& j) {
      const CertificateDocument d = certificate(j);
      if (d.transformed()) bad("compose inputs must be stated in original coordinates");
      return d.cert;
    };
    const Certificate c1 = plain(s.at("inputs")[0]);
    const Certificate c2 = plain(s.at("inputs")[1]);
    const Json& dims = section(s, "dims");
    const std::size_t n1 = count(dims, "n1", 1), n2 = count(dims, "n2", 1), m2 = count(dims, "m2", 1);
    const SmallGainParams p = small_gain_params(s);
    const SectorConstants k = sector_constants(s);
    CompositionResult r;
    try {
      if (op == "cascade_nl2") r = cascade_nl2(c1, c2);
      else if (op == "feedback_nl2_no_input") r = feedback_nl2_no_input(c1, c2);
      else if (op == "feedback_nl2_max") r = feedback_nl2_max(c1, c2, p);
      else if (op == "feedback_nl2_sum") r = feedback_nl2_sum(c1, c2, p);
      else if (op == "feedback_iss_via_linear") r = feedback_iss_via_linear(c1, c2, k, p, n1, n2);
      else if (op == "cascade_iiss_via_nl2") r = cascade_iiss_via_nl2(c1, c2, k, n1, n2, m2);
      else if (op == "cascade_iiss_direct") r = cascade_iiss_direct(c1, c2, positive(s, "c", 1.0));
      else if (op == "feedback_iiss_no_input") r = feedback_iiss_no_input(c1, c2, k, p, n1, n2);
      else if (op == "feedback_iiss_with_input") r = feedback_iiss_with_input(c1, c2, k, p, n1, n2);
      else if (op == "feedback_iiss_direct") {
        const Json& d = section(s, "direct");
        DirectFeedbackParams dp;
        if (d.contains("rho1")) dp.rho1 = function(d.at("rho1"));
        if (d.contains("rho2")) dp.rho2 = function(d.at("rho2"));
        if (d.contains("rho")) dp.rho = function(d.at("rho"));
        if (d.contains("rho_inner")) dp.rho_inner = function(d.at("rho_inner"));
        dp.k1 = positive(d, "k1", dp.k1);
        dp.k2 = positive(d, "k2", dp.k2);
        r = feedback_iiss_direct(c1, c2, dp);
      } else {
        bad("unknown composition '" + op + "'");
      }
    } catch (const DomainError& e) {
      bad(e.what());
    }
    std::string trace;
    for (const std::string& line : r.trace) trace += line + "\n";
    write_text("trace.txt", trace);
    Json summary = {{"command", "compose"}, {"op", op}, {"status", r.ok() ? "ok" : "failed"}};
    if (r.ok()) {
      write_json("certificate.json", to_json(CertificateDocument{*r.cert, std::nullopt, std::nullopt}));
      summary["kind"] = to_string(r.cert->kind());
      say(op + ": " + r.cert->describe());
    } else {
      summary["failure"] = r.failure;
      if (r.failed_report) summary["failed_report"] = report_json(*r.failed_report);
      say(op + " failed: " + r.failure);
    }
    write_json("summary.json", summary);
    return r.ok() ? kOk : kFailure;
  }

  int equiv(const Json& s) {
    const std::string op = s.value("op", "");
    if (!s.contains("input")) bad("equiv needs 'input'");
    const CertificateDocument in = certificate(s.at("input"));
    if (in.transformed()) bad("equiv input must be stated in original coordinates");
    const std::size_t n = count(s, "n", 1), m = count(s, "m", 1);
    CertificateDocument out;
    std::string step;
    try {
      if (op == "l2_to_alpha_integrable") {
        out.cert = l2_to_alpha_integrable(in.cert);
        step = "L2-stability read as alpha-integrability with alpha(s) = s^2";
      } else if (op == "linear_l2_to_iss") {
        out.cert = linear_l2_to_iss(in.cert);
        step = "linear L2-gain read as ISS with alpha(s) = s^2, sigma(s) = gain_sq s^2";
      } else if (op == "nonlinear_l2_to_iiss") {
        out.cert = nonlinear_l2_to_iiss(in.cert);
        step = "nonlinear L2-gain read as iISS with alpha(s) = sigma(s) = s^2";
      } else if (op == "max_to_sum") {
        out.cert = max_to_sum(in.cert);
        step = "max{a, b} <= a + b";
      } else if (op == "sum_to_max") {
        out.cert = sum_to_max(in.cert);
        step = "a + b <= max{2a, 2b}";
      } else if (op == "alpha_integrable_to_l2" || op == "iss_to_linear_l2" || op == "iiss_to_nonlinear_l2") {
        TransformedCertificate tc;
        if (op == "alpha_integrable_to_l2") {
          tc = alpha_integrable_to_l2(in.cert, n);
          step = "state coordinates z = T(x) making the system L2-stable";
        } else if (op == "iss_to_linear_l2") {
          tc = iss_to_linear_l2(in.cert, positive(s, "gain", 1.0), n, m);
          step = "state and input coordinates giving linear L2-gain gain^2";
        } else {
          tc = iiss_to_nonlinear_l2(in.cert, positive(s, "lambda", 1.0), n, m);
          step = "state and input coordinates giving a nonlinear L2-gain";
        }
        out = {tc.cert, tc.state_transform, tc.input_transform};
      } else if (op == "transform_cert") {
        if (!s.contains("state_transform")) bad("transform_cert needs 'state_transform'");
        const CoordinateTransform t = transform(s.at("state_transform"));
        std::optional<CoordinateTransform> u;
        if (s.contains("input_transform")) u = transform(s.at("input_transform"));
        out.cert = transform_cert(in.cert, t, u);
        step = "same estimate restated in coordinates z = T(x), v = S(w) through bounds on T and S";
      } else {
        bad("unknown equivalence '" + op + "'");
      }
    } catch (const DomainError& e) {
      bad(e.what());
    } catch (const PreconditionError& e) {
      bad(e.what());
    }
    const Json doc = to_json(out);
    write_json("certificate.json", doc);
    write_text("trace.txt", "input: " + in.cert.describe() + "\n" + step + "\nresult: " + out.cert.describe() + "\n");
    write_json("summary.json", {{"command", "equiv"}, {"op", op}, {"status", "ok"}, {"kind", to_string(out.cert.kind())}});
    say(op + ": " + out.cert.describe());
    return kOk;
  }

  int smallgain(const Json& s) {
    std::vector<std::pair<std::string, GainFn>> loops;
    if (s.contains("loop")) loops.emplace_back("Id - g", function(s.at("loop")));
    if (s.contains("gains")) {
      const Json& g = s.at("gains");
      if (!g.is_array() || g.size() != 2) bad("'gains' needs two functions");
      const GainFn g1 = function(g[0]);
      const GainFn g2 = function(g[1]);
      loops.emplace_back("Id - g1 o g2", issl2::compose(g1, g2));
      loops.emplace_back("Id - g2 o g1", issl2::compose(g2, g1));
    }
    if (loops.empty()) bad("smallgain needs 'loop' or 'gains'");
    Json checks = Json::array();
    bool all = true;
    for (const auto& [label, g] : loops) {
      const KinfCertReport r = small_gain_condition(g);
      Json c = report_json(r);
      c["condition"] = label;
      checks.push_back(std::move(c));
      if (r.verdict()) {
        say(label + ": K-infinity, small-gain condition holds");
      } else {
        all = false;
        say(label + ": residual not K-infinity (" + r.summary() + ")");
      }
    }
    write_json("smallgain.json", {{"command", "smallgain"}, {"status", all ? "holds" : "failed"}, {"checks", checks}});
    if (!all) say("small-gain condition failed: residual not K-infinity");
    return all ? kOk : kFailure;
  }

  int falsify(const Json& s) {
    const GainFn beta = s.contains("beta_hat") ? function(s.at("beta_hat")) : GainFn::power(2);
    const double gain = number(s, "gain", 1.0);
    if (!(gain >= 0)) bad("'gain' must be nonnegative");
    FalsifyOptions o;
    o.t_step = positive(s, "t_step", o.t_step);
    o.dt = positive(s, "dt", o.dt);
    o.input_level = positive(s, "input_level", o.input_level);
    Counterexample w;
    try {
      w = falsify_linear_l2_bilinear(beta, gain, o);
    } catch (const PreconditionError& e) {
      bad(e.what());
    } catch (const DomainError& e) {
      bad(e.what());
    }
    write_csv("witness.csv", [&](std::ostream& f) { write_trajectory_csv(w.witness, f); });
    write_json("counterexample.json", {{"command", "falsify"},
                                       {"status", w.confirmed ? "violation_confirmed" : "claim_held"},
                                       {"x0", w.x0},
                                       {"t_star", w.t_star},
                                       {"input_level", w.input_level},
                                       {"simulated_l2_sq", w.simulated_l2_sq},
                                       {"claimed_bound", w.claimed_bound},
                                       {"relative_margin", w.relative_margin}});
    say(std::string(w.confirmed ? "violation confirmed" : "claimed bound held") + ": x0 = " + format_number(w.x0) +
        ", t* = " + format_number(w.t_star) + ", ||x||^2 = " + format_number(w.simulated_l2_sq) + " vs " +
        format_number(w.claimed_bound));
    return w.confirmed ? kOk : kFailure;
  }

  int selftest(const Json& s) {
    std::vector<int> ids;
    if (s.contains("criteria")) {
      for (const Json& e : s.at("criteria")) {
        if (!e.is_number_integer() || e.get<int>() < 1 || e.get<int>() > 9) bad("criteria are numbered 1 to 9");
        ids.push_back(e.get<int>());
      }
    } else {
      for (int i = 1; i <= 9; ++i) ids.push_back(i);
    }
    AcceptanceOptions o;
    o.seed = seed_;
    std::string lines;
    bool all = true;
    for (int id : ids) {
      const CriterionResult r = acceptance_criterion(id, o);
      lines += format_criterion(r) + "\n";
      say(format_criterion(r));
      all = all && r.pass;
    }
    write_text("selftest.txt", lines);
    return all ? kOk : kFailure;
  }

  const Json& config_;
  fs::path base_;
  const Options& opts_;
  std::ostream& out_;
  std::ostream& err_;
  std::uint64_t seed_ = 1;
  FunctionTable functions_;
  std::map<std::string, CoordinateTransform> transforms_;
};

}  // namespace

int run_config(const Json& config, const fs::path& base_dir, const Options& options, std::ostream& out,
               std::ostream& err) {
  try {
    Run r(config, base_dir, options, out, err);
    return r.dispatch();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const Json::exception& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const PreconditionError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
  }
  return kConfigError;
}

int run(const Options& options, std::ostream& out, std::ostream& err) {
  std::ifstream in(options.config_path);
  if (!in) {
    err << "config error: cannot read '" << options.config_path << "'\n";
    return kConfigError;
  }
  Json config;
  try {
    config = Json::parse(in);
  } catch (const Json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  return run_config(config, fs::path(options.config_path).parent_path(), options, out, err);
}

}  // namespace issl2::cli
