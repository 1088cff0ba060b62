#pragma once

// Trajectory generation for benchmark systems and trajectory-level checks of
// certificates: per-grid-time margins, Monte Carlo batches, falsification.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "issl2/certificates.hpp"
#include "issl2/comparison_fn.hpp"
#include "issl2/transforms.hpp"

namespace issl2 {

/// dx = f(x, w). Implementations write all n entries of dx.
using VectorField =
    std::function<void(std::span<const double> x, std::span<const double> w, std::span<double> dx)>;

struct SystemModel {
  std::string name;
  std::size_t n = 1;
  std::size_t m = 0;
  VectorField f;
};

using ModelParams = std::map<std::string, double>;

/// Built-in models:
///   ex1_cubic         dx = -x^3                                   (n=1, m=0)
///   ex2_cubic_forced  dx = -x^3 + w                               (n=1, m=1)
///   ex3_bilinear      dx = -x + x w                               (n=1, m=1)
///   ex1_transformed   dz = -z (1 + T^{-1}(z)^2)                   (n=1, m=0)
///   ex2_transformed   dz = -z (1 + x^2) + e^{-1/(2x^2)} (1 + 1/x^2) w,  x = T^{-1}(z)
///   linear1d          dx = -a x + b w       params a (1), b (1)   (n=1, m=1)
///   linear1d_auto     dx = -a x             param a (1)           (n=1, m=0)
/// with T(x) = x exp(-1/(2x^2)). Throws DomainError for unknown names.
SystemModel make_model(const std::string& name, const ModelParams& params = {});
std::vector<std::string> builtin_model_names();

/// w_driven = x_driver; the composite keeps the driver's external input.
/// State order is (x_driven, x_driver).
SystemModel cascade_model(const SystemModel& driven, const SystemModel& driver);
/// w1 = x2 (+ eta1), w2 = x1 (+ eta2). With external inputs the composite
/// input is (eta1, eta2); without, the composite is autonomous.
SystemModel feedback_model(const SystemModel& a, const SystemModel& b, bool external_inputs);

struct InputSignal {
  enum class Kind { kZero, kConstant, kPiecewiseConstant, kWaveform };

  Kind kind = Kind::kZero;
  Vec value;                       // kConstant
  std::vector<double> switch_times;  // kPiecewiseConstant, first entry 0, increasing
  std::vector<Vec> values;         // kPiecewiseConstant, one per segment
  std::string waveform;            // kWaveform

  static InputSignal zero();
  static InputSignal constant(Vec v);
  static InputSignal piecewise_constant(std::vector<double> switch_times, std::vector<Vec> values);
  static InputSignal registered(std::string name);

  /// w(t) with right-continuous segments; writes m entries.
  void sample(double t, std::span<double> out) const;
};

/// Waveform registry for InputSignal::registered. Built-in: "sine" (sin t per
/// component), "decaying" (2 e^{-t} per component).
void register_waveform(const std::string& name, std::function<double(double t, std::size_t i)> fn);

/// Uniform-grid trajectory; time t_k = k dt. inputs[k] is the value held on
/// [t_k, t_{k+1}).
struct Trajectory {
  std::string model;
  std::size_t n = 0;
  std::size_t m = 0;
  double dt = 0.0;
  std::size_t steps = 0;  // grid has steps + 1 points
  std::vector<double> states;
  std::vector<double> inputs;

  std::size_t size() const { return steps + 1; }
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  std::span<const double> state(std::size_t k) const { return {states.data() + k * n, n}; }
  std::span<const double> input(std::size_t k) const { return {inputs.data() + k * m, m}; }
  /// Copy with every state mapped through t and every input through s.
  Trajectory mapped(const CoordinateTransform& t, const std::optional<CoordinateTransform>& s) const;
};

struct IntegratorOptions {
  double blow_up = 1e12;
};

/// Classical fixed-step RK4 on the grid k dt, k = 0..round(t_end / dt), with
/// the input held at its left-end value on each step. Throws BlowUpError if
/// |x| exceeds the blow-up bound or f is non-finite, DomainError on bad
/// dimensions or step sizes.
Trajectory integrate(const SystemModel& model, std::span<const double> x0, const InputSignal& u,
                     double t_end, double dt, const IntegratorOptions& opts = {});

/// Trapezoid integral of |v|^2 over the whole sample sequence.
double truncated_l2_sq(std::span<const double> samples, std::size_t dim, double dt);
/// Trapezoid integral of alpha(|v|).
double integral_of(const GainFn& alpha, std::span<const double> samples, std::size_t dim, double dt);
/// Running trapezoid integral of alpha(|v_k|); entry k covers [0, t_k].
std::vector<double> running_integral(const GainFn& alpha, std::span<const double> samples,
                                     std::size_t dim, double dt);
/// Running integral of a held (piecewise constant) signal; entry k covers
/// [0, t_k] and is exact for the hold interpretation.
std::vector<double> running_hold_integral(const GainFn& sigma, std::span<const double> samples,
                                          std::size_t dim, double dt);

struct EstimateReport {
  CertKind kind = CertKind::kL2Stable;
  CombineMode mode = CombineMode::kMax;
  double tolerance = 0.0;
  double dt = 0.0;
  std::vector<double> lhs;
  std::vector<double> rhs;
  std::vector<double> margin;
  bool pass = true;
  std::size_t worst_index = 0;
  /// Smallest margin_k / max(1, rhs_k).
  double worst_normalized_margin = 0.0;

  double worst_time() const { return static_cast<double>(worst_index) * dt; }
};

/// Left and right sides of the certificate's estimate at every grid time.
/// Passes iff margin_k >= -tol max(1, rhs_k) for all k. Throws DomainError if
/// the certificate needs inputs the trajectory does not have (or vice versa).
EstimateReport verify_certificate(const Certificate& c, const Trajectory& traj, double tol = 1e-6);
/// Verification in transformed coordinates (T applied to states, S to inputs).
EstimateReport verify_transformed(const TransformedCertificate& c, const Trajectory& traj,
                                  double tol = 1e-6);

struct SamplerSpec {
  std::size_t runs = 200;
  std::uint64_t seed = 1;
  double t_end = 10.0;
  double dt = 1e-3;
  double x0_max = 2.0;
  double amplitude_min = -1.0;
  double amplitude_max = 1.0;
  std::size_t switches = 8;
  double tolerance = 1e-6;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

struct RunSample {
  std::uint64_t seed = 0;
  Vec x0;
  InputSignal input;
};

/// The i-th draw of a sampler; identical for identical (spec, i).
RunSample draw_run(const SamplerSpec& spec, const SystemModel& model, std::size_t i);

struct MonteCarloReport {
  std::size_t runs = 0;
  std::size_t passes = 0;
  std::size_t blow_ups = 0;
  double pass_rate = 1.0;
  bool no_evidence = true;
  double worst_normalized_margin = 0.0;
  std::optional<std::uint64_t> worst_seed;
  std::vector<std::uint64_t> failing_seeds;

  bool all_pass() const { return passes == runs; }
};

/// N independent draws, each integrated and verified; blow-ups count as
/// failures. The merge is in draw order, so results do not depend on the
/// thread count.
MonteCarloReport monte_carlo_verify(const Certificate& c, const SystemModel& model,
                                    const SamplerSpec& spec);
MonteCarloReport monte_carlo_verify(const TransformedCertificate& c, const SystemModel& model,
                                    const SamplerSpec& spec);

struct FalsifyOptions {
  double t_step = 0.01;
  double dt = 1e-3;
  double input_level = 2.0;
};

struct Counterexample {
  double x0 = 0.0;
  double t_star = 0.0;
  double input_level = 2.0;
  double simulated_l2_sq = 0.0;  // ||x||^2 on [0, t*]
  double claimed_bound = 0.0;    // beta(|x0|) + gain_sq ||w||^2
  double relative_margin = 0.0;  // (simulated - claimed) / claimed
  bool confirmed = false;
  Trajectory witness;
};

/// Witness against a linear L2-gain claim (beta_hat, gain) for ex3_bilinear:
/// x0 = beta_hat^{-1}(1), w = 2, and the first scan time t* with
/// 1 + 2 gain^2 t* < (1/4) x0^2 (e^{2 t*} - 1).
Counterexample falsify_linear_l2_bilinear(const GainFn& beta_hat, double gain,
                                          const FalsifyOptions& opts = {});

/// max |x| over the trailing `window` fraction <= threshold * |x(0)|.
bool convergence_check(const Trajectory& traj, double window = 0.1, double threshold = 0.1);

struct Ex1ClosedForm {
  double x = 0.0;
  double l2_sq = 0.0;
};
/// x(t) = x0 / sqrt(1 + 2 x0^2 t) and ||x||^2 = log(1 + 2 x0^2 t) / 2.
Ex1ClosedForm closed_form_ex1(double x0, double t);

// CSV export with shortest round-trip number formatting.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void write_report_csv(const EstimateReport& rep, std::ostream& out);
std::string format_number(double v);

}  // namespace issl2
