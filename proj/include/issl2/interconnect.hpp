#pragma once

// Certificate composition for cascade and feedback interconnections.
//
// Subsystem 1 is the driven system in cascades (w1 = x2) and the composite
// state is always (x1, x2). Feedback with external inputs uses
// w1 = x2 + eta1, w2 = x1 + eta2 and the composite input (eta1, eta2).
//
// Every operation returns a CompositionResult: a certificate on success, a
// failure message otherwise, and a derivation trace in both cases. Failure
// of a small-gain or sector condition is a value, not an exception.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "issl2/certificates.hpp"
#include "issl2/comparison_fn.hpp"
#include "issl2/transforms.hpp"

namespace issl2 {

struct CompositionResult {
  std::optional<Certificate> cert;
  std::string failure;
  std::vector<std::string> trace;
  /// Report of the first condition that failed to certify, when applicable.
  std::optional<KinfCertReport> failed_report;

  bool ok() const { return cert.has_value(); }
};

/// epsilon and rho for the Young and weak-triangle splits. Per-subsystem
/// overrides replace the shared pair at the splits made for that subsystem.
struct SmallGainParams {
  double epsilon = 1.0;
  GainFn rho = post_scale(2.0, GainFn::identity());
  std::optional<double> epsilon1, epsilon2;
  std::optional<GainFn> rho1, rho2;

  double eps(int i) const;
  const GainFn& rho_at(int i) const;
  /// Empty when every epsilon is positive and every rho - Id certifies as
  /// K-infinity; the failure message otherwise.
  std::string validate(const CertifyOptions& opts = {}) const;
};

/// c   : |S1(z)| <= sqrt(c) |T2(z)|              (cascade through transforms)
/// c1, c2 : |Sj(z)| <= sqrt(ci) |Ti(z)|           (feedback through transforms)
/// cS_i : |S_i(z)| <= sqrt(cS_i) |z|, cT_i : |z| <= sqrt(cT_i) |T_i(z)|
struct SectorConstants {
  double c = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double cS1 = 1.0;
  double cS2 = 1.0;
  double cT1 = 1.0;
  double cT2 = 1.0;
  /// Number of sampled points behind the last validation.
  std::size_t sample_evidence = 0;
};

struct SectorSpec {
  double r_min = 1e-3;
  double r_max = 1e3;
  std::size_t radii = 48;
  std::size_t directions_per_dim = 32;
  double tolerance = 1e-9;
};

struct SectorReport {
  bool pass = true;
  std::size_t samples = 0;
  /// Largest |A(z)|^2 / |B(z)|^2 seen, i.e. the smallest admissible c.
  double worst_ratio = 0.0;
  Vec worst_point;
};

/// |A(z)| <= sqrt(c) |B(z)| at log-spaced radii times quasi-random sphere
/// directions, relative tolerance spec.tolerance. B defaults to the identity.
SectorReport sector_check(const CoordinateTransform& a, const std::optional<CoordinateTransform>& b, double c,
                          const SectorSpec& spec = {});

/// From u <= a(s) + g(u) with Id - g in K-infinity: u <= (Id - g)^{-1}(a(s)).
/// Throws PreconditionError when Id - g does not certify.
GainFn small_gain_solve(const GainFn& a, const GainFn& g, const CertifyOptions& opts = {});

/// Certification report for Id - g.
KinfCertReport small_gain_condition(const GainFn& g, const CertifyOptions& opts = {});

// ---------------------------------------------------------------------------
// Nonlinear L2-gain subsystems

/// beta = 2 max{b1, g1 o b2, b2}, gamma = 2 max{g1 o g2, g2}.
CompositionResult cascade_nl2(const Certificate& c1, const Certificate& c2);

/// L2Stable with beta = sum_i (Id - gi o gj)^{-1} o max{bi, gi o bj}.
CompositionResult feedback_nl2_no_input(const Certificate& c1, const Certificate& c2,
                                        const CertifyOptions& opts = {});

/// Max-form small-gain with external inputs; gamma_hat_i = gi o rho((1+eps^2) s).
CompositionResult feedback_nl2_max(const Certificate& c1, const Certificate& c2, const SmallGainParams& p = {},
                                   const CertifyOptions& opts = {});

/// Sum-form small-gain with external inputs. Max-form inputs are converted.
/// The condition is Id - gi o rho o rho((1+eps^2) .) o rho o gamma_hat_j.
CompositionResult feedback_nl2_sum(const Certificate& c1, const Certificate& c2, const SmallGainParams& p = {},
                                   const CertifyOptions& opts = {});

// ---------------------------------------------------------------------------
// ISS and iISS subsystems

/// Through linear L2-gain coordinates (gain 1): alpha-integrable when
/// c1 c2 < 1 and both |Sj| <= sqrt(ci) |Ti| hold. Dimensions: x1 in R^n1,
/// x2 in R^n2.
CompositionResult feedback_iss_via_linear(const Certificate& c1, const Certificate& c2, SectorConstants k,
                                          const SmallGainParams& p = {}, std::size_t n1 = 1,
                                          std::size_t n2 = 1, const SectorSpec& spec = {});

/// Through nonlinear L2-gain coordinates: iISS from w2 when |S1| <= sqrt(c) |T2|.
CompositionResult cascade_iiss_via_nl2(const Certificate& c1, const Certificate& c2, SectorConstants k,
                                       std::size_t n1 = 1, std::size_t n2 = 1, std::size_t m2 = 1,
                                       const SectorSpec& spec = {});

/// Direct: sigma1 <= c alpha2 on the certification grid.
CompositionResult cascade_iiss_direct(const Certificate& c1, const Certificate& c2, double c,
                                      const CertifyOptions& opts = {});

/// Through nonlinear L2-gain coordinates without external inputs; condition
/// Id - gi(cj gj(ci .)) for the transformed gains.
CompositionResult feedback_iiss_no_input(const Certificate& c1, const Certificate& c2, SectorConstants k,
                                         const SmallGainParams& p = {}, std::size_t n1 = 1,
                                         std::size_t n2 = 1, const SectorSpec& spec = {});

/// Through nonlinear L2-gain coordinates with external inputs;
/// g~_i(s) = g_i o rho(cS_i cT_j (1+eps^2) s) and condition Id - g~_i o g~_j.
CompositionResult feedback_iiss_with_input(const Certificate& c1, const Certificate& c2, SectorConstants k,
                                           const SmallGainParams& p = {}, std::size_t n1 = 1,
                                           std::size_t n2 = 1, const SectorSpec& spec = {});

/// Direct: sigma_i o rho_i <= c_j alpha_j on the grid and
/// Id - g_i o rho o (c_j g_j) o rho_in (c_i .) in K-infinity.
struct DirectFeedbackParams {
  GainFn rho1 = post_scale(2.0, GainFn::identity());
  GainFn rho2 = post_scale(2.0, GainFn::identity());
  GainFn rho = post_scale(2.0, GainFn::identity());
  /// Split inside the loop; defaults to rho.
  std::optional<GainFn> rho_inner;
  double k1 = 1.0;
  double k2 = 1.0;
};
CompositionResult feedback_iiss_direct(const Certificate& c1, const Certificate& c2,
                                       const DirectFeedbackParams& p, const CertifyOptions& opts = {});

/// First grid point where lhs(s) > rhs(s) (relative tolerance), if any.
struct GridComparison {
  bool holds = true;
  double worst_s = 0.0;
  double worst_excess = 0.0;  // max (lhs - rhs) / max(1, rhs)
};
GridComparison compare_on_grid(const GainFn& lhs, const GainFn& rhs, const CertifyOptions& opts = {});

}  // namespace issl2
