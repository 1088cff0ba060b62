#pragma once

// The six trajectory estimates and the constructions converting between them.
//
//   alpha-integrable   int alpha(|x|)       <= beta(|x0|)
//   L2-stable          ||x||^2              <= beta(|x0|)
//   ISS                int alpha(|x|)       <= beta(|x0|) (+) int sigma(|w|)
//   iISS               int alpha(|x|)       <= beta(|x0|) (+) gamma(int sigma(|w|))
//   linear L2-gain     ||x||^2              <= beta(|x0|) (+) gain_sq ||w||^2
//   nonlinear L2-gain  ||x||^2              <= beta(|x0|) (+) gamma(||w||^2)
//
// where (+) is max or sum according to the certificate's CombineMode.

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "issl2/comparison_fn.hpp"
#include "issl2/transforms.hpp"

namespace issl2 {

enum class CombineMode { kMax, kSum };

enum class CertKind { kAlphaIntegrable, kL2Stable, kISS, kIISS, kLinearL2, kNonlinearL2 };

const char* to_string(CombineMode mode);
const char* to_string(CertKind kind);

inline double combine(CombineMode mode, double a, double b) {
  return mode == CombineMode::kMax ? (a > b ? a : b) : a + b;
}

struct AlphaIntegrable {
  GainFn alpha;
  GainFn beta;
};

struct L2Stable {
  GainFn beta;
};

struct ISS {
  GainFn alpha;
  GainFn beta;
  GainFn sigma;
};

struct IISS {
  GainFn alpha;
  GainFn beta;
  GainFn gamma;
  GainFn sigma;
};

struct LinearL2 {
  GainFn beta;
  double gain_sq = 1.0;
};

struct NonlinearL2 {
  GainFn beta;
  GainFn gamma;
};

struct Certificate {
  using Body = std::variant<AlphaIntegrable, L2Stable, ISS, IISS, LinearL2, NonlinearL2>;

  Body body;
  CombineMode mode = CombineMode::kMax;

  Certificate() : body(L2Stable{}) {}
  Certificate(Body b, CombineMode m = CombineMode::kMax) : body(std::move(b)), mode(m) {}

  CertKind kind() const { return static_cast<CertKind>(body.index()); }
  /// True for kinds whose estimate involves an input signal.
  bool has_input() const;
  /// True for kinds whose left side is ||x||^2 rather than int alpha(|x|).
  bool l2_left_side() const;

  /// Typed access; throws DomainError on a kind mismatch.
  template <typename T>
  const T& as() const;

  /// Named comparison-function fields in declaration order.
  std::vector<std::pair<std::string, GainFn>> fields() const;
  std::string describe() const;
};

/// Output of the converse constructions: the certificate holds in the
/// coordinates z = T(x), v = S(w).
struct TransformedCertificate {
  CoordinateTransform state_transform;
  std::optional<CoordinateTransform> input_transform;
  Certificate cert;
};

/// Certification report for every comparison-function field. `gain_sq` must
/// be nonnegative for linear L2-gain certificates (reported as a failure
/// entry otherwise).
std::vector<std::pair<std::string, KinfCertReport>> certify_fields(const Certificate& c,
                                                                   const CertifyOptions& opts = {});
bool fields_certified(const Certificate& c, const CertifyOptions& opts = {});

// ---------------------------------------------------------------------------
// Qualitative equivalences

/// L2-stable is alpha-integrable with alpha(s) = s^2.
Certificate l2_to_alpha_integrable(const Certificate& l2_stable);

/// z = T(x) with T = diagonal_lower(alpha^{1/2}, n); then ||z||^2 <= int alpha(|x|)
/// and the new transient bound is beta o lower_T^{-1}.
TransformedCertificate alpha_integrable_to_l2(const Certificate& alpha_integrable, std::size_t n);

/// ISS{alpha = s^2, beta, sigma = gain_sq s^2}. Throws DomainError when gain_sq == 0.
Certificate linear_l2_to_iss(const Certificate& linear_l2);

/// z = T(x) with T = diagonal_lower(alpha^{1/2}, n), v = S(w) with
/// S = diagonal_upper(sigma^{1/2} / gain, m); yields linear L2-gain gain^2.
TransformedCertificate iss_to_linear_l2(const Certificate& iss, double gain, std::size_t n,
                                        std::size_t m);

/// iISS{alpha = s^2, beta, gamma, sigma = s^2}.
Certificate nonlinear_l2_to_iiss(const Certificate& nonlinear_l2);

/// T as above, S = diagonal_upper(lambda^{-1/2} sigma^{1/2}, m) and
/// gamma_new(s) = gamma(lambda s).
TransformedCertificate iiss_to_nonlinear_l2(const Certificate& iiss, double lambda, std::size_t n,
                                            std::size_t m);

/// max{a, b} <= a + b: functions unchanged, mode becomes kSum.
Certificate max_to_sum(const Certificate& c);
/// a + b <= max{2a, 2b}: every right-side term doubled, mode becomes kMax.
/// Autonomous kinds have a single right-side term and are not doubled.
Certificate sum_to_max(const Certificate& c);

/// The same estimate in coordinates z = T(x), v = S(w): alpha o upper_T^{-1},
/// beta o lower_T^{-1}, sigma o lower_S^{-1}; gamma is unchanged.
/// Accepts ISS, iISS and alpha-integrable certificates.
Certificate transform_cert(const Certificate& c, const CoordinateTransform& t,
                           const std::optional<CoordinateTransform>& s = std::nullopt,
                           const RadiusGrid& grid = {});

// ---------------------------------------------------------------------------

[[noreturn]] void throw_kind_mismatch(CertKind got, CertKind wanted);

template <typename T>
const T& Certificate::as() const {
  if (const T* p = std::get_if<T>(&body)) return *p;
  throw_kind_mismatch(kind(), static_cast<CertKind>(Body(T{}).index()));
}

}  // namespace issl2
