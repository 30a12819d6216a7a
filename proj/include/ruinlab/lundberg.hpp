#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ruinlab/distribution.hpp"
#include "ruinlab/ext_real.hpp"
#include "ruinlab/model.hpp"
#include "ruinlab/theta_law.hpp"

namespace ruinlab {

/// u(q) = (-q, q(q+1)).
std::pair<double, double> u_vector(double q);

/// <u(q), theta>.
double u_dot(double q, const ThetaPoint& theta);

/// The q > 0 at which L_q passes through `theta`; +infinity if it never does.
ExtReal touch_value(const ThetaPoint& theta, double q_tau);

/// phi_tau(q_tau - h) for h > 0, exact near the endpoint for exponential and gamma laws.
double mgf_below_endpoint(const Distribution& tau, double h);

/// Local exponent kappa with phi_tau(q_tau - h) ~ h^-kappa as h -> 0; 0 when the endpoint value is finite.
double endpoint_exponent(const Distribution& tau);

/// Tangent geometry of the constant-coefficient case.
struct TangentGeometry {
  double q_plus = 0.0;
  double q_tau = 0.0;
  std::vector<ThetaPoint> touching_points;
  ThetaLaw theta;

  /// H = q_tau + q_plus mu - q_plus (q_plus + 1) sigma^2/2.
  double h(const ThetaPoint& th) const;
  /// P(H <= x).
  double h_cdf(double x) const;
  /// P(H = 0).
  double h_mass_at_zero() const;
};

/// q_plus over the extreme points of the support closure of `theta`.
/// Throws HypothesisViolation("tau_infi") when q_tau is not finite.
TangentGeometry q_plus_compute(const ThetaLaw& theta, double q_tau);

enum class Verdict { endpoint_infinite, endpoint_finite, inconclusive };
std::string to_string(Verdict v);

struct Theorem2Result {
  Verdict verdict = Verdict::inconclusive;
  std::optional<ExtReal> integral_value;  // int_0^delta phi_tau(q_tau - h) dF_H(h)
  bool heuristic = false;                 // set for the power-fit test on continuous H
  std::optional<double> fitted_exponent;  // decay of series terms, or local power of F_H
  double kappa = 0.0;
};

/// Decides whether phi_nu(q_plus) is infinite.
///
/// Atomic H: exact sum. Countable H: the decay exponent s of the series
/// terms is fitted on dyadic indices; the series diverges iff s <= 1.
/// Continuous H: F_H(h) ~ a h^rho is fitted on [delta/64, delta] and the
/// integral diverges iff rho <= kappa. Both fits use an inconclusive band
/// (divergent up to +0.05, convergent from +0.25).
Theorem2Result theorem2_classify(const TangentGeometry& geometry, const Distribution& tau, double delta = 1e-2);

/// phi_nu(q) = E phi_tau(<u(q), Theta>).
MgfValue phi_nu_analytic(const ThetaLaw& theta, const Distribution& tau, double q);

/// nu samples drawn with per-path streams; reused across q for common random numbers.
struct NuSample {
  std::vector<double> nu;
  double mean() const;
};

NuSample sample_nu(const ModelConfig& config, std::size_t n, std::uint64_t seed, std::size_t workers = 0);

struct PhiEstimate {
  double estimate = 1.0;
  double std_error = 0.0;
  bool stability_flag = false;  // top 10 terms carry more than half the sum
  double top10_share = 0.0;
};

PhiEstimate phi_nu_mc(const NuSample& sample, double q);
PhiEstimate phi_nu_mc(const ModelConfig& config, double q, std::size_t n, std::uint64_t seed,
                      std::size_t workers = 0);

using PhiEvaluator = std::function<MgfValue(double)>;

struct BetaSolution {
  double beta = 0.0;
  double q_lo = 0.0;
  double q_hi = 0.0;
  int evaluations = 0;
};

/// Root of phi(q) = 1 on (0, q_upper): doubling from `tol`, then bisection
/// until the bracket is narrower than `tol` and |phi - 1| <= tol. Never
/// evaluates phi at q >= q_upper; `phi_at_upper`, when known, decides
/// whether a root exists below a finite q_upper.
/// Throws NumericalError when phi is not below 1 just right of 0 or no root exists.
BetaSolution solve_beta(const PhiEvaluator& phi, ExtReal q_upper, double tol,
                        std::optional<MgfValue> phi_at_upper = std::nullopt);

struct HypothesisFlags {
  bool ek_positive = false;
  bool claim_moment_ok = false;
  bool cond_tau_ok = false;
  bool tau_infi = false;  // q_tau < inf and phi_tau(q_tau) = inf
};

enum class Method { analytic, monte_carlo };

struct LundbergOptions {
  double tol = 1e-10;
  bool force_monte_carlo = false;
  std::size_t mc_samples = 1'000'000;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  double classify_delta = 1e-2;
};

struct LundbergReport {
  std::optional<double> beta;
  std::optional<ExtReal> q_nu;
  std::optional<MgfValue> phi_at_endpoint;
  Method method = Method::analytic;
  std::optional<double> ci_halfwidth;
  HypothesisFlags flags;
  std::optional<TangentGeometry> geometry;
  std::optional<Theorem2Result> theorem2;
  bool stability_flag = false;
  std::vector<std::string> warnings;
};

/// Full Lundberg analysis of a model. Throws HypothesisViolation("mu_si_0")
/// in constant-coefficient mode, or ("EK_positive") otherwise, when E K <= 0.
LundbergReport lundberg_report(const ModelConfig& config, const LundbergOptions& options = {});

/// q_tau > beta^2 sigma_upper^2/2 + beta (sigma_upper^2/2 - mu_lower)^+, always true when q_tau = inf.
bool cond_tau_holds(const ModelConfig& config, double beta);

}  // namespace ruinlab
