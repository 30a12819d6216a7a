#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ruinlab/model.hpp"
#include "ruinlab/numerics.hpp"
#include "ruinlab/random.hpp"

namespace ruinlab {

/// (M, Q) with M = 1/lambda > 0.
struct PerpetuityPair {
  double a = 1.0;
  double b = 0.0;
};

/// Draws one pair per call. Samplers are copied once per worker chunk and
/// keep a reference to the model they were built from.
using PairSampler = std::function<PerpetuityPair(StreamSet&)>;

/// (M, Q) = (1, xi) / lambda. `coupled` draws the full regime grid exactly as
/// the embedded chain does, so pair k of path i coincides with step k of the
/// chain on the same streams; otherwise constant-coefficient models draw nu only.
PairSampler upper_pair_sampler(const ModelConfig& config, bool coupled = false);

/// (M, Qbar) with Qbar = (xi - c_bar * int_0^tau exp(K(s)+Z(s)) ds) / lambda,
/// drawn with the same streams as the embedded chain.
PairSampler lower_pair_sampler(const ModelConfig& config);

PairSampler constant_pair_sampler(PerpetuityPair pair);

struct PerpetuitySample {
  double value = 0.0;
  std::size_t n_terms = 0;
  bool converged = false;
};

inline constexpr double kPerpetuityRelTol = 1e-12;
inline constexpr std::size_t kSupStableTerms = 50;

/// R_n = sum_k Q_k prod_{i<k} M_i until the running product falls below
/// rel_tol (converged) or n_max terms.
PerpetuitySample sample_R(const PairSampler& sampler, std::size_t n_max, double rel_tol, StreamSet& streams);

/// sup_n Rbar_n; stops once the running product is below rel_tol and the
/// supremum has not moved for 50 terms.
PerpetuitySample sample_Rbar(const PairSampler& sampler, std::size_t n_max, double rel_tol, StreamSet& streams);
PerpetuitySample sample_Rbar(const ModelConfig& config, std::size_t n_max, StreamSet& streams);

/// Sample i uses StreamSet(seed, i).
std::vector<PerpetuitySample> sample_R_batch(const PairSampler& sampler, std::size_t n, std::size_t n_max,
                                             double rel_tol, std::uint64_t seed, std::size_t workers = 0);
std::vector<PerpetuitySample> sample_Rbar_batch(const PairSampler& sampler, std::size_t n, std::size_t n_max,
                                                double rel_tol, std::uint64_t seed, std::size_t workers = 0);
std::vector<PerpetuityPair> sample_pairs(const PairSampler& sampler, std::size_t n, std::uint64_t seed,
                                         std::size_t workers = 0);

/// Converged values only.
std::vector<double> converged_values(const std::vector<PerpetuitySample>& samples);

/// KS distance between {R_i} and {Q_i + M_i R_pi(i)} for a random permutation pi.
double ks_fixed_point(const std::vector<double>& values_r, const std::vector<PerpetuityPair>& pairs,
                      std::uint64_t seed);

struct GoldieEstimate {
  double c_hat = 0.0;
  double std_error = 0.0;
  double ea_alpha = 0.0;          // E A^alpha
  double ea_alpha_stderr = 0.0;
  double denominator = 0.0;       // alpha E A^alpha ln A
  double denominator_stderr = 0.0;
};

/// Goldie's constant from Z draws paired with independent (A, B) draws, with
/// batch-means standard errors over 100 batches. Throws NumericalError when
/// E A^alpha is not 1 within 4 standard errors or the denominator is within
/// 2 standard errors of 0.
GoldieEstimate goldie_constant(const std::vector<double>& values_z, const std::vector<PerpetuityPair>& pairs,
                               double alpha);

/// Weighted log-log fit of P(R > u) on the grid (binomial inverse-variance weights).
numerics::LinearFit tail_slope(const std::vector<double>& values, const std::vector<double>& u_grid);

/// Empirical P(X > u) with its binomial standard error.
struct Exceedance {
  double p = 0.0;
  double std_error = 0.0;
};
Exceedance exceedance(const std::vector<double>& values, double u);

/// Empirical checks of E ln M < 0 and E (ln|Q|)^+ < infinity on n pairs.
/// Throws HypothesisViolation("EK_positive") when the mean of ln M is not negative.
void check_perpetuity_hypotheses(const std::vector<PerpetuityPair>& pairs);

}  // namespace ruinlab
