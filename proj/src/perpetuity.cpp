#include "ruinlab/perpetuity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ruinlab/embedded.hpp"
#include "ruinlab/error.hpp"
#include "ruinlab/parallel.hpp"

namespace ruinlab {

namespace {

constexpr std::size_t kGoldieBatches = 100;

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
};

Moments batch_moments(const std::vector<double>& batch_values) {
  const double k = static_cast<double>(batch_values.size());
  const double m = std::accumulate(batch_values.begin(), batch_values.end(), 0.0) / k;
  double ss = 0;
  for (double v : batch_values) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (k - 1.0) / k)};
}

template <class Fn>
std::vector<PerpetuitySample> batch(const PairSampler& sampler, std::size_t n, std::uint64_t seed,
                                    std::size_t workers, Fn fn) {
  std::vector<PerpetuitySample> out(n);
  chunked_reduce<int>(
      n, kDefaultChunk, workers, 0,
      [&](int&, std::size_t begin, std::size_t end) {
        PairSampler local = sampler;
        for (std::size_t i = begin; i < end; ++i) {
          StreamSet streams(seed, i);
          out[i] = fn(local, streams);
        }
      },
      [](int&, const int&) {});
  return out;
}

}  // namespace

PairSampler upper_pair_sampler(const ModelConfig& config, bool coupled) {
  config.validate();
  if (config.constant_coefficients() && !coupled) {
    return [&config](StreamSet& s) {
      const NuDraw d = draw_nu_constant(config, s);
      const double m = std::exp(d.nu());
      const double xi = draw_claim(config, s);
      return PerpetuityPair{m, xi * m};
    };
  }
  return [builder = StepBuilder(config)](StreamSet& s) mutable {
    const EmbeddedStep st = builder.next(s, 0.0);
    const double m = std::exp(st.nu);
    return PerpetuityPair{m, st.claim * m};
  };
}

PairSampler lower_pair_sampler(const ModelConfig& config) {
  config.validate();
  const double c_bar = config.c_bar;
  return [builder = StepBuilder(config), c_bar](StreamSet& s) mutable {
    const EmbeddedStep st = builder.next(s, 0.0);
    const double m = std::exp(st.nu);
    return PerpetuityPair{m, (st.claim - c_bar * st.growth_integral) * m};
  };
}

PairSampler constant_pair_sampler(PerpetuityPair pair) {
  return [pair](StreamSet&) { return pair; };
}

PerpetuitySample sample_R(const PairSampler& sampler, std::size_t n_max, double rel_tol, StreamSet& streams) {
  PerpetuitySample out;
  double prod = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const PerpetuityPair p = sampler(streams);
    out.value += prod * p.b;
    prod *= p.a;
    out.n_terms = n;
    if (prod < rel_tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

PerpetuitySample sample_Rbar(const PairSampler& sampler, std::size_t n_max, double rel_tol, StreamSet& streams) {
  PerpetuitySample out;
  out.value = -std::numeric_limits<double>::infinity();
  double prod = 1.0;
  double sum = 0.0;
  std::size_t unchanged = 0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const PerpetuityPair p = sampler(streams);
    sum += prod * p.b;
    prod *= p.a;
    out.n_terms = n;
    if (sum > out.value) {
      out.value = sum;
      unchanged = 0;
    } else {
      ++unchanged;
    }
    if (prod < rel_tol && unchanged >= kSupStableTerms) {
      out.converged = true;
      break;
    }
  }
  return out;
}

PerpetuitySample sample_Rbar(const ModelConfig& config, std::size_t n_max, StreamSet& streams) {
  return sample_Rbar(lower_pair_sampler(config), n_max, kPerpetuityRelTol, streams);
}

std::vector<PerpetuitySample> sample_R_batch(const PairSampler& sampler, std::size_t n, std::size_t n_max,
                                             double rel_tol, std::uint64_t seed, std::size_t workers) {
  return batch(sampler, n, seed, workers,
               [&](PairSampler& s, StreamSet& st) { return sample_R(s, n_max, rel_tol, st); });
}

std::vector<PerpetuitySample> sample_Rbar_batch(const PairSampler& sampler, std::size_t n, std::size_t n_max,
                                                double rel_tol, std::uint64_t seed, std::size_t workers) {
  return batch(sampler, n, seed, workers,
               [&](PairSampler& s, StreamSet& st) { return sample_Rbar(s, n_max, rel_tol, st); });
}

std::vector<PerpetuityPair> sample_pairs(const PairSampler& sampler, std::size_t n, std::uint64_t seed,
                                         std::size_t workers) {
  std::vector<PerpetuityPair> out(n);
  chunked_reduce<int>(
      n, kDefaultChunk, workers, 0,
      [&](int&, std::size_t begin, std::size_t end) {
        PairSampler local = sampler;
        for (std::size_t i = begin; i < end; ++i) {
          StreamSet streams(seed, i);
          out[i] = local(streams);
        }
      },
      [](int&, const int&) {});
  return out;
}

std::vector<double> converged_values(const std::vector<PerpetuitySample>& samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples)
    if (s.converged) out.push_back(s.value);
  return out;
}

double ks_fixed_point(const std::vector<double>& values_r, const std::vector<PerpetuityPair>& pairs,
                      std::uint64_t seed) {
  if (values_r.empty()) throw ConfigError("values", "empty sample");
  if (pairs.size() < values_r.size()) throw ConfigError("pairs", "need one pair per R value");
  std::vector<std::size_t> perm(values_r.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Engine rng(derive_seed(seed, "permutation"));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> rhs(values_r.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = pairs[i].b + pairs[i].a * values_r[perm[i]];
  return numerics::ks_statistic(values_r, std::move(rhs));
}

GoldieEstimate goldie_constant(const std::vector<double>& values_z, const std::vector<PerpetuityPair>& pairs,
                               double alpha) {
  if (!(alpha > 0)) throw ConfigError("alpha", "must be positive");
  const std::size_t n = std::min(values_z.size(), pairs.size());
  if (n < kGoldieBatches * 2) throw ConfigError("samples", "too few samples for batch means");
  const std::size_t per = n / kGoldieBatches;
  std::vector<double> b_num(kGoldieBatches), b_den(kGoldieBatches), b_ea(kGoldieBatches), b_c(kGoldieBatches);
  double t_num = 0, t_den = 0, t_ea = 0;
  for (std::size_t b = 0; b < kGoldieBatches; ++b) {
    double num = 0, den = 0, ea = 0;
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) {
      const double a = pairs[i].a, bb = pairs[i].b, z = values_z[i];
      const double aa = std::pow(a, alpha);
      ea += aa;
      den += aa * std::log(a);
      const double lhs = std::max(bb + a * z, 0.0);
      const double rhs = a * std::max(z, 0.0);
      num += std::pow(lhs, alpha) - std::pow(rhs, alpha);
    }
    const double k = static_cast<double>(per);
    b_num[b] = num / k;
    b_den[b] = alpha * den / k;
    b_ea[b] = ea / k;
    b_c[b] = b_num[b] / b_den[b];
    t_num += num;
    t_den += den;
    t_ea += ea;
  }
  const double total = static_cast<double>(per * kGoldieBatches);
  GoldieEstimate g;
  const Moments ea = batch_moments(b_ea);
  const Moments den = batch_moments(b_den);
  g.ea_alpha = t_ea / total;
  g.ea_alpha_stderr = ea.std_error;
  g.denominator = alpha * t_den / total;
  g.denominator_stderr = den.std_error;
  if (std::abs(g.ea_alpha - 1.0) > 4.0 * g.ea_alpha_stderr + 1e-12)
    throw NumericalError("E A^alpha differs from 1: alpha is not the tail index of this pair law");
  if (std::abs(g.denominator) <= 2.0 * g.denominator_stderr)
    throw NumericalError("degenerate denominator: alpha E A^alpha ln A is within 2 standard errors of 0");
  g.c_hat = (t_num / total) / g.denominator;
  // Batch means of the ratio.
  g.std_error = batch_moments(b_c).std_error;
  return g;
}

Exceedance exceedance(const std::vector<double>& values, double u) {
  if (values.empty()) return {};
  const auto k = std::count_if(values.begin(), values.end(), [u](double v) { return v > u; });
  const double n = static_cast<double>(values.size());
  const double p = static_cast<double>(k) / n;
  return {p, std::sqrt(p * (1 - p) / n)};
}

numerics::LinearFit tail_slope(const std::vector<double>& values, const std::vector<double>& u_grid) {
  std::vector<double> x, y, w;
  for (double u : u_grid) {
    const Exceedance e = exceedance(values, u);
    if (e.p <= 0) continue;
    x.push_back(std::log(u));
    y.push_back(std::log(e.p));
    const double rel = e.std_error / e.p;
    w.push_back(rel > 0 ? 1.0 / (rel * rel) : 1.0);
  }
  if (x.size() < 2) throw NumericalError("tail fit needs at least two grid points with exceedances");
  return numerics::weighted_linear_fit(x, y, w, true);
}

void check_perpetuity_hypotheses(const std::vector<PerpetuityPair>& pairs) {
  if (pairs.empty()) throw ConfigError("pairs", "empty sample");
  double ln_m = 0, ln_q = 0;
  for (const auto& p : pairs) {
    ln_m += std::log(p.a);
    if (p.b != 0.0) ln_q += std::max(0.0, std::log(std::abs(p.b)));
  }
  const double n = static_cast<double>(pairs.size());
  if (!(ln_m / n < 0))
    throw HypothesisViolation("EK_positive", "E ln M = E nu must be negative for the perpetuity to converge");
  if (!std::isfinite(ln_q / n)) throw NumericalError("E (ln|Q|)^+ is not finite on the sample");
}

}  // namespace ruinlab
