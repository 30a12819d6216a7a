#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ruinlab/ext_real.hpp"
#include "ruinlab/numerics.hpp"
#include "ruinlab/random.hpp"

namespace ruinlab {

namespace dist {
struct Exponential {
  double rate;
};
struct Gamma {
  double shape;
  double scale;
};
struct Deterministic {
  double value;
};
struct Uniform {
  double lo;
  double hi;
};
struct Atom {
  double value;
  double prob;
};
/// Atoms sorted by value with ties merged; `cumulative[i]` = P(V <= atoms[i].value).
struct Discrete {
  std::vector<Atom> atoms;
  std::vector<double> cumulative;
};
struct Lognormal {
  double mu;
  double sigma;
};
struct Pareto {
  double index;
  double scale;
};
}  // namespace dist

/// Right end-point q_V of the domain of the MGF and the MGF value there.
struct MgfEndpoint {
  ExtReal q;
  MgfValue value_at_endpoint;
};

/// Lower and upper end of the support. `lo` is always finite for the
/// supported families.
struct Support {
  double lo;
  ExtReal hi;
};

/// Immutable scalar distribution used for claim sizes, inter-arrival times
/// and the components of the regime law.
class Distribution {
 public:
  using Kind = std::variant<dist::Exponential, dist::Gamma, dist::Deterministic, dist::Uniform,
                            dist::Discrete, dist::Lognormal, dist::Pareto>;

  static Distribution exponential(double rate);
  static Distribution gamma(double shape, double scale);
  static Distribution deterministic(double value);
  static Distribution uniform(double lo, double hi);
  static Distribution discrete(std::vector<dist::Atom> atoms);
  static Distribution lognormal(double mu, double sigma);
  static Distribution pareto(double index, double scale);

  const Kind& kind() const noexcept { return kind_; }
  std::string_view name() const noexcept;
  bool is_pareto() const noexcept { return std::holds_alternative<dist::Pareto>(kind_); }

  double sample(Engine& rng) const;

  /// phi_V(q) = E exp(qV), exact where a closed form exists.
  MgfValue mgf(double q) const;
  MgfEndpoint mgf_endpoint() const;

  /// E|V|^p for p >= 0, +infinity when divergent.
  ExtReal moment(double p) const;
  ExtReal mean() const;
  double cdf(double x) const;
  Support support() const;

  /// The law of k * V for k > 0 (monetary rescaling).
  Distribution scaled(double k) const;

  /// E f(V) by exact summation for atomic laws and adaptive quadrature otherwise.
  numerics::QuadResult expect(const std::function<double(double)>& f) const;

 private:
  explicit Distribution(Kind kind) : kind_(std::move(kind)) {}
  double density(double x) const;

  Kind kind_;
};

}  // namespace ruinlab
