#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "ruinlab/distribution.hpp"
#include "ruinlab/ext_real.hpp"
#include "ruinlab/random.hpp"

namespace ruinlab {

/// A point of the regime-coefficient plane: (mu, sigma^2 / 2).
struct ThetaPoint {
  double mu = 0.0;
  double half_sigma2 = 0.0;

  double sigma() const;
  friend bool operator==(const ThetaPoint&, const ThetaPoint&) = default;
};

namespace theta {
struct Finite {
  std::vector<ThetaPoint> points;
  std::vector<double> probs;
  std::vector<double> cumulative;
};
/// Uniform law on a convex polygon; vertices stored counter-clockwise.
struct PolytopeUniform {
  std::vector<ThetaPoint> vertices;
  std::vector<double> fan_cumulative;  // normalised areas of the fan triangles (v0, vi, vi+1)
  double area = 0.0;
};
/// Independent mu and sigma^2/2 components.
struct Product {
  Distribution mu;
  Distribution half_sigma2;
};
/// P(Theta = (1/j, 1 - 1/j)) = j^-p / zeta(p), j >= 1.
struct ZetaFamily {
  double p = 2.0;
  double zeta_p = 0.0;
};
}  // namespace theta

/// Axis-aligned hull of the support. `mu_hi` and `half_sigma2_hi` may be infinite.
struct ThetaBox {
  double mu_lo = 0.0;
  ExtReal mu_hi;
  double half_sigma2_lo = 0.0;
  ExtReal half_sigma2_hi;
};

/// Law of Theta = (mu, sigma^2/2) for constant-coefficient regimes.
class ThetaLaw {
 public:
  using Kind = std::variant<theta::Finite, theta::PolytopeUniform, theta::Product, theta::ZetaFamily>;

  static ThetaLaw finite(std::vector<ThetaPoint> points, std::vector<double> probs);
  static ThetaLaw point_mass(ThetaPoint point);
  static ThetaLaw polytope_uniform(std::vector<ThetaPoint> vertices);
  static ThetaLaw product(Distribution mu, Distribution half_sigma2);
  static ThetaLaw zeta_family(double p);

  const Kind& kind() const noexcept { return kind_; }

  ThetaPoint sample(Engine& rng) const;

  /// E(mu - sigma^2/2).
  double mean_drift() const;
  ThetaBox bounding_box() const;

  /// Points of the support closure at which a linear functional with
  /// nonnegative weight on sigma^2/2 attains its supremum: atoms, polygon
  /// vertices, box corners, and for the zeta family its limit point (0, 1)
  /// together with the leading atoms.
  std::vector<ThetaPoint> extreme_points() const;

  /// Probability of the atom at `j` in the zeta family (0 for other kinds).
  double zeta_weight(std::size_t j) const;

 private:
  explicit ThetaLaw(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

/// Sum of j^-p for j >= j0 (Euler-Maclaurin tail after a short direct sum).
double zeta_tail(double p, std::size_t j0);

}  // namespace ruinlab
