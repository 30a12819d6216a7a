#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>

#include "ruinlab/error.hpp"

namespace ruinlab {

/// A real number or +infinity, with the infinity carried as an explicit state.
///
/// Arithmetic follows measure-theoretic conventions: finite + inf = inf,
/// positive * inf = inf. Multiplying zero by infinity is rejected.
/// `approximate()` marks values produced by a quadrature that hit its node cap.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  constexpr ExtReal(double value) : value_(value) {}  // NOLINT(implicit)

  static constexpr ExtReal infinity() {
    ExtReal r;
    r.infinite_ = true;
    return r;
  }

  static ExtReal approx(double value) {
    ExtReal r(value);
    r.approximate_ = true;
    return r;
  }

  constexpr bool is_infinite() const noexcept { return infinite_; }
  constexpr bool is_finite() const noexcept { return !infinite_; }
  constexpr bool approximate() const noexcept { return approximate_; }

  /// Finite value; throws when infinite.
  double value() const {
    if (infinite_) throw NumericalError("ExtReal::value() called on +infinity");
    return value_;
  }

  /// IEEE view, for output and plotting only.
  double to_double() const noexcept {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    ExtReal r = (a.infinite_ || b.infinite_) ? infinity() : ExtReal(a.value_ + b.value_);
    r.approximate_ = a.approximate_ || b.approximate_;
    return r;
  }

  friend ExtReal operator*(ExtReal a, ExtReal b) {
    if ((a.infinite_ && !b.infinite_ && b.value_ == 0.0) ||
        (b.infinite_ && !a.infinite_ && a.value_ == 0.0))
      throw NumericalError("0 * infinity is undefined");
    if ((a.infinite_ && !b.infinite_ && b.value_ < 0.0) ||
        (b.infinite_ && !a.infinite_ && a.value_ < 0.0))
      throw NumericalError("negative * infinity is outside the extended nonnegative reals");
    ExtReal r = (a.infinite_ || b.infinite_) ? infinity() : ExtReal(a.value_ * b.value_);
    r.approximate_ = a.approximate_ || b.approximate_;
    return r;
  }

  friend bool operator==(ExtReal a, ExtReal b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }

  friend std::partial_ordering operator<=>(ExtReal a, ExtReal b) {
    if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
    if (a.infinite_) return std::partial_ordering::greater;
    if (b.infinite_) return std::partial_ordering::less;
    return a.value_ <=> b.value_;
  }

  friend std::ostream& operator<<(std::ostream& os, ExtReal x) {
    if (x.infinite_) return os << "inf";
    return os << x.value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
  bool approximate_ = false;
};

/// Value of a moment generating function, E exp(qV), possibly +infinity.
using MgfValue = ExtReal;

}  // namespace ruinlab
