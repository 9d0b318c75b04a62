#pragma once

#include <limits>
#include <vector>

namespace adasi {

/// A closed interval on the extended real line. Endpoint topology is not
/// tracked: every finite endpoint is treated as closed, since boundary sets
/// carry zero mass under the continuous null distributions used here.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double z) const { return lo <= z && z <= hi; }
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative gap tolerance for canonicalization. Gaps narrower than
/// merge_tol(x) around endpoint magnitude x are closed, so floating-point
/// roots of adjacent constraint solutions cannot create spurious micro-gaps.
inline double merge_tol(double a, double b) {
  double m = 1.0;
  if (std::abs(a) > m) m = std::abs(a);
  if (std::abs(b) > m) m = std::abs(b);
  return 1e-12 * m;
}

/// Canonical finite union of disjoint closed intervals, sorted by lower
/// endpoint. The empty list is the empty set; a single (-inf, +inf) part is
/// the whole line. Immutable after construction.
class IntervalUnion {
 public:
  IntervalUnion() = default;

  /// Sorts, merges overlaps and sub-tolerance gaps. Throws
  /// std::invalid_argument on a reversed part (lo > hi) or a NaN endpoint.
  static IntervalUnion canonicalize(std::vector<Interval> parts);

  static IntervalUnion empty() { return IntervalUnion(); }
  static IntervalUnion all() { return of(-kInf, kInf); }
  static IntervalUnion of(double lo, double hi);

  const std::vector<Interval>& parts() const { return parts_; }
  bool is_empty() const { return parts_.empty(); }
  bool is_all() const {
    return parts_.size() == 1 && parts_[0].lo == -kInf && parts_[0].hi == kInf;
  }
  std::size_t size() const { return parts_.size(); }

  bool contains(double z) const;

  /// Multiplies every endpoint by a positive factor.
  IntervalUnion scaled(double factor) const;
  /// Translates every endpoint by delta.
  IntervalUnion shifted(double delta) const;

 private:
  std::vector<Interval> parts_;
};

IntervalUnion set_union(const IntervalUnion& a, const IntervalUnion& b);
IntervalUnion set_intersect(const IntervalUnion& a, const IntervalUnion& b);
IntervalUnion set_complement(const IntervalUnion& a);
IntervalUnion set_subtract(const IntervalUnion& a, const IntervalUnion& b);

/// Coefficients of a scalar quadratic a2*r^2 + a1*r + a0, the reduction of a
/// selection-event inequality along the line a + b*r.
struct QuadraticCoeffs {
  double a2 = 0.0;
  double a1 = 0.0;
  double a0 = 0.0;

  double eval(double r) const { return (a2 * r + a1) * r + a0; }
};

/// Exact solution set of a2*r^2 + a1*r + a0 <= 0 as an interval union.
/// Degenerate leading coefficients (relative to the coefficient scale) fall
/// back to the linear and constant cases.
IntervalUnion solve_quadratic_le(const QuadraticCoeffs& q);

}  // namespace adasi
