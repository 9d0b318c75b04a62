#include "adasi/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adasi {

IntervalUnion IntervalUnion::of(double lo, double hi) {
  return canonicalize({{lo, hi}});
}

IntervalUnion IntervalUnion::canonicalize(std::vector<Interval> parts) {
  for (const auto& p : parts) {
    if (std::isnan(p.lo) || std::isnan(p.hi)) {
      throw std::invalid_argument("interval endpoint is NaN");
    }
    if (p.lo > p.hi) {
      throw std::invalid_argument("reversed interval: lo > hi");
    }
  }
  std::sort(parts.begin(), parts.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  IntervalUnion out;
  for (const auto& p : parts) {
    if (!out.parts_.empty()) {
      Interval& last = out.parts_.back();
      if (p.lo <= last.hi + merge_tol(last.hi, p.lo)) {
        last.hi = std::max(last.hi, p.hi);
        continue;
      }
    }
    out.parts_.push_back(p);
  }
  return out;
}

bool IntervalUnion::contains(double z) const {
  // parts_ is sorted by lo; binary search for the candidate part.
  auto it = std::upper_bound(
      parts_.begin(), parts_.end(), z,
      [](double v, const Interval& p) { return v < p.lo; });
  if (it == parts_.begin()) return false;
  return std::prev(it)->contains(z);
}

IntervalUnion IntervalUnion::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
  std::vector<Interval> parts = parts_;
  for (auto& p : parts) {
    p.lo *= factor;
    p.hi *= factor;
  }
  return canonicalize(std::move(parts));
}

IntervalUnion IntervalUnion::shifted(double delta) const {
  std::vector<Interval> parts = parts_;
  for (auto& p : parts) {
    p.lo += delta;
    p.hi += delta;
  }
  return canonicalize(std::move(parts));
}

IntervalUnion set_union(const IntervalUnion& a, const IntervalUnion& b) {
  std::vector<Interval> parts = a.parts();
  parts.insert(parts.end(), b.parts().begin(), b.parts().end());
  return IntervalUnion::canonicalize(std::move(parts));
}

IntervalUnion set_intersect(const IntervalUnion& a, const IntervalUnion& b) {
  std::vector<Interval> parts;
  std::size_t i = 0, j = 0;
  const auto& pa = a.parts();
  const auto& pb = b.parts();
  while (i < pa.size() && j < pb.size()) {
    double lo = std::max(pa[i].lo, pb[j].lo);
    double hi = std::min(pa[i].hi, pb[j].hi);
    if (lo <= hi) parts.push_back({lo, hi});
    if (pa[i].hi < pb[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return IntervalUnion::canonicalize(std::move(parts));
}

IntervalUnion set_complement(const IntervalUnion& a) {
  if (a.is_empty()) return IntervalUnion::all();
  std::vector<Interval> parts;
  double cursor = -kInf;
  for (const auto& p : a.parts()) {
    if (p.lo > cursor) parts.push_back({cursor, p.lo});
    cursor = p.hi;
    if (cursor == kInf) break;
  }
  if (cursor < kInf) parts.push_back({cursor, kInf});
  return IntervalUnion::canonicalize(std::move(parts));
}

IntervalUnion set_subtract(const IntervalUnion& a, const IntervalUnion& b) {
  return set_intersect(a, set_complement(b));
}

IntervalUnion solve_quadratic_le(const QuadraticCoeffs& q) {
  const double tol =
      1e-12 * (1.0 + std::abs(q.a2) + std::abs(q.a1) + std::abs(q.a0));
  if (std::abs(q.a2) < tol) {
    if (std::abs(q.a1) < tol) {
      // Constant inequality.
      return q.a0 <= 0.0 ? IntervalUnion::all() : IntervalUnion::empty();
    }
    double root = -q.a0 / q.a1;
    return q.a1 > 0.0 ? IntervalUnion::of(-kInf, root)
                      : IntervalUnion::of(root, kInf);
  }
  const double disc = q.a1 * q.a1 - 4.0 * q.a2 * q.a0;
  if (disc <= 0.0) {
    if (q.a2 > 0.0) {
      if (disc < 0.0) return IntervalUnion::empty();
      double r = -q.a1 / (2.0 * q.a2);
      return IntervalUnion::of(r, r);
    }
    return IntervalUnion::all();
  }
  // Cancellation-free root pair.
  const double sq = std::sqrt(disc);
  const double sgn = q.a1 >= 0.0 ? 1.0 : -1.0;
  const double qq = -0.5 * (q.a1 + sgn * sq);
  double r1, r2;
  if (qq != 0.0) {
    r1 = qq / q.a2;
    r2 = q.a0 / qq;
  } else {
    // a1 == 0 and a0/a2 < 0.
    r1 = std::sqrt(-q.a0 / q.a2);
    r2 = -r1;
  }
  const double rlo = std::min(r1, r2);
  const double rhi = std::max(r1, r2);
  if (q.a2 > 0.0) return IntervalUnion::of(rlo, rhi);
  return IntervalUnion::canonicalize({{-kInf, rlo}, {rhi, kInf}});
}

}  // namespace adasi
