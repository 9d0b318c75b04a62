#include "adasi/confidence.hpp"

#include <cmath>
#include <stdexcept>

namespace adasi {

namespace {

// Ratio of shifted-Gaussian masses in log space; robust when mu is far from
// both regions and the linear masses underflow.
double shifted_ratio(double mu, const IntervalUnion& num,
                     const IntervalUnion& den) {
  double ld = log_shifted_gaussian_mass(mu, den);
  if (ld == -kInf) throw std::runtime_error("degenerate region: zero shifted mass");
  double ln = log_shifted_gaussian_mass(mu, num);
  if (ln == -kInf) return 0.0;
  return std::min(1.0, std::exp(ln - ld));
}

}  // namespace

double truncated_cdf_at(double mu, const IntervalUnion& r, double t) {
  return shifted_ratio(mu, set_intersect(r, IntervalUnion::of(-kInf, t)), r);
}

double invert_mu(double target_c, const IntervalUnion& num_region,
                 const IntervalUnion& den_region, double t) {
  if (!(target_c > 0.0 && target_c < 1.0)) {
    throw std::invalid_argument("target level must be in (0, 1)");
  }
  const IntervalUnion num =
      set_intersect(num_region, IntervalUnion::of(-kInf, t));
  auto ratio = [&](double mu) { return shifted_ratio(mu, num, den_region); };

  // The ratio decreases in mu: bracket by doubling steps away from t.
  double lo = t, hi = t;
  double r0 = ratio(t);
  if (r0 < target_c) {
    bool found = false;
    for (int k = 0; k <= 60; ++k) {
      lo = t - std::ldexp(1.0, k);
      if (ratio(lo) >= target_c) {
        found = true;
        break;
      }
      hi = lo;
    }
    if (!found) throw std::runtime_error("mu bracket expansion failed (unbounded below)");
  } else {
    bool found = false;
    for (int k = 0; k <= 60; ++k) {
      hi = t + std::ldexp(1.0, k);
      if (ratio(hi) <= target_c) {
        found = true;
        break;
      }
      lo = hi;
    }
    if (!found) throw std::runtime_error("mu bracket expansion failed (unbounded above)");
  }

  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 200 && hi - lo > 1e-6; ++i) {
    mid = 0.5 * (lo + hi);
    double r = ratio(mid);
    if (std::abs(r - target_c) <= 1e-8) return mid;
    if (r > target_c) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

CiBounds ci_bounds(double c, const SearchState& state) {
  const IntervalUnion s_c = set_complement(state.searched);
  const IntervalUnion& r = state.truncated;
  const double t = state.t;
  const IntervalUnion upper_half = IntervalUnion::of(t, kInf);
  const IntervalUnion lower_half = IntervalUnion::of(-kInf, t);

  CiBounds out;
  out.c = c;
  out.mu_lower =
      invert_mu(c, r, set_union(r, set_intersect(s_c, upper_half)), t);
  out.mu_upper = invert_mu(c, set_union(r, s_c),
                           set_union(r, set_intersect(s_c, lower_half)), t);
  return out;
}

SelectiveCi selective_ci(double alpha, const SearchState& state) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must be in (0, 1)");
  }
  CiBounds left = ci_bounds(1.0 - alpha / 2.0, state);
  CiBounds right = ci_bounds(alpha / 2.0, state);
  SelectiveCi out;
  out.outer = {left.mu_lower, right.mu_upper};
  out.inner = {left.mu_upper, right.mu_lower};
  return out;
}

}  // namespace adasi
