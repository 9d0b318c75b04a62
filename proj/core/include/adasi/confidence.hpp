#pragma once

#include "adasi/inference.hpp"
#include "adasi/intervals.hpp"

namespace adasi {

/// Lower/upper bounds on the mean parameter mu_c at which the truncated
/// standard-normal CDF at t equals c, computed from a partial search state.
struct CiBounds {
  double c = 0.5;
  double mu_lower = 0.0;
  double mu_upper = 0.0;
};

/// CDF at t of the N(mu, 1) law truncated to R: strictly decreasing in mu.
/// Throws on a region with vanishing shifted mass.
double truncated_cdf_at(double mu, const IntervalUnion& r, double t);

/// Solves target_c = I_mu(num_region n (-inf, t]) / I_mu(den_region) for mu,
/// where I_mu is the N(mu, 1) mass. Exponential bracket expansion from t
/// followed by bisection; throws if no bracket is found within t +- 2^60.
double invert_mu(double target_c, const IntervalUnion& num_region,
                 const IntervalUnion& den_region, double t);

/// The two mu_c bounds obtained from (S, R) of a search state whose statistic
/// has been standardized to unit scale.
CiBounds ci_bounds(double c, const SearchState& state);

struct SelectiveCi {
  Interval outer;  // guaranteed to contain the exact selective CI
  Interval inner;  // guaranteed to be contained in it (may be reversed/empty)
};

/// Bounds on the (1-alpha) selective confidence interval
/// [mu_{1-alpha/2}, mu_{alpha/2}] from a partial search state.
SelectiveCi selective_ci(double alpha, const SearchState& state);

}  // namespace adasi
