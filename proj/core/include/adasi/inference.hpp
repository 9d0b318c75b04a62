#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adasi/distributions.hpp"
#include "adasi/intervals.hpp"

namespace adasi {

enum class TestSide { TwoSided, LeftTailed, RightTailed };

/// The "inside" set T(t) whose complement mass defines the p-value:
/// [-|t|, |t|] two-sided, [t, inf) left-tailed, (-inf, t] right-tailed.
IntervalUnion inside_set(double t, TestSide side);

/// One answer from the selection-event back-end at a line position z: an
/// identifier of the algorithm output, the region of the line over which the
/// (output, sub-algorithm output) pair is constant, and whether the output
/// matches the observed one.
struct OracleResponse {
  std::string output_id;
  IntervalUnion oc_region;
  bool matches_observed = false;
};

/// Contract mapping a scalar line position to its piecewise-constant
/// selection region. Queries are pure; the region always contains the
/// queried point and every point of the region reproduces the same response.
class SelectionOracle {
 public:
  virtual ~SelectionOracle() = default;
  virtual OracleResponse query(double z) = 0;
};

struct BoundsPair {
  double lower = 0.0;
  double upper = 1.0;
};

/// Running state of the bounded p-value search: searched intervals S,
/// truncated intervals R (matching the observed output), and the bound
/// history. R stays a subset of S, both grow monotonically, and t stays in R.
struct SearchState {
  double t = 0.0;
  TestSide side = TestSide::TwoSided;
  NullDistribution dist = NullDistribution::gaussian(1.0);
  IntervalUnion searched;
  IntervalUnion truncated;
  int iter = 0;
  long oracle_calls = 0;

  struct TracePoint {
    int iter;
    double lower;
    double upper;
  };
  std::vector<TracePoint> trace;

  // Optional per-iteration (S, R) snapshots for downstream analyses
  // (confidence-interval tightening checks); off by default.
  bool record_regions = false;
  std::vector<std::pair<IntervalUnion, IntervalUnion>> region_trace;
};

/// Theorem-style lower/upper bounds computed from the current (S, R):
///   L = I(R \ T) / I(R u (S^c n T)),
///   U = I((R u S^c) \ T) / I(R u (S^c \ T)).
/// Ratios switch to log space when the denominator mass underflows.
BoundsPair bounds(const SearchState& state);

/// Independent numeric bracket on the p-value: evaluates I(R'\T)/I(R') over
/// completions R' = R u (subset of a grid partition of S^c within a +-50
/// unit box) and returns the empirical inf/sup. Test oracle for bounds();
/// coarse grids give a valid inner bracket that tightens as grid_n grows.
BoundsPair brute_force_bounds(const SearchState& state, int grid_n,
                              std::uint64_t subset_seed = 0x9e3779b97f4a7c15ull);

enum class Strategy { Pi1, Pi2, Pi3 };

/// Next query point strictly inside S^c under the given strategy. Throws
/// std::runtime_error when S already covers the support.
double select_next(const SearchState& state, Strategy strategy);

/// One Procedure iteration: query the oracle at z (must lie in S^c), grow S,
/// grow R when the output matches, append the new bounds to the trace.
void step(SearchState& state, SelectionOracle& oracle, double z);

struct TerminationRule {
  enum class Kind { Precision, Decision, RangeCovered, MaxIters };
  Kind kind = Kind::Precision;
  double eps = 1e-3;
  double alpha = 0.05;
  double lo = 0.0;
  double hi = 0.0;
  // Safety cap applied to every rule.
  long max_iters = 100000;

  static TerminationRule precision(double eps);
  static TerminationRule decision(double alpha);
  static TerminationRule range_covered(double lo, double hi);
  static TerminationRule iteration_cap(long n);
};

struct RunResult {
  BoundsPair bounds;
  // Present only for Decision runs: true = reject (U < alpha),
  // false = accept (L >= alpha).
  std::optional<bool> reject;
  bool inconclusive = false;  // iteration cap hit before the rule fired
  SearchState state;
};

/// Full bounded search: initializes S = R = the observed OC region, then
/// loops select_next/step until the termination rule fires or the search
/// exhausts the support (at which point L = U = the exact selective p-value).
RunResult run(double t, TestSide side, const NullDistribution& dist,
              SelectionOracle& oracle, Strategy strategy,
              const TerminationRule& rule, bool record_regions = false);

struct ExhaustiveResult {
  double p = 1.0;
  SearchState state;
};

/// Fixed-range sweep baseline: covers [-20 unit, 20 unit] (Gaussian) or
/// [0, 100] (Chi) left to right, widening when |t| falls outside, and treats
/// the covered range as the full search universe: p = I(R \ T) / I(R).
ExhaustiveResult exhaustive_run(double t, TestSide side,
                                const NullDistribution& dist,
                                SelectionOracle& oracle);
double exhaustive_p(double t, TestSide side, const NullDistribution& dist,
                    SelectionOracle& oracle);

/// Over-conditioning baseline: stops at the first OC region R1.
double oc_p(double t, TestSide side, const NullDistribution& dist,
            SelectionOracle& oracle);

/// Classical unconditional p-value.
double naive_p(double t, TestSide side, const NullDistribution& dist);

}  // namespace adasi
