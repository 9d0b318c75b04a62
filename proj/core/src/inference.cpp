#include "adasi/inference.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace adasi {

namespace {

double step_offset(const NullDistribution& dist) {
  return 1e-6 * std::max(1.0, dist.unit());
}

// Mass ratio with a log-space fallback once the denominator underflows
// toward the far tail.
double mass_ratio(const NullDistribution& dist, const IntervalUnion& num,
                  const IntervalUnion& den) {
  double md = dist.mass(den);
  if (md <= 0.0 || md < 1e-250) {
    double ld = dist.log_mass(den);
    if (ld == -kInf) throw std::runtime_error("degenerate state: zero denominator mass");
    double ln = dist.log_mass(num);
    if (ln == -kInf) return 0.0;
    return std::clamp(std::exp(ln - ld), 0.0, 1.0);
  }
  return std::clamp(dist.mass(num) / md, 0.0, 1.0);
}

bool contains_with_slack(const IntervalUnion& u, double z) {
  if (u.contains(z)) return true;
  for (const auto& p : u.parts()) {
    if (z >= p.lo - merge_tol(p.lo, z) && z <= p.hi + merge_tol(p.hi, z)) {
      return true;
    }
  }
  return false;
}

// Moves a complement boundary point strictly into the interior of its
// complement part; narrow parts get their midpoint.
double into_part(const Interval& part, double boundary, bool upward,
                 double eps) {
  if (std::isfinite(part.lo) && std::isfinite(part.hi) &&
      part.width() < 3.0 * eps) {
    return 0.5 * (part.lo + part.hi);
  }
  return upward ? boundary + eps : boundary - eps;
}

const Interval* find_part_with_lo(const IntervalUnion& u, double x) {
  for (const auto& p : u.parts()) {
    if (std::abs(p.lo - x) <= merge_tol(p.lo, x)) return &p;
  }
  return nullptr;
}

const Interval* find_part_with_hi(const IntervalUnion& u, double x) {
  for (const auto& p : u.parts()) {
    if (std::abs(p.hi - x) <= merge_tol(p.hi, x)) return &p;
  }
  return nullptr;
}

}  // namespace

IntervalUnion inside_set(double t, TestSide side) {
  switch (side) {
    case TestSide::TwoSided:
      return IntervalUnion::of(-std::abs(t), std::abs(t));
    case TestSide::LeftTailed:
      return IntervalUnion::of(t, kInf);
    case TestSide::RightTailed:
      return IntervalUnion::of(-kInf, t);
  }
  throw std::logic_error("unknown test side");
}

BoundsPair bounds(const SearchState& state) {
  const IntervalUnion t_set = inside_set(state.t, state.side);
  const IntervalUnion s_c = set_complement(state.searched);
  const IntervalUnion& r = state.truncated;

  BoundsPair out;
  out.lower = mass_ratio(state.dist, set_subtract(r, t_set),
                         set_union(r, set_intersect(s_c, t_set)));
  out.upper = mass_ratio(state.dist, set_subtract(set_union(r, s_c), t_set),
                         set_union(r, set_subtract(s_c, t_set)));
  if (out.lower > out.upper) out.lower = out.upper;
  return out;
}

namespace {

BoundsPair brute_force_level(const SearchState& state, int grid_n,
                             std::uint64_t subset_seed) {
  const double box = 50.0 * state.dist.unit();
  const IntervalUnion t_set = inside_set(state.t, state.side);
  IntervalUnion s_c = set_intersect(set_complement(state.searched),
                                    IntervalUnion::of(-box, box));
  const IntervalUnion& r = state.truncated;
  const double r_out = state.dist.mass(set_subtract(r, t_set));
  const double r_tot = state.dist.mass(r);

  // Slice S^c into roughly grid_n equal-width cells across its parts.
  double total_w = 0.0;
  for (const auto& p : s_c.parts()) total_w += p.width();
  struct Cell {
    double out_mass;    // mass outside T
    double total_mass;  // full mass
    bool mid_inside;    // midpoint lies in T
  };
  std::vector<Cell> cells;
  for (const auto& p : s_c.parts()) {
    int k = std::max(1, static_cast<int>(std::round(grid_n * p.width() / total_w)));
    for (int i = 0; i < k; ++i) {
      double a = p.lo + p.width() * i / k;
      double b = p.lo + p.width() * (i + 1) / k;
      IntervalUnion cell = IntervalUnion::of(a, b);
      cells.push_back({state.dist.mass(set_subtract(cell, t_set)),
                       state.dist.mass(cell), t_set.contains(0.5 * (a + b))});
    }
  }

  auto ratio_for = [&](const std::vector<bool>& take) {
    double num = r_out, den = r_tot;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!take[i]) continue;
      num += cells[i].out_mass;
      den += cells[i].total_mass;
    }
    return den > 0.0 ? num / den : 1.0;
  };

  double lo = 1.0, hi = 0.0;
  auto consider = [&](const std::vector<bool>& take) {
    double v = ratio_for(take);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };

  std::vector<bool> take(cells.size());
  // R itself and structured completions aimed at the two optima.
  std::fill(take.begin(), take.end(), false);
  consider(take);
  std::fill(take.begin(), take.end(), true);
  consider(take);
  for (std::size_t i = 0; i < cells.size(); ++i) take[i] = cells[i].mid_inside;
  consider(take);
  for (std::size_t i = 0; i < cells.size(); ++i) take[i] = !cells[i].mid_inside;
  consider(take);
  // Random completions.
  std::mt19937_64 rng(subset_seed);
  for (int rep = 0; rep < 200; ++rep) {
    for (std::size_t i = 0; i < cells.size(); ++i) take[i] = rng() & 1;
    consider(take);
  }
  return {lo, hi};
}

}  // namespace

BoundsPair brute_force_bounds(const SearchState& state, int grid_n,
                              std::uint64_t subset_seed) {
  // Evaluate the dyadic coarsenings of the grid as well, so finer calls
  // consider a superset of completions and the bracket widens monotonically
  // toward the analytic optimum.
  BoundsPair out{1.0, 0.0};
  for (int g = grid_n; g >= 8; g /= 2) {
    BoundsPair level = brute_force_level(state, g, subset_seed);
    out.lower = std::min(out.lower, level.lower);
    out.upper = std::max(out.upper, level.upper);
  }
  return out;
}

double select_next(const SearchState& state, Strategy strategy) {
  const IntervalUnion s_c = set_complement(state.searched);
  if (s_c.is_empty()) throw std::runtime_error("search exhausted: S covers the support");
  const double eps = step_offset(state.dist);
  const NullDistribution& d = state.dist;

  if (strategy == Strategy::Pi1) {
    // Complement point nearest to t; ties toward larger density, then +inf.
    const Interval* best = nullptr;
    double best_pt = 0.0, best_dist = kInf;
    for (const auto& p : s_c.parts()) {
      double cand = std::clamp(state.t, p.lo, p.hi);
      double dist = std::abs(cand - state.t);
      bool better = dist < best_dist;
      if (!better && dist == best_dist && best != nullptr) {
        double fc = d.density(cand), fb = d.density(best_pt);
        better = fc > fb || (fc == fb && cand > best_pt);
      }
      if (better) {
        best = &p;
        best_pt = cand;
        best_dist = dist;
      }
    }
    bool upward = best_pt > state.t;
    return into_part(*best, best_pt, upward, eps);
  }

  if (strategy == Strategy::Pi2) {
    // Density argmax over S^c: clamp the mode into each part.
    const double mode = d.mode();
    const Interval* best = nullptr;
    double best_pt = 0.0, best_f = -1.0;
    for (const auto& p : s_c.parts()) {
      double cand = std::clamp(mode, p.lo, p.hi);
      double f = d.density(cand);
      if (f > best_f || (f == best_f && cand > best_pt)) {
        best = &p;
        best_pt = cand;
        best_f = f;
      }
    }
    if (best_pt > best->lo && best_pt < best->hi) return best_pt;  // interior mode
    bool upward = best_pt == best->lo;
    return into_part(*best, best_pt, upward, eps);
  }

  // Pi3: endpoints of the largest searched interval containing t.
  const Interval* home = nullptr;
  for (const auto& p : state.searched.parts()) {
    if (p.contains(state.t)) {
      home = &p;
      break;
    }
  }
  if (home == nullptr) throw std::logic_error("t not inside searched intervals");
  const Interval* up_part = home->hi < kInf ? find_part_with_lo(s_c, home->hi) : nullptr;
  const Interval* down_part = home->lo > -kInf ? find_part_with_hi(s_c, home->lo) : nullptr;
  if (up_part == nullptr && down_part == nullptr) {
    // Both sides of t are covered; fall back to the nearest remaining gap.
    return select_next(state, Strategy::Pi1);
  }
  bool go_up;
  if (up_part == nullptr) {
    go_up = false;
  } else if (down_part == nullptr) {
    go_up = true;
  } else {
    go_up = d.density(home->hi) >= d.density(home->lo);
  }
  if (go_up) return into_part(*up_part, home->hi, true, eps);
  return into_part(*down_part, home->lo, false, eps);
}

void step(SearchState& state, SelectionOracle& oracle, double z) {
  if (state.searched.contains(z)) {
    throw std::invalid_argument("query point already searched");
  }
  OracleResponse resp = oracle.query(z);
  ++state.oracle_calls;
  if (resp.oc_region.is_empty() || !contains_with_slack(resp.oc_region, z)) {
    throw std::runtime_error("oracle contract violation: region does not contain query point");
  }
  state.searched = set_union(state.searched, resp.oc_region);
  if (resp.matches_observed) {
    state.truncated = set_union(state.truncated, resp.oc_region);
  }
  ++state.iter;
  BoundsPair b = bounds(state);
  state.trace.push_back({state.iter, b.lower, b.upper});
  if (state.record_regions) {
    state.region_trace.emplace_back(state.searched, state.truncated);
  }
}

TerminationRule TerminationRule::precision(double eps) {
  TerminationRule r;
  r.kind = Kind::Precision;
  r.eps = eps;
  return r;
}
TerminationRule TerminationRule::decision(double alpha) {
  TerminationRule r;
  r.kind = Kind::Decision;
  r.alpha = alpha;
  return r;
}
TerminationRule TerminationRule::range_covered(double lo, double hi) {
  TerminationRule r;
  r.kind = Kind::RangeCovered;
  r.lo = lo;
  r.hi = hi;
  return r;
}
TerminationRule TerminationRule::iteration_cap(long n) {
  TerminationRule r;
  r.kind = Kind::MaxIters;
  r.max_iters = n;
  return r;
}

namespace {

// Initializes the search at the observed statistic. For the chi statistic the
// negative half line carries no mass and is marked searched up front so
// strategies never probe below the support.
SearchState init_state(double t, TestSide side, const NullDistribution& dist,
                       SelectionOracle& oracle, bool record_regions) {
  SearchState state;
  state.t = t;
  state.side = side;
  state.dist = dist;
  state.record_regions = record_regions;
  OracleResponse resp = oracle.query(t);
  state.oracle_calls = 1;
  if (!contains_with_slack(resp.oc_region, t)) {
    throw std::runtime_error("oracle contract violation at the observed statistic");
  }
  if (!resp.matches_observed) {
    throw std::runtime_error("oracle does not match itself at the observed statistic");
  }
  state.searched = resp.oc_region;
  state.truncated = resp.oc_region;
  if (dist.kind() == DistKind::Chi) {
    state.searched = set_union(state.searched, IntervalUnion::of(-kInf, 0.0));
  }
  state.iter = 1;
  BoundsPair b = bounds(state);
  state.trace.push_back({state.iter, b.lower, b.upper});
  if (record_regions) {
    state.region_trace.emplace_back(state.searched, state.truncated);
  }
  return state;
}

}  // namespace

RunResult run(double t, TestSide side, const NullDistribution& dist,
              SelectionOracle& oracle, Strategy strategy,
              const TerminationRule& rule, bool record_regions) {
  RunResult result;
  result.state = init_state(t, side, dist, oracle, record_regions);
  SearchState& state = result.state;

  bool exhausted = false;
  while (true) {
    BoundsPair b{state.trace.back().lower, state.trace.back().upper};
    bool done = false;
    switch (rule.kind) {
      case TerminationRule::Kind::Precision:
        done = (b.upper - b.lower) < rule.eps;
        break;
      case TerminationRule::Kind::Decision:
        if (b.upper < rule.alpha) {
          result.reject = true;
          done = true;
        } else if (b.lower >= rule.alpha) {
          result.reject = false;
          done = true;
        }
        break;
      case TerminationRule::Kind::RangeCovered:
        done = set_intersect(set_complement(state.searched),
                             IntervalUnion::of(rule.lo, rule.hi))
                   .is_empty();
        break;
      case TerminationRule::Kind::MaxIters:
        done = state.iter >= rule.max_iters;
        break;
    }
    if (exhausted && rule.kind == TerminationRule::Kind::Decision &&
        !result.reject.has_value()) {
      // L == U == exact p-value; decide directly.
      result.reject = b.upper < rule.alpha;
      done = true;
    }
    if (done || exhausted) {
      result.bounds = b;
      return result;
    }
    if (state.iter >= rule.max_iters) {
      result.bounds = b;
      result.inconclusive = true;
      return result;
    }
    double z;
    try {
      z = select_next(state, strategy);
    } catch (const std::runtime_error&) {
      exhausted = true;
      continue;
    }
    step(state, oracle, z);
  }
}

ExhaustiveResult exhaustive_run(double t, TestSide side,
                                const NullDistribution& dist,
                                SelectionOracle& oracle) {
  double lo, hi;
  if (dist.kind() == DistKind::Gaussian) {
    double s = dist.scale();
    if (std::abs(t) <= 20.0 * s) {
      lo = -20.0 * s;
      hi = 20.0 * s;
    } else {
      hi = 10.0 * s + std::abs(t);
      lo = -hi;
    }
  } else {
    lo = 0.0;
    hi = std::abs(t) <= 100.0 ? 100.0 : 50.0 + std::abs(t);
  }
  const double eps = step_offset(dist);
  const IntervalUnion range = IntervalUnion::of(lo, hi);

  ExhaustiveResult result;
  result.state = init_state(t, side, dist, oracle, false);
  SearchState& state = result.state;

  // Left-to-right sweep: query just inside the smallest uncovered gap.
  for (long guard = 0; guard < 100000; ++guard) {
    IntervalUnion gaps = set_intersect(set_complement(state.searched), range);
    if (gaps.is_empty()) break;
    const Interval& g = gaps.parts().front();
    double z = g.width() < 3.0 * eps ? 0.5 * (g.lo + g.hi) : g.lo + eps;
    step(state, oracle, z);
  }

  const IntervalUnion t_set = inside_set(t, side);
  const IntervalUnion r_cov = set_intersect(state.truncated, range);
  result.p = mass_ratio(dist, set_subtract(r_cov, t_set), r_cov);
  return result;
}

double exhaustive_p(double t, TestSide side, const NullDistribution& dist,
                    SelectionOracle& oracle) {
  return exhaustive_run(t, side, dist, oracle).p;
}

double oc_p(double t, TestSide side, const NullDistribution& dist,
            SelectionOracle& oracle) {
  OracleResponse resp = oracle.query(t);
  const IntervalUnion t_set = inside_set(t, side);
  return mass_ratio(dist, set_subtract(resp.oc_region, t_set), resp.oc_region);
}

double naive_p(double t, TestSide side, const NullDistribution& dist) {
  switch (side) {
    case TestSide::TwoSided:
      return dist.mass(set_complement(inside_set(t, side)));
    case TestSide::LeftTailed:
      return dist.cdf(t);
    case TestSide::RightTailed:
      return dist.sf(t);
  }
  throw std::logic_error("unknown test side");
}

}  // namespace adasi
