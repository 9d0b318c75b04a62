#include <doctest.h>

#include <cmath>
#include <random>

#include "adasi/harness.hpp"
#include "adasi/sfs.hpp"

using namespace adasi;

namespace {

SfsProblem random_problem(std::mt19937_64& rng, int n, int p, double delta) {
  SfsProblem problem = gen_sfs_data(n, p, delta, rng);
  return problem;
}

// Independent residual norm via a complete orthogonal decomposition.
double resid_norm2(const Eigen::MatrixXd& X, const std::vector<int>& idx,
                   const Eigen::VectorXd& y) {
  Eigen::MatrixXd M(X.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) M.col(i) = X.col(idx[i]);
  Eigen::VectorXd fit = M * M.completeOrthogonalDecomposition().solve(y);
  return (y - fit).squaredNorm();
}

}  // namespace

TEST_CASE("run_sfs greedily minimizes the residual norm") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    SfsProblem problem = random_problem(rng, 40, 8, 0.4);
    SfsHistory h = run_sfs(problem.X, problem.D_obs, 4);
    REQUIRE(h.order.size() == 4);
    std::vector<int> chosen;
    for (int k = 0; k < 4; ++k) {
      double best = resid_norm2(problem.X, [&] {
        auto s = chosen;
        s.push_back(h.order[k]);
        return s;
      }(), problem.D_obs);
      for (int j = 0; j < 8; ++j) {
        if (std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
        auto s = chosen;
        s.push_back(j);
        CHECK(best <= resid_norm2(problem.X, s, problem.D_obs) + 1e-9);
      }
      chosen.push_back(h.order[k]);
    }
  }
}

TEST_CASE("run_sfs breaks exact ties toward the smaller index") {
  Eigen::MatrixXd X(4, 3);
  X.col(0) << 1, 0, 0, 0;
  X.col(1) << 1, 0, 0, 0;  // duplicate of column 0
  X.col(2) << 0, 1, 0, 0;
  Eigen::VectorXd D(4);
  D << 5, 0.1, 0, 0;
  SfsHistory h = run_sfs(X, D, 1);
  CHECK(h.order[0] == 0);
}

TEST_CASE("same_set ignores selection order") {
  SfsHistory a{{2, 0, 5}};
  SfsHistory b{{5, 2, 0}};
  SfsHistory c{{5, 2, 1}};
  CHECK(a.same_set(b));
  CHECK(!a.same_set(c));
}

TEST_CASE("z_direction geometry") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    SfsProblem problem = random_problem(rng, 50, 8, 0.3);
    problem.K = 3;
    SfsHistory h = run_sfs(problem.X, problem.D_obs, 3);
    for (int j : h.order) {
      ZDirection dir = z_direction(problem, h, j);
      // eta recovers the coefficient direction: X_M^T eta = e_j.
      for (int m : h.order) {
        double dot = problem.X.col(m).dot(dir.eta);
        CHECK(dot == doctest::Approx(m == j ? 1.0 : 0.0).epsilon(1e-9));
      }
      // Line decomposition: a + b z_obs reproduces the data, a _|_ eta.
      Eigen::VectorXd recon = dir.line.at(dir.line.z_obs);
      CHECK((recon - problem.D_obs).norm() < 1e-9);
      CHECK(std::abs(dir.eta.dot(dir.line.a)) < 1e-9);
      CHECK(dir.line.z_obs == doctest::Approx(dir.eta.dot(problem.D_obs)));
      CHECK(dir.dist.kind() == DistKind::Gaussian);
      CHECK(dir.dist.scale() ==
            doctest::Approx(problem.sigma * dir.eta.norm()));
    }
  }
  CHECK_THROWS_AS(
      [&] {
        SfsProblem problem = random_problem(rng, 30, 5, 0.0);
        SfsHistory h = run_sfs(problem.X, problem.D_obs, 2);
        int outside = 0;
        while (std::find(h.order.begin(), h.order.end(), outside) !=
               h.order.end()) {
          ++outside;
        }
        z_direction(problem, h, outside);
      }(),
      std::invalid_argument);
}

TEST_CASE("chi_direction geometry") {
  std::mt19937_64 rng(91);
  for (int rep = 0; rep < 20; ++rep) {
    SfsProblem problem = random_problem(rng, 50, 8, 0.3);
    problem.K = 4;
    SfsHistory h = run_sfs(problem.X, problem.D_obs, 4);
    std::vector<int> g{h.order[1], h.order[3]};
    ChiDirection dir = chi_direction(problem, h, g);
    // Projector: symmetric, idempotent, rank = dof.
    CHECK((dir.P - dir.P.transpose()).norm() < 1e-9);
    CHECK((dir.P * dir.P - dir.P).norm() < 1e-9);
    CHECK(dir.P.trace() == doctest::Approx(dir.dof).epsilon(1e-9));
    CHECK(dir.dof == doctest::Approx(2.0));
    // P annihilates the conditioned-out features.
    CHECK((dir.P * problem.X.col(h.order[0])).norm() < 1e-8);
    CHECK((dir.P * problem.X.col(h.order[2])).norm() < 1e-8);
    // Line: ||b|| = sigma, a is the anti-projection, z_obs = ||P D|| / sigma.
    CHECK(dir.line.b.norm() == doctest::Approx(problem.sigma).epsilon(1e-10));
    CHECK((dir.P * dir.line.a).norm() < 1e-8);
    CHECK(dir.line.z_obs ==
          doctest::Approx((dir.P * problem.D_obs).norm() / problem.sigma));
    CHECK((dir.line.at(dir.line.z_obs) - problem.D_obs).norm() < 1e-9);
    CHECK(dir.dist.kind() == DistKind::Chi);
  }
}

TEST_CASE("oracle regions reproduce the selection under grid re-execution") {
  std::mt19937_64 rng(2025);
  std::uniform_real_distribution<double> probe(0.0, 1.0);
  for (int rep = 0; rep < 15; ++rep) {
    SfsProblem problem = random_problem(rng, 40, 6, 0.3);
    problem.K = 3;
    SfsHistory h = run_sfs(problem.X, problem.D_obs, 3);
    ZDirection dir = z_direction(problem, h, h.order.front());
    SfsOracle oracle(problem, h, dir.line);

    OracleResponse at_obs = oracle.query(dir.line.z_obs);
    CHECK(at_obs.matches_observed);
    CHECK(at_obs.oc_region.contains(dir.line.z_obs));

    std::uniform_real_distribution<double> zq(-4.0 * dir.dist.scale(),
                                              4.0 * dir.dist.scale());
    for (int q = 0; q < 10; ++q) {
      double z = zq(rng);
      OracleResponse resp = oracle.query(z);
      REQUIRE(resp.oc_region.contains(z));
      REQUIRE(resp.oc_region.size() >= 1);
      // The region of a quadratic intersection containing z is one interval.
      Interval cell{-kInf, kInf};
      for (const Interval& part : resp.oc_region.parts()) {
        if (part.contains(z)) cell = part;
      }
      double lo = std::max(cell.lo, z - 3.0);
      double hi = std::min(cell.hi, z + 3.0);
      for (int g = 0; g < 25; ++g) {
        double zz = lo + (hi - lo) * probe(rng);
        SfsHistory hz = run_sfs(problem.X, dir.line.at(zz), 3);
        CHECK(hz.order == run_sfs(problem.X, dir.line.at(z), 3).order);
      }
      // Just beyond a finite endpoint the ordered history changes.
      double eps = 1e-6 * std::max(1.0, std::abs(cell.hi));
      if (std::isfinite(cell.hi)) {
        SfsHistory beyond = run_sfs(problem.X, dir.line.at(cell.hi + eps), 3);
        CHECK(beyond.order != run_sfs(problem.X, dir.line.at(z), 3).order);
      }
    }
  }
}

TEST_CASE("full pipeline: bounded p-values bracket the exhaustive sweep") {
  std::mt19937_64 rng(404);
  for (int rep = 0; rep < 10; ++rep) {
    SfsProblem problem = random_problem(rng, 50, 8, 0.0);
    problem.K = 3;
    SfsHistory h = run_sfs(problem.X, problem.D_obs, 3);
    ZDirection dir = z_direction(problem, h, h.order.front());

    SfsOracle ex_oracle(problem, h, dir.line);
    double p_ex =
        exhaustive_p(dir.line.z_obs, TestSide::TwoSided, dir.dist, ex_oracle);

    for (Strategy s : {Strategy::Pi1, Strategy::Pi2, Strategy::Pi3}) {
      SfsOracle oracle(problem, h, dir.line);
      RunResult r = run(dir.line.z_obs, TestSide::TwoSided, dir.dist, oracle,
                        s, TerminationRule::precision(1e-4));
      CHECK(r.bounds.lower <= p_ex + 1e-9);
      CHECK(r.bounds.upper >= p_ex - 1e-9);
      CHECK(r.bounds.upper - r.bounds.lower < 1e-4);
    }
  }
}

TEST_CASE("chi pipeline stays on the nonnegative half-line") {
  std::mt19937_64 rng(505);
  for (int rep = 0; rep < 10; ++rep) {
    SfsProblem problem = random_problem(rng, 50, 8, 0.0);
    problem.K = 3;
    SfsHistory h = run_sfs(problem.X, problem.D_obs, 3);
    std::vector<int> g{h.order[rep % 3]};
    ChiDirection dir = chi_direction(problem, h, g);
    SfsOracle oracle(problem, h, dir.line);
    RunResult r = run(dir.line.z_obs, TestSide::RightTailed, dir.dist, oracle,
                      Strategy::Pi2, TerminationRule::decision(0.05));
    REQUIRE(r.reject.has_value());
    CHECK(r.bounds.lower >= 0.0);
    CHECK(r.bounds.upper <= 1.0);

    SfsOracle ex_oracle(problem, h, dir.line);
    double p_ex = exhaustive_p(dir.line.z_obs, TestSide::RightTailed, dir.dist,
                               ex_oracle);
    CHECK(*r.reject == (p_ex < 0.05));
  }
}
