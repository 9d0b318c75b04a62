#pragma once

#include <Eigen/Dense>
#include <vector>

#include "adasi/inference.hpp"
#include "adasi/line.hpp"

namespace adasi {

/// Forward stepwise feature selection problem: fixed design, observed
/// response, known noise level, and the number of selection steps.
struct SfsProblem {
  Eigen::MatrixXd X;       // n x p design
  Eigen::VectorXd D_obs;   // n response
  double sigma = 1.0;      // noise standard deviation
  int K = 1;               // selection steps, 1 <= K <= p
};

/// Ordered indices of the features picked at steps 1..K.
struct SfsHistory {
  std::vector<int> order;

  bool same_set(const SfsHistory& other) const;
};

/// Greedy residual-norm minimization; ties broken toward the smallest
/// feature index. Throws on rank-deficient candidate sets.
SfsHistory run_sfs(const Eigen::MatrixXd& X, const Eigen::VectorXd& D, int K);

/// Test direction for the coefficient of selected feature j:
/// eta = X_M (X_M^T X_M)^{-1} e_j, line slope b = eta / ||eta||^2.
ZDirection z_direction(const SfsProblem& problem, const SfsHistory& history,
                       int j);

struct ChiDirection {
  Eigen::MatrixXd P;  // projector onto the tested column space
  double dof = 0.0;   // rank of P
  LineParam line;
  NullDistribution dist = NullDistribution::chi(1.0);
};

/// Test direction for a feature subset g of the selected set: P projects onto
/// the column space of (I - P_{M\g}) X_g; the statistic is ||P D|| / sigma.
ChiDirection chi_direction(const SfsProblem& problem, const SfsHistory& history,
                           const std::vector<int>& g);

/// Selection oracle along a line: each query reruns SFS at a + b z and
/// returns the region where the full selection history is constant, as the
/// intersection of the competitor quadratics. Output matching compares the
/// selected sets (unordered), while the region pins the ordered history.
class SfsOracle : public SelectionOracle {
 public:
  SfsOracle(SfsProblem problem, SfsHistory observed, LineParam line);

  OracleResponse query(double z) override;

 private:
  SfsProblem problem_;
  SfsHistory observed_;
  LineParam line_;
};

}  // namespace adasi
