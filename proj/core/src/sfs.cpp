#include "adasi/sfs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace adasi {

namespace {

constexpr double kRankTol = 1e-10;

Eigen::MatrixXd columns(const Eigen::MatrixXd& X, const std::vector<int>& idx) {
  Eigen::MatrixXd M(X.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) M.col(i) = X.col(idx[i]);
  return M;
}

// Residuals of a and b against the span of X_M, with a full-rank check.
struct ResidPair {
  Eigen::VectorXd ra;
  Eigen::VectorXd rb;
};

ResidPair residualize(const Eigen::MatrixXd& Xm, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b) {
  if (Xm.cols() == 0) return {a, b};
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xm);
  qr.setThreshold(kRankTol);
  if (qr.rank() < Xm.cols()) {
    throw std::runtime_error("singular design: candidate feature set is rank deficient");
  }
  ResidPair out;
  out.ra = a - Xm * qr.solve(a);
  out.rb = b - Xm * qr.solve(b);
  return out;
}

// Residual-norm-squared of a + b z as a quadratic in z.
struct ResidQuad {
  double caa = 0.0, cab = 0.0, cbb = 0.0;
  double at(double z) const { return (cbb * z + 2.0 * cab) * z + caa; }
};

ResidQuad resid_quad(const Eigen::MatrixXd& X, const std::vector<int>& members,
                     int extra, const Eigen::VectorXd& a,
                     const Eigen::VectorXd& b) {
  std::vector<int> idx = members;
  idx.push_back(extra);
  ResidPair r = residualize(columns(X, idx), a, b);
  return {r.ra.dot(r.ra), r.ra.dot(r.rb), r.rb.dot(r.rb)};
}

}  // namespace

bool SfsHistory::same_set(const SfsHistory& other) const {
  if (order.size() != other.order.size()) return false;
  std::vector<int> a = order, b = other.order;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

SfsHistory run_sfs(const Eigen::MatrixXd& X, const Eigen::VectorXd& D, int K) {
  const int p = static_cast<int>(X.cols());
  if (K < 1 || K > p) throw std::invalid_argument("K must be in [1, p]");
  SfsHistory history;
  std::vector<bool> used(p, false);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(X.rows());
  for (int k = 0; k < K; ++k) {
    int best = -1;
    double best_norm = kInf;
    for (int j = 0; j < p; ++j) {
      if (used[j]) continue;
      ResidQuad q = resid_quad(X, history.order, j, D, zero);
      if (q.caa < best_norm) {
        best_norm = q.caa;
        best = j;
      }
    }
    history.order.push_back(best);
    used[best] = true;
  }
  return history;
}

ZDirection z_direction(const SfsProblem& problem, const SfsHistory& history,
                       int j) {
  const auto& order = history.order;
  auto pos = std::find(order.begin(), order.end(), j);
  if (pos == order.end()) {
    throw std::invalid_argument("tested feature was not selected");
  }
  Eigen::MatrixXd Xm = columns(problem.X, order);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xm);
  qr.setThreshold(kRankTol);
  if (qr.rank() < Xm.cols()) {
    throw std::runtime_error("singular design: selected feature set is rank deficient");
  }
  Eigen::VectorXd e = Eigen::VectorXd::Zero(Xm.cols());
  e(std::distance(order.begin(), pos)) = 1.0;
  // eta = X_M (X_M^T X_M)^{-1} e: solve R^T y = e, R w = y through the
  // pivoted factorization X_M P = Q R.
  Eigen::MatrixXd R = qr.matrixR()
                          .topRows(Xm.cols())
                          .template triangularView<Eigen::Upper>();
  Eigen::VectorXd ep = qr.colsPermutation().transpose() * e;
  Eigen::VectorXd y =
      R.transpose().triangularView<Eigen::Lower>().solve(ep);
  Eigen::VectorXd w =
      qr.colsPermutation() * R.triangularView<Eigen::Upper>().solve(y);
  return eta_line(Xm * w, problem.D_obs, problem.sigma);
}

ChiDirection chi_direction(const SfsProblem& problem, const SfsHistory& history,
                           const std::vector<int>& g) {
  if (g.empty()) throw std::invalid_argument("feature subset g must be nonempty");
  std::vector<int> rest;
  for (int j : history.order) {
    if (std::find(g.begin(), g.end(), j) == g.end()) rest.push_back(j);
  }
  if (rest.size() + g.size() != history.order.size()) {
    throw std::invalid_argument("g must be a subset of the selected features");
  }
  const Eigen::Index n = problem.X.rows();
  Eigen::MatrixXd Xg = columns(problem.X, g);
  Eigen::MatrixXd A;
  if (rest.empty()) {
    A = Xg;
  } else {
    Eigen::MatrixXd Xr = columns(problem.X, rest);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xr);
    qr.setThreshold(kRankTol);
    A = Xg - Xr * qr.solve(Xg);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(kRankTol);
  Eigen::Index rank = qr.rank();
  if (rank == 0) throw std::runtime_error("degenerate statistic: projector has rank 0");
  Eigen::MatrixXd U =
      qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);

  ChiDirection out;
  out.P = U * U.transpose();
  out.dof = static_cast<double>(rank);
  Eigen::VectorXd pd = out.P * problem.D_obs;
  double nrm = pd.norm();
  if (nrm < 1e-12) throw std::runtime_error("degenerate statistic: P D_obs is zero");
  out.line.a = problem.D_obs - pd;
  out.line.b = problem.sigma * pd / nrm;
  out.line.z_obs = nrm / problem.sigma;
  out.dist = NullDistribution::chi(out.dof);
  return out;
}

SfsOracle::SfsOracle(SfsProblem problem, SfsHistory observed, LineParam line)
    : problem_(std::move(problem)),
      observed_(std::move(observed)),
      line_(std::move(line)) {}

OracleResponse SfsOracle::query(double z) {
  const Eigen::MatrixXd& X = problem_.X;
  const int p = static_cast<int>(X.cols());
  const int K = problem_.K;

  SfsHistory history;
  std::vector<bool> used(p, false);
  IntervalUnion region = IntervalUnion::all();

  for (int k = 0; k < K; ++k) {
    // Residual quadratics for every remaining candidate at this step.
    std::vector<int> cand;
    std::vector<ResidQuad> quads;
    int best = -1;
    double best_val = kInf;
    for (int j = 0; j < p; ++j) {
      if (used[j]) continue;
      ResidQuad q = resid_quad(X, history.order, j, line_.a, line_.b);
      double val = q.at(z);
      if (val < best_val) {
        best_val = val;
        best = static_cast<int>(cand.size());
      }
      cand.push_back(j);
      quads.push_back(q);
    }
    // The winner's residual norm stays below every competitor's.
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (static_cast<int>(i) == best) continue;
      QuadraticCoeffs diff{quads[best].cbb - quads[i].cbb,
                           2.0 * (quads[best].cab - quads[i].cab),
                           quads[best].caa - quads[i].caa};
      region = set_intersect(region, solve_quadratic_le(diff));
    }
    history.order.push_back(cand[best]);
    used[cand[best]] = true;
  }

  OracleResponse resp;
  std::string id;
  for (int j : history.order) {
    if (!id.empty()) id += ',';
    id += std::to_string(j);
  }
  resp.output_id = std::move(id);
  resp.oc_region = std::move(region);
  resp.matches_observed = history.same_set(observed_);
  return resp;
}

}  // namespace adasi
