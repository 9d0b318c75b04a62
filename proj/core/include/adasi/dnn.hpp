#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "adasi/inference.hpp"
#include "adasi/line.hpp"

namespace adasi {

/// Fixed-weight piecewise-linear scorer on d x d images: two affine+ReLU
/// stages, a 2x2 stride-2 max-pool, and an affine per-pixel score head.
/// Weights are drawn once from a seeded standard normal and frozen.
struct PlNet {
  int d = 0;           // image side, n = d * d
  Eigen::MatrixXd W1;  // n x n
  Eigen::VectorXd b1;
  Eigen::MatrixXd W2;  // n x n
  Eigen::VectorXd b2;
  Eigen::MatrixXd W3;  // n x (d/2)^2, maps pooled units to per-pixel scores
  Eigen::VectorXd b3;

  int n() const { return d * d; }
  int pooled() const { return (d / 2) * (d / 2); }

  static PlNet seeded(int d, std::uint64_t seed);
};

/// ReLU signs of both hidden stages plus the argmax (0..3, row-major within
/// the 2x2 window) of every pool window.
struct ActivationPattern {
  std::vector<bool> relu1;
  std::vector<bool> relu2;
  std::vector<int> pool_arg;

  bool operator==(const ActivationPattern&) const = default;
};

struct SalientSplit {
  std::vector<int> O;  // saliency > tau
  std::vector<int> B;  // saliency <= tau
  double tau = 0.0;

  bool same_as(const SalientSplit& other) const { return O == other.O; }
};

struct ForwardResult {
  Eigen::VectorXd saliency;
  ActivationPattern pattern;
};

ForwardResult forward_with_pattern(const PlNet& net, const Eigen::VectorXd& x);

/// Thresholds the saliency map; throws a degenerate-split error when either
/// side is empty (the two-sample-style test is undefined).
SalientSplit split_regions(const Eigen::VectorXd& saliency, double tau);

/// Mean-difference direction: +1/|O| on salient pixels, -1/|B| elsewhere.
Eigen::VectorXd dnn_eta(const SalientSplit& split);

/// Selection oracle along a line: each query replays the forward pass at
/// a + b z and pins its activation pattern and salient split with affine
/// inequalities in z, yielding a single-interval OC region.
class DnnOracle : public SelectionOracle {
 public:
  DnnOracle(PlNet net, double tau, LineParam line, SalientSplit observed);

  OracleResponse query(double z) override;

 private:
  PlNet net_;
  double tau_;
  LineParam line_;
  SalientSplit observed_;
};

}  // namespace adasi
