#pragma once

#include <Eigen/Dense>

#include "adasi/distributions.hpp"

namespace adasi {

/// One-dimensional slice of the data space: D(z) = a + b z.
struct LineParam {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  double z_obs = 0.0;

  Eigen::VectorXd at(double z) const { return a + b * z; }
};

struct ZDirection {
  Eigen::VectorXd eta;
  LineParam line;
  NullDistribution dist = NullDistribution::gaussian(1.0);
};

/// Line through x along a test direction eta under the N(0, sigma^2 I) model:
/// z = eta^T D, slope b = eta / ||eta||^2, null scale sigma ||eta||.
inline ZDirection eta_line(const Eigen::VectorXd& eta, const Eigen::VectorXd& x,
                           double sigma) {
  ZDirection out;
  out.eta = eta;
  out.line.b = eta / eta.squaredNorm();
  out.line.z_obs = eta.dot(x);
  out.line.a = x - out.line.b * out.line.z_obs;
  out.dist = NullDistribution::gaussian(sigma * eta.norm());
  return out;
}

}  // namespace adasi
