#include "adasi/dnn.hpp"

#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace adasi {

namespace {

// Saliency map as an affine function of the line position, together with the
// activation pattern observed at z and the linear inequalities pinning it.
struct AffineForward {
  Eigen::VectorXd sal_a;
  Eigen::VectorXd sal_b;
  ActivationPattern pattern;
  std::vector<QuadraticCoeffs> constraints;
};

AffineForward forward_affine(const PlNet& net, const Eigen::VectorXd& alpha0,
                             const Eigen::VectorXd& beta0, double z,
                             bool collect) {
  AffineForward out;
  auto relu_stage = [&](const Eigen::MatrixXd& W, const Eigen::VectorXd& bias,
                        Eigen::VectorXd& a, Eigen::VectorXd& b,
                        std::vector<bool>& bits) {
    Eigen::VectorXd pa = W * a + bias;
    Eigen::VectorXd pb = W * b;
    bits.resize(pa.size());
    for (Eigen::Index i = 0; i < pa.size(); ++i) {
      bool on = pa(i) + pb(i) * z > 0.0;
      bits[i] = on;
      if (collect) {
        // on: -(pa + pb r) <= 0; off: pa + pb r <= 0.
        out.constraints.push_back(on ? QuadraticCoeffs{0.0, -pb(i), -pa(i)}
                                     : QuadraticCoeffs{0.0, pb(i), pa(i)});
      }
      if (!on) {
        pa(i) = 0.0;
        pb(i) = 0.0;
      }
    }
    a = std::move(pa);
    b = std::move(pb);
  };

  Eigen::VectorXd a = alpha0, b = beta0;
  relu_stage(net.W1, net.b1, a, b, out.pattern.relu1);
  relu_stage(net.W2, net.b2, a, b, out.pattern.relu2);

  const int half = net.d / 2;
  Eigen::VectorXd pooled_a(net.pooled()), pooled_b(net.pooled());
  out.pattern.pool_arg.resize(net.pooled());
  for (int wr = 0; wr < half; ++wr) {
    for (int wc = 0; wc < half; ++wc) {
      int idx[4];
      for (int c = 0; c < 4; ++c) {
        idx[c] = (2 * wr + c / 2) * net.d + (2 * wc + c % 2);
      }
      int win = 0;
      double win_val = a(idx[0]) + b(idx[0]) * z;
      for (int c = 1; c < 4; ++c) {
        double v = a(idx[c]) + b(idx[c]) * z;
        if (v > win_val) {
          win_val = v;
          win = c;
        }
      }
      if (collect) {
        for (int c = 0; c < 4; ++c) {
          if (c == win) continue;
          out.constraints.push_back(QuadraticCoeffs{
              0.0, b(idx[c]) - b(idx[win]), a(idx[c]) - a(idx[win])});
        }
      }
      int w = wr * half + wc;
      out.pattern.pool_arg[w] = win;
      pooled_a(w) = a(idx[win]);
      pooled_b(w) = b(idx[win]);
    }
  }

  out.sal_a = net.W3 * pooled_a + net.b3;
  out.sal_b = net.W3 * pooled_b;
  return out;
}

}  // namespace

PlNet PlNet::seeded(int d, std::uint64_t seed) {
  if (d < 4 || d % 2 != 0) {
    throw std::invalid_argument("image side must be even and at least 4");
  }
  PlNet net;
  net.d = d;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto fill = [&](Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols) {
    m.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    }
  };
  auto fill_vec = [&](Eigen::VectorXd& v, Eigen::Index len) {
    v.resize(len);
    for (Eigen::Index i = 0; i < len; ++i) v(i) = gauss(rng);
  };
  const int n = net.n();
  fill(net.W1, n, n);
  fill_vec(net.b1, n);
  fill(net.W2, n, n);
  fill_vec(net.b2, n);
  fill(net.W3, n, net.pooled());
  fill_vec(net.b3, n);
  return net;
}

ForwardResult forward_with_pattern(const PlNet& net, const Eigen::VectorXd& x) {
  if (x.size() != net.n()) throw std::invalid_argument("image size mismatch");
  AffineForward f = forward_affine(net, x, Eigen::VectorXd::Zero(x.size()),
                                   0.0, /*collect=*/false);
  return {std::move(f.sal_a), std::move(f.pattern)};
}

SalientSplit split_regions(const Eigen::VectorXd& saliency, double tau) {
  SalientSplit split;
  split.tau = tau;
  for (Eigen::Index i = 0; i < saliency.size(); ++i) {
    (saliency(i) > tau ? split.O : split.B).push_back(static_cast<int>(i));
  }
  if (split.O.empty() || split.B.empty()) {
    throw std::runtime_error("degenerate split: salient or background set is empty");
  }
  return split;
}

Eigen::VectorXd dnn_eta(const SalientSplit& split) {
  const Eigen::Index n =
      static_cast<Eigen::Index>(split.O.size() + split.B.size());
  Eigen::VectorXd eta(n);
  for (int i : split.O) eta(i) = 1.0 / static_cast<double>(split.O.size());
  for (int i : split.B) eta(i) = -1.0 / static_cast<double>(split.B.size());
  return eta;
}

DnnOracle::DnnOracle(PlNet net, double tau, LineParam line,
                     SalientSplit observed)
    : net_(std::move(net)),
      tau_(tau),
      line_(std::move(line)),
      observed_(std::move(observed)) {}

OracleResponse DnnOracle::query(double z) {
  AffineForward f = forward_affine(net_, line_.a, line_.b, z, /*collect=*/true);

  SalientSplit split;
  split.tau = tau_;
  std::string id;
  id.reserve(f.pattern.relu1.size() + f.pattern.relu2.size() +
             f.pattern.pool_arg.size() + f.sal_a.size() + 3);
  for (bool bit : f.pattern.relu1) id += bit ? '1' : '0';
  id += '|';
  for (bool bit : f.pattern.relu2) id += bit ? '1' : '0';
  id += '|';
  for (int arg : f.pattern.pool_arg) id += static_cast<char>('0' + arg);
  id += '|';
  for (Eigen::Index i = 0; i < f.sal_a.size(); ++i) {
    bool salient = f.sal_a(i) + f.sal_b(i) * z > tau_;
    (salient ? split.O : split.B).push_back(static_cast<int>(i));
    id += salient ? '1' : '0';
    // salient: tau - s(r) <= 0; background: s(r) - tau <= 0.
    f.constraints.push_back(salient
                                ? QuadraticCoeffs{0.0, -f.sal_b(i),
                                                  tau_ - f.sal_a(i)}
                                : QuadraticCoeffs{0.0, f.sal_b(i),
                                                  f.sal_a(i) - tau_});
  }

  IntervalUnion region = IntervalUnion::all();
  for (const QuadraticCoeffs& q : f.constraints) {
    region = set_intersect(region, solve_quadratic_le(q));
  }

  OracleResponse resp;
  resp.output_id = std::move(id);
  resp.oc_region = std::move(region);
  resp.matches_observed = split.same_as(observed_);
  return resp;
}

}  // namespace adasi
