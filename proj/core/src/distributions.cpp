#include "adasi/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace adasi {
namespace detail {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
constexpr double kSqrt2 = 1.4142135623730950488016887242097;

// Gauss-Legendre nodes/weights on [-1, 1], computed once by Newton iteration
// on the Legendre recurrence.
struct GaussLegendre {
  static constexpr int n = 20;
  double node[n];
  double weight[n];
  GaussLegendre() {
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      node[i] = -x;
      node[n - 1 - i] = x;
      weight[i] = weight[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

const GaussLegendre& gl() {
  static const GaussLegendre g;
  return g;
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }
double norm_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double log_norm_sf(double x) {
  if (x == kInf) return -kInf;
  if (x == -kInf) return 0.0;
  if (x <= 36.0) {
    double v = norm_sf(x);
    if (x <= 0.0) return std::log(v);  // v in [0.5, 1], no cancellation
    return std::log(v);
  }
  // Asymptotic expansion of the Mills ratio past the erfc underflow zone.
  const double x2 = x * x;
  double series =
      1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) +
      105.0 / (x2 * x2 * x2 * x2) - 945.0 / (x2 * x2 * x2 * x2 * x2);
  return -0.5 * x2 - std::log(x) - kLogSqrt2Pi + std::log(series);
}

namespace {

// Series expansion of the regularized lower incomplete gamma, valid for
// x < a + 1. Returns log P(a, x).
double log_gamma_p_series(double a, double x) {
  if (x <= 0.0) return -kInf;
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return std::log(sum) + a * std::log(x) - x - std::lgamma(a);
}

// Lentz continued fraction for the upper tail, valid for x >= a + 1.
// Returns log Q(a, x).
double log_gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::log(h) + a * std::log(x) - x - std::lgamma(a);
}

}  // namespace

double log_gamma_p(double a, double x) {
  if (x <= 0.0) return -kInf;
  if (x < a + 1.0) return log_gamma_p_series(a, x);
  double lq = log_gamma_q_cf(a, x);
  return std::log1p(-std::exp(lq));
}

double log_gamma_q(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= a + 1.0) return log_gamma_q_cf(a, x);
  double lp = log_gamma_p_series(a, x);
  return std::log1p(-std::exp(lp));
}

double gamma_p(double a, double x) { return std::exp(log_gamma_p(a, x)); }
double gamma_q(double a, double x) { return std::exp(log_gamma_q(a, x)); }

}  // namespace detail

using detail::gl;
using detail::kLogSqrt2Pi;

NullDistribution NullDistribution::gaussian(double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("Gaussian scale must be positive");
  return NullDistribution(DistKind::Gaussian, scale, 0.0);
}

NullDistribution NullDistribution::chi(double dof) {
  if (!(dof >= 1.0)) throw std::invalid_argument("Chi dof must be >= 1");
  return NullDistribution(DistKind::Chi, 1.0, dof);
}

double NullDistribution::mode() const {
  if (kind_ == DistKind::Gaussian) return 0.0;
  return dof_ > 1.0 ? std::sqrt(dof_ - 1.0) : 0.0;
}

double NullDistribution::log_density(double z) const {
  if (kind_ == DistKind::Gaussian) {
    double u = z / scale_;
    return -0.5 * u * u - kLogSqrt2Pi - std::log(scale_);
  }
  if (z < 0.0) return -kInf;
  if (z == 0.0) {
    if (dof_ == 1.0) return 0.5 * std::log(2.0 / M_PI);
    return -kInf;
  }
  double a = 0.5 * dof_;
  return (dof_ - 1.0) * std::log(z) - 0.5 * z * z - (a - 1.0) * std::log(2.0) -
         std::lgamma(a);
}

double NullDistribution::density(double z) const {
  double l = log_density(z);
  return l == -kInf ? 0.0 : std::exp(l);
}

double NullDistribution::cdf(double z) const {
  if (kind_ == DistKind::Gaussian) return detail::norm_cdf(z / scale_);
  if (z <= 0.0) return 0.0;
  if (z == kInf) return 1.0;
  return detail::gamma_p(0.5 * dof_, 0.5 * z * z);
}

double NullDistribution::sf(double z) const {
  if (kind_ == DistKind::Gaussian) return detail::norm_sf(z / scale_);
  if (z <= 0.0) return 1.0;
  if (z == kInf) return 0.0;
  return detail::gamma_q(0.5 * dof_, 0.5 * z * z);
}

double NullDistribution::log_cdf(double z) const {
  if (kind_ == DistKind::Gaussian) return detail::log_norm_sf(-z / scale_);
  if (z <= 0.0) return -kInf;
  if (z == kInf) return 0.0;
  return detail::log_gamma_p(0.5 * dof_, 0.5 * z * z);
}

double NullDistribution::log_sf(double z) const {
  if (kind_ == DistKind::Gaussian) return detail::log_norm_sf(z / scale_);
  if (z <= 0.0) return 0.0;
  if (z == kInf) return -kInf;
  return detail::log_gamma_q(0.5 * dof_, 0.5 * z * z);
}

namespace {

// Derivative of the log density, used to size quadrature panels.
double log_density_slope(const NullDistribution& d, double z) {
  if (d.kind() == DistKind::Gaussian) return -z / (d.scale() * d.scale());
  double zz = std::max(z, 1e-12);
  return (d.dof() - 1.0) / zz - zz;
}

// Log-space integral of the density over a finite [lo, hi] by composite
// Gauss-Legendre with the peak log density factored out. Used where CDF
// differences cancel.
double log_quad_mass(const NullDistribution& d, double lo, double hi) {
  if (d.kind() == DistKind::Chi) lo = std::max(lo, 0.0);
  if (!(hi > lo)) return -kInf;
  double peak = std::clamp(d.mode(), lo, hi);
  double big = d.log_density(peak);
  if (big == -kInf) return -kInf;
  double w = hi - lo;
  double rate = std::max(std::abs(log_density_slope(d, lo)),
                         std::abs(log_density_slope(d, hi)));
  int panels = 1 + static_cast<int>(std::min(4000.0, w * rate / 8.0 + w / d.unit()));
  double total = 0.0;
  const auto& g = gl();
  for (int p = 0; p < panels; ++p) {
    double a = lo + w * p / panels;
    double b = lo + w * (p + 1) / panels;
    double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int i = 0; i < g.n; ++i) {
      double x = mid + half * g.node[i];
      double l = d.log_density(x);
      if (l != -kInf) total += g.weight[i] * half * std::exp(l - big);
    }
  }
  return total > 0.0 ? big + std::log(total) : -kInf;
}

}  // namespace

double NullDistribution::log_mass_part(double lo, double hi) const {
  if (kind_ == DistKind::Chi) {
    if (hi <= 0.0) return -kInf;
    lo = std::max(lo, 0.0);
  }
  if (lo >= hi) return -kInf;
  // Choose the side whose CDF-like values are small, so the difference of
  // logs is well conditioned; fall back to quadrature when it is not.
  double la, lb;
  bool right_tail = cdf(lo) > 0.5;
  if (right_tail) {
    la = log_sf(lo);
    lb = log_sf(hi);
  } else if (cdf(hi) < 0.5) {
    la = log_cdf(hi);
    lb = log_cdf(lo);
  } else {
    // Straddles the median: plain difference is safe.
    double m = cdf(hi) - cdf(lo);
    return m > 0.0 ? std::log(m) : -kInf;
  }
  if (la == -kInf) return -kInf;
  double ratio = std::exp(lb - la);
  if (ratio > 1.0 - 1e-6) {
    return log_quad_mass(*this, lo, hi);
  }
  return la + std::log1p(-ratio);
}

double NullDistribution::log_mass(const IntervalUnion& b) const {
  if (b.is_empty()) return -kInf;
  std::vector<double> logs;
  logs.reserve(b.size());
  double biggest = -kInf;
  for (const auto& p : b.parts()) {
    double l = log_mass_part(p.lo, p.hi);
    if (l == -kInf) continue;
    logs.push_back(l);
    biggest = std::max(biggest, l);
  }
  if (logs.empty()) return -kInf;
  double s = 0.0;
  for (double l : logs) s += std::exp(l - biggest);
  return biggest + std::log(s);
}

double NullDistribution::mass(const IntervalUnion& b) const {
  double total = 0.0;
  for (const auto& p : b.parts()) {
    double l = log_mass_part(p.lo, p.hi);
    if (l != -kInf) total += std::exp(l);
  }
  return std::min(total, 1.0);
}

double NullDistribution::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("quantile level must be in (0, 1)");
  }
  double lo, hi;
  if (kind_ == DistKind::Gaussian) {
    lo = -scale_;
    hi = scale_;
    while (cdf(lo) > q) lo *= 2.0;
    while (cdf(hi) < q) hi *= 2.0;
  } else {
    lo = 0.0;
    hi = std::sqrt(dof_) + 1.0;
    while (cdf(hi) < q) hi *= 2.0;
  }
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (cdf(mid) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double shifted_gaussian_mass(double mu, const IntervalUnion& b) {
  static const NullDistribution std_normal = NullDistribution::gaussian(1.0);
  return std_normal.mass(b.shifted(-mu));
}

double log_shifted_gaussian_mass(double mu, const IntervalUnion& b) {
  static const NullDistribution std_normal = NullDistribution::gaussian(1.0);
  return std_normal.log_mass(b.shifted(-mu));
}

}  // namespace adasi
