#pragma once

#include "adasi/intervals.hpp"

namespace adasi {

enum class DistKind { Gaussian, Chi };

/// Unconditional null law of the test statistic: a centered Gaussian with
/// given standard deviation, or a chi distribution with given degrees of
/// freedom. Supplies the density f and interval-union masses I(B), both with
/// far-tail stable evaluation (relative accuracy holds down to masses near
/// the double underflow limit).
class NullDistribution {
 public:
  static NullDistribution gaussian(double scale);
  static NullDistribution chi(double dof);

  DistKind kind() const { return kind_; }
  double scale() const { return scale_; }
  double dof() const { return dof_; }

  /// Lower end of the support: -inf for Gaussian, 0 for Chi.
  double support_lo() const { return kind_ == DistKind::Gaussian ? -kInf : 0.0; }
  /// Density argmax: 0 for Gaussian, sqrt(dof-1) for Chi.
  double mode() const;
  /// Natural unit for step offsets and search ranges (the Gaussian sd; 1 for Chi).
  double unit() const { return kind_ == DistKind::Gaussian ? scale_ : 1.0; }

  double density(double z) const;
  double log_density(double z) const;
  double cdf(double z) const;
  double sf(double z) const;
  double log_cdf(double z) const;
  double log_sf(double z) const;

  /// I(B) = integral of the density over B, summed part by part with the
  /// tail-stable CDF form on each side of the mode.
  double mass(const IntervalUnion& b) const;
  /// log I(B); -inf for the empty set. Remains finite far past the point
  /// where mass() underflows.
  double log_mass(const IntervalUnion& b) const;

  /// Inverse CDF by bisection; |cdf(result) - q| <= 1e-10.
  double quantile(double q) const;

 private:
  NullDistribution(DistKind kind, double scale, double dof)
      : kind_(kind), scale_(scale), dof_(dof) {}

  double log_mass_part(double lo, double hi) const;

  DistKind kind_;
  double scale_;
  double dof_;
};

/// Mass of a unit-variance Gaussian centered at mu over B.
double shifted_gaussian_mass(double mu, const IntervalUnion& b);
/// Log-space version; finite wherever the translated region has any overlap
/// with representable tail masses.
double log_shifted_gaussian_mass(double mu, const IntervalUnion& b);

namespace detail {
// Standard-normal helpers, exposed for the numeric tests.
double norm_cdf(double x);
double norm_sf(double x);
double log_norm_sf(double x);
// Regularized incomplete gamma functions and their logs.
double gamma_p(double a, double x);
double gamma_q(double a, double x);
double log_gamma_p(double a, double x);
double log_gamma_q(double a, double x);
}  // namespace detail

}  // namespace adasi
