#pragma once

#include <span>
#include <vector>

#include "graphkrig/numerics.hpp"

namespace graphkrig {

/// Least-squares cubic regression spline (clamped B-spline basis) with knots
/// at equal-probability quantiles of x. Evaluation outside the boundary
/// knots clamps to the boundary value.
class CubicRegressionSpline {
 public:
  static CubicRegressionSpline fit(std::span<const double> x, std::span<const double> y,
                                   int knot_count = 10);

  double operator()(double x) const;

  /// Distinct knots, including both boundary knots.
  const std::vector<double>& knots() const { return knots_; }
  std::size_t basis_size() const { return std::size_t(coef_.size()); }

 private:
  std::vector<double> knots_;
  std::vector<double> knot_vector_;
  Vector coef_;
  double constant_ = 0.0;
};

/// Type-7 (linear interpolation) sample quantile of sorted data.
double sorted_quantile(std::span<const double> sorted, double p);

}  // namespace graphkrig
