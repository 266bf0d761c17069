#include "graphkrig/spline.hpp"

#include <Eigen/QR>
#include <array>
#include <algorithm>
#include <cmath>

#include "graphkrig/error.hpp"

namespace graphkrig {

namespace {

constexpr int kDegree = 3;

// Index mu with t[mu] <= x < t[mu+1]; x at the right end uses the last span.
std::size_t find_span(const std::vector<double>& t, std::size_t basis_count, double x) {
  if (x >= t[basis_count]) return basis_count - 1;
  auto it = std::upper_bound(t.begin() + kDegree, t.begin() + std::ptrdiff_t(basis_count) + 1, x);
  return std::size_t(it - t.begin()) - 1;
}

// Nonzero cubic B-spline values N_{span-3..span}(x).
std::array<double, kDegree + 1> basis_funs(const std::vector<double>& t, std::size_t span, double x) {
  std::array<double, kDegree + 1> n{};
  std::array<double, kDegree + 1> left{}, right{};
  n[0] = 1.0;
  for (int j = 1; j <= kDegree; ++j) {
    left[j] = x - t[span + 1 - std::size_t(j)];
    right[j] = t[span + std::size_t(j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  return n;
}

}  // namespace

double sorted_quantile(std::span<const double> sorted, double p) {
  require(!sorted.empty(), "quantile of empty data");
  const double h = double(sorted.size() - 1) * p;
  const auto lo = std::size_t(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - double(lo)) * (sorted[lo + 1] - sorted[lo]);
}

CubicRegressionSpline CubicRegressionSpline::fit(std::span<const double> x,
                                                 std::span<const double> y, int knot_count) {
  require(x.size() == y.size(), "spline: x and y differ in length");
  require(!x.empty(), "spline: no data");
  require(knot_count >= 2, "spline: at least two knots are required");

  CubicRegressionSpline s;
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  for (int k = 0; k < knot_count; ++k) {
    s.knots_.push_back(sorted_quantile(sorted, double(k) / double(knot_count - 1)));
  }
  s.knots_.erase(std::unique(s.knots_.begin(), s.knots_.end()), s.knots_.end());

  if (s.knots_.size() < 2) {
    double sum = 0.0;
    for (double v : y) sum += v;
    s.constant_ = sum / double(y.size());
    return s;
  }

  for (int r = 0; r < kDegree; ++r) s.knot_vector_.push_back(s.knots_.front());
  s.knot_vector_.insert(s.knot_vector_.end(), s.knots_.begin(), s.knots_.end());
  for (int r = 0; r < kDegree; ++r) s.knot_vector_.push_back(s.knots_.back());
  const std::size_t p = s.knots_.size() + kDegree - 1;

  Matrix gram = Matrix::Zero(Index(p), Index(p));
  Vector rhs = Vector::Zero(Index(p));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t span = find_span(s.knot_vector_, p, x[i]);
    const auto b = basis_funs(s.knot_vector_, span, x[i]);
    const std::size_t first = span - kDegree;
    for (int a = 0; a <= kDegree; ++a) {
      rhs(Index(first + a)) += b[a] * y[i];
      for (int c = 0; c <= kDegree; ++c) gram(Index(first + a), Index(first + c)) += b[a] * b[c];
    }
  }
  // Minimum-norm solution tolerates spans without data.
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(gram);
  s.coef_ = cod.solve(rhs);
  return s;
}

double CubicRegressionSpline::operator()(double x) const {
  if (coef_.size() == 0) return constant_;
  x = std::clamp(x, knots_.front(), knots_.back());
  const std::size_t p = std::size_t(coef_.size());
  const std::size_t span = find_span(knot_vector_, p, x);
  const auto b = basis_funs(knot_vector_, span, x);
  double out = 0.0;
  for (int a = 0; a <= kDegree; ++a) out += b[a] * coef_(Index(span - kDegree + a));
  return out;
}

}  // namespace graphkrig
