#include "graphkrig/kriging.hpp"

#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>

#include "graphkrig/error.hpp"

namespace graphkrig {

namespace {

Matrix rows_of(const Matrix& a, const std::vector<std::size_t>& idx) {
  Matrix out(Index(idx.size()), a.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(Index(k)) = a.row(Index(idx[k]));
  return out;
}

Matrix cols_of(const Matrix& a, const std::vector<std::size_t>& idx) {
  Matrix out(a.rows(), Index(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(Index(k)) = a.col(Index(idx[k]));
  return out;
}

Vector entries_of(const Vector& v, const std::vector<std::size_t>& idx) {
  Vector out(Index(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(Index(k)) = v(Index(idx[k]));
  return out;
}

// Solves (B + c X0 X0') x = rhs where B = Sigma_00 + Gamma_00 and c = delta^{-1}.
//
// When B is positive definite the rank-one term is folded in analytically:
//   x = a - b * (X0'a) / (1/c + X0'b),  a = B^{-1} rhs, b = B^{-1} X0.
// Otherwise the full matrix is factored directly.
class ObservedSystem {
 public:
  ObservedSystem(const KrigingModel& m, const std::vector<std::size_t>& obs)
      : x0_(entries_of(m.mean_direction, obs)), c_(m.diffuse_var) {
    Matrix b = cols_of(rows_of(m.signal_cov, obs), obs);
    for (std::size_t k = 0; k < obs.size(); ++k) b(Index(k), Index(k)) += m.noise_var(Index(obs[k]));
    use_rank_one_ = c_ > 0.0 && x0_.squaredNorm() > 0.0;
    try {
      factor_ = std::make_unique<SpdFactor>(b);
      if (use_rank_one_) {
        binv_x0_ = factor_->solve(x0_);
        x0_binv_x0_ = x0_.dot(binv_x0_);
      }
      direct_ = false;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Numeric || !use_rank_one_) rethrow(e);
      // Sigma_00 + Gamma_00 singular; the diffuse term may still make it definite.
      try {
        factor_ = std::make_unique<SpdFactor>(Matrix(b + c_ * x0_ * x0_.transpose()));
      } catch (const Error& inner) {
        rethrow(inner);
      }
      direct_ = true;
    }
  }

  /// Returns x and the scalar coefficient c X0'x (the weight on X in Psi x).
  std::pair<Matrix, Vector> solve(const Matrix& rhs) const {
    Matrix x = factor_->solve(rhs);
    Vector along(rhs.cols());
    if (!use_rank_one_) {
      along.setZero();
      return {x, along};
    }
    if (direct_) {
      along = c_ * (x0_.transpose() * x).transpose();
      return {x, along};
    }
    for (Index j = 0; j < rhs.cols(); ++j) {
      const double coef = x0_.dot(x.col(j)) / (1.0 / c_ + x0_binv_x0_);
      x.col(j) -= binv_x0_ * coef;
      along(j) = coef;
    }
    return {x, along};
  }

  const Vector& x0() const { return x0_; }
  bool rank_one_factored() const { return use_rank_one_ && !direct_; }
  const SpdFactor& factor() const { return *factor_; }
  const Vector& binv_x0() const { return binv_x0_; }
  double x0_binv_x0() const { return x0_binv_x0_; }

 private:
  [[noreturn]] static void rethrow(const Error& e) {
    if (e.code() == ErrorCode::Numeric) {
      fail(ErrorCode::Numeric,
           std::string("kriging: Psi_00 + Gamma_00 is singular or ill-conditioned: ") + e.what());
    }
    throw e;
  }

  Vector x0_;
  double c_;
  bool use_rank_one_ = false;
  bool direct_ = false;
  std::unique_ptr<SpdFactor> factor_;
  Vector binv_x0_;
  double x0_binv_x0_ = 0.0;
};

}  // namespace

Matrix KrigingModel::prior_cov() const {
  return diffuse_var * mean_direction * mean_direction.transpose() + signal_cov;
}

void KrigingModel::validate(bool check_psd) const {
  const Index n = signal_cov.rows();
  require(n > 0 && signal_cov.cols() == n, "KrigingModel: Sigma must be square and nonempty");
  require(mean_direction.size() == n, "KrigingModel: X has the wrong length");
  require(noise_var.size() == n, "KrigingModel: Gamma has the wrong length");
  require(signal_cov.allFinite() && mean_direction.allFinite() && noise_var.allFinite() &&
              std::isfinite(mean_scale) && std::isfinite(diffuse_var),
          "KrigingModel: non-finite parameters");
  require(diffuse_var >= 0.0, "KrigingModel: delta^{-1} must be nonnegative");
  require(noise_var.minCoeff() >= 0.0, "KrigingModel: Gamma entries must be nonnegative");
  const double scale = std::max(1.0, max_abs(signal_cov));
  require(max_abs(signal_cov - signal_cov.transpose()) <= 1e-10 * scale,
          "KrigingModel: Sigma must be symmetric");
  if (check_psd) {
    const SymEig eig = sym_eig(signal_cov);
    if (eig.values(n - 1) < -1e-9 * scale) {
      std::ostringstream msg;
      msg << "KrigingModel: Sigma is not PSD (smallest eigenvalue " << eig.values(n - 1) << ")";
      fail(ErrorCode::InvalidArgument, msg.str());
    }
  }
}

void PartitionedData::validate(std::size_t n) const {
  require(!observed.empty(), "PartitionedData: at least one observed node is required");
  require(observed.size() <= n, "PartitionedData: more observations than nodes");
  require(values.size() == Index(observed.size()),
          "PartitionedData: value count does not match index count");
  std::vector<bool> seen(n, false);
  for (auto i : observed) {
    require(i < n, "PartitionedData: observed index out of range");
    require(!seen[i], "PartitionedData: duplicate observed index");
    seen[i] = true;
  }
  require(values.allFinite(), "PartitionedData: non-finite observed value");
}

std::vector<bool> PartitionedData::mask(std::size_t n) const {
  std::vector<bool> out(n, false);
  for (auto i : observed) out[i] = true;
  return out;
}

Vector predict_partial(const KrigingModel& m, const PartitionedData& d) {
  m.validate();
  d.validate(m.size());
  ObservedSystem sys(m, d.observed);
  const Vector resid = d.values - m.mean_scale * sys.x0();
  auto [x, along] = sys.solve(Matrix(resid));
  // Psi_.0 x = X * (c X0'x) + Sigma_.0 x
  Vector out = m.mean_scale * m.mean_direction + along(0) * m.mean_direction +
               cols_of(m.signal_cov, d.observed) * x.col(0);
  return out;
}

Vector predict_full(const KrigingModel& m, const Vector& y) {
  require(y.size() == Index(m.size()), "predict_full: y has the wrong length");
  PartitionedData d;
  d.observed.resize(m.size());
  std::iota(d.observed.begin(), d.observed.end(), std::size_t{0});
  d.values = y;
  return predict_partial(m, d);
}

Matrix predict_variance(const KrigingModel& m, const PartitionedData& d) {
  m.validate();
  d.validate(m.size());
  ObservedSystem sys(m, d.observed);
  const Matrix sigma_dot0 = cols_of(m.signal_cov, d.observed);
  Matrix out;
  if (sys.rank_one_factored()) {
    // Sigma - Sigma_.0 B^{-1} Sigma_0. + h h' / (delta + X0'B^{-1}X0),
    // h = X - Sigma_.0 B^{-1} X0, B = Sigma_00 + Gamma_00.
    const Matrix binv_s0 = sys.factor().solve(Matrix(sigma_dot0.transpose()));
    const Vector h = m.mean_direction - sigma_dot0 * sys.binv_x0();
    out = m.signal_cov - sigma_dot0 * binv_s0 +
          h * h.transpose() / (1.0 / m.diffuse_var + sys.x0_binv_x0());
  } else {
    const Matrix psi_dot0 = cols_of(m.prior_cov(), d.observed);
    out = m.prior_cov() - psi_dot0 * sys.factor().solve(Matrix(psi_dot0.transpose()));
  }
  return symmetrized(out);
}

}  // namespace graphkrig
