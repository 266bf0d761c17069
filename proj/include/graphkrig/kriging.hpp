#pragma once

#include <cstddef>
#include <vector>

#include "graphkrig/numerics.hpp"

namespace graphkrig {

/// Y = Z + eps with Z ~ N(mu X, Psi), Psi = delta^{-1} X X' + Sigma and
/// eps ~ N(0, Gamma), Gamma diagonal.
///
/// The diffuse-prior variance delta^{-1} is stored directly so that the
/// improper limit is a large finite number. Predictors never form Psi;
/// the rank-one term is handled by a Sherman-Morrison update, which keeps
/// delta^{-1} = 1e12 accurate to ~1e-11 in double precision.
struct KrigingModel {
  Vector mean_direction;       // X
  double mean_scale = 0.0;     // mu
  Matrix signal_cov;           // Sigma
  double diffuse_var = 0.0;    // delta^{-1}
  Vector noise_var;            // diag(Gamma)

  std::size_t size() const { return std::size_t(signal_cov.rows()); }

  /// Psi = delta^{-1} X X' + Sigma.
  Matrix prior_cov() const;

  /// Shape, symmetry and sign checks. With `check_psd`, also requires the
  /// smallest eigenvalue of Sigma to be >= -1e-9 (relative).
  void validate(bool check_psd = false) const;
};

/// The observed part of Y: node indices (any order, distinct) and values.
struct PartitionedData {
  std::vector<std::size_t> observed;
  Vector values;

  std::size_t count() const { return observed.size(); }
  void validate(std::size_t n) const;

  /// Membership mask of length n.
  std::vector<bool> mask(std::size_t n) const;
};

/// Z_hat = Psi_.0 (Psi_00 + Gamma_00)^{-1} (y0 - mu X0) + mu X.
Vector predict_partial(const KrigingModel& m, const PartitionedData& d);

/// Every node observed with values y.
Vector predict_full(const KrigingModel& m, const Vector& y);

/// var(Z | Y0 = y0) = Psi - Psi_.0 (Psi_00 + Gamma_00)^{-1} Psi_0.
Matrix predict_variance(const KrigingModel& m, const PartitionedData& d);

}  // namespace graphkrig
