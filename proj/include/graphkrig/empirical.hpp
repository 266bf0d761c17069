#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "graphkrig/graph.hpp"
#include "graphkrig/kriging.hpp"
#include "graphkrig/spline.hpp"

namespace graphkrig {

enum class SimilaritySource {
  RandomWalkStyle,  // s_ij = pi_i P_ij + pi_j P_ji, v = X = sqrt(pi)
  TikhonovStyle,    // s_ij = w_ij + w_ji (w_ij if undirected), v = X = 1
};

enum class CorrelationBackend { Auto, Spline, GroupAverage };

/// Model Z ~ N(mu X, sigma2 V R V) with noise variance lambda_inv and
/// R_ij = rho(s_ij) estimated from the observed responses.
struct EmpiricalConfig {
  double sigma2 = 1.0;
  double lambda_inv = 0.1;
  Vector v;
  Vector mean_direction;
  SimilaritySource similarity_source = SimilaritySource::RandomWalkStyle;
  CorrelationBackend backend = CorrelationBackend::Auto;
  int knots = 10;
  std::optional<Index> rank;
  std::size_t max_pairs = 1'000'000;
  std::uint64_t seed = 0;  // pair downsampling only

  void validate(std::size_t n) const;
};

/// Similarity matrix plus the v and X that go with it.
struct EmpiricalPreset {
  SimilaritySource source = SimilaritySource::RandomWalkStyle;
  Matrix similarity;
  Vector v;
  Vector mean_direction;
};

EmpiricalPreset empirical_preset(const WeightedDigraph& g, SimilaritySource source,
                                 double teleport = 0.0);
EmpiricalConfig make_config(const EmpiricalPreset& preset, double sigma2, double lambda_inv);

struct CorrelationPair {
  double similarity;
  double correlation;
};

/// mu_hat = mean(y_i / X_i) for continuous responses, 0 for binary ones.
double estimate_mean(const PartitionedData& d, const Vector& mean_direction, bool binary);

/// Naive correlation R_hat_ij for every observed pair i < j, solved from the
/// variogram: R_hat = (sigma2 (v_i^2 + v_j^2)/2 + lambda_inv - Phi_hat) / (sigma2 v_i v_j).
std::vector<CorrelationPair> naive_correlations(const PartitionedData& d,
                                                const EmpiricalConfig& config, double mu,
                                                const Matrix& similarity);

/// rho_hat as a function of similarity.
class CorrelationFit {
 public:
  double operator()(double similarity) const;

  /// Spline or GroupAverage; never Auto.
  CorrelationBackend backend() const { return backend_; }
  /// True when a Spline request fell back to GroupAverage.
  bool fell_back() const { return fell_back_; }
  const std::vector<CorrelationPair>& training_pairs() const { return pairs_; }
  const CubicRegressionSpline* spline() const { return spline_ ? &*spline_ : nullptr; }

  /// Similarity transform applied before spline smoothing.
  static double transform(double s);

 private:
  friend CorrelationFit fit_correlation(std::vector<CorrelationPair>, CorrelationBackend, int,
                                        std::size_t, std::uint64_t);

  std::vector<CorrelationPair> pairs_;
  CorrelationBackend backend_ = CorrelationBackend::GroupAverage;
  bool fell_back_ = false;
  std::optional<CubicRegressionSpline> spline_;
  std::vector<double> group_similarity_;
  std::vector<double> group_mean_;
};

/// Auto picks GroupAverage at <= 20 distinct similarities, Spline otherwise.
/// Spline needs >= 12 distinct transformed values and otherwise falls back.
/// More than max_pairs pairs are subsampled uniformly with `seed`.
CorrelationFit fit_correlation(std::vector<CorrelationPair> pairs,
                               CorrelationBackend backend = CorrelationBackend::Auto,
                               int knots = 10, std::size_t max_pairs = 1'000'000,
                               std::uint64_t seed = 0);

/// sigma2 V R~ V with R~_ij = rho_hat(s_ij), R~_ii = 1, projected to PSD
/// (rank-limited when config.rank is set).
Matrix build_covariance(const CorrelationFit& fit, const EmpiricalConfig& config,
                        const Matrix& similarity);

/// Kriging prediction with Sigma = psi_hat, Gamma = lambda_inv I, no diffuse term.
Vector predict_empirical(const PartitionedData& d, const EmpiricalConfig& config, double mu,
                         const Matrix& psi_hat);

struct EmpiricalFit {
  double mean = 0.0;
  CorrelationFit correlation;
  Matrix covariance;
  Vector prediction;
};

/// mean -> naive correlations -> rho_hat -> PSD covariance -> prediction.
EmpiricalFit run_empirical(const PartitionedData& d, const EmpiricalConfig& config,
                           const Matrix& similarity, bool binary);

struct CvGridPoint {
  double sigma2;
  double lambda_inv;
};

struct CvReport {
  std::vector<CvGridPoint> grid;
  std::vector<double> scores;  // mean fold score per grid point; lower is better
  std::size_t best = 0;

  CvGridPoint best_point() const { return grid.at(best); }
};

/// sigma2 in {0.1, 0.5, 1, 2, 5, 10} * var(y0 / v0),
/// lambda_inv in {1e-3, 1e-2, 1e-1, 1} * var(y0).
std::vector<CvGridPoint> default_cv_grid(const PartitionedData& d, const Vector& v);

/// Positions into d.observed for each fold; stratified by sign when binary.
std::vector<std::vector<std::size_t>> make_folds(const PartitionedData& d, std::size_t folds,
                                                 std::uint64_t seed, bool binary);

/// K-fold cross-validation of (sigma2, lambda_inv). Each fold refits the whole
/// pipeline on the held-in folds and scores the held-out fold by MSE, or by
/// 1 - AUC when binary. Ties go to the smaller sigma2, then smaller lambda_inv.
CvReport cross_validate(const PartitionedData& d, const EmpiricalConfig& base,
                        const Matrix& similarity, std::span<const CvGridPoint> grid,
                        std::size_t folds, std::uint64_t seed, bool binary,
                        unsigned threads = 1);

}  // namespace graphkrig
