#include "graphkrig/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "graphkrig/error.hpp"
#include "graphkrig/metrics.hpp"
#include "graphkrig/parallel.hpp"
#include "graphkrig/random.hpp"

namespace graphkrig {

namespace {

constexpr std::size_t kAutoGroupLimit = 20;
constexpr std::size_t kSplineMinDistinct = 12;

bool all_positive_finite(const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (!(v(i) > 0.0) || !std::isfinite(v(i))) return false;
  }
  return true;
}

double population_variance(const Vector& x) {
  if (x.size() == 0) return 0.0;
  const double mean = x.mean();
  return (x.array() - mean).square().mean();
}

PartitionedData subset(const PartitionedData& d, const std::vector<std::size_t>& positions) {
  PartitionedData out;
  out.observed.reserve(positions.size());
  out.values.resize(Index(positions.size()));
  for (std::size_t k = 0; k < positions.size(); ++k) {
    out.observed.push_back(d.observed[positions[k]]);
    out.values(Index(k)) = d.values(Index(positions[k]));
  }
  return out;
}

}  // namespace

void EmpiricalConfig::validate(std::size_t n) const {
  require(sigma2 > 0.0 && std::isfinite(sigma2), "empirical: sigma2 must be positive");
  require(lambda_inv > 0.0 && std::isfinite(lambda_inv),
          "empirical: lambda_inv must be positive");
  require(std::size_t(v.size()) == n, "empirical: v must have one entry per node");
  require(all_positive_finite(v), "empirical: v must be positive");
  require(std::size_t(mean_direction.size()) == n,
          "empirical: mean direction must have one entry per node");
  require(mean_direction.allFinite(), "empirical: mean direction must be finite");
  require(knots >= 2, "empirical: knots must be at least 2");
  require(max_pairs >= 1, "empirical: max_pairs must be positive");
  if (rank) require(*rank >= 0 && std::size_t(*rank) <= n, "empirical: rank outside [0, n]");
}

EmpiricalPreset empirical_preset(const WeightedDigraph& g, SimilaritySource source,
                                 double teleport) {
  EmpiricalPreset p;
  p.source = source;
  if (source == SimilaritySource::RandomWalkStyle) {
    WalkQuantities wq = walk_quantities(g, teleport);
    p.similarity = similarity_matrix(wq).similarity;
    p.v = wq.stationary.cwiseSqrt();
  } else {
    p.similarity = g.is_symmetric() ? g.weights() : Matrix(g.weights() + g.weights().transpose());
    p.v = Vector::Ones(Index(g.size()));
  }
  p.mean_direction = p.v;
  return p;
}

EmpiricalConfig make_config(const EmpiricalPreset& preset, double sigma2, double lambda_inv) {
  EmpiricalConfig c;
  c.sigma2 = sigma2;
  c.lambda_inv = lambda_inv;
  c.v = preset.v;
  c.mean_direction = preset.mean_direction;
  c.similarity_source = preset.source;
  return c;
}

double estimate_mean(const PartitionedData& d, const Vector& mean_direction, bool binary) {
  require(d.count() >= 1, "estimate_mean: no observed nodes");
  if (binary) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < d.count(); ++k) {
    const double x = mean_direction(Index(d.observed[k]));
    if (x == 0.0) {
      std::ostringstream msg;
      msg << "estimate_mean: mean direction is zero at observed node " << d.observed[k];
      fail(ErrorCode::InvalidArgument, msg.str());
    }
    total += d.values(Index(k)) / x;
  }
  return total / double(d.count());
}

std::vector<CorrelationPair> naive_correlations(const PartitionedData& d,
                                                const EmpiricalConfig& config, double mu,
                                                const Matrix& similarity) {
  const std::size_t n = std::size_t(similarity.rows());
  d.validate(n);
  config.validate(n);
  require(d.count() >= 2, "naive_correlations: need at least 2 observed nodes");
  const std::size_t r = d.count();
  std::vector<double> resid(r), vv(r);
  for (std::size_t k = 0; k < r; ++k) {
    const Index i = Index(d.observed[k]);
    resid[k] = d.values(Index(k)) - mu * config.mean_direction(i);
    vv[k] = config.v(i);
  }
  std::vector<CorrelationPair> out;
  out.reserve(r * (r - 1) / 2);
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = a + 1; b < r; ++b) {
      const double diff = resid[a] - resid[b];
      const double phi = 0.5 * diff * diff;
      const double num =
          config.sigma2 * (vv[a] * vv[a] + vv[b] * vv[b]) / 2.0 + config.lambda_inv - phi;
      out.push_back({similarity(Index(d.observed[a]), Index(d.observed[b])),
                     num / (config.sigma2 * vv[a] * vv[b])});
    }
  }
  return out;
}

double CorrelationFit::transform(double s) { return std::log1p(s); }

double CorrelationFit::operator()(double s) const {
  if (backend_ == CorrelationBackend::Spline) return (*spline_)(transform(s));
  const auto it = std::lower_bound(group_similarity_.begin(), group_similarity_.end(), s);
  if (it == group_similarity_.begin()) return group_mean_.front();
  if (it == group_similarity_.end()) return group_mean_.back();
  const std::size_t hi = std::size_t(it - group_similarity_.begin());
  if (*it == s) return group_mean_[hi];
  // Nearest group; the lower one on a tie.
  return (s - group_similarity_[hi - 1] <= *it - s) ? group_mean_[hi - 1] : group_mean_[hi];
}

CorrelationFit fit_correlation(std::vector<CorrelationPair> pairs, CorrelationBackend backend,
                               int knots, std::size_t max_pairs, std::uint64_t seed) {
  require(!pairs.empty(), "fit_correlation: no correlation pairs");
  require(max_pairs >= 1, "fit_correlation: max_pairs must be positive");
  for (const auto& p : pairs) {
    require(std::isfinite(p.similarity) && std::isfinite(p.correlation),
            "fit_correlation: non-finite pair");
  }
  if (pairs.size() > max_pairs) {
    std::vector<std::size_t> idx(pairs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t k = 0; k < max_pairs; ++k) {
      const std::size_t j = k + std::size_t(uniform_below(rng, idx.size() - k));
      std::swap(idx[k], idx[j]);
    }
    idx.resize(max_pairs);
    std::sort(idx.begin(), idx.end());
    std::vector<CorrelationPair> kept;
    kept.reserve(max_pairs);
    for (std::size_t k : idx) kept.push_back(pairs[k]);
    pairs = std::move(kept);
  }

  CorrelationFit fit;
  fit.pairs_ = std::move(pairs);

  std::vector<double> s_sorted;
  s_sorted.reserve(fit.pairs_.size());
  for (const auto& p : fit.pairs_) s_sorted.push_back(p.similarity);
  std::sort(s_sorted.begin(), s_sorted.end());
  const std::size_t distinct_s =
      std::size_t(std::unique(s_sorted.begin(), s_sorted.end()) - s_sorted.begin());

  if (backend == CorrelationBackend::Auto) {
    backend = distinct_s <= kAutoGroupLimit ? CorrelationBackend::GroupAverage
                                            : CorrelationBackend::Spline;
  }
  if (backend == CorrelationBackend::Spline) {
    std::vector<double> x;
    x.reserve(fit.pairs_.size());
    for (const auto& p : fit.pairs_) x.push_back(CorrelationFit::transform(p.similarity));
    std::vector<double> xs = x;
    std::sort(xs.begin(), xs.end());
    const std::size_t distinct_x =
        std::size_t(std::unique(xs.begin(), xs.end()) - xs.begin());
    if (distinct_x < kSplineMinDistinct) {
      backend = CorrelationBackend::GroupAverage;
      fit.fell_back_ = true;
    } else {
      std::vector<double> y;
      y.reserve(fit.pairs_.size());
      for (const auto& p : fit.pairs_) y.push_back(p.correlation);
      fit.spline_ = CubicRegressionSpline::fit(x, y, knots);
    }
  }
  fit.backend_ = backend;

  if (backend == CorrelationBackend::GroupAverage) {
    std::vector<CorrelationPair> sorted = fit.pairs_;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.similarity < b.similarity; });
    for (std::size_t k = 0; k < sorted.size();) {
      std::size_t end = k;
      double total = 0.0;
      while (end < sorted.size() && sorted[end].similarity == sorted[k].similarity) {
        total += sorted[end].correlation;
        ++end;
      }
      fit.group_similarity_.push_back(sorted[k].similarity);
      fit.group_mean_.push_back(total / double(end - k));
      k = end;
    }
  }
  return fit;
}

Matrix build_covariance(const CorrelationFit& fit, const EmpiricalConfig& config,
                        const Matrix& similarity) {
  const Index n = similarity.rows();
  require(similarity.cols() == n, "build_covariance: similarity must be square");
  config.validate(std::size_t(n));
  Matrix psi(n, n);
  for (Index i = 0; i < n; ++i) {
    psi(i, i) = config.sigma2 * config.v(i) * config.v(i);
    for (Index j = i + 1; j < n; ++j) {
      const double c = config.sigma2 * config.v(i) * config.v(j) * fit(similarity(i, j));
      psi(i, j) = c;
      psi(j, i) = c;
    }
  }
  return psd_project(psi, config.rank);
}

Vector predict_empirical(const PartitionedData& d, const EmpiricalConfig& config, double mu,
                         const Matrix& psi_hat) {
  const std::size_t n = std::size_t(psi_hat.rows());
  config.validate(n);
  KrigingModel m;
  m.mean_direction = config.mean_direction;
  m.mean_scale = mu;
  m.signal_cov = psi_hat;
  m.diffuse_var = 0.0;
  m.noise_var = Vector::Constant(Index(n), config.lambda_inv);
  return predict_partial(m, d);
}

EmpiricalFit run_empirical(const PartitionedData& d, const EmpiricalConfig& config,
                           const Matrix& similarity, bool binary) {
  EmpiricalFit out;
  out.mean = estimate_mean(d, config.mean_direction, binary);
  out.correlation = fit_correlation(naive_correlations(d, config, out.mean, similarity),
                                    config.backend, config.knots, config.max_pairs, config.seed);
  out.covariance = build_covariance(out.correlation, config, similarity);
  out.prediction = predict_empirical(d, config, out.mean, out.covariance);
  return out;
}

std::vector<CvGridPoint> default_cv_grid(const PartitionedData& d, const Vector& v) {
  require(d.count() >= 1, "default_cv_grid: no observed nodes");
  Vector scaled(Index(d.count()));
  for (std::size_t k = 0; k < d.count(); ++k) {
    scaled(Index(k)) = d.values(Index(k)) / v(Index(d.observed[k]));
  }
  double signal = population_variance(scaled);
  double noise = population_variance(d.values);
  if (!(signal > 0.0)) signal = 1.0;
  if (!(noise > 0.0)) noise = 1.0;
  std::vector<CvGridPoint> grid;
  for (double a : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    for (double b : {1e-3, 1e-2, 1e-1, 1.0}) grid.push_back({a * signal, b * noise});
  }
  return grid;
}

std::vector<std::vector<std::size_t>> make_folds(const PartitionedData& d, std::size_t folds,
                                                 std::uint64_t seed, bool binary) {
  require(folds >= 2, "make_folds: need at least 2 folds");
  require(d.count() >= folds, "make_folds: fewer observed nodes than folds");
  Rng rng(seed);
  std::vector<std::size_t> order;
  if (binary) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t k = 0; k < d.count(); ++k) {
      (d.values(Index(k)) > 0.0 ? pos : neg).push_back(k);
    }
    shuffle(std::span(pos), rng);
    shuffle(std::span(neg), rng);
    order = pos;
    order.insert(order.end(), neg.begin(), neg.end());
  } else {
    order.resize(d.count());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span(order), rng);
  }
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t k = 0; k < order.size(); ++k) out[k % folds].push_back(order[k]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

CvReport cross_validate(const PartitionedData& d, const EmpiricalConfig& base,
                        const Matrix& similarity, std::span<const CvGridPoint> grid,
                        std::size_t folds, std::uint64_t seed, bool binary, unsigned threads) {
  require(!grid.empty(), "cross_validate: empty grid");
  const std::size_t n = std::size_t(similarity.rows());
  d.validate(n);
  for (const auto& g : grid) {
    require(g.sigma2 > 0.0 && g.lambda_inv > 0.0, "cross_validate: grid values must be positive");
  }
  const auto fold_sets = make_folds(d, folds, seed, binary);

  Vector truth = Vector::Zero(Index(n));
  for (std::size_t k = 0; k < d.count(); ++k) truth(Index(d.observed[k])) = d.values(Index(k));

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> fold_scores(grid.size() * folds, nan);
  parallel_for(grid.size() * folds, threads, [&](std::size_t task) {
    const std::size_t gi = task / folds;
    const std::size_t fi = task % folds;
    std::vector<std::size_t> held_in;
    for (std::size_t f = 0; f < folds; ++f) {
      if (f != fi) held_in.insert(held_in.end(), fold_sets[f].begin(), fold_sets[f].end());
    }
    std::sort(held_in.begin(), held_in.end());
    std::vector<std::size_t> held_out;
    for (std::size_t pos : fold_sets[fi]) held_out.push_back(d.observed[pos]);

    EmpiricalConfig cfg = base;
    cfg.sigma2 = grid[gi].sigma2;
    cfg.lambda_inv = grid[gi].lambda_inv;
    const EmpiricalFit fit = run_empirical(subset(d, held_in), cfg, similarity, binary);
    if (binary) {
      const auto a = auc(fit.prediction, truth, held_out);
      if (a) fold_scores[task] = 1.0 - *a;
    } else {
      fold_scores[task] = mse(fit.prediction, truth, held_out);
    }
  });

  CvReport report;
  report.grid.assign(grid.begin(), grid.end());
  report.scores.assign(grid.size(), nan);
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t fi = 0; fi < folds; ++fi) {
      const double s = fold_scores[gi * folds + fi];
      if (std::isnan(s)) continue;
      total += s;
      ++used;
    }
    if (used > 0) report.scores[gi] = total / double(used);
  }
  const auto key = [&](std::size_t gi) {
    const double s = report.scores[gi];
    return std::tuple(std::isnan(s) ? std::numeric_limits<double>::infinity() : s,
                      grid[gi].sigma2, grid[gi].lambda_inv);
  };
  report.best = 0;
  for (std::size_t gi = 1; gi < grid.size(); ++gi) {
    if (key(gi) < key(report.best)) report.best = gi;
  }
  return report;
}

}  // namespace graphkrig
