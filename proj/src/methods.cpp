#include "graphkrig/methods.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "graphkrig/error.hpp"
#include "graphkrig/random.hpp"
#include "graphkrig/textio.hpp"

namespace graphkrig {

namespace {

double number_option(std::string_view key, std::string_view value) {
  const auto v = parse_number(trim(value));
  if (!v) fail(ErrorCode::InvalidArgument, "option " + std::string(key) + ": not a number: '" +
                                               std::string(value) + "'");
  return *v;
}

double positive_option(std::string_view key, std::string_view value) {
  const double v = number_option(key, value);
  require(v > 0.0 && std::isfinite(v), "option " + std::string(key) + ": must be positive");
  return v;
}

long long integer_option(std::string_view key, std::string_view value) {
  const auto v = parse_integer(trim(value));
  if (!v) fail(ErrorCode::InvalidArgument, "option " + std::string(key) +
                                               ": not an integer: '" + std::string(value) + "'");
  return *v;
}

bool is_smoother(const MethodConfig& m) { return m.kind == MethodKind::Smoother; }

std::string describe_choice(std::string_view key, double value) {
  return std::string(key) + "=" + format_number(value);
}

bool usable_direction(const PartitionedData& d, const Vector& x) {
  if (x.size() == 0) return false;
  for (std::size_t i : d.observed) {
    if (x(Index(i)) == 0.0) return false;
  }
  return true;
}

}  // namespace

const std::vector<std::string_view>& method_names() {
  static const std::vector<std::string_view> names = {
      "random-walk",        "tikhonov",     "tikhonov-interpolated", "zhou2004",
      "hub-authority",      "manifold-linear", "spectral-transform", "empirical-rw",
      "empirical-tikhonov", "baseline-rw",  "baseline-tikhonov",     "random-guess",
  };
  return names;
}

std::vector<double> default_tuning_grid() {
  std::vector<double> grid;
  for (int k = -6; k <= 6; ++k) grid.push_back(std::pow(10.0, k / 2.0));
  return grid;
}

MethodConfig make_method(std::string_view name) {
  MethodConfig m;
  m.name = std::string(name);
  m.tuning_grid = default_tuning_grid();
  auto smoother = [&](SmootherMethod s) {
    m.kind = MethodKind::Smoother;
    m.smoother.method = s;
  };
  if (name == "random-walk") {
    smoother(SmootherMethod::RandomWalk);
  } else if (name == "tikhonov") {
    smoother(SmootherMethod::Tikhonov);
  } else if (name == "tikhonov-interpolated") {
    smoother(SmootherMethod::TikhonovInterpolated);
    m.tuning_grid.clear();
  } else if (name == "zhou2004") {
    smoother(SmootherMethod::Zhou2004);
  } else if (name == "hub-authority") {
    smoother(SmootherMethod::HubAuthority);
  } else if (name == "manifold-linear") {
    smoother(SmootherMethod::ManifoldLinear);
    m.smoother.gamma = 1.0;
  } else if (name == "spectral-transform") {
    smoother(SmootherMethod::SpectralTransform);
  } else if (name == "empirical-rw") {
    m.kind = MethodKind::Empirical;
    m.source = SimilaritySource::RandomWalkStyle;
  } else if (name == "empirical-tikhonov") {
    m.kind = MethodKind::Empirical;
    m.source = SimilaritySource::TikhonovStyle;
  } else if (name == "baseline-rw") {
    m.kind = MethodKind::RegressOnX;
    m.source = SimilaritySource::RandomWalkStyle;
  } else if (name == "baseline-tikhonov") {
    m.kind = MethodKind::RegressOnX;
    m.source = SimilaritySource::TikhonovStyle;
  } else if (name == "random-guess") {
    m.kind = MethodKind::RandomGuess;
  } else {
    fail(ErrorCode::NotFound, "unknown method '" + std::string(name) + "'");
  }
  if (!is_smoother(m)) m.tuning_grid.clear();
  return m;
}

std::string_view tuned_parameter(const MethodConfig& m) {
  if (!is_smoother(m)) return {};
  switch (m.smoother.method) {
    case SmootherMethod::RandomWalk:
    case SmootherMethod::Zhou2004:
    case SmootherMethod::HubAuthority:
      return "lambda";
    case SmootherMethod::Tikhonov:
      return "lambda0";
    case SmootherMethod::TikhonovInterpolated:
      return {};
    case SmootherMethod::ManifoldLinear:
      return "gamma";
    case SmootherMethod::SpectralTransform:
      return "alpha";
  }
  return {};
}

void set_method_option(MethodConfig& m, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "label") {
    require(!value.empty(), "option label: must not be empty");
    m.name = std::string(value);
  } else if (key == "lambda") {
    m.smoother.lambda = positive_option(key, value);
  } else if (key == "lambda0") {
    m.smoother.lambda0 = positive_option(key, value);
  } else if (key == "lambda1") {
    const double x = number_option(key, value);
    require(x >= 0.0, "option lambda1: must be nonnegative");
    m.smoother.lambda1 = x;
  } else if (key == "gamma") {
    const double x = number_option(key, value);
    if (m.kind == MethodKind::Smoother && m.smoother.method == SmootherMethod::HubAuthority) {
      require(x >= 0.0 && x <= 1.0, "option gamma: must lie in [0, 1]");
    } else {
      require(x > 0.0, "option gamma: must be positive");
    }
    m.smoother.gamma = x;
  } else if (key == "alpha") {
    m.smoother.alpha = number_option(key, value);
  } else if (key == "teleport") {
    const double x = number_option(key, value);
    require(x >= 0.0 && x < 1.0, "option teleport: must lie in [0, 1)");
    m.teleport = x;
    m.smoother.teleport = x;
  } else if (key == "kernel") {
    require(value == "identity" || value == "centered",
            "option kernel: expected identity or centered");
    m.kernel = std::string(value);
  } else if (key == "kernel_scale") {
    m.kernel_scale = positive_option(key, value);
  } else if (key == "transform") {
    require(value == "exp" || value == "expm1", "option transform: expected exp or expm1");
    m.transform = std::string(value);
  } else if (key == "lambda_grid") {
    if (value == "none" || value.empty()) {
      m.tuning_grid.clear();
    } else {
      m.tuning_grid = parse_number_list(value);
      for (double v : m.tuning_grid) require(v > 0.0, "option lambda_grid: values must be positive");
    }
  } else if (key == "sigma2") {
    m.sigma2 = positive_option(key, value);
  } else if (key == "lambda_inv") {
    m.lambda_inv = positive_option(key, value);
  } else if (key == "rank") {
    if (value == "none" || value == "full") {
      m.rank.reset();
    } else {
      const long long k = integer_option(key, value);
      require(k >= 0, "option rank: must be nonnegative");
      m.rank = Index(k);
    }
  } else if (key == "backend") {
    if (value == "auto") {
      m.backend = CorrelationBackend::Auto;
    } else if (value == "spline") {
      m.backend = CorrelationBackend::Spline;
    } else if (value == "group-average") {
      m.backend = CorrelationBackend::GroupAverage;
    } else {
      fail(ErrorCode::InvalidArgument, "option backend: expected auto, spline or group-average");
    }
  } else if (key == "folds") {
    const long long k = integer_option(key, value);
    require(k >= 2, "option folds: must be at least 2");
    m.folds = std::size_t(k);
  } else if (key == "knots") {
    const long long k = integer_option(key, value);
    require(k >= 2, "option knots: must be at least 2");
    m.knots = int(k);
  } else if (key == "max_pairs") {
    const long long k = integer_option(key, value);
    require(k >= 1, "option max_pairs: must be positive");
    m.max_pairs = std::size_t(k);
  } else {
    fail(ErrorCode::InvalidArgument, "unknown method option '" + std::string(key) + "'");
  }
}

MethodRunner::MethodRunner(const WeightedDigraph& g, MethodConfig config)
    : graph_(&g), config_(std::move(config)) {
  switch (config_.kind) {
    case MethodKind::Smoother: {
      PartitionedData probe;
      probe.observed = {0};
      probe.values = Vector::Zero(1);
      mean_direction_ = assemble(spec_for(std::numeric_limits<double>::quiet_NaN(), 0.0), g, probe)
                            .mean_direction;
      break;
    }
    case MethodKind::Empirical:
    case MethodKind::RegressOnX:
      preset_ = empirical_preset(g, config_.source, config_.teleport);
      mean_direction_ = preset_.mean_direction;
      break;
    case MethodKind::RandomGuess:
      mean_direction_ = Vector::Zero(Index(g.size()));
      break;
  }
}

SmootherSpec MethodRunner::spec_for(double tuned, double mu) const {
  SmootherSpec s = config_.smoother;
  const Index n = Index(graph_->size());
  s.mu_guess = mu;
  s.teleport = config_.teleport;
  if (!std::isnan(tuned)) {
    const std::string_view p = tuned_parameter(config_);
    if (p == "lambda") s.lambda = tuned;
    if (p == "lambda0") s.lambda0 = tuned;
    if (p == "gamma") s.gamma = tuned;
    if (p == "alpha") s.alpha = tuned;
  }
  if (s.method == SmootherMethod::ManifoldLinear) {
    s.kernel = config_.kernel_scale * Matrix::Identity(n, n);
    if (config_.kernel == "centered") s.kernel.array() -= config_.kernel_scale / double(n);
  }
  if (s.method == SmootherMethod::SpectralTransform) {
    s.transform = config_.transform == "expm1" ? expm1_transform(s.alpha) : exp_transform(s.alpha);
  }
  return s;
}

PredictOutcome MethodRunner::predict(const PartitionedData& d, const PredictOptions& opts) const {
  const std::size_t n = graph_->size();
  d.validate(n);
  require(d.count() >= 1, "predict: no observed nodes");
  PredictOutcome out;

  switch (config_.kind) {
    case MethodKind::RandomGuess: {
      Rng rng(opts.seed);
      out.prediction.resize(Index(n));
      for (Index i = 0; i < Index(n); ++i) out.prediction(i) = uniform_unit(rng);
      return out;
    }
    case MethodKind::RegressOnX: {
      const double mu = estimate_mean(d, mean_direction_, opts.binary);
      out.prediction = mu * mean_direction_;
      out.chosen = describe_choice("mu", mu);
      return out;
    }
    case MethodKind::Empirical: {
      EmpiricalConfig cfg = make_config(preset_, 1.0, 1.0);
      cfg.backend = config_.backend;
      cfg.knots = config_.knots;
      cfg.rank = config_.rank;
      cfg.max_pairs = config_.max_pairs;
      cfg.seed = opts.seed;
      if (config_.sigma2 && config_.lambda_inv) {
        cfg.sigma2 = *config_.sigma2;
        cfg.lambda_inv = *config_.lambda_inv;
      } else {
        std::vector<CvGridPoint> grid = default_cv_grid(d, cfg.v);
        if (config_.sigma2 || config_.lambda_inv) {
          std::vector<CvGridPoint> kept;
          for (CvGridPoint p : grid) {
            if (config_.sigma2) p.sigma2 = *config_.sigma2;
            if (config_.lambda_inv) p.lambda_inv = *config_.lambda_inv;
            kept.push_back(p);
          }
          grid = std::move(kept);
        }
        const std::size_t folds = std::min(config_.folds, d.count());
        require(folds >= 2, "empirical: cross-validation needs at least 2 observed nodes");
        const CvReport report = cross_validate(d, cfg, preset_.similarity, grid, folds, opts.seed,
                                               opts.binary, opts.threads);
        cfg.sigma2 = report.best_point().sigma2;
        cfg.lambda_inv = report.best_point().lambda_inv;
      }
      out.prediction = run_empirical(d, cfg, preset_.similarity, opts.binary).prediction;
      out.chosen = describe_choice("sigma2", cfg.sigma2) + ";" +
                   describe_choice("lambda_inv", cfg.lambda_inv);
      return out;
    }
    case MethodKind::Smoother:
      break;
  }

  const double mu = !opts.binary && usable_direction(d, mean_direction_)
                        ? estimate_mean(d, mean_direction_, false)
                        : 0.0;
  const std::string_view param = tuned_parameter(config_);
  auto run = [&](double tuned) {
    const SmootherSpec s = spec_for(tuned, mu);
    s.validate();
    return quadratic_smooth(assemble(s, *graph_, d));
  };
  if (opts.score && !param.empty() && !config_.tuning_grid.empty()) {
    double best_score = std::numeric_limits<double>::infinity();
    for (double t : config_.tuning_grid) {
      Vector pred = run(t);
      const double s = (*opts.score)(pred);
      if (s < best_score || out.prediction.size() == 0) {
        best_score = s;
        out.prediction = std::move(pred);
        out.chosen = describe_choice(param, t);
      }
    }
    return out;
  }
  out.prediction = run(std::numeric_limits<double>::quiet_NaN());
  return out;
}

}  // namespace graphkrig
