#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graphkrig/empirical.hpp"
#include "graphkrig/smoothers.hpp"

namespace graphkrig {

enum class MethodKind { Smoother, Empirical, RegressOnX, RandomGuess };

/// One named prediction method with its settings.
struct MethodConfig {
  std::string name;
  MethodKind kind = MethodKind::Smoother;

  // Smoother
  SmootherSpec smoother;
  std::string kernel = "identity";  // manifold-linear: identity | centered
  double kernel_scale = 1.0;
  std::string transform = "exp";    // spectral-transform: exp | expm1
  std::vector<double> tuning_grid;  // values tried when a holdout score is available

  // Empirical and regress-on-X
  SimilaritySource source = SimilaritySource::RandomWalkStyle;
  double teleport = 0.0;
  CorrelationBackend backend = CorrelationBackend::Auto;
  int knots = 10;
  std::optional<Index> rank;
  std::size_t max_pairs = 1'000'000;
  std::optional<double> sigma2;      // both set: skip cross-validation
  std::optional<double> lambda_inv;
  std::size_t folds = 10;
};

/// Registered method names, in display order.
const std::vector<std::string_view>& method_names();

/// Defaults for a registered name. Unknown names throw NotFound.
MethodConfig make_method(std::string_view name);

/// Sets one option from text, e.g. ("lambda", "0.5") or ("lambda_grid", "0.1,1,10").
void set_method_option(MethodConfig& m, std::string_view key, std::string_view value);

/// 10^-3, 10^-2.5, ..., 10^3.
std::vector<double> default_tuning_grid();

/// Name of the parameter swept by tuning_grid, or empty when nothing is tuned.
std::string_view tuned_parameter(const MethodConfig& m);

/// Lower-is-better score of a full prediction vector on held-out nodes.
using HoldoutScore = std::function<double(const Vector&)>;

struct PredictOptions {
  bool binary = false;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  const HoldoutScore* score = nullptr;  // enables tuning-grid selection
};

struct PredictOutcome {
  Vector prediction;
  std::string chosen;  // e.g. "lambda=1" or "sigma2=0.5;lambda_inv=0.01"
};

/// Runs a method on one graph. Graph-derived quantities are computed once
/// and reused across predict() calls; predict() is safe to call concurrently.
class MethodRunner {
 public:
  MethodRunner(const WeightedDigraph& g, MethodConfig config);

  const MethodConfig& config() const { return config_; }

  /// X used by this method's mean (and by its regress-on-X baseline).
  const Vector& mean_direction() const { return mean_direction_; }

  PredictOutcome predict(const PartitionedData& d, const PredictOptions& opts) const;

 private:
  SmootherSpec spec_for(double tuned, double mu) const;

  const WeightedDigraph* graph_;
  MethodConfig config_;
  Vector mean_direction_;
  EmpiricalPreset preset_;
};

}  // namespace graphkrig
