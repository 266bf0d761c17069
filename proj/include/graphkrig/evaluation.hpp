#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "graphkrig/graph.hpp"
#include "graphkrig/kriging.hpp"
#include "graphkrig/methods.hpp"
#include "graphkrig/metrics.hpp"

namespace graphkrig {

enum class Metric { MSE, OneMinusAUC };
enum class Baseline { RegressOnX, RandomGuess };

std::string_view metric_name(Metric m);

struct HoldoutSplit {
  PartitionedData held_in;
  std::vector<std::size_t> held_out;  // node indices, ascending
};

/// Holds out round(fraction * r) of the r observed nodes uniformly at random.
/// At least 2 nodes must stay in and 1 must go out.
HoldoutSplit holdout_split(const PartitionedData& labels, double fraction, std::uint64_t seed);

/// mu_hat X for continuous data; seeded uniform scores for binary data.
Vector baseline_predict(const PartitionedData& d, const Vector& mean_direction, bool binary,
                        std::uint64_t seed = 0);

/// Metric value on held-out nodes; empty when AUC is undefined.
std::optional<double> score(Metric metric, const Vector& pred, const Vector& truth,
                            std::span<const std::size_t> idx);

struct ExperimentConfig {
  std::vector<MethodConfig> methods;
  std::vector<double> fractions;
  std::size_t trials = 50;
  std::uint64_t seed = 0;
  Metric metric = Metric::MSE;
  Baseline baseline = Baseline::RegressOnX;
  unsigned threads = 1;

  void validate() const;
};

struct ResultRow {
  std::string method;
  double fraction = 0.0;
  std::size_t trial = 0;
  double value = 0.0;  // NaN when the trial failed
  std::string error;
};

struct AggregateRow {
  std::string method;
  double fraction = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t trials_ok = 0;
  std::size_t trials_failed = 0;
  double baseline_mean = 0.0;
  double improvement = 0.0;  // (baseline - mean) / baseline
};

struct ExperimentResult {
  Metric metric = Metric::MSE;
  std::vector<ResultRow> rows;            // sorted by (method order, fraction, trial)
  std::vector<AggregateRow> aggregates;   // one per (method, fraction)

  /// Header `method,fraction,trial,metric,value`.
  void write_results_csv(std::ostream& out) const;
  /// Header `method,fraction,mean,stderr,trials_ok,trials_failed,baseline_mean,improvement`.
  void write_aggregate_csv(std::ostream& out) const;
};

/// Relative improvement (baseline - value) / baseline.
double improvement(double baseline, double value);

/// Holdout experiment. Trial t of every fraction uses seed + t, and every
/// method sees the same split in that trial. Smoothers are scored at the best
/// value of their tuning grid on the holdout; empirical methods choose
/// (sigma2, lambda_inv) by cross-validation inside the held-in set. The
/// baseline of each method regresses on that method's X (or is a random
/// guess with 1 - AUC = 1/2).
ExperimentResult run_experiment(const ExperimentConfig& cfg, const WeightedDigraph& g,
                                const PartitionedData& labels, bool binary);

}  // namespace graphkrig
