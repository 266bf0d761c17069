#include "graphkrig/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "graphkrig/error.hpp"
#include "graphkrig/parallel.hpp"
#include "graphkrig/random.hpp"
#include "graphkrig/textio.hpp"

namespace graphkrig {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Independent streams derived from a trial seed.
std::uint64_t stream_seed(std::uint64_t trial_seed, std::uint64_t stream) {
  std::uint64_t z = trial_seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Vector nonzero_or_ones(const Vector& x) {
  if (x.size() > 0 && (x.array() != 0.0).all()) return x;
  return Vector::Ones(x.size());
}

}  // namespace

std::string_view metric_name(Metric m) {
  return m == Metric::MSE ? "mse" : "one_minus_auc";
}

HoldoutSplit holdout_split(const PartitionedData& labels, double fraction, std::uint64_t seed) {
  require(fraction > 0.0 && fraction < 1.0, "holdout_split: fraction must be in (0, 1)");
  const std::size_t r = labels.count();
  const std::size_t out_count = std::size_t(std::llround(fraction * double(r)));
  if (out_count < 1 || r < out_count + 2) {
    std::ostringstream msg;
    msg << "holdout_split: fraction " << fraction << " of " << r
        << " labels leaves fewer than 2 held in or none held out";
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(std::span(order), rng);
  std::vector<std::size_t> out_pos(order.begin(), order.begin() + std::ptrdiff_t(out_count));
  std::vector<std::size_t> in_pos(order.begin() + std::ptrdiff_t(out_count), order.end());
  std::sort(in_pos.begin(), in_pos.end());

  HoldoutSplit split;
  split.held_in.values.resize(Index(in_pos.size()));
  for (std::size_t k = 0; k < in_pos.size(); ++k) {
    split.held_in.observed.push_back(labels.observed[in_pos[k]]);
    split.held_in.values(Index(k)) = labels.values(Index(in_pos[k]));
  }
  for (std::size_t p : out_pos) split.held_out.push_back(labels.observed[p]);
  std::sort(split.held_out.begin(), split.held_out.end());
  return split;
}

Vector baseline_predict(const PartitionedData& d, const Vector& mean_direction, bool binary,
                        std::uint64_t seed) {
  if (!binary) return estimate_mean(d, mean_direction, false) * mean_direction;
  Rng rng(seed);
  Vector out(mean_direction.size());
  for (Index i = 0; i < out.size(); ++i) out(i) = uniform_unit(rng);
  return out;
}

std::optional<double> score(Metric metric, const Vector& pred, const Vector& truth,
                            std::span<const std::size_t> idx) {
  if (metric == Metric::MSE) return mse(pred, truth, idx);
  const auto a = auc(pred, truth, idx);
  if (!a) return std::nullopt;
  return 1.0 - *a;
}

double improvement(double baseline, double value) { return (baseline - value) / baseline; }

void ExperimentConfig::validate() const {
  require(!methods.empty(), "experiment: no methods");
  require(!fractions.empty(), "experiment: no holdout fractions");
  for (double f : fractions) require(f > 0.0 && f < 1.0, "experiment: fractions must be in (0, 1)");
  require(trials >= 1, "experiment: trials must be at least 1");
  for (std::size_t a = 0; a < methods.size(); ++a) {
    for (std::size_t b = a + 1; b < methods.size(); ++b) {
      require(methods[a].name != methods[b].name,
              "experiment: duplicate method name '" + methods[a].name + "'");
    }
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const WeightedDigraph& g,
                                const PartitionedData& labels, bool binary) {
  cfg.validate();
  const std::size_t n = g.size();
  labels.validate(n);
  if (binary) {
    for (Index k = 0; k < labels.values.size(); ++k) {
      require(labels.values(k) == 1.0 || labels.values(k) == -1.0,
              "experiment: binary labels must be +1 or -1");
    }
  }
  if (cfg.metric == Metric::OneMinusAUC) require(binary, "experiment: AUC needs binary labels");
  if (cfg.baseline == Baseline::RandomGuess) {
    require(cfg.metric == Metric::OneMinusAUC, "experiment: random-guess baseline needs the AUC metric");
  }

  std::vector<MethodRunner> runners;
  runners.reserve(cfg.methods.size());
  for (const auto& m : cfg.methods) runners.emplace_back(g, m);

  Vector truth = Vector::Zero(Index(n));
  for (std::size_t k = 0; k < labels.count(); ++k) truth(Index(labels.observed[k])) = labels.values(Index(k));

  const std::size_t methods = runners.size();
  const std::size_t fractions = cfg.fractions.size();
  const std::size_t tasks = fractions * cfg.trials;
  // [task][method]
  std::vector<double> values(tasks * methods, kNaN);
  std::vector<double> baselines(tasks * methods, kNaN);
  std::vector<std::string> errors(tasks * methods);

  // Trials run concurrently; each trial's methods run serially so nesting
  // never oversubscribes.
  parallel_for(tasks, cfg.threads, [&](std::size_t task) {
    const std::size_t fi = task / cfg.trials;
    const std::size_t t = task % cfg.trials;
    const std::uint64_t trial_seed = cfg.seed + t;
    HoldoutSplit split;
    try {
      split = holdout_split(labels, cfg.fractions[fi], trial_seed);
    } catch (const Error& e) {
      for (std::size_t mi = 0; mi < methods; ++mi) errors[task * methods + mi] = e.what();
      return;
    }
    const HoldoutScore scorer = [&](const Vector& pred) {
      const auto s = score(cfg.metric, pred, truth, split.held_out);
      return s ? *s : kNaN;
    };
    for (std::size_t mi = 0; mi < methods; ++mi) {
      const std::size_t slot = task * methods + mi;
      try {
        PredictOptions opts;
        opts.binary = binary;
        opts.seed = stream_seed(trial_seed, 1);
        opts.score = &scorer;
        const PredictOutcome o = runners[mi].predict(split.held_in, opts);
        const auto s = score(cfg.metric, o.prediction, truth, split.held_out);
        if (!s) fail(ErrorCode::InvalidArgument, "metric undefined on this holdout (single class)");
        values[slot] = *s;
      } catch (const std::exception& e) {
        errors[slot] = e.what();
      }
      try {
        if (cfg.baseline == Baseline::RandomGuess) {
          // Expected 1 - AUC of a uniformly random ordering.
          baselines[slot] = 0.5;
        } else {
          const Vector x = nonzero_or_ones(runners[mi].mean_direction());
          const Vector base = baseline_predict(split.held_in, x, binary, stream_seed(trial_seed, 2));
          const auto s = score(cfg.metric, base, truth, split.held_out);
          if (s) baselines[slot] = *s;
        }
      } catch (const std::exception&) {
        baselines[slot] = kNaN;
      }
    }
  });

  ExperimentResult result;
  result.metric = cfg.metric;
  for (std::size_t mi = 0; mi < methods; ++mi) {
    for (std::size_t fi = 0; fi < fractions; ++fi) {
      AggregateRow agg;
      agg.method = cfg.methods[mi].name;
      agg.fraction = cfg.fractions[fi];
      double sum = 0.0, sumsq = 0.0, base_sum = 0.0;
      std::size_t base_count = 0;
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        const std::size_t slot = (fi * cfg.trials + t) * methods + mi;
        ResultRow row{agg.method, agg.fraction, t, values[slot], errors[slot]};
        result.rows.push_back(row);
        if (std::isnan(values[slot])) {
          ++agg.trials_failed;
        } else {
          ++agg.trials_ok;
          sum += values[slot];
          sumsq += values[slot] * values[slot];
        }
        if (!std::isnan(baselines[slot])) {
          base_sum += baselines[slot];
          ++base_count;
        }
      }
      const double k = double(agg.trials_ok);
      agg.mean = agg.trials_ok ? sum / k : kNaN;
      if (agg.trials_ok >= 2) {
        const double var = std::max(0.0, (sumsq - k * agg.mean * agg.mean) / (k - 1.0));
        agg.stderr_ = std::sqrt(var / k);
      } else {
        agg.stderr_ = kNaN;
      }
      agg.baseline_mean = base_count ? base_sum / double(base_count) : kNaN;
      agg.improvement = improvement(agg.baseline_mean, agg.mean);
      result.aggregates.push_back(agg);
    }
  }
  return result;
}

void ExperimentResult::write_results_csv(std::ostream& out) const {
  out << "method,fraction,trial,metric,value\n";
  for (const auto& r : rows) {
    out << csv_field(r.method) << ',' << format_number(r.fraction) << ',' << r.trial << ','
        << metric_name(metric) << ',' << format_number(r.value) << '\n';
  }
}

void ExperimentResult::write_aggregate_csv(std::ostream& out) const {
  out << "method,fraction,mean,stderr,trials_ok,trials_failed,baseline_mean,improvement\n";
  for (const auto& a : aggregates) {
    out << csv_field(a.method) << ',' << format_number(a.fraction) << ','
        << format_number(a.mean) << ',' << format_number(a.stderr_) << ',' << a.trials_ok << ','
        << a.trials_failed << ',' << format_number(a.baseline_mean) << ','
        << format_number(a.improvement) << '\n';
  }
}

}  // namespace graphkrig
