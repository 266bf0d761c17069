#include "graphkrig/graphkrig.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "graphkrig/dataset.hpp"
#include "graphkrig/empirical.hpp"
#include "graphkrig/error.hpp"
#include "graphkrig/evaluation.hpp"
#include "graphkrig/methods.hpp"
#include "graphkrig/textio.hpp"

using namespace graphkrig;

struct gk_dataset {
  Dataset data;
};

struct gk_method {
  MethodConfig config;
};

struct gk_prediction {
  Vector values;
  std::vector<bool> held_out;
  std::vector<bool> train;
  std::optional<double> metric;
  std::string choice;
};

struct gk_experiment {
  ExperimentConfig config;
  std::optional<Metric> metric;
  std::optional<Baseline> baseline;
};

namespace {

thread_local std::string last_error;

gk_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return GK_INVALID_ARGUMENT;
    case ErrorCode::Parse: return GK_PARSE_ERROR;
    case ErrorCode::NotFound: return GK_NOT_FOUND;
    case ErrorCode::Numeric: return GK_NUMERIC_ERROR;
    case ErrorCode::Reducible: return GK_REDUCIBLE_WALK;
    case ErrorCode::Io: return GK_IO_ERROR;
  }
  return GK_INTERNAL_ERROR;
}

template <typename Fn>
gk_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return GK_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return GK_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return GK_INTERNAL_ERROR;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " is null");
}

// Writes through `body` to a file, or to stdout for "-".
template <typename Body>
void write_output(const char* path, Body&& body) {
  need(path, "path");
  if (std::string_view(path) == "-") {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, std::string("cannot write ") + path);
  body(out);
  out.flush();
  if (!out) fail(ErrorCode::Io, std::string("write failed: ") + path);
}

EmpiricalConfig empirical_config(const MethodConfig& m, const EmpiricalPreset& preset,
                                 std::uint64_t seed) {
  EmpiricalConfig cfg = make_config(preset, 1.0, 1.0);
  cfg.backend = m.backend;
  cfg.knots = m.knots;
  cfg.rank = m.rank;
  cfg.max_pairs = m.max_pairs;
  cfg.seed = seed;
  return cfg;
}

CvReport run_cv(const Dataset& ds, const MethodConfig& m, const EmpiricalPreset& preset,
                const EmpiricalConfig& cfg, std::uint64_t seed, unsigned threads) {
  const auto grid = default_cv_grid(ds.labels, cfg.v);
  const std::size_t folds = std::min(m.folds, ds.labels.count());
  require(folds >= 2, "cross-validation needs at least 2 labels");
  return cross_validate(ds.labels, cfg, preset.similarity, grid, folds, seed, ds.binary(),
                        threads);
}

void require_empirical(const MethodConfig& m) {
  require(m.kind == MethodKind::Empirical,
          "method '" + m.name + "' is not an empirical-correlation method");
}

}  // namespace

extern "C" {

const char* gk_version(void) { return "0.1.0"; }

const char* gk_status_name(gk_status status) {
  switch (status) {
    case GK_OK: return "ok";
    case GK_INVALID_ARGUMENT: return error_code_name(ErrorCode::InvalidArgument);
    case GK_PARSE_ERROR: return error_code_name(ErrorCode::Parse);
    case GK_NOT_FOUND: return error_code_name(ErrorCode::NotFound);
    case GK_NUMERIC_ERROR: return error_code_name(ErrorCode::Numeric);
    case GK_REDUCIBLE_WALK: return error_code_name(ErrorCode::Reducible);
    case GK_IO_ERROR: return error_code_name(ErrorCode::Io);
    case GK_INTERNAL_ERROR: return "internal_error";
  }
  return "unknown";
}

const char* gk_last_error_message(void) { return last_error.c_str(); }

gk_status gk_dataset_load(const char* edges_path, const char* labels_path, int binary,
                          gk_dataset** out) {
  return guarded([&] {
    need(edges_path, "edges_path");
    need(out, "out");
    *out = nullptr;
    const LabelKind kind = binary ? LabelKind::Binary : LabelKind::Continuous;
    std::ifstream edges_in(edges_path);
    if (!edges_in) fail(ErrorCode::Io, std::string("cannot open ") + edges_path);
    NamedEdgeList edges = read_edge_list(edges_in, edges_path);
    if (labels_path) {
      std::ifstream labels_in(labels_path);
      if (!labels_in) fail(ErrorCode::Io, std::string("cannot open ") + labels_path);
      *out = new gk_dataset{make_dataset(std::move(edges), labels_in, labels_path, kind)};
    } else {
      std::istringstream none;
      *out = new gk_dataset{make_dataset(std::move(edges), none, "<none>", kind)};
    }
  });
}

gk_status gk_dataset_from_edges(size_t n, const size_t* src, const size_t* dst,
                                const double* weights, size_t edge_count, gk_dataset** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    require(edge_count == 0 || (src && dst), "edge arrays are null");
    NamedEdgeList edges;
    for (size_t i = 0; i < n; ++i) edges.names.push_back(std::to_string(i));
    for (size_t k = 0; k < edge_count; ++k) {
      require(src[k] < n && dst[k] < n, "edge endpoint out of range");
      edges.rows.push_back({src[k], dst[k], weights ? weights[k] : 1.0});
    }
    std::istringstream none;
    *out = new gk_dataset{make_dataset(std::move(edges), none, "<none>", LabelKind::Continuous)};
  });
}

gk_status gk_dataset_set_labels(gk_dataset* ds, const size_t* nodes, const double* values,
                                size_t count, int binary) {
  return guarded([&] {
    need(ds, "dataset");
    require(count == 0 || (nodes && values), "label arrays are null");
    std::vector<std::pair<size_t, double>> rows;
    for (size_t k = 0; k < count; ++k) rows.emplace_back(nodes[k], values[k]);
    std::sort(rows.begin(), rows.end());
    PartitionedData labels;
    labels.values.resize(Index(count));
    for (size_t k = 0; k < count; ++k) {
      require(std::isfinite(rows[k].second), "label is not finite");
      if (binary) require(rows[k].second == 1.0 || rows[k].second == -1.0,
                          "binary label must be 1 or -1");
      labels.observed.push_back(rows[k].first);
      labels.values(Index(k)) = rows[k].second;
    }
    labels.validate(ds->data.graph.size());
    ds->data.labels = std::move(labels);
    ds->data.kind = binary ? LabelKind::Binary : LabelKind::Continuous;
  });
}

void gk_dataset_free(gk_dataset* ds) { delete ds; }

size_t gk_dataset_node_count(const gk_dataset* ds) { return ds ? ds->data.graph.size() : 0; }

size_t gk_dataset_label_count(const gk_dataset* ds) { return ds ? ds->data.labels.count() : 0; }

const char* gk_dataset_node_name(const gk_dataset* ds, size_t i) {
  if (!ds || i >= ds->data.names.size()) return nullptr;
  return ds->data.names[i].c_str();
}

gk_status gk_dataset_describe(const gk_dataset* ds, gk_summary* out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    const GraphSummary s = describe(ds->data.graph);
    out->nodes = s.nodes;
    out->edges = s.edges;
    out->labeled = ds->data.labels.count();
    out->volume = s.volume;
    out->zero_percent = s.zero_percent;
    out->symmetric = s.symmetric;
    out->strongly_connected = s.strongly_connected;
    const DegreeQuantiles* q[2] = {&s.out_degree, &s.in_degree};
    double* dst[2] = {out->out_degree, out->in_degree};
    for (int k = 0; k < 2; ++k) {
      dst[k][0] = q[k]->min;
      dst[k][1] = q[k]->q25;
      dst[k][2] = q[k]->median;
      dst[k][3] = q[k]->q75;
      dst[k][4] = q[k]->max;
    }
  });
}

gk_status gk_dataset_write_summary(const gk_dataset* ds, const char* path) {
  return guarded([&] {
    need(ds, "dataset");
    const GraphSummary s = describe(ds->data.graph);
    write_output(path, [&](std::ostream& o) { write_summary(o, s, ds->data.labels.count()); });
  });
}

gk_status gk_method_create(const char* name, gk_method** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = nullptr;
    *out = new gk_method{make_method(name)};
  });
}

gk_status gk_method_set(gk_method* m, const char* key, const char* value) {
  return guarded([&] {
    need(m, "method");
    need(key, "key");
    need(value, "value");
    set_method_option(m->config, key, value);
  });
}

const char* gk_method_name(const gk_method* m) { return m ? m->config.name.c_str() : nullptr; }

void gk_method_free(gk_method* m) { delete m; }

gk_status gk_predict(const gk_dataset* ds, const gk_method* m, const gk_predict_options* opts,
                     gk_prediction** out) {
  return guarded([&] {
    need(ds, "dataset");
    need(m, "method");
    need(out, "out");
    *out = nullptr;
    const gk_predict_options o = opts ? *opts : gk_predict_options{0, 1, 0.0};
    const Dataset& data = ds->data;
    const std::size_t n = data.graph.size();
    require(data.labels.count() >= 1, "predict: dataset has no labels");
    require(o.holdout_fraction >= 0.0 && o.holdout_fraction < 1.0,
            "predict: holdout fraction must be in [0, 1)");

    auto result = std::make_unique<gk_prediction>();
    result->held_out.assign(n, false);
    result->train.assign(n, false);
    const Metric metric = data.binary() ? Metric::OneMinusAUC : Metric::MSE;
    const Vector truth = data.label_vector();
    MethodRunner runner(data.graph, m->config);
    PredictOptions popts;
    popts.binary = data.binary();
    popts.seed = o.seed;
    popts.threads = std::max(1u, o.threads);

    PartitionedData fit_on = data.labels;
    std::vector<std::size_t> held_out;
    if (o.holdout_fraction > 0.0) {
      HoldoutSplit split = holdout_split(data.labels, o.holdout_fraction, o.seed);
      fit_on = std::move(split.held_in);
      held_out = std::move(split.held_out);
    }
    const HoldoutScore scorer = [&](const Vector& pred) {
      const auto s = score(metric, pred, truth, held_out);
      return s ? *s : std::nan("");
    };
    if (!held_out.empty()) popts.score = &scorer;
    PredictOutcome outcome = runner.predict(fit_on, popts);
    for (std::size_t i : fit_on.observed) result->train[i] = true;
    for (std::size_t i : held_out) result->held_out[i] = true;
    if (!held_out.empty()) result->metric = score(metric, outcome.prediction, truth, held_out);
    result->values = std::move(outcome.prediction);
    result->choice = std::move(outcome.chosen);
    *out = result.release();
  });
}

size_t gk_prediction_size(const gk_prediction* p) { return p ? size_t(p->values.size()) : 0; }

const double* gk_prediction_values(const gk_prediction* p) { return p ? p->values.data() : nullptr; }

int gk_prediction_is_held_out(const gk_prediction* p, size_t i) {
  return p && i < p->held_out.size() && p->held_out[i] ? 1 : 0;
}

int gk_prediction_metric(const gk_prediction* p, double* value) {
  if (!p || !p->metric || !value) return 0;
  *value = *p->metric;
  return 1;
}

const char* gk_prediction_choice(const gk_prediction* p) { return p ? p->choice.c_str() : ""; }

gk_status gk_prediction_write_csv(const gk_prediction* p, const gk_dataset* ds, const char* path) {
  return guarded([&] {
    need(p, "prediction");
    need(ds, "dataset");
    const Dataset& data = ds->data;
    require(std::size_t(p->values.size()) == data.graph.size(),
            "prediction does not match the dataset");
    std::vector<std::optional<double>> label(data.graph.size());
    for (std::size_t k = 0; k < data.labels.count(); ++k) {
      label[data.labels.observed[k]] = data.labels.values(Index(k));
    }
    write_output(path, [&](std::ostream& o) {
      o << "node,prediction,label,role\n";
      for (std::size_t i = 0; i < data.graph.size(); ++i) {
        const char* role = p->held_out[i] ? "test" : (label[i] ? "train" : "unlabeled");
        o << data.names[i] << ',' << format_number(p->values(Index(i))) << ','
          << (label[i] ? format_number(*label[i]) : std::string()) << ',' << role << '\n';
      }
    });
  });
}

void gk_prediction_free(gk_prediction* p) { delete p; }

gk_status gk_cross_validate(const gk_dataset* ds, const gk_method* m, uint64_t seed,
                            unsigned threads, const char* path) {
  return guarded([&] {
    need(ds, "dataset");
    need(m, "method");
    require_empirical(m->config);
    const EmpiricalPreset preset =
        empirical_preset(ds->data.graph, m->config.source, m->config.teleport);
    const EmpiricalConfig cfg = empirical_config(m->config, preset, seed);
    const CvReport report = run_cv(ds->data, m->config, preset, cfg, seed, std::max(1u, threads));
    write_output(path, [&](std::ostream& o) {
      o << "sigma2,lambda_inv,score,best\n";
      for (std::size_t k = 0; k < report.grid.size(); ++k) {
        o << format_number(report.grid[k].sigma2) << ',' << format_number(report.grid[k].lambda_inv)
          << ',' << format_number(report.scores[k]) << ',' << (k == report.best ? 1 : 0) << '\n';
      }
    });
  });
}

gk_status gk_export_rho(const gk_dataset* ds, const gk_method* m, uint64_t seed, unsigned threads,
                        const char* path) {
  return guarded([&] {
    need(ds, "dataset");
    need(m, "method");
    require_empirical(m->config);
    const Dataset& data = ds->data;
    const EmpiricalPreset preset = empirical_preset(data.graph, m->config.source, m->config.teleport);
    EmpiricalConfig cfg = empirical_config(m->config, preset, seed);
    if (m->config.sigma2 && m->config.lambda_inv) {
      cfg.sigma2 = *m->config.sigma2;
      cfg.lambda_inv = *m->config.lambda_inv;
    } else {
      const CvGridPoint best =
          run_cv(data, m->config, preset, cfg, seed, std::max(1u, threads)).best_point();
      cfg.sigma2 = best.sigma2;
      cfg.lambda_inv = best.lambda_inv;
    }
    const double mu = estimate_mean(data.labels, cfg.mean_direction, data.binary());
    const CorrelationFit fit =
        fit_correlation(naive_correlations(data.labels, cfg, mu, preset.similarity), cfg.backend,
                        cfg.knots, cfg.max_pairs, cfg.seed);
    std::vector<double> s;
    const Index n = preset.similarity.rows();
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) s.push_back(preset.similarity(i, j));
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    write_output(path, [&](std::ostream& o) {
      o << "s,log1p_s,rho\n";
      for (double v : s) {
        o << format_number(v) << ',' << format_number(CorrelationFit::transform(v)) << ','
          << format_number(fit(v)) << '\n';
      }
    });
  });
}

gk_status gk_experiment_create(gk_experiment** out) {
  return guarded([&] {
    need(out, "out");
    *out = new gk_experiment{};
    (*out)->config.fractions = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  });
}

gk_status gk_experiment_set(gk_experiment* e, const char* key, const char* value) {
  return guarded([&] {
    need(e, "experiment");
    need(key, "key");
    need(value, "value");
    const std::string_view k = key;
    const std::string_view v = trim(value);
    auto integer = [&] {
      const auto x = parse_integer(v);
      if (!x || *x < 0) fail(ErrorCode::InvalidArgument, "experiment " + std::string(k) +
                                                             ": expected a nonnegative integer");
      return *x;
    };
    if (k == "fractions") {
      const std::vector<double> fractions = parse_number_list(v);
      require(!fractions.empty(), "experiment fractions: empty list");
      for (double f : fractions) require(f > 0.0 && f < 1.0, "experiment fractions: must lie in (0, 1)");
      e->config.fractions = fractions;
    } else if (k == "trials") {
      const long long t = integer();
      require(t >= 1, "experiment trials: must be at least 1");
      e->config.trials = std::size_t(t);
    } else if (k == "seed") {
      e->config.seed = std::uint64_t(integer());
    } else if (k == "threads") {
      e->config.threads = unsigned(std::max<long long>(1, integer()));
    } else if (k == "metric") {
      if (v == "mse") e->metric = Metric::MSE;
      else if (v == "auc") e->metric = Metric::OneMinusAUC;
      else fail(ErrorCode::InvalidArgument, "experiment metric: expected mse or auc");
    } else if (k == "baseline") {
      if (v == "regress") e->baseline = Baseline::RegressOnX;
      else if (v == "random") e->baseline = Baseline::RandomGuess;
      else fail(ErrorCode::InvalidArgument, "experiment baseline: expected regress or random");
    } else {
      fail(ErrorCode::InvalidArgument, "unknown experiment option '" + std::string(k) + "'");
    }
  });
}

gk_status gk_experiment_add_method(gk_experiment* e, const gk_method* m) {
  return guarded([&] {
    need(e, "experiment");
    need(m, "method");
    e->config.methods.push_back(m->config);
  });
}

gk_status gk_experiment_run(const gk_experiment* e, const gk_dataset* ds, const char* results_path,
                            const char* aggregate_path) {
  return guarded([&] {
    need(e, "experiment");
    need(ds, "dataset");
    ExperimentConfig cfg = e->config;
    const bool binary = ds->data.binary();
    cfg.metric = e->metric.value_or(binary ? Metric::OneMinusAUC : Metric::MSE);
    cfg.baseline = e->baseline.value_or(binary ? Baseline::RandomGuess : Baseline::RegressOnX);
    const ExperimentResult r = run_experiment(cfg, ds->data.graph, ds->data.labels, binary);
    if (results_path) write_output(results_path, [&](std::ostream& o) { r.write_results_csv(o); });
    if (aggregate_path) {
      write_output(aggregate_path, [&](std::ostream& o) { r.write_aggregate_csv(o); });
    }
  });
}

void gk_experiment_free(gk_experiment* e) { delete e; }

}  // extern "C"
