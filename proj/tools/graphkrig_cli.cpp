// graphkrig command-line front end. Talks to the library only through the C API.

#include <unistd.h>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "graphkrig/graphkrig.h"

namespace pt = boost::property_tree;

namespace {

struct Failure {
  gk_status status;
  std::string message;
};

void check(gk_status s) {
  if (s != GK_OK) throw Failure{s, gk_last_error_message()};
}

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{GK_INVALID_ARGUMENT, msg}; }

std::string escaped(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += (c == '\n') ? ' ' : c;
  }
  return out;
}

int report(gk_status status, const std::string& message) {
  const bool color = std::getenv("NO_COLOR") == nullptr && isatty(fileno(stderr));
  std::cerr << (color ? "\033[31merror\033[0m" : "error") << " code=" << gk_status_name(status)
            << " msg=\"" << escaped(message) << "\"\n";
  return status == GK_INTERNAL_ERROR ? 70 : int(status) + 1;
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using DatasetPtr = std::unique_ptr<gk_dataset, Deleter<gk_dataset, gk_dataset_free>>;
using MethodPtr = std::unique_ptr<gk_method, Deleter<gk_method, gk_method_free>>;
using PredictionPtr = std::unique_ptr<gk_prediction, Deleter<gk_prediction, gk_prediction_free>>;
using ExperimentPtr = std::unique_ptr<gk_experiment, Deleter<gk_experiment, gk_experiment_free>>;

// Settings resolved as: config file < --set overrides < dedicated flags.
struct Settings {
  std::string config_path;
  std::vector<std::string> overrides;
  pt::ptree tree;

  void load() {
    if (!config_path.empty()) {
      try {
        pt::read_ini(config_path, tree);
      } catch (const pt::ini_parser_error& e) {
        throw Failure{e.line() ? GK_PARSE_ERROR : GK_IO_ERROR, e.what()};
      }
    }
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      const auto dot = o.find('.');
      if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        usage_error("--set expects section.key=value, got '" + o + "'");
      }
      put(o.substr(0, eq), o.substr(eq + 1));
    }
  }

  // Section names may contain dots; keys do not.
  static pt::ptree::path_type path(const std::string& dotted) {
    const auto dot = dotted.rfind('.');
    if (dot == std::string::npos) return pt::ptree::path_type(dotted, '\0');
    return pt::ptree::path_type(dotted.substr(0, dot) + '\x1f' + dotted.substr(dot + 1), '\x1f');
  }

  void put(const std::string& dotted, const std::string& value) { tree.put(path(dotted), value); }

  std::optional<std::string> get(const std::string& dotted) const {
    if (auto v = tree.get_optional<std::string>(path(dotted))) return *v;
    return std::nullopt;
  }

  std::string need(const std::string& dotted) const {
    auto v = get(dotted);
    if (!v || v->empty()) usage_error("missing setting " + dotted);
    return *v;
  }

  const pt::ptree* section(const std::string& name) const {
    auto it = tree.find(name);
    return it == tree.not_found() ? nullptr : &it->second;
  }
};

struct Common {
  std::string edges, labels, kind;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

void apply_common(Settings& s, const Common& c) {
  if (!c.edges.empty()) s.put("data.edges", c.edges);
  if (!c.labels.empty()) s.put("data.labels", c.labels);
  if (!c.kind.empty()) s.put("data.kind", c.kind);
  if (c.threads) s.put("run.threads", std::to_string(c.threads));
}

unsigned threads_of(const Settings& s) {
  const auto t = s.get("run.threads");
  if (!t) return 1;
  try {
    return unsigned(std::max(1, std::stoi(*t)));
  } catch (const std::exception&) {
    usage_error("run.threads: expected an integer");
  }
}

DatasetPtr open_dataset(const Settings& s, bool labels_required) {
  const std::string edges = s.need("data.edges");
  const auto labels = s.get("data.labels");
  if (labels_required && (!labels || labels->empty())) usage_error("missing setting data.labels");
  const std::string kind = s.get("data.kind").value_or("continuous");
  if (kind != "continuous" && kind != "binary") {
    usage_error("data.kind must be continuous or binary");
  }
  gk_dataset* ds = nullptr;
  check(gk_dataset_load(edges.c_str(), labels && !labels->empty() ? labels->c_str() : nullptr,
                        kind == "binary", &ds));
  return DatasetPtr(ds);
}

// Builds a method from a config section; `type` picks the registered name
// and every other key is passed through as an option.
MethodPtr method_from(const std::string& type, const pt::ptree* section,
                      const std::string& label = {}) {
  gk_method* m = nullptr;
  check(gk_method_create(type.c_str(), &m));
  MethodPtr owned(m);
  if (!label.empty() && label != type) check(gk_method_set(m, "label", label.c_str()));
  if (section) {
    for (const auto& [key, node] : *section) {
      if (key == "type" || key == "name") continue;
      check(gk_method_set(m, key.c_str(), node.data().c_str()));
    }
  }
  return owned;
}

MethodPtr single_method(const Settings& s) {
  return method_from(s.need("method.name"), s.section("method"));
}

void add_data_flags(CLI::App* sub, Common& c) {
  sub->add_option("--edges", c.edges, "Edge list TSV: src<TAB>dst[<TAB>weight]");
  sub->add_option("--labels", c.labels, "Labels CSV: node,label");
  sub->add_option("--kind", c.kind, "Label kind")->check(CLI::IsMember({"continuous", "binary"}));
  sub->add_option("--threads", c.threads, "Worker threads (default 1)");
}

void add_seed(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Seed for all randomness")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kriging-based semi-supervised prediction on graphs"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(gk_version()));

  Settings settings;
  app.add_option("--config", settings.config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--set", settings.overrides, "Override a setting: section.key=value");

  Common common;

  auto* describe = app.add_subcommand("describe", "Graph statistics");
  std::string describe_out = "-";
  add_data_flags(describe, common);
  describe->add_option("--seed", common.seed, "Ignored; accepted for uniformity");
  describe->add_option("-o,--output", describe_out, "Output CSV ('-' for stdout)");

  auto* predict = app.add_subcommand("predict", "Predict every node with one method");
  std::string method_name, predict_out;
  std::vector<std::string> method_opts;
  std::optional<double> lambda, holdout;
  add_data_flags(predict, common);
  add_seed(predict, common);
  predict->add_option("--method", method_name, "Method name");
  predict->add_option("--lambda", lambda, "Shorthand for --opt lambda=VALUE");
  predict->add_option("--opt", method_opts, "Method option key=value");
  predict->add_option("--holdout", holdout, "Hold out this share of labels and report the metric");
  predict->add_option("-o,--output", predict_out, "Predictions CSV ('-' for stdout)");

  auto* cv = app.add_subcommand("cv", "Cross-validate sigma2 and lambda_inv of an empirical method");
  std::string cv_out;
  add_data_flags(cv, common);
  add_seed(cv, common);
  cv->add_option("--method", method_name, "empirical-rw or empirical-tikhonov");
  cv->add_option("--opt", method_opts, "Method option key=value");
  cv->add_option("-o,--output", cv_out, "Report CSV ('-' for stdout)");

  auto* experiment = app.add_subcommand("experiment", "Repeated holdout comparison of methods");
  std::string results_out, aggregate_out, fractions, methods;
  std::optional<std::size_t> trials;
  add_data_flags(experiment, common);
  add_seed(experiment, common);
  experiment->add_option("--methods", methods, "Comma-separated method labels");
  experiment->add_option("--fractions", fractions, "Comma-separated holdout fractions");
  experiment->add_option("--trials", trials, "Trials per fraction");
  experiment->add_option("--results", results_out, "Per-trial CSV");
  experiment->add_option("--aggregate", aggregate_out, "Aggregate CSV");

  auto* export_rho = app.add_subcommand("export-rho", "Write the fitted correlation curve");
  std::string rho_out;
  add_data_flags(export_rho, common);
  add_seed(export_rho, common);
  export_rho->add_option("--method", method_name, "empirical-rw or empirical-tikhonov");
  export_rho->add_option("--opt", method_opts, "Method option key=value");
  export_rho->add_option("-o,--output", rho_out, "Curve CSV ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(GK_INVALID_ARGUMENT, e.what());
  }

  try {
    settings.load();
    apply_common(settings, common);
    if (!method_name.empty()) settings.put("method.name", method_name);
    if (lambda) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", *lambda);
      settings.put("method.lambda", buf);
    }
    for (const auto& o : method_opts) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) usage_error("--opt expects key=value, got '" + o + "'");
      settings.put("method." + o.substr(0, eq), o.substr(eq + 1));
    }
    const unsigned threads = threads_of(settings);
    const std::uint64_t seed = common.seed.value_or(0);

    if (describe->parsed()) {
      DatasetPtr ds = open_dataset(settings, false);
      check(gk_dataset_write_summary(ds.get(), describe_out.c_str()));
    } else if (predict->parsed()) {
      DatasetPtr ds = open_dataset(settings, true);
      MethodPtr m = single_method(settings);
      gk_predict_options opts{seed, threads, holdout.value_or(0.0)};
      gk_prediction* raw = nullptr;
      check(gk_predict(ds.get(), m.get(), &opts, &raw));
      PredictionPtr p(raw);
      const std::string out = predict_out.empty() ? settings.get("output.predictions").value_or("-")
                                                  : predict_out;
      check(gk_prediction_write_csv(p.get(), ds.get(), out.c_str()));
      double metric = 0.0;
      if (gk_prediction_metric(p.get(), &metric)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", metric);
        std::cerr << "holdout metric=" << buf << " choice=" << gk_prediction_choice(p.get())
                  << "\n";
      }
    } else if (cv->parsed()) {
      DatasetPtr ds = open_dataset(settings, true);
      MethodPtr m = single_method(settings);
      const std::string out = cv_out.empty() ? settings.get("output.cv").value_or("-") : cv_out;
      check(gk_cross_validate(ds.get(), m.get(), seed, threads, out.c_str()));
    } else if (export_rho->parsed()) {
      DatasetPtr ds = open_dataset(settings, true);
      MethodPtr m = single_method(settings);
      const std::string out = rho_out.empty() ? settings.get("output.rho").value_or("-") : rho_out;
      check(gk_export_rho(ds.get(), m.get(), seed, threads, out.c_str()));
    } else if (experiment->parsed()) {
      DatasetPtr ds = open_dataset(settings, true);
      if (!methods.empty()) settings.put("experiment.methods", methods);
      if (!fractions.empty()) settings.put("experiment.fractions", fractions);
      if (trials) settings.put("experiment.trials", std::to_string(*trials));
      if (!results_out.empty()) settings.put("output.results", results_out);
      if (!aggregate_out.empty()) settings.put("output.aggregate", aggregate_out);

      gk_experiment* raw = nullptr;
      check(gk_experiment_create(&raw));
      ExperimentPtr e(raw);
      check(gk_experiment_set(e.get(), "seed", std::to_string(seed).c_str()));
      check(gk_experiment_set(e.get(), "threads", std::to_string(threads).c_str()));
      for (const char* key : {"fractions", "trials", "metric", "baseline"}) {
        if (auto v = settings.get(std::string("experiment.") + key)) {
          check(gk_experiment_set(e.get(), key, v->c_str()));
        }
      }
      std::stringstream list(settings.need("experiment.methods"));
      std::string label;
      while (std::getline(list, label, ',')) {
        label.erase(0, label.find_first_not_of(" \t"));
        label.erase(label.find_last_not_of(" \t") + 1);
        if (label.empty()) continue;
        const pt::ptree* section = settings.section("method." + label);
        std::string type = label;
        if (section) {
          if (auto t = section->get_optional<std::string>("type")) type = *t;
        }
        MethodPtr m = method_from(type, section, label);
        check(gk_experiment_add_method(e.get(), m.get()));
      }
      const std::string results = settings.need("output.results");
      const std::string aggregate = settings.need("output.aggregate");
      check(gk_experiment_run(e.get(), ds.get(), results.c_str(), aggregate.c_str()));
    }
  } catch (const Failure& f) {
    return report(f.status, f.message);
  } catch (const pt::ptree_error& e) {
    return report(GK_INVALID_ARGUMENT, e.what());
  }
  return 0;
}
