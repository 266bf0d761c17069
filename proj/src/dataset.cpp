#include "graphkrig/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "graphkrig/error.hpp"
#include "graphkrig/spline.hpp"
#include "graphkrig/textio.hpp"

namespace graphkrig {

namespace {

DegreeQuantiles quantiles(const Vector& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  return {s.front(), sorted_quantile(s, 0.25), sorted_quantile(s, 0.5), sorted_quantile(s, 0.75),
          s.back()};
}

}  // namespace

std::size_t Dataset::index_of(std::string_view id) const {
  const auto it = id_index.find(std::string(id));
  if (it == id_index.end()) fail(ErrorCode::NotFound, "unknown node '" + std::string(id) + "'");
  return it->second;
}

Vector Dataset::label_vector() const {
  Vector out = Vector::Zero(Index(graph.size()));
  for (std::size_t k = 0; k < labels.count(); ++k) out(Index(labels.observed[k])) = labels.values(Index(k));
  return out;
}

Dataset make_dataset(NamedEdgeList edges, std::istream& in, const std::string& source,
                     LabelKind kind, std::size_t dense_cap) {
  if (edges.rows.empty()) fail(ErrorCode::Parse, "edge list is empty");
  const std::size_t n = edges.names.size();
  Dataset ds{std::move(edges.names), WeightedDigraph::from_edge_list(edges.rows, n, dense_cap),
             {}, kind, {}};
  for (std::size_t i = 0; i < ds.names.size(); ++i) ds.id_index.emplace(ds.names[i], i);

  std::map<std::size_t, double> seen;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto bad = [&](const std::string& why) {
      std::ostringstream msg;
      msg << source << ":" << line_no << ": " << why;
      fail(ErrorCode::Parse, msg.str());
    };
    const auto fields = split(body, ',');
    if (fields.size() != 2) bad("expected node,label");
    const std::string id(trim(fields[0]));
    const auto value = parse_number(fields[1]);
    if (!value) {
      if (first) {
        first = false;
        continue;
      }
      bad("label is not a number");
    }
    first = false;
    if (id.empty()) bad("empty node id");
    if (!std::isfinite(*value)) bad("label is not finite");
    if (kind == LabelKind::Binary && *value != 1.0 && *value != -1.0) {
      bad("binary label must be 1 or -1");
    }
    const auto it = ds.id_index.find(id);
    if (it == ds.id_index.end()) {
      std::ostringstream msg;
      msg << source << ":" << line_no << ": unknown node '" << id << "'";
      fail(ErrorCode::NotFound, msg.str());
    }
    if (!seen.emplace(it->second, *value).second) bad("duplicate label for node '" + id + "'");
  }
  ds.labels.values.resize(Index(seen.size()));
  Index k = 0;
  for (const auto& [node, value] : seen) {
    ds.labels.observed.push_back(node);
    ds.labels.values(k++) = value;
  }
  return ds;
}

Dataset load_dataset(const std::string& graph_path, const std::string& labels_path,
                     LabelKind kind, std::size_t dense_cap) {
  std::ifstream graph_in(graph_path);
  if (!graph_in) fail(ErrorCode::Io, "cannot open " + graph_path);
  NamedEdgeList edges = read_edge_list(graph_in, graph_path);
  std::ifstream labels_in(labels_path);
  if (!labels_in) fail(ErrorCode::Io, "cannot open " + labels_path);
  return make_dataset(std::move(edges), labels_in, labels_path, kind, dense_cap);
}

GraphSummary describe(const WeightedDigraph& g) {
  GraphSummary s;
  s.nodes = g.size();
  s.edges = g.edge_count();
  s.dropped_loops = g.dropped_loops();
  s.volume = g.volume();
  const double cells = double(s.nodes) * double(s.nodes);
  s.zero_percent = 100.0 * (cells - double(s.edges)) / cells;
  s.symmetric = g.is_symmetric();
  s.strongly_connected = g.is_strongly_connected();
  s.out_degree = quantiles(g.out_degrees());
  s.in_degree = quantiles(g.in_degrees());
  return s;
}

void write_summary(std::ostream& out, const GraphSummary& s, std::size_t labeled) {
  auto q = [&](const char* name, const DegreeQuantiles& d) {
    out << name << "_min," << format_number(d.min) << '\n'
        << name << "_q25," << format_number(d.q25) << '\n'
        << name << "_median," << format_number(d.median) << '\n'
        << name << "_q75," << format_number(d.q75) << '\n'
        << name << "_max," << format_number(d.max) << '\n';
  };
  out << "key,value\n"
      << "nodes," << s.nodes << '\n'
      << "edges," << s.edges << '\n'
      << "self_loops_dropped," << s.dropped_loops << '\n'
      << "labeled," << labeled << '\n'
      << "volume," << format_number(s.volume) << '\n'
      << "zero_percent," << format_number(s.zero_percent) << '\n'
      << "symmetric," << (s.symmetric ? "true" : "false") << '\n'
      << "strongly_connected," << (s.strongly_connected ? "true" : "false") << '\n';
  q("out_degree", s.out_degree);
  q("in_degree", s.in_degree);
}

}  // namespace graphkrig
