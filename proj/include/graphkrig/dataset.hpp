#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "graphkrig/graph.hpp"
#include "graphkrig/kriging.hpp"

namespace graphkrig {

enum class LabelKind { Continuous, Binary };

/// A graph with node ids and 0 or 1 observed response per node.
struct Dataset {
  std::vector<std::string> names;  // index -> id, first-seen order in the edge file
  WeightedDigraph graph;
  PartitionedData labels;          // observed in ascending node order
  LabelKind kind = LabelKind::Continuous;

  bool binary() const { return kind == LabelKind::Binary; }
  /// Node index for an id; throws NotFound.
  std::size_t index_of(std::string_view id) const;

  /// All labels as a length-n vector (0 where unobserved).
  Vector label_vector() const;

  std::unordered_map<std::string, std::size_t> id_index;
};

/// Labels are CSV `node,label`; a first line whose label is not numeric is
/// taken as a header. Unknown nodes, malformed lines, duplicate rows and
/// (for binary data) labels other than +1/-1 are rejected.
Dataset make_dataset(NamedEdgeList edges, std::istream& labels, const std::string& labels_source,
                     LabelKind kind, std::size_t dense_cap = kDefaultDenseCap);

Dataset load_dataset(const std::string& graph_path, const std::string& labels_path, LabelKind kind,
                     std::size_t dense_cap = kDefaultDenseCap);

struct DegreeQuantiles {
  double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};

struct GraphSummary {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t dropped_loops = 0;
  double volume = 0.0;
  double zero_percent = 0.0;  // share of the n^2 entries of W that are zero
  bool symmetric = false;
  bool strongly_connected = false;
  DegreeQuantiles out_degree;
  DegreeQuantiles in_degree;
};

GraphSummary describe(const WeightedDigraph& g);

/// `key,value` lines.
void write_summary(std::ostream& out, const GraphSummary& s, std::size_t labeled);

}  // namespace graphkrig
