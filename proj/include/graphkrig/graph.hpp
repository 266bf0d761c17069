#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphkrig/numerics.hpp"

namespace graphkrig {

inline constexpr std::size_t kDefaultDenseCap = 2000;

struct EdgeRow {
  std::size_t src = 0;
  std::size_t dst = 0;
  double weight = 1.0;
};

/// Weighted directed graph with w_ii = 0, stored densely.
class WeightedDigraph {
 public:
  /// Duplicate (src, dst) rows are summed; self-loops are dropped and
  /// counted. The node count defaults to 1 + the largest index seen.
  static WeightedDigraph from_edge_list(std::span<const EdgeRow> rows,
                                        std::optional<std::size_t> node_count = std::nullopt,
                                        std::size_t dense_cap = kDefaultDenseCap);

  /// Builds from a dense nonnegative matrix; the diagonal is ignored.
  static WeightedDigraph from_dense(const Matrix& weights);

  std::size_t size() const { return static_cast<std::size_t>(weights_.rows()); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t dropped_loops() const { return dropped_loops_; }

  const Matrix& weights() const { return weights_; }
  const std::vector<EdgeRow>& edges() const { return edges_; }
  double weight(std::size_t i, std::size_t j) const { return weights_(Index(i), Index(j)); }

  const Vector& out_degrees() const { return out_; }
  const Vector& in_degrees() const { return in_; }
  double out_degree(std::size_t i) const { return out_(Index(i)); }
  double in_degree(std::size_t i) const { return in_(Index(i)); }
  double volume() const { return volume_; }

  bool is_symmetric() const;
  bool is_strongly_connected() const;

  /// The graph with weights W + W'.
  WeightedDigraph symmetrized() const;

 private:
  WeightedDigraph(Matrix weights, std::size_t dropped_loops);

  Matrix weights_;
  std::vector<EdgeRow> edges_;
  Vector out_;
  Vector in_;
  double volume_ = 0.0;
  std::size_t dropped_loops_ = 0;
};

/// Random-walk transition matrix and its stationary distribution.
struct WalkQuantities {
  Matrix transition;
  Vector stationary;
  double teleport = 0.0;
};

/// Symmetric similarity matrix and the Laplacian of the graph it weights:
/// L_ii = s_i+ - s_ii, L_ij = -s_ij.
struct SimilarityGraph {
  Matrix similarity;
  Matrix laplacian;
};

/// Hub and authority walks over a directed graph.
struct HubAuthorityQuantities {
  Matrix hub_transition;
  Matrix authority_transition;
  Vector hub_stationary;
  Vector authority_stationary;
  Matrix hub_laplacian;
  Matrix authority_laplacian;
  std::vector<bool> is_hub;
  std::vector<bool> is_authority;
};

/// Transition matrix P_ij = w_ij / w_i+ and its stationary vector.
///
/// With teleport t > 0 the walk becomes (1 - t) P + t/n, and rows of
/// dangling nodes are uniform. With t = 0 the walk must be irreducible.
/// The stationary vector is found by power iteration on the lazy chain
/// (I + P)/2, which shares its fixed point with P and is aperiodic.
WalkQuantities walk_quantities(const WeightedDigraph& g, double teleport = 0.0);

/// s_ij = pi_i P_ij + pi_j P_ji.
SimilarityGraph similarity_matrix(const WalkQuantities& wq);

/// Laplacian of the weight matrix. With `symmetrize` the weights are W + W';
/// otherwise the graph must already be symmetric.
SimilarityGraph weight_laplacian(const WeightedDigraph& g, bool symmetrize);

/// Laplacian diag(s 1) - s of a symmetric similarity matrix.
Matrix laplacian_of(const Matrix& similarity);

HubAuthorityQuantities hub_authority(const WeightedDigraph& g);

// Edge-list ingestion: `src<TAB>dst[<TAB>weight]` with arbitrary string ids.

struct NamedEdgeList {
  std::vector<std::string> names;  // dense index -> id, first-seen order
  std::vector<EdgeRow> rows;
};

/// Parses TSV edge lines. Blank lines and lines starting with '#' are
/// skipped. Throws ErrorCode::Parse naming the offending line.
NamedEdgeList read_edge_list(std::istream& in, const std::string& source = "<edges>");

}  // namespace graphkrig
