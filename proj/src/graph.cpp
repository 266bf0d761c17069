#include "graphkrig/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "graphkrig/error.hpp"

namespace graphkrig {

namespace {

constexpr double kStationaryTol = 1e-12;
constexpr int kMaxPowerIterations = 100000;

bool reaches_all(const Matrix& w, bool forward) {
  const Index n = w.rows();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<Index> stack{0};
  seen[0] = 1;
  Index count = 1;
  while (!stack.empty()) {
    const Index i = stack.back();
    stack.pop_back();
    for (Index j = 0; j < n; ++j) {
      const double wij = forward ? w(i, j) : w(j, i);
      if (wij > 0.0 && !seen[std::size_t(j)]) {
        seen[std::size_t(j)] = 1;
        ++count;
        stack.push_back(j);
      }
    }
  }
  return count == n;
}

Vector safe_inverse(const Vector& d) {
  Vector out = Vector::Zero(d.size());
  for (Index i = 0; i < d.size(); ++i) {
    if (d(i) > 0.0) out(i) = 1.0 / d(i);
  }
  return out;
}

}  // namespace

WeightedDigraph::WeightedDigraph(Matrix weights, std::size_t dropped_loops)
    : weights_(std::move(weights)), dropped_loops_(dropped_loops) {
  const Index n = weights_.rows();
  weights_.diagonal().setZero();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (weights_(i, j) != 0.0) {
        edges_.push_back({std::size_t(i), std::size_t(j), weights_(i, j)});
      }
    }
  }
  out_ = weights_.rowwise().sum();
  in_ = weights_.colwise().sum().transpose();
  volume_ = weights_.sum();
}

WeightedDigraph WeightedDigraph::from_edge_list(std::span<const EdgeRow> rows,
                                                std::optional<std::size_t> node_count,
                                                std::size_t dense_cap) {
  std::size_t n = node_count.value_or(0);
  if (!node_count) {
    for (const auto& r : rows) n = std::max({n, r.src + 1, r.dst + 1});
  }
  if (n == 0) fail(ErrorCode::InvalidArgument, "from_edge_list: empty graph");
  if (n > dense_cap) {
    std::ostringstream msg;
    msg << "from_edge_list: " << n << " nodes exceeds the dense representation cap " << dense_cap;
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  Matrix w = Matrix::Zero(Index(n), Index(n));
  std::size_t loops = 0;
  for (const auto& r : rows) {
    if (r.src >= n || r.dst >= n) {
      std::ostringstream msg;
      msg << "from_edge_list: edge (" << r.src << ", " << r.dst << ") outside [0, " << n << ")";
      fail(ErrorCode::InvalidArgument, msg.str());
    }
    if (!std::isfinite(r.weight) || r.weight < 0.0) {
      std::ostringstream msg;
      msg << "from_edge_list: invalid weight " << r.weight << " on edge (" << r.src << ", "
          << r.dst << ")";
      fail(ErrorCode::InvalidArgument, msg.str());
    }
    if (r.src == r.dst) {
      ++loops;
      continue;
    }
    w(Index(r.src), Index(r.dst)) += r.weight;
  }
  return WeightedDigraph(std::move(w), loops);
}

WeightedDigraph WeightedDigraph::from_dense(const Matrix& weights) {
  require(weights.rows() == weights.cols(), "from_dense: weight matrix must be square");
  if (weights.rows() == 0) fail(ErrorCode::InvalidArgument, "from_dense: empty graph");
  if (!weights.allFinite() || weights.minCoeff() < 0.0) {
    fail(ErrorCode::InvalidArgument, "from_dense: weights must be finite and nonnegative");
  }
  return WeightedDigraph(weights, 0);
}

bool WeightedDigraph::is_symmetric() const { return weights_ == weights_.transpose(); }

bool WeightedDigraph::is_strongly_connected() const {
  return reaches_all(weights_, true) && reaches_all(weights_, false);
}

WeightedDigraph WeightedDigraph::symmetrized() const {
  return WeightedDigraph(weights_ + weights_.transpose(), dropped_loops_);
}

WalkQuantities walk_quantities(const WeightedDigraph& g, double teleport) {
  if (!(teleport >= 0.0 && teleport < 1.0)) {
    fail(ErrorCode::InvalidArgument, "walk_quantities: teleport must lie in [0, 1)");
  }
  const Index n = Index(g.size());
  const Vector& out = g.out_degrees();
  if (teleport == 0.0) {
    for (Index i = 0; i < n; ++i) {
      if (!(out(i) > 0.0)) {
        std::ostringstream msg;
        msg << "walk_quantities: node " << i << " has no out-links; set teleport > 0";
        fail(ErrorCode::Reducible, msg.str());
      }
    }
    if (!g.is_strongly_connected()) {
      fail(ErrorCode::Reducible,
           "walk_quantities: random walk is reducible; set teleport > 0");
    }
  }

  WalkQuantities wq;
  wq.teleport = teleport;
  wq.transition.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    if (out(i) > 0.0) {
      wq.transition.row(i) = (1.0 - teleport) * g.weights().row(i) / out(i);
      wq.transition.row(i).array() += teleport / double(n);
    } else {
      wq.transition.row(i).setConstant(1.0 / double(n));
    }
  }

  const Matrix transition_t = wq.transition.transpose();
  Vector pi = Vector::Constant(n, 1.0 / double(n));
  bool converged = false;
  for (int it = 0; it < kMaxPowerIterations; ++it) {
    Vector next = 0.5 * (pi + transition_t * pi);
    next /= next.sum();
    const double step = (next - pi).lpNorm<1>();
    pi = std::move(next);
    if (step < kStationaryTol) {
      converged = true;
      break;
    }
  }
  const double residual = (transition_t * pi - pi).lpNorm<Eigen::Infinity>();
  if (!converged || residual >= 1e-10) {
    std::ostringstream msg;
    msg << "walk_quantities: power iteration did not converge (residual " << residual << ")";
    fail(ErrorCode::Numeric, msg.str());
  }
  wq.stationary = std::move(pi);
  return wq;
}

Matrix laplacian_of(const Matrix& similarity) {
  Matrix lap = -similarity;
  // L_ii = s_i+ - s_ii
  lap.diagonal() = similarity.rowwise().sum() - similarity.diagonal();
  return lap;
}

SimilarityGraph similarity_matrix(const WalkQuantities& wq) {
  Matrix s = wq.stationary.asDiagonal() * wq.transition;
  SimilarityGraph out;
  out.similarity = s + s.transpose();
  out.laplacian = laplacian_of(out.similarity);
  return out;
}

SimilarityGraph weight_laplacian(const WeightedDigraph& g, bool symmetrize) {
  if (!symmetrize && !g.is_symmetric()) {
    fail(ErrorCode::InvalidArgument,
         "weight_laplacian: graph is directed; pass symmetrize to use W + W'");
  }
  SimilarityGraph out;
  out.similarity = symmetrize ? Matrix(g.weights() + g.weights().transpose()) : g.weights();
  out.laplacian = laplacian_of(out.similarity);
  return out;
}

HubAuthorityQuantities hub_authority(const WeightedDigraph& g) {
  if (!(g.volume() > 0.0)) fail(ErrorCode::InvalidArgument, "hub_authority: graph has no edges");
  const Matrix& w = g.weights();
  const Vector out_inv = safe_inverse(g.out_degrees());
  const Vector in_inv = safe_inverse(g.in_degrees());

  HubAuthorityQuantities q;
  // P_H(i,j) = sum_a w_ia/w_i+ * w_ja/w_+a ; P_A(i,j) = sum_h w_hi/w_+i * w_hj/w_h+
  q.hub_transition = out_inv.asDiagonal() * w * in_inv.asDiagonal() * w.transpose();
  q.authority_transition = in_inv.asDiagonal() * w.transpose() * out_inv.asDiagonal() * w;
  q.hub_stationary = g.out_degrees() / g.volume();
  q.authority_stationary = g.in_degrees() / g.volume();

  Matrix sh = q.hub_stationary.asDiagonal() * q.hub_transition;
  Matrix sa = q.authority_stationary.asDiagonal() * q.authority_transition;
  q.hub_laplacian = laplacian_of(sh + sh.transpose());
  q.authority_laplacian = laplacian_of(sa + sa.transpose());

  const std::size_t n = g.size();
  q.is_hub.resize(n);
  q.is_authority.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    q.is_hub[i] = g.out_degree(i) > 0.0;
    q.is_authority[i] = g.in_degree(i) > 0.0;
  }
  return q;
}

}  // namespace graphkrig
