#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <cmath>

#include "graphkrig/error.hpp"
#include "graphkrig/smoothers.hpp"
#include "support/criteria.hpp"
#include "support/oracles.hpp"

using namespace graphkrig;

namespace {

PartitionedData observe(const std::vector<std::size_t>& idx, const Vector& values) {
  PartitionedData d;
  d.observed = idx;
  d.values = values;
  return d;
}

PartitionedData observe_all(const Vector& values) {
  std::vector<std::size_t> idx(std::size_t(values.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return observe(idx, values);
}

PartitionedData random_partition(std::size_t n, std::size_t r, Rng& rng) {
  return observe(oracle::random_subset(n, r, rng), oracle::random_vector(Index(r), rng, -2.0, 2.0));
}

Matrix pinv(const Matrix& a) { return a.completeOrthogonalDecomposition().pseudoInverse(); }

Matrix laplacian_direct(const Matrix& s) {
  Matrix lap = -s;
  lap.diagonal().setZero();
  for (Index i = 0; i < s.rows(); ++i) lap(i, i) = s.row(i).sum() - s(i, i);
  return lap;
}

// Row-normalized walk, eigenvector stationary vector and similarity, by hand.
struct DirectWalk {
  Vector pi;
  Matrix laplacian;
};

DirectWalk direct_walk(const WeightedDigraph& g) {
  const Matrix& w = g.weights();
  Matrix p = w;
  for (Index i = 0; i < p.rows(); ++i) p.row(i) /= w.row(i).sum();
  DirectWalk out;
  out.pi = oracle::eigen_stationary(p);
  Matrix s = out.pi.asDiagonal() * p;
  s = s + s.transpose().eval();
  out.laplacian = laplacian_direct(s);
  return out;
}

}  // namespace

TEST(Assemble, RandomWalkOnTwoCycle) {
  Matrix w(2, 2);
  w << 0, 1, 1, 0;
  const WeightedDigraph g = WeightedDigraph::from_dense(w);
  SmootherSpec spec;
  spec.lambda = 1.0;
  const QuadraticProblem p = assemble(spec, g, observe({0}, Vector::Constant(1, 3.0)));
  Matrix expected(2, 2);
  expected << 2, -2, -2, 2;
  EXPECT_LT(max_abs(p.smoothing - expected), 1e-12);
  EXPECT_NEAR(p.mean_direction(0), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(p.fidelity(0), 1.0, 0.0);
  EXPECT_NEAR(p.fidelity(1), 1.0, 0.0);
}

TEST(Assemble, TikhonovFidelityIsZeroOffTheObservedSet) {
  Rng rng(11);
  const WeightedDigraph g = oracle::random_undirected(8, 6, rng);
  SmootherSpec spec;
  spec.method = SmootherMethod::Tikhonov;
  spec.lambda0 = 3.5;
  const PartitionedData d = observe({1, 4, 6}, Vector::Constant(3, 1.0));
  const QuadraticProblem p = assemble(spec, g, d);
  for (Index i = 0; i < 8; ++i) {
    const bool obs = i == 1 || i == 4 || i == 6;
    EXPECT_EQ(p.fidelity(i), obs ? 3.5 : 0.0) << "node " << i;
  }
  EXPECT_LT(max_abs(p.smoothing - laplacian_direct(g.weights())), 1e-12);
}

TEST(Assemble, HubAuthorityWithGammaOneKeepsOnlyTheHubTerm) {
  Rng rng(12);
  // Complete, so the co-citation graph is connected.
  Matrix w = oracle::random_vector(81, rng, 0.5, 2.0).reshaped(9, 9);
  w.diagonal().setZero();
  const WeightedDigraph g = WeightedDigraph::from_dense(w);
  const HubAuthorityQuantities q = hub_authority(g);
  const Vector inv_sqrt = q.hub_stationary.cwiseSqrt().cwiseInverse();
  const Matrix expected = inv_sqrt.asDiagonal() * q.hub_laplacian * inv_sqrt.asDiagonal();
  SmootherSpec spec;
  spec.method = SmootherMethod::HubAuthority;
  spec.gamma = 1.0;
  const QuadraticProblem p = assemble(spec, g, observe({0}, Vector::Constant(1, 1.0)));
  EXPECT_LT(max_abs(p.smoothing - expected), 1e-10);
}

TEST(Assemble, TargetUsesMuGuessOnUnobservedNodes) {
  Rng rng(13);
  const WeightedDigraph g = oracle::random_digraph(6, 5, rng);
  SmootherSpec spec;
  spec.mu_guess = 2.5;
  const QuadraticProblem p = assemble(spec, g, observe({2}, Vector::Constant(1, -7.0)));
  for (Index i = 0; i < 6; ++i) {
    const double expected = i == 2 ? -7.0 : 2.5 * p.mean_direction(i);
    EXPECT_DOUBLE_EQ(p.target(i), expected);
  }
}

TEST(Assemble, RejectsGammaOutsideUnitInterval) {
  Rng rng(14);
  const WeightedDigraph g = oracle::random_digraph(5, 3, rng);
  SmootherSpec spec;
  spec.method = SmootherMethod::HubAuthority;
  for (double gamma : {-0.1, 1.5}) {
    spec.gamma = gamma;
    try {
      assemble(spec, g, observe({0}, Vector::Constant(1, 1.0)));
      FAIL() << "gamma " << gamma << " accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
  }
}

TEST(Assemble, RejectsReducibleWalkWithoutTeleport) {
  const std::vector<EdgeRow> rows{{0, 1, 1.0}, {1, 2, 1.0}};
  const WeightedDigraph g = WeightedDigraph::from_edge_list(rows);
  SmootherSpec spec;
  const PartitionedData d = observe({0}, Vector::Constant(1, 1.0));
  try {
    assemble(spec, g, d);
    FAIL() << "reducible walk accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Reducible);
  }
  spec.teleport = 0.15;
  EXPECT_NO_THROW(assemble(spec, g, d));
}

TEST(QuadraticSmooth, ZeroSmoothingReturnsTarget) {
  const Vector target = (Vector(4) << 1.0, -2.0, 0.5, 3.0).finished();
  const Vector out = quadratic_smooth(Matrix::Zero(4, 4), Vector::Constant(4, 0.7), target);
  EXPECT_LT((out - target).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(QuadraticSmooth, EqualSmoothingAndFidelityHalvesTarget) {
  const double lambda = 2.75;
  const Vector target = (Vector(3) << 4.0, -1.0, 9.0).finished();
  const Matrix smoothing = lambda * Matrix::Identity(3, 3);
  const Vector out = quadratic_smooth(smoothing, Vector::Constant(3, lambda), target);
  EXPECT_LT((out - target / 2.0).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(QuadraticSmooth, RandomWalkMatchesDirectInverse) {
  Rng rng(21);
  const WeightedDigraph g = oracle::random_digraph(5, 4, rng);
  const DirectWalk walk = direct_walk(g);
  const Vector inv_sqrt = walk.pi.cwiseSqrt().cwiseInverse();
  const Matrix l = inv_sqrt.asDiagonal() * walk.laplacian * inv_sqrt.asDiagonal();
  SmootherSpec spec;
  spec.lambda = 0.4;
  const Vector y = oracle::random_vector(5, rng);
  const Vector expected = (Matrix::Identity(5, 5) + l / spec.lambda).inverse() * y;
  const Vector got = quadratic_smooth(assemble(spec, g, observe_all(y)));
  EXPECT_LT((got - expected).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(QuadraticSmooth, RejectsSingularSystem) {
  // Two components; the second has no observed node and lambda1 = 0.
  const std::vector<EdgeRow> rows{{0, 1, 1.0}, {1, 0, 1.0}, {2, 3, 1.0}, {3, 2, 1.0}};
  const WeightedDigraph g = WeightedDigraph::from_edge_list(rows);
  SmootherSpec spec;
  spec.method = SmootherMethod::Tikhonov;
  const QuadraticProblem p = assemble(spec, g, observe({0}, Vector::Constant(1, 1.0)));
  try {
    quadratic_smooth(p);
    FAIL() << "singular L + Lambda accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Numeric);
  }
}

TEST(KrigingEquivalent, RandomWalkRow) {
  Rng rng(31);
  const WeightedDigraph g = oracle::random_digraph(7, 9, rng);
  const DirectWalk walk = direct_walk(g);
  const Vector sqrt_pi = walk.pi.cwiseSqrt();
  SmootherSpec spec;
  spec.lambda = 2.0;
  const KrigingModel m = kriging_equivalent(spec, g, observe({3}, Vector::Constant(1, 1.0)));
  const Matrix sigma = sqrt_pi.asDiagonal() * pinv(walk.laplacian) * sqrt_pi.asDiagonal();
  EXPECT_LT(max_abs(m.signal_cov - sigma), 1e-9);
  EXPECT_LT((m.mean_direction - sqrt_pi).lpNorm<Eigen::Infinity>(), 1e-10);
  EXPECT_LT((m.noise_var - Vector::Constant(7, 0.5)).lpNorm<Eigen::Infinity>(), 1e-15);
  EXPECT_EQ(m.diffuse_var, kLimitScale);
}

TEST(KrigingEquivalent, Zhou2004Row) {
  Rng rng(32);
  const WeightedDigraph g = oracle::random_undirected(8, 7, rng);
  const Vector degree = g.weights().rowwise().sum();
  const Vector sqrt_d = degree.cwiseSqrt();
  SmootherSpec spec;
  spec.method = SmootherMethod::Zhou2004;
  const KrigingModel m = kriging_equivalent(spec, g, observe({0}, Vector::Constant(1, 1.0)));
  const Matrix sigma = sqrt_d.asDiagonal() * pinv(laplacian_direct(g.weights())) * sqrt_d.asDiagonal();
  EXPECT_LT(max_abs(m.signal_cov - sigma), 1e-9);
  EXPECT_LT((m.mean_direction - sqrt_d).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(KrigingEquivalent, SpectralTransformPositiveAtZero) {
  Rng rng(33);
  const WeightedDigraph g = oracle::random_undirected(7, 5, rng);
  SmootherSpec spec;
  spec.method = SmootherMethod::SpectralTransform;
  spec.alpha = 0.8;
  const KrigingModel m = kriging_equivalent(spec, g, observe({1}, Vector::Constant(1, 1.0)));
  Eigen::SelfAdjointEigenSolver<Matrix> es(laplacian_direct(g.weights()));
  Matrix sigma = Matrix::Zero(7, 7);
  for (Index i = 0; i < 7; ++i) {
    const double d = std::abs(es.eigenvalues()(i)) < 1e-10 ? 0.0 : es.eigenvalues()(i);
    const Vector u = es.eigenvectors().col(i);
    sigma += std::exp(-0.32 * d) * u * u.transpose();
  }
  EXPECT_LT(max_abs(m.signal_cov - sigma), 1e-10);
  EXPECT_EQ(m.mean_direction.lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_EQ(m.diffuse_var, 0.0);
}

TEST(KrigingEquivalent, SpectralTransformZeroAtZeroIsDiffuse) {
  Rng rng(34);
  const WeightedDigraph g = oracle::random_undirected(7, 5, rng);
  SmootherSpec spec;
  spec.method = SmootherMethod::SpectralTransform;
  spec.transform = expm1_transform(1.0);
  const KrigingModel m = kriging_equivalent(spec, g, observe({1}, Vector::Constant(1, 1.0)));
  EXPECT_LT((m.mean_direction - Vector::Ones(7)).lpNorm<Eigen::Infinity>(), 1e-15);
  EXPECT_EQ(m.diffuse_var, kLimitScale);
}

TEST(KrigingEquivalent, EveryRowReproducesItsSmoother) {
  Rng rng(35);
  for (int rep = 0; rep < 5; ++rep) {
    const WeightedDigraph g = oracle::random_undirected(12, 10, rng);
    const PartitionedData d = random_partition(12, 5, rng);
    std::vector<SmootherSpec> specs;
    for (SmootherMethod method :
         {SmootherMethod::RandomWalk, SmootherMethod::Tikhonov, SmootherMethod::TikhonovInterpolated,
          SmootherMethod::Zhou2004, SmootherMethod::HubAuthority, SmootherMethod::SpectralTransform}) {
      SmootherSpec s;
      s.method = method;
      s.lambda = 0.7;
      s.lambda0 = 2.0;
      s.mu_guess = 0.3;
      specs.push_back(s);
    }
    SmootherSpec tik1 = specs[1];
    tik1.lambda1 = 0.2;
    specs.push_back(tik1);
    SmootherSpec manifold;
    manifold.method = SmootherMethod::ManifoldLinear;
    manifold.kernel = 0.5 * Matrix::Identity(12, 12);
    specs.push_back(manifold);
    manifold.kernel = Matrix::Identity(12, 12) - Matrix::Constant(12, 12, 1.0 / 12.0);
    specs.push_back(manifold);
    for (const SmootherSpec& s : specs) {
      EXPECT_LT(oracle::equivalence_residual(s, g, d), 1e-5) << method_name(s.method);
    }
  }
}

TEST(Invariants, RandomWalkAnnihilatesMeanDirection) {
  Rng rng(41);
  const WeightedDigraph g = oracle::random_digraph(10, 14, rng);
  SmootherSpec spec;
  spec.lambda = 0.3;
  const Vector x = direct_walk(g).pi.cwiseSqrt();
  for (double c : {-4.0, 0.0, 1.0, 17.5}) {
    const Vector out = quadratic_smooth(assemble(spec, g, observe_all(c * x)));
    EXPECT_LT((out - c * x).lpNorm<Eigen::Infinity>(), 1e-8) << "c = " << c;
  }
}

TEST(Invariants, ZhouEqualsRandomWalkWithHalvedLambda) {
  Rng rng(42);
  for (int rep = 0; rep < 5; ++rep) {
    const WeightedDigraph g = oracle::random_undirected(10, 8, rng);
    const Vector y = oracle::random_vector(10, rng);
    SmootherSpec zhou;
    zhou.method = SmootherMethod::Zhou2004;
    zhou.lambda = 0.6;
    SmootherSpec walk;
    walk.lambda = 2.0 * zhou.lambda;
    const Vector a = quadratic_smooth(assemble(zhou, g, observe_all(y)));
    const Vector b = quadratic_smooth(assemble(walk, g, observe_all(y)));
    EXPECT_LT((a - b).lpNorm<Eigen::Infinity>(), 1e-8);
  }
}

TEST(Invariants, InterpolatedTikhonovMatchesExactSolve) {
  Rng rng(43);
  for (int rep = 0; rep < 5; ++rep) {
    const WeightedDigraph g = oracle::random_undirected(12, 9, rng);
    const PartitionedData d = random_partition(12, 4, rng);
    SmootherSpec spec;
    spec.method = SmootherMethod::TikhonovInterpolated;
    const Vector limit = predict_partial(kriging_equivalent(spec, g, d), d);
    const Vector exact = interpolate_harmonic(laplacian_direct(g.weights()), d);
    EXPECT_LT((limit - exact).lpNorm<Eigen::Infinity>(), 1e-6);
    for (std::size_t k = 0; k < d.count(); ++k) {
      EXPECT_DOUBLE_EQ(exact(Index(d.observed[k])), d.values(Index(k)));
    }
  }
}
