#pragma once

#include <functional>
#include <string_view>

#include "graphkrig/graph.hpp"
#include "graphkrig/kriging.hpp"

namespace graphkrig {

/// Numeric stand-in for the improper limits delta -> 0, lambda_1 -> 0 and
/// lambda_0 -> infinity. Tunable; equivalence residuals sit near 1e-11.
inline constexpr double kLimitScale = 1e12;

enum class SmootherMethod {
  RandomWalk,
  Tikhonov,
  TikhonovInterpolated,
  Zhou2004,
  HubAuthority,
  ManifoldLinear,
  SpectralTransform,
};

std::string_view method_name(SmootherMethod m);

/// Parameters of one quadratic-criterion smoother
///   Q(Z) = Z' L Z + (Z - Y*)' Lambda (Z - Y*).
struct SmootherSpec {
  SmootherMethod method = SmootherMethod::RandomWalk;
  double lambda = 1.0;     // RandomWalk, Zhou2004, HubAuthority
  double lambda0 = 1.0;    // Tikhonov-style fidelity on observed nodes
  double lambda1 = 0.0;    // Tikhonov-style fidelity on unobserved nodes
  double gamma = 0.5;      // HubAuthority weight in [0,1]; ManifoldLinear multiplier > 0
  Matrix kernel;           // ManifoldLinear K (PSD)
  std::function<double(double)> transform;  // SpectralTransform f; exp(alpha^2 x/2) if empty
  double alpha = 1.0;      // parameter of the default spectral transform
  double mu_guess = 0.0;   // Y*_i = mu_guess * X_i on unobserved nodes
  double teleport = 0.0;   // RandomWalk damping

  void validate() const;
};

/// f(x) = exp(alpha^2 x / 2), positive at 0.
std::function<double(double)> exp_transform(double alpha);
/// f(x) = exp(alpha^2 x / 2) - 1, zero at 0.
std::function<double(double)> expm1_transform(double alpha);

struct QuadraticProblem {
  Matrix smoothing;       // L
  Vector fidelity;        // diag(Lambda)
  Vector target;          // Y*
  Vector mean_direction;  // X used to fill Y* on unobserved nodes
};

QuadraticProblem assemble(const SmootherSpec& spec, const WeightedDigraph& g,
                          const PartitionedData& d);

/// (L + Lambda)^{-1} Lambda Y*.
Vector quadratic_smooth(const Matrix& smoothing, const Vector& fidelity, const Vector& target);
Vector quadratic_smooth(const QuadraticProblem& p);

/// The kriging model whose predictor reproduces the smoother. Limits are
/// realized with kLimitScale. Gamma depends on which nodes are observed,
/// so the partition is required.
KrigingModel kriging_equivalent(const SmootherSpec& spec, const WeightedDigraph& g,
                                const PartitionedData& d);

/// Exact interpolating Tikhonov solution: Z0 = y0, Z1 = -L11^{-1} L10 y0.
Vector interpolate_harmonic(const Matrix& laplacian, const PartitionedData& d);

/// Weights used by the undirected methods: W when symmetric, else W + W'.
SimilarityGraph undirected_laplacian(const WeightedDigraph& g);

}  // namespace graphkrig
