#include "graphkrig/smoothers.hpp"

#include <cmath>
#include <sstream>

#include "graphkrig/error.hpp"

namespace graphkrig {

namespace {

constexpr double kRankTol = 1e-10;

// L, the mean direction X, and (on request) the kriging signal covariance
// for one method.
struct Geometry {
  Matrix smoothing;
  Vector mean_direction;
  Matrix signal_cov;
  bool diffuse = false;
};

bool uses_uniform_fidelity(SmootherMethod m) {
  return m == SmootherMethod::RandomWalk || m == SmootherMethod::Zhou2004 ||
         m == SmootherMethod::HubAuthority;
}

Vector inv_sqrt_positive(const Vector& v, const char* what) {
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    if (!(v(i) > 0.0)) {
      std::ostringstream msg;
      msg << what << " is zero at node " << i;
      fail(ErrorCode::InvalidArgument, msg.str());
    }
    out(i) = 1.0 / std::sqrt(v(i));
  }
  return out;
}

// L = diag(pi)^{-1/2} lap diag(pi)^{-1/2}.
Matrix normalized(const Matrix& lap, const Vector& inv_sqrt) {
  return symmetrized(scale_symmetric(lap, inv_sqrt));
}

// Diffuse-direction covariance for a PSD L with a one-dimensional null space,
// or its inverse when L is definite.
void cov_from_smoothing(Geometry& geo, const char* what) {
  const SymEig eig = sym_eig(geo.smoothing);
  const Index n = eig.values.size();
  const double top = eig.values(0);
  const double tol = kRankTol * top;
  if (eig.values(n - 1) > tol) {
    geo.signal_cov = pseudo_inverse(eig, kRankTol);
    geo.mean_direction = Vector::Zero(n);
    geo.diffuse = false;
    return;
  }
  if (n >= 2 && eig.values(n - 2) <= tol) {
    fail(ErrorCode::InvalidArgument,
         std::string(what) + ": smoothing matrix has more than one null direction");
  }
  Vector null = eig.vectors.row(n - 1).transpose();
  if (null.sum() < 0.0) null = -null;
  geo.signal_cov = pseudo_inverse(eig, kRankTol);
  geo.mean_direction = null;
  geo.diffuse = true;
}

Geometry geometry(const SmootherSpec& spec, const WeightedDigraph& g, bool need_cov) {
  const Index n = Index(g.size());
  Geometry geo;
  switch (spec.method) {
    case SmootherMethod::RandomWalk: {
      const WalkQuantities wq = walk_quantities(g, spec.teleport);
      const SimilarityGraph sg = similarity_matrix(wq);
      const Vector inv_sqrt = inv_sqrt_positive(wq.stationary, "stationary probability");
      const Vector sqrt_pi = wq.stationary.cwiseSqrt();
      geo.smoothing = normalized(sg.laplacian, inv_sqrt);
      geo.mean_direction = sqrt_pi;
      if (need_cov) {
        geo.signal_cov = symmetrized(scale_symmetric(pseudo_inverse(sg.laplacian, kRankTol), sqrt_pi));
      }
      geo.diffuse = true;
      break;
    }
    case SmootherMethod::Tikhonov:
    case SmootherMethod::TikhonovInterpolated: {
      const SimilarityGraph sg = undirected_laplacian(g);
      geo.smoothing = sg.laplacian;
      geo.mean_direction = Vector::Ones(n);
      if (need_cov) geo.signal_cov = pseudo_inverse(sg.laplacian, kRankTol);
      geo.diffuse = true;
      break;
    }
    case SmootherMethod::Zhou2004: {
      const SimilarityGraph sg = undirected_laplacian(g);
      const Vector degree = sg.similarity.rowwise().sum();
      const Vector inv_sqrt = inv_sqrt_positive(degree, "degree");
      const Vector sqrt_d = degree.cwiseSqrt();
      geo.smoothing = normalized(sg.laplacian, inv_sqrt);
      geo.mean_direction = sqrt_d;
      if (need_cov) {
        geo.signal_cov = symmetrized(scale_symmetric(pseudo_inverse(sg.laplacian, kRankTol), sqrt_d));
      }
      geo.diffuse = true;
      break;
    }
    case SmootherMethod::HubAuthority: {
      const HubAuthorityQuantities q = hub_authority(g);
      geo.smoothing = Matrix::Zero(n, n);
      if (spec.gamma > 0.0) {
        const Vector inv_sqrt = inv_sqrt_positive(q.hub_stationary, "hub stationary probability");
        geo.smoothing += spec.gamma * normalized(q.hub_laplacian, inv_sqrt);
      }
      if (spec.gamma < 1.0) {
        const Vector inv_sqrt =
            inv_sqrt_positive(q.authority_stationary, "authority stationary probability");
        geo.smoothing += (1.0 - spec.gamma) * normalized(q.authority_laplacian, inv_sqrt);
      }
      // X is zero unless L is singular, which requires an eigendecomposition.
      cov_from_smoothing(geo, "hub_authority");
      if (!need_cov) geo.signal_cov.resize(0, 0);
      break;
    }
    case SmootherMethod::ManifoldLinear: {
      const SimilarityGraph sg = undirected_laplacian(g);
      require(spec.kernel.rows() == n && spec.kernel.cols() == n,
              "manifold_linear: kernel K must be n x n");
      const double kscale = std::max(1.0, max_abs(spec.kernel));
      require(max_abs(spec.kernel - spec.kernel.transpose()) <= 1e-10 * kscale,
              "manifold_linear: kernel K must be symmetric");
      geo.smoothing = symmetrized(spec.kernel) + spec.gamma * sg.laplacian;
      const bool annihilates_ones =
          (spec.kernel * Vector::Ones(n)).lpNorm<Eigen::Infinity>() <= 1e-9 * kscale;
      geo.diffuse = annihilates_ones;
      geo.mean_direction = annihilates_ones ? Vector::Ones(n) : Vector::Zero(n);
      if (need_cov) geo.signal_cov = pseudo_inverse(geo.smoothing, kRankTol);
      break;
    }
    case SmootherMethod::SpectralTransform: {
      const SimilarityGraph sg = undirected_laplacian(g);
      SymEig eig = sym_eig(sg.laplacian);
      const double top = eig.values(0);
      const auto f = spec.transform ? spec.transform : exp_transform(spec.alpha);
      Vector fv(n);
      for (Index i = 0; i < n; ++i) {
        double d = eig.values(i);
        if (std::abs(d) <= kRankTol * top) d = 0.0;
        fv(i) = f(d);
        if (!std::isfinite(fv(i)) || fv(i) < 0.0) {
          fail(ErrorCode::InvalidArgument,
               "spectral_transform: f must be finite and nonnegative on the spectrum");
        }
      }
      const double fmax = fv.maxCoeff();
      const bool zero_at_null = fv(n - 1) <= 1e-12 * fmax;
      if (zero_at_null) fv(n - 1) = 0.0;
      for (Index i = 0; i + 1 < n; ++i) {
        require(fv(i) > 1e-12 * fmax,
                "spectral_transform: f vanishes on a nonzero eigenvalue (disconnected graph?)");
      }
      geo.smoothing = symmetrized(eig.vectors.transpose() * fv.asDiagonal() * eig.vectors);
      geo.diffuse = zero_at_null;
      geo.mean_direction = zero_at_null ? Vector::Ones(n) : Vector::Zero(n);
      if (need_cov) {
        Vector inv = Vector::Zero(n);
        for (Index i = 0; i < n; ++i) {
          if (fv(i) > 0.0) inv(i) = 1.0 / fv(i);
        }
        geo.signal_cov = symmetrized(eig.vectors.transpose() * inv.asDiagonal() * eig.vectors);
      }
      break;
    }
  }
  return geo;
}

}  // namespace

std::string_view method_name(SmootherMethod m) {
  switch (m) {
    case SmootherMethod::RandomWalk: return "random-walk";
    case SmootherMethod::Tikhonov: return "tikhonov";
    case SmootherMethod::TikhonovInterpolated: return "tikhonov-interpolated";
    case SmootherMethod::Zhou2004: return "zhou2004";
    case SmootherMethod::HubAuthority: return "hub-authority";
    case SmootherMethod::ManifoldLinear: return "manifold-linear";
    case SmootherMethod::SpectralTransform: return "spectral-transform";
  }
  return "unknown";
}

void SmootherSpec::validate() const {
  require(std::isfinite(mu_guess), "smoother: mu_guess must be finite");
  require(teleport >= 0.0 && teleport < 1.0, "smoother: teleport must lie in [0, 1)");
  if (uses_uniform_fidelity(method)) {
    require(lambda > 0.0 && std::isfinite(lambda), "smoother: lambda must be positive");
  } else if (method != SmootherMethod::TikhonovInterpolated) {
    require(lambda0 > 0.0 && std::isfinite(lambda0), "smoother: lambda0 must be positive");
  }
  if (!uses_uniform_fidelity(method)) {
    require(lambda1 >= 0.0 && std::isfinite(lambda1), "smoother: lambda1 must be nonnegative");
  }
  if (method == SmootherMethod::HubAuthority) {
    require(gamma >= 0.0 && gamma <= 1.0, "hub_authority: gamma must lie in [0, 1]");
  }
  if (method == SmootherMethod::ManifoldLinear) {
    require(gamma > 0.0 && std::isfinite(gamma), "manifold_linear: gamma must be positive");
  }
}

std::function<double(double)> exp_transform(double alpha) {
  return [a2 = alpha * alpha](double x) { return std::exp(a2 * x / 2.0); };
}

std::function<double(double)> expm1_transform(double alpha) {
  return [a2 = alpha * alpha](double x) { return std::expm1(a2 * x / 2.0); };
}

SimilarityGraph undirected_laplacian(const WeightedDigraph& g) {
  return weight_laplacian(g, !g.is_symmetric());
}

QuadraticProblem assemble(const SmootherSpec& spec, const WeightedDigraph& g,
                          const PartitionedData& d) {
  spec.validate();
  const std::size_t n = g.size();
  d.validate(n);
  Geometry geo = geometry(spec, g, false);
  const std::vector<bool> observed = d.mask(n);

  QuadraticProblem p;
  p.smoothing = std::move(geo.smoothing);
  p.mean_direction = std::move(geo.mean_direction);
  p.fidelity.resize(Index(n));
  p.target = spec.mu_guess * p.mean_direction;
  for (std::size_t k = 0; k < d.count(); ++k) p.target(Index(d.observed[k])) = d.values(Index(k));
  for (std::size_t i = 0; i < n; ++i) {
    double lam = 0.0;
    if (uses_uniform_fidelity(spec.method)) {
      lam = spec.lambda;
    } else if (observed[i]) {
      lam = spec.method == SmootherMethod::TikhonovInterpolated ? kLimitScale : spec.lambda0;
    } else {
      lam = spec.lambda1;
    }
    p.fidelity(Index(i)) = lam;
  }
  return p;
}

Vector quadratic_smooth(const Matrix& smoothing, const Vector& fidelity, const Vector& target) {
  require(smoothing.rows() == smoothing.cols() && smoothing.rows() == fidelity.size() &&
              fidelity.size() == target.size(),
          "quadratic_smooth: dimension mismatch");
  require(fidelity.minCoeff() >= 0.0, "quadratic_smooth: Lambda must be nonnegative");
  Matrix system = symmetrized(smoothing);
  system.diagonal() += fidelity;
  try {
    return SpdFactor(system).solve(Vector(fidelity.cwiseProduct(target)));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Numeric) throw;
    fail(ErrorCode::Numeric, std::string("quadratic_smooth: L + Lambda is singular: ") + e.what());
  }
}

Vector quadratic_smooth(const QuadraticProblem& p) {
  return quadratic_smooth(p.smoothing, p.fidelity, p.target);
}

KrigingModel kriging_equivalent(const SmootherSpec& spec, const WeightedDigraph& g,
                                const PartitionedData& d) {
  spec.validate();
  const std::size_t n = g.size();
  d.validate(n);
  Geometry geo = geometry(spec, g, true);
  const std::vector<bool> observed = d.mask(n);

  KrigingModel m;
  m.mean_direction = std::move(geo.mean_direction);
  m.mean_scale = spec.mu_guess;
  m.signal_cov = std::move(geo.signal_cov);
  m.diffuse_var = geo.diffuse ? kLimitScale : 0.0;
  m.noise_var.resize(Index(n));
  for (std::size_t i = 0; i < n; ++i) {
    double var = 0.0;
    if (uses_uniform_fidelity(spec.method)) {
      var = 1.0 / spec.lambda;
    } else if (observed[i]) {
      var = spec.method == SmootherMethod::TikhonovInterpolated ? 1.0 / kLimitScale
                                                                 : 1.0 / spec.lambda0;
    } else {
      var = spec.lambda1 > 0.0 ? 1.0 / spec.lambda1 : kLimitScale;
    }
    m.noise_var(Index(i)) = var;
  }
  return m;
}

Vector interpolate_harmonic(const Matrix& laplacian, const PartitionedData& d) {
  const std::size_t n = std::size_t(laplacian.rows());
  d.validate(n);
  const std::vector<bool> observed = d.mask(n);
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < n; ++i) {
    if (!observed[i]) free.push_back(i);
  }
  Vector out = Vector::Zero(Index(n));
  for (std::size_t k = 0; k < d.count(); ++k) out(Index(d.observed[k])) = d.values(Index(k));
  if (free.empty()) return out;

  Matrix l11(Index(free.size()), Index(free.size()));
  Vector rhs = Vector::Zero(Index(free.size()));
  for (std::size_t a = 0; a < free.size(); ++a) {
    for (std::size_t b = 0; b < free.size(); ++b) l11(Index(a), Index(b)) = laplacian(Index(free[a]), Index(free[b]));
    for (std::size_t k = 0; k < d.count(); ++k) {
      rhs(Index(a)) -= laplacian(Index(free[a]), Index(d.observed[k])) * d.values(Index(k));
    }
  }
  const Vector z1 = SpdFactor(l11).solve(rhs);
  for (std::size_t a = 0; a < free.size(); ++a) out(Index(free[a])) = z1(Index(a));
  return out;
}

}  // namespace graphkrig
