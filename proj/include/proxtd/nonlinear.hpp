#pragma once

// Proximal and extrapolated proximal maps for nonlinear contractions, and
// forward-backward splitting with its extrapolated form.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>

#include "proxtd/linalg.hpp"
#include "proxtd/trace.hpp"

namespace proxtd {

using VectorFunction = std::function<Vector(const Vector&)>;

/// T with an optional declared Euclidean contraction modulus. Prox
/// operations refuse maps whose modulus is missing or not below 1.
struct NonlinearMap {
  std::size_t dim = 0;
  VectorFunction eval;
  std::optional<double> modulus;

  Vector operator()(const Vector& x) const;
};

/// T(x) = A x + b, declared modulus ||A||_2.
NonlinearMap affine_nonlinear(const Matrix& a, const Vector& b);

/// T(x) = a .* tanh(x) + B x + c, declared modulus max|a_i| + ||B||_2.
NonlinearMap scaled_tanh(const Vector& a, const Matrix& b, const Vector& c);

struct ProxOptions {
  double inner_tol = 1e-10;
  std::size_t max_inner = 10000;
};

/// y with ||y - T(y) - (x - y)/c||inf <= inner_tol, by iterating
/// y <- (c/(c+1)) T(y) + x/(c+1) from y = x.
Vector nonlinear_prox(const NonlinearMap& t, double c, const Vector& x, const ProxOptions& opts = {});

struct ExtrapolatedProx {
  Vector value;  // x + ((c+1)/c)(P(x) - x)
  Vector prox;   // P(x)
  /// ||value - T(prox)||inf; SelfCheckFailed is raised above 10 inner_tol.
  double identity_gap = 0.0;
};

ExtrapolatedProx extrapolated_prox_detail(const NonlinearMap& t, double c, const Vector& x,
                                          const ProxOptions& opts = {});
Vector extrapolated_prox(const NonlinearMap& t, double c, const Vector& x, const ProxOptions& opts = {});

/// Largest Euclidean ratio ||T(x1) - T(x2)|| / ||x1 - x2|| over `pairs`
/// pairs drawn uniformly from the cube of half-width `radius` at `center`
/// (the origin when empty).
double modulus_probe(const NonlinearMap& t, std::size_t pairs, std::uint64_t seed, double radius,
                     const Vector& center = {});

/// Fixed point of x = T(x) - H(x), with P^(alpha) taken from `prox_part`.
struct SplitProblem {
  NonlinearMap prox_part;
  VectorFunction smooth;
  double beta = 0.0;
  double alpha = 1.0;
};

struct FbsStep {
  Vector value;
  Vector xbar;
  /// ||value - (T(xbar) - H(xbar))||inf for the extrapolated form, 0 otherwise.
  double identity_gap = 0.0;
};

/// Plain: P^(alpha)(x - alpha H(x)). Extrapolated: with z = x - alpha H(x),
/// xbar = P^(alpha)(z), returns xbar + (xbar - z)/alpha - H(xbar).
FbsStep fbs_step_detail(const SplitProblem& prob, const Vector& x, bool extrapolated,
                        const ProxOptions& opts = {});
Vector fbs_step(const SplitProblem& prob, const Vector& x, bool extrapolated, const ProxOptions& opts = {});

struct NonlinearSolveOptions {
  double tol = 1e-10;
  std::size_t max_iter = 100000;
  /// Tighter than the single-call default so the outer residual can reach tol.
  ProxOptions prox{1e-13, 10000};
};

/// Proximal or extrapolated proximal iteration; residual ||x - T(x)||inf.
IterateTrace nonlinear_solve(const NonlinearMap& t, double c, const Vector& x0, bool extrapolated,
                             const NonlinearSolveOptions& opts = {});

/// Forward-backward iteration; residual ||x - T(x) + H(x)||inf.
IterateTrace fbs_solve(const SplitProblem& prob, const Vector& x0, bool extrapolated,
                       const NonlinearSolveOptions& opts = {});

}  // namespace proxtd
