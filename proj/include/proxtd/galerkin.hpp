#pragma once

// Projections onto span(Phi) and the low-dimensional projected system
// C r = d with its exact iterative and direct solvers.

#include <cstddef>

#include "proxtd/linalg.hpp"
#include "proxtd/proxmulti.hpp"

namespace proxtd {

/// Phi and Psi are n x s, xi holds the n nonnegative diagonal weights of Xi.
/// Construction checks that Psi' Xi Phi is nonsingular and that Phi has full
/// column rank (Gram determinant of the column-normalized Phi above 1e-10).
class ProjectionSpec {
 public:
  ProjectionSpec(Matrix phi, Matrix psi, Vector xi);
  /// Psi = Phi.
  ProjectionSpec(Matrix phi, Vector xi);

  const Matrix& Phi() const { return phi_; }
  const Matrix& Psi() const { return psi_; }
  const Vector& xi() const { return xi_; }
  std::size_t n() const { return static_cast<std::size_t>(phi_.rows()); }
  std::size_t s() const { return static_cast<std::size_t>(phi_.cols()); }
  bool symmetric() const { return symmetric_; }

  /// (Psi' Xi Phi)^-1 Psi' Xi, the s x n map from x to its coordinates.
  const Matrix& coordinate_map() const { return coords_; }

 private:
  Matrix phi_;
  Matrix psi_;
  Vector xi_;
  Matrix coords_;
  bool symmetric_ = false;
};

/// Pi = Phi (Psi' Xi Phi)^-1 Psi' Xi.
Matrix build_projection(const ProjectionSpec& spec);

/// Phi argmin_r sum_i xi_i (x_i - phi_i' r)^2, using Phi only.
Vector seminorm_project(const ProjectionSpec& spec, const Vector& x);

struct AggregationProjection {
  Matrix Pi;
  /// Set when D Phi differs from I by more than 1e-8, so Pi is not idempotent.
  bool not_idempotent = false;
};

/// Pi = Phi D for row-stochastic Phi (n x s) and D (s x n).
AggregationProjection projection_from_aggregation(const Matrix& phi, const Matrix& d);

/// C = I - Q, cached with the spectral estimate of I - C used by the
/// extrapolated proximal step.
class LowDimSystem {
 public:
  LowDimSystem(Matrix q, Vector d, double lambda);
  static LowDimSystem from_c(Matrix c, Vector d, double lambda);

  const Matrix& Q() const { return q_; }
  const Matrix& C() const { return c_; }
  const Vector& d() const { return d_; }
  double lambda() const { return lambda_; }
  std::size_t s() const { return static_cast<std::size_t>(d_.size()); }
  double spectral_i_minus_c() const { return sigma_q_; }

 private:
  Matrix q_;
  Matrix c_;
  Vector d_;
  double lambda_;
  double sigma_q_;
};

LowDimSystem assemble_lowdim(const AffineMap& map, const ProjectionSpec& spec, MultistepParam p);

/// Solves C r = d; SingularMatrix when the condition estimate exceeds 1e12.
Vector lstd_solve(const LowDimSystem& sys);

/// Plain: r - (C r - d). Interpolated: r - lambda (C r - d).
Vector lspe_iterate(const LowDimSystem& sys, const Vector& r, bool interpolated, double lambda);

/// r - f ((1/chat) I + C)^-1 (C r - d), f = 1 or (chat + 1) / chat.
/// The extrapolated form requires sigma(I - C) <= 1 + 1e-8.
Vector prox_projected_iterate(const LowDimSystem& sys, double chat, const Vector& r, bool extrapolated);

/// r - f ((1/chat) I + C' S^-1 C)^-1 C' S^-1 (C r - d) for SPD S.
Vector sigma_regularized_iterate(const LowDimSystem& sys, const Matrix& sigma, double chat,
                                 const Vector& r, bool extrapolated);

enum class BoundNorm { Inf, Weighted };

/// ||(I - Pi A^(lambda))^-1|| ||x* - Pi x*||. The weighted norm is
/// sqrt(sum xi_i v_i^2) and needs every xi_i > 0.
double error_bound(const AffineMap& map, const ProjectionSpec& spec, MultistepParam p, BoundNorm norm);

/// sqrt(sum xi_i v_i^2).
double weighted_norm(const Vector& v, const Vector& xi);

}  // namespace proxtd
