#pragma once

// Reference computations that avoid the production solve paths: truncated
// power series, complex determinants, dense eigen-decompositions and plain
// enumeration of piecewise selections.

#include <cstddef>
#include <functional>
#include <vector>

#include "proxtd/linalg.hpp"
#include "proxtd/pwlinear.hpp"

namespace proxtd::oracle {

/// (1 - lambda) sum_l lambda^l T^(l+1) x, cut at the first L with
/// lambda^L < 1e-16 and the tail replaced by lambda^L T^(L+1) x. The other
/// series stop once a weighted term falls below 1e-17 relative to the sum.
Vector series_multistep(const Matrix& a, const Vector& b, double lambda, const Vector& x);
/// sum_l lambda^l A^l (lambda b + (1 - lambda) x).
Vector series_proximal(const Matrix& a, const Vector& b, double lambda, const Vector& x);
/// x + sum_l lambda^l A^l (A x + b - x).
Vector td_expansion(const Matrix& a, const Vector& b, double lambda, const Vector& x);

Matrix series_a_lambda(const Matrix& a, double lambda);
Matrix series_a_bar(const Matrix& a, double lambda);
Vector series_b_lambda(const Matrix& a, const Vector& b, double lambda);

/// (1 - lambda)(T x + lambda T^2 x + ... + lambda^(m-1) T^m x) + lambda^m T^m x.
Vector vm_closed_form(const Matrix& a, const Vector& b, double lambda, std::size_t m, const Vector& x);

/// det(mu I - M).
Complex char_poly(const Matrix& m, Complex mu);
/// max |eigenvalue| from a dense eigen-decomposition.
double spectral_radius(const Matrix& m);

/// C r = d for the projected multistep system, assembled from the series.
struct ProjectedSystem {
  Matrix C;
  Vector d;
  Vector r;
};
ProjectedSystem projected_system(const Matrix& a, const Vector& b, const Matrix& phi, const Matrix& psi,
                                 const Vector& xi, double lambda);

/// Componentwise min (max for the max combinator) of x_mu over every
/// selection in the row-wise product with spectral radius below 1 - 1e-8.
/// `proper` and `improper` count the visited selections.
struct BruteForce {
  Vector xstar;
  std::size_t proper = 0;
  std::size_t improper = 0;
};
BruteForce brute_force(const std::vector<AffinePiece>& pieces, bool maximize);

/// Fixed point of a sup-norm contraction by plain iteration.
Vector banach_fixed_point(const std::function<Vector(const Vector&)>& t, Vector x, double q);

}  // namespace proxtd::oracle
