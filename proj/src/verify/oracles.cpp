#include "proxtd/verify/oracles.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "proxtd/error.hpp"

namespace proxtd::oracle {

namespace {

constexpr double kCut = 1e-17;
constexpr std::size_t kMaxTerms = 2000000;

/// sum_l w^l M^l v for a decaying sequence of terms.
Vector neumann(const Matrix& m, double w, Vector v) {
  Vector sum = v;
  double weight = 1.0;
  for (std::size_t l = 1; l < kMaxTerms; ++l) {
    v = m * v;
    weight *= w;
    sum += weight * v;
    if (weight * v.lpNorm<Eigen::Infinity>() < kCut * (1.0 + sum.lpNorm<Eigen::Infinity>())) return sum;
  }
  fail(ErrorCode::NoConvergence, "oracle series did not settle");
}

Matrix neumann(const Matrix& m, double w, Matrix v) {
  Matrix sum = v;
  double weight = 1.0;
  for (std::size_t l = 1; l < kMaxTerms; ++l) {
    v = m * v;
    weight *= w;
    sum += weight * v;
    if (weight * v.lpNorm<Eigen::Infinity>() < kCut * (1.0 + sum.lpNorm<Eigen::Infinity>())) return sum;
  }
  fail(ErrorCode::NoConvergence, "oracle series did not settle");
}

}  // namespace

Vector series_multistep(const Matrix& a, const Vector& b, double lambda, const Vector& x) {
  // y_l = T^(l+1) x does not decay; after L terms the tail
  // (1 - lambda) sum_{l >= L} lambda^l y_l is replaced by lambda^L y_L.
  Vector y = a * x + b;
  Vector sum = Vector::Zero(x.size());
  double weight = 1.0;
  for (std::size_t l = 0; l < kMaxTerms; ++l) {
    if (weight < 1e-16) return sum + weight * y;
    sum += (1.0 - lambda) * weight * y;
    y = a * y + b;
    weight *= lambda;
  }
  fail(ErrorCode::NoConvergence, "oracle series did not settle");
}

Vector series_proximal(const Matrix& a, const Vector& b, double lambda, const Vector& x) {
  return neumann(a, lambda, Vector(lambda * b + (1.0 - lambda) * x));
}

Vector td_expansion(const Matrix& a, const Vector& b, double lambda, const Vector& x) {
  return x + neumann(a, lambda, Vector(a * x + b - x));
}

Matrix series_a_lambda(const Matrix& a, double lambda) { return (1.0 - lambda) * neumann(a, lambda, Matrix(a)); }

Matrix series_a_bar(const Matrix& a, double lambda) {
  return (1.0 - lambda) * neumann(a, lambda, Matrix(Matrix::Identity(a.rows(), a.cols())));
}

Vector series_b_lambda(const Matrix& a, const Vector& b, double lambda) { return neumann(a, lambda, b); }

Vector vm_closed_form(const Matrix& a, const Vector& b, double lambda, std::size_t m, const Vector& x) {
  Vector y = x;
  Vector sum = Vector::Zero(x.size());
  double weight = 1.0;
  for (std::size_t l = 1; l <= m; ++l) {
    y = a * y + b;
    sum += (1.0 - lambda) * weight * y;
    weight *= lambda;
  }
  return sum + weight * y;
}

Complex char_poly(const Matrix& m, Complex mu) {
  const Eigen::MatrixXcd shifted =
      mu * Eigen::MatrixXcd::Identity(m.rows(), m.cols()) - m.cast<Complex>();
  return Eigen::PartialPivLU<Eigen::MatrixXcd>(shifted).determinant();
}

double spectral_radius(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

ProjectedSystem projected_system(const Matrix& a, const Vector& b, const Matrix& phi, const Matrix& psi,
                                 const Vector& xi, double lambda) {
  const Matrix psi_xi = psi.transpose() * xi.asDiagonal();
  const Eigen::FullPivLU<Matrix> gram(psi_xi * phi);
  const Matrix a_l = series_a_lambda(a, lambda);
  const Vector b_l = series_b_lambda(a, b, lambda);
  ProjectedSystem out;
  out.C = gram.solve(Matrix(psi_xi * (Matrix::Identity(a.rows(), a.cols()) - a_l) * phi));
  out.d = gram.solve(Vector(psi_xi * b_l));
  out.r = Eigen::FullPivLU<Matrix>(out.C).solve(out.d);
  return out;
}

BruteForce brute_force(const std::vector<AffinePiece>& pieces, bool maximize) {
  const auto n = pieces.front().A.rows();
  const std::size_t k = pieces.size();
  std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
  BruteForce out;
  out.xstar = Vector::Constant(n, maximize ? -INFINITY : INFINITY);
  while (true) {
    Matrix a(n, n);
    Vector b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      a.row(i) = pieces[pick[static_cast<std::size_t>(i)]].A.row(i);
      b(i) = pieces[pick[static_cast<std::size_t>(i)]].b(i);
    }
    if (spectral_radius(a) < 1.0 - 1e-8) {
      ++out.proper;
      const Vector x = Eigen::FullPivLU<Matrix>(Matrix::Identity(n, n) - a).solve(b);
      out.xstar = maximize ? Vector(out.xstar.cwiseMax(x)) : Vector(out.xstar.cwiseMin(x));
    } else {
      ++out.improper;
    }
    std::size_t pos = 0;
    while (pos < pick.size() && ++pick[pos] == k) pick[pos++] = 0;
    if (pos == pick.size()) break;
  }
  return out;
}

Vector banach_fixed_point(const std::function<Vector(const Vector&)>& t, Vector x, double q) {
  for (std::size_t k = 0; k < kMaxTerms; ++k) {
    const Vector next = t(x);
    const double step = (next - x).lpNorm<Eigen::Infinity>();
    x = next;
    if (step == 0.0 || step * q / (1.0 - q) <= 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>())) return x;
  }
  fail(ErrorCode::NoConvergence, "oracle fixed-point iteration did not settle");
}

}  // namespace proxtd::oracle
