#include "proxtd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "proxtd/error.hpp"
#include "proxtd/rng.hpp"

namespace proxtd {

double norm_inf(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double norm_inf(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

LuFactor::LuFactor(const Matrix& m, double scale) {
  if (m.rows() != m.cols()) fail(ErrorCode::DimensionMismatch, "LU of a non-square matrix");
  if (!m.allFinite()) fail(ErrorCode::SingularMatrix, "matrix has non-finite entries");
  const double reference = std::max(norm_inf(m), scale);
  if (m.rows() == 0) return;
  if (reference == 0.0) fail(ErrorCode::SingularMatrix, "zero matrix");
  lu_.compute(m);
  const double threshold = kSingularPivot * reference;
  const auto& packed = lu_.matrixLU();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    if (!(std::abs(packed(i, i)) >= threshold)) {
      std::ostringstream os;
      os << "pivot " << i << " has magnitude " << std::abs(packed(i, i)) << " below "
         << threshold;
      fail(ErrorCode::SingularMatrix, os.str());
    }
  }
  norm1_ = m.cwiseAbs().colwise().sum().maxCoeff();
}

Vector LuFactor::solve(const Vector& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != size())
    fail(ErrorCode::DimensionMismatch, "LU solve: right-hand side length");
  if (size() == 0) return Vector();
  return lu_.solve(rhs);
}

Matrix LuFactor::solve(const Matrix& rhs) const {
  if (static_cast<std::size_t>(rhs.rows()) != size())
    fail(ErrorCode::DimensionMismatch, "LU solve: right-hand side rows");
  if (size() == 0) return Matrix(0, rhs.cols());
  return lu_.solve(rhs);
}

Matrix LuFactor::inverse() const {
  if (size() == 0) return Matrix();
  return lu_.inverse();
}

double LuFactor::condition_estimate() const {
  if (size() == 0) return 1.0;
  return norm1_ * inverse().cwiseAbs().colwise().sum().maxCoeff();
}

Vector lu_solve(const Matrix& m, const Vector& rhs) {
  if (m.rows() != rhs.size()) fail(ErrorCode::DimensionMismatch, "lu_solve: rhs length");
  return LuFactor(m).solve(rhs);
}

SpectralEstimate estimate_spectral_radius(const Matrix& m, double tol,
                                          const SpectralOptions& options) {
  if (m.rows() != m.cols()) fail(ErrorCode::DimensionMismatch, "spectral radius of non-square");
  if (!m.allFinite()) fail(ErrorCode::BadParams, "spectral radius of non-finite matrix");
  SpectralEstimate out;
  double scale = norm_inf(m);
  if (scale == 0.0) {
    out.converged = true;
    return out;
  }
  Matrix power = m / scale;
  // log ||M^(2^j)|| / 2^j, accumulated from the normalization factors.
  double log_estimate = std::log(scale);
  double weight = 1.0;
  out.value = std::exp(log_estimate);
  int stable = 0;
  for (int j = 1; j <= options.max_squarings; ++j) {
    power = power * power;
    scale = norm_inf(power);
    out.squarings = j;
    if (scale == 0.0) {
      out.value = 0.0;
      out.converged = true;
      return out;
    }
    weight *= 0.5;
    log_estimate += weight * std::log(scale);
    power /= scale;
    const double estimate = std::exp(log_estimate);
    const bool settled = std::abs(estimate - out.value) <= 0.5 * tol;
    out.value = estimate;
    if (j >= options.min_squarings && settled) {
      if (++stable >= 2) {
        out.converged = true;
        return out;
      }
    } else {
      stable = 0;
    }
  }
  return out;
}

double spectral_radius_estimate(const Matrix& m, double tol, const SpectralOptions& options) {
  const auto estimate = estimate_spectral_radius(m, tol, options);
  if (!estimate.converged) {
    std::ostringstream os;
    os.precision(17);
    os << "spectral radius estimate did not settle; last estimate " << estimate.value;
    fail(ErrorCode::NoConvergence, os.str());
  }
  return estimate.value;
}

std::vector<Complex> canonical_spectrum(const std::vector<Complex>& eigenvalues) {
  std::vector<Complex> reals;
  std::vector<Complex> upper;
  std::vector<Complex> lower;
  for (const auto& z : eigenvalues) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      fail(ErrorCode::BadSpectrum, "non-finite eigenvalue");
    const double real_tol = 1e-14 * std::max(1.0, std::abs(z));
    if (std::abs(z.imag()) <= real_tol) {
      reals.emplace_back(z.real(), 0.0);
    } else if (z.imag() > 0) {
      upper.push_back(z);
    } else {
      lower.push_back(z);
    }
  }
  if (upper.size() != lower.size()) fail(ErrorCode::BadSpectrum, "spectrum not closed under conjugation");
  std::vector<Complex> out = reals;
  std::vector<bool> used(lower.size(), false);
  for (const auto& z : upper) {
    bool matched = false;
    for (std::size_t k = 0; k < lower.size(); ++k) {
      if (!used[k] && std::abs(std::conj(z) - lower[k]) <= 1e-12 * std::max(1.0, std::abs(z))) {
        used[k] = true;
        matched = true;
        break;
      }
    }
    if (!matched) fail(ErrorCode::BadSpectrum, "complex eigenvalue without its conjugate");
    out.push_back(z);
    out.push_back(std::conj(z));
  }
  return out;
}

Matrix random_orthogonal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix g(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::size_t j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

Matrix make_similar(const SpectrumSpec& spec) {
  const auto spectrum = canonical_spectrum(spec.eigenvalues);
  const auto n = spectrum.size();
  Matrix d = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < n;) {
    const Complex z = spectrum[k];
    if (z.imag() == 0.0) {
      d(k, k) = z.real();
      k += 1;
    } else {
      d(k, k) = z.real();
      d(k + 1, k + 1) = z.real();
      d(k, k + 1) = z.imag();
      d(k + 1, k) = -z.imag();
      k += 2;
    }
  }
  if (n == 0) return d;

  Rng rng(spec.seed);
  const Matrix left = random_orthogonal(n, rng.next_seed());
  const Matrix right = random_orthogonal(n, rng.next_seed());
  Vector singular(n);
  for (std::size_t i = 0; i < n; ++i) singular(i) = std::pow(10.0, rng.uniform());
  const Matrix basis = left * singular.asDiagonal() * right;
  const Matrix inverse_basis = right.transpose() * singular.cwiseInverse().asDiagonal() * left.transpose();
  return basis * d * inverse_basis;
}

CholeskyFactor::CholeskyFactor(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols()) fail(ErrorCode::DimensionMismatch, "Cholesky of non-square");
  const double asym = norm_inf(Matrix(sigma - sigma.transpose()));
  if (!sigma.allFinite() || asym > 1e-12 * std::max(1.0, norm_inf(sigma)))
    fail(ErrorCode::NotPositiveDefinite, "matrix is not symmetric");
  llt_.compute(sigma);
  if (llt_.info() != Eigen::Success) fail(ErrorCode::NotPositiveDefinite, "Cholesky failed");
}

Matrix CholeskyFactor::solve(const Matrix& rhs) const { return llt_.solve(rhs); }
Vector CholeskyFactor::solve(const Vector& rhs) const { return llt_.solve(rhs); }

}  // namespace proxtd
