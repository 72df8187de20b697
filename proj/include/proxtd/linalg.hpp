#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace proxtd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Relative pivot threshold below which a factorization is declared singular.
inline constexpr double kSingularPivot = 1e-13;

double norm_inf(const Vector& v);
/// Maximum absolute row sum.
double norm_inf(const Matrix& m);
bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);

/// Partial-pivot LU with an explicit singularity test.
///
/// The matrix is rejected when some pivot of U has magnitude below
/// kSingularPivot * max(||M||inf, scale). `scale` lets callers that form
/// shifted matrices such as I - A supply the magnitude of the terms they
/// combined, so that cancellation down to rounding noise is still caught.
class LuFactor {
 public:
  explicit LuFactor(const Matrix& m, double scale = 0.0);

  Vector solve(const Vector& rhs) const;
  Matrix solve(const Matrix& rhs) const;
  Matrix inverse() const;
  std::size_t size() const { return static_cast<std::size_t>(lu_.rows()); }

  /// ||M||_1 * ||M^-1||_1 computed from the explicit inverse.
  double condition_estimate() const;

 private:
  Eigen::PartialPivLU<Matrix> lu_;
  double norm1_ = 0.0;
};

Vector lu_solve(const Matrix& m, const Vector& rhs);

struct SpectralOptions {
  /// Cap on the number of squarings, i.e. on log2 of the largest power formed.
  int max_squarings = 64;
  /// Squarings performed before convergence is tested.
  int min_squarings = 6;
};

struct SpectralEstimate {
  double value = 0.0;
  bool converged = false;
  int squarings = 0;
};

/// Spectral radius from ||M^(2^j)||^(1/2^j), normalizing after every
/// squaring. Stops once two consecutive estimates move by at most tol/2.
SpectralEstimate estimate_spectral_radius(const Matrix& m, double tol,
                                          const SpectralOptions& options = {});

/// Throwing form: NoConvergence when the cap is reached (the message carries
/// the last estimate).
double spectral_radius_estimate(const Matrix& m, double tol, const SpectralOptions& options = {});

struct SpectrumSpec {
  /// Closed under conjugation; complex entries appear in conjugate pairs.
  std::vector<Complex> eigenvalues;
  std::uint64_t seed = 1;
};

/// Real M = S D S^-1 with D block diagonal (1x1 for real eigenvalues,
/// [[a, b], [-b, a]] for a +- bi) and cond(S) <= 10.
Matrix make_similar(const SpectrumSpec& spec);

/// Conjugate-pair grouping used by make_similar; throws BadSpectrum.
std::vector<Complex> canonical_spectrum(const std::vector<Complex>& eigenvalues);

/// Random orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
Matrix random_orthogonal(std::size_t n, std::uint64_t seed);

/// Cholesky factor wrapper; throws NotPositiveDefinite.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const Matrix& sigma);
  Matrix solve(const Matrix& rhs) const;
  Vector solve(const Vector& rhs) const;

 private:
  Eigen::LLT<Matrix> llt_;
};

}  // namespace proxtd
