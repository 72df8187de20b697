#include "proxtd/galerkin.hpp"

#include <cmath>
#include <sstream>

#include "proxtd/error.hpp"

namespace proxtd {

namespace {

void check_weights(const Vector& xi, Eigen::Index n) {
  if (xi.size() != n) fail(ErrorCode::DimensionMismatch, "weight vector length differs from Phi rows");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(xi(i) >= 0.0) || !std::isfinite(xi(i))) fail(ErrorCode::BadParams, "weights must be nonnegative");
}

void check_full_rank(const Matrix& phi) {
  Matrix normalized = phi;
  for (Eigen::Index j = 0; j < phi.cols(); ++j) {
    const double len = phi.col(j).norm();
    if (len == 0.0) fail(ErrorCode::SingularMatrix, "Phi has a zero column");
    normalized.col(j) /= len;
  }
  const double det = (normalized.transpose() * normalized).determinant();
  if (!(det > 1e-10)) fail(ErrorCode::SingularMatrix, "Phi is not of full column rank");
}

void check_row_stochastic(const Matrix& m, const char* name) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!(m(i, j) >= 0.0)) fail(ErrorCode::BadStochastic, std::string(name) + " has a negative entry");
      sum += m(i, j);
    }
    if (std::abs(sum - 1.0) > 1e-10) {
      std::ostringstream os;
      os << name << " row " << i << " sums to " << sum;
      fail(ErrorCode::BadStochastic, os.str());
    }
  }
}

Vector residual(const LowDimSystem& sys, const Vector& r) {
  if (static_cast<std::size_t>(r.size()) != sys.s()) fail(ErrorCode::DimensionMismatch, "r has wrong length");
  return sys.C() * r - sys.d();
}

double chat_checked(double chat) {
  if (!(chat > 0.0) || !std::isfinite(chat)) fail(ErrorCode::BadParams, "chat must be positive");
  return chat;
}

}  // namespace

ProjectionSpec::ProjectionSpec(Matrix phi, Matrix psi, Vector xi)
    : phi_(std::move(phi)), psi_(std::move(psi)), xi_(std::move(xi)) {
  if (psi_.rows() != phi_.rows() || psi_.cols() != phi_.cols())
    fail(ErrorCode::DimensionMismatch, "Phi and Psi shapes differ");
  if (phi_.cols() > phi_.rows()) fail(ErrorCode::DimensionMismatch, "Phi has more columns than rows");
  check_weights(xi_, phi_.rows());
  check_full_rank(phi_);
  symmetric_ = psi_ == phi_;
  const Matrix weighted = psi_.transpose() * xi_.asDiagonal();
  const Matrix gram = weighted * phi_;
  coords_ = LuFactor(gram).solve(weighted);
}

ProjectionSpec::ProjectionSpec(Matrix phi, Vector xi) : ProjectionSpec(phi, phi, std::move(xi)) {}

Matrix build_projection(const ProjectionSpec& spec) { return spec.Phi() * spec.coordinate_map(); }

Vector seminorm_project(const ProjectionSpec& spec, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != spec.n()) fail(ErrorCode::DimensionMismatch, "x has wrong length");
  const Matrix& phi = spec.Phi();
  const Matrix weighted = phi.transpose() * spec.xi().asDiagonal();
  const Vector r = LuFactor(Matrix(weighted * phi)).solve(Vector(weighted * x));
  return phi * r;
}

AggregationProjection projection_from_aggregation(const Matrix& phi, const Matrix& d) {
  if (d.rows() != phi.cols() || d.cols() != phi.rows())
    fail(ErrorCode::DimensionMismatch, "D must be s x n for an n x s Phi");
  check_row_stochastic(phi, "Phi");
  check_row_stochastic(d, "D");
  check_full_rank(phi);
  check_full_rank(d.transpose());
  AggregationProjection out;
  out.Pi = phi * d;
  const Matrix dphi = d * phi;
  out.not_idempotent = norm_inf(Matrix(dphi - Matrix::Identity(dphi.rows(), dphi.cols()))) > 1e-8;
  return out;
}

LowDimSystem::LowDimSystem(Matrix q, Vector d, double lambda)
    : q_(std::move(q)), d_(std::move(d)), lambda_(lambda) {
  if (q_.rows() != q_.cols() || q_.rows() != d_.size())
    fail(ErrorCode::DimensionMismatch, "low-dimensional system shapes");
  c_ = Matrix::Identity(q_.rows(), q_.cols()) - q_;
  sigma_q_ = estimate_spectral_radius(q_, 1e-9).value;
}

LowDimSystem LowDimSystem::from_c(Matrix c, Vector d, double lambda) {
  if (c.rows() != c.cols()) fail(ErrorCode::DimensionMismatch, "C must be square");
  Matrix q = Matrix::Identity(c.rows(), c.cols()) - c;
  LowDimSystem sys(std::move(q), std::move(d), lambda);
  sys.c_ = std::move(c);
  return sys;
}

LowDimSystem assemble_lowdim(const AffineMap& map, const ProjectionSpec& spec, MultistepParam p) {
  if (map.dim() != spec.n()) fail(ErrorCode::DimensionMismatch, "map and projection dimensions differ");
  const auto lm = lambda_matrices(map, p);
  const Matrix& coords = spec.coordinate_map();
  return LowDimSystem(coords * lm.a_lambda * spec.Phi(), coords * lm.b_lambda, p.lambda());
}

Vector lstd_solve(const LowDimSystem& sys) {
  const LuFactor lu(sys.C());
  const double cond = lu.condition_estimate();
  if (!(cond <= 1e12)) {
    std::ostringstream os;
    os << "C is near-singular (condition estimate " << cond << ")";
    fail(ErrorCode::SingularMatrix, os.str());
  }
  return lu.solve(sys.d());
}

Vector lspe_iterate(const LowDimSystem& sys, const Vector& r, bool interpolated, double lambda) {
  const double step = interpolated ? lambda : 1.0;
  return r - step * residual(sys, r);
}

Vector prox_projected_iterate(const LowDimSystem& sys, double chat, const Vector& r, bool extrapolated) {
  chat_checked(chat);
  if (extrapolated && !(sys.spectral_i_minus_c() <= 1.0 + kAssumptionSlack)) {
    std::ostringstream os;
    os << "extrapolated step needs sigma(I - C) <= 1, estimate " << sys.spectral_i_minus_c();
    fail(ErrorCode::AssumptionViolated, os.str());
  }
  const auto s = static_cast<Eigen::Index>(sys.s());
  const Matrix m = Matrix::Identity(s, s) / chat + sys.C();
  const double factor = extrapolated ? (chat + 1.0) / chat : 1.0;
  return r - factor * LuFactor(m).solve(residual(sys, r));
}

Vector sigma_regularized_iterate(const LowDimSystem& sys, const Matrix& sigma, double chat,
                                 const Vector& r, bool extrapolated) {
  chat_checked(chat);
  if (static_cast<std::size_t>(sigma.rows()) != sys.s())
    fail(ErrorCode::DimensionMismatch, "Sigma has wrong size");
  const CholeskyFactor chol(sigma);
  const Matrix sinv_c = chol.solve(sys.C());
  const auto s = static_cast<Eigen::Index>(sys.s());
  const Matrix m = Matrix::Identity(s, s) / chat + sys.C().transpose() * sinv_c;
  const Vector rhs = sys.C().transpose() * chol.solve(residual(sys, r));
  const double factor = extrapolated ? (chat + 1.0) / chat : 1.0;
  return r - factor * LuFactor(m).solve(rhs);
}

double weighted_norm(const Vector& v, const Vector& xi) {
  if (v.size() != xi.size()) fail(ErrorCode::DimensionMismatch, "weighted norm operands");
  return std::sqrt((xi.array() * v.array().square()).sum());
}

double error_bound(const AffineMap& map, const ProjectionSpec& spec, MultistepParam p, BoundNorm norm) {
  if (map.dim() != spec.n()) fail(ErrorCode::DimensionMismatch, "map and projection dimensions differ");
  const auto lm = lambda_matrices(map, p);
  const Matrix pi = build_projection(spec);
  const auto n = static_cast<Eigen::Index>(spec.n());
  const Matrix m = Matrix::Identity(n, n) - pi * lm.a_lambda;
  const Matrix inv = LuFactor(m, 1.0 + norm_inf(Matrix(pi * lm.a_lambda))).inverse();
  const Vector xstar = map.fixed_point();
  const Vector gap = xstar - pi * xstar;
  if (norm == BoundNorm::Inf) return norm_inf(inv) * norm_inf(gap);

  const Vector& xi = spec.xi();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(xi(i) > 0.0)) fail(ErrorCode::BadParams, "weighted bound needs positive weights");
  const Vector root = xi.cwiseSqrt();
  const Matrix scaled = root.asDiagonal() * inv * root.cwiseInverse().asDiagonal();
  const double op = Eigen::JacobiSVD<Matrix>(scaled).singularValues()(0);
  return op * weighted_norm(gap, xi);
}

}  // namespace proxtd
