#include "proxtd/generate.hpp"

#include <cmath>
#include <numbers>

#include "proxtd/error.hpp"
#include "proxtd/mcsim.hpp"

namespace proxtd {

using nlohmann::json;

namespace {

std::vector<Complex> close_under_conjugation(const std::vector<Complex>& eigenvalues) {
  std::vector<Complex> out = eigenvalues;
  std::vector<bool> matched(out.size(), false);
  const std::size_t original = out.size();
  for (std::size_t i = 0; i < original; ++i) {
    if (matched[i] || out[i].imag() == 0.0) continue;
    matched[i] = true;
    bool found = false;
    for (std::size_t j = i + 1; j < original && !found; ++j) {
      if (!matched[j] && out[j] == std::conj(out[i])) {
        matched[j] = true;
        found = true;
      }
    }
    if (!found) out.push_back(std::conj(out[i]));
  }
  return out;
}

json eigen_json(const std::vector<Complex>& eigs) {
  json out = json::array();
  for (const auto& z : eigs) out.push_back({z.real(), z.imag()});
  return out;
}

}  // namespace

Problem gen_spectrum(const std::vector<Complex>& eigenvalues, std::uint64_t seed) {
  if (eigenvalues.empty()) fail(ErrorCode::BadParams, "spectrum needs at least one eigenvalue");
  std::vector<Complex> eigs = close_under_conjugation(eigenvalues);
  for (const auto& z : eigs)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) fail(ErrorCode::BadParams, "non-finite eigenvalue");
  Rng rng(seed);
  Problem p;
  p.kind = ProblemKind::Spectrum;
  p.n = eigs.size();
  p.A = make_similar({eigs, rng.next_seed()});
  Vector b(static_cast<Eigen::Index>(p.n));
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform();
  p.b = std::move(b);
  p.eigenvalues = eigs;
  double radius = 0.0;
  for (const auto& z : eigs) radius = std::max(radius, std::abs(z));
  p.metadata = {{"seed", seed}, {"eigenvalues", eigen_json(eigs)}, {"spectral_radius", radius},
                {"description", "similarity transform of a prescribed spectrum"}};
  return p;
}

std::vector<Complex> random_spectrum(std::size_t n, double sigma, double ratio, Rng& rng) {
  if (n == 0) fail(ErrorCode::BadParams, "n must be positive");
  std::vector<Complex> eigs{Complex(sigma, 0.0)};
  while (eigs.size() < n) {
    const double r = ratio * sigma * rng.uniform();
    if (eigs.size() + 2 <= n && rng.uniform() < 0.5) {
      const double theta = std::numbers::pi * rng.uniform(0.05, 0.95);
      eigs.emplace_back(r * std::cos(theta), r * std::sin(theta));
      eigs.emplace_back(r * std::cos(theta), -r * std::sin(theta));
    } else {
      eigs.emplace_back(rng.uniform() < 0.5 ? r : -r, 0.0);
    }
  }
  return eigs;
}

Matrix random_stochastic(std::size_t n, Rng& rng) {
  const auto k = static_cast<Eigen::Index>(n);
  Matrix p(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) p(i, j) = 1.0 - rng.uniform();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

Problem gen_chain(std::size_t n, std::size_t s, std::uint64_t seed, double scale) {
  if (n == 0 || s == 0 || s > n) fail(ErrorCode::BadParams, "chain needs 0 < s <= n");
  if (!(scale > 0.0 && scale < 1.0)) fail(ErrorCode::BadParams, "chain scale must lie in (0, 1)");
  Rng rng(seed);
  const auto k = static_cast<Eigen::Index>(n);
  Problem p;
  p.kind = ProblemKind::Chain;
  p.n = n;
  p.s = s;
  Matrix a = scale * random_stochastic(n, rng);
  Vector b(k);
  for (Eigen::Index i = 0; i < k; ++i) b(i) = rng.uniform();
  Matrix phi(k, static_cast<Eigen::Index>(s));
  phi.col(0).setOnes();
  for (Eigen::Index j = 1; j < phi.cols(); ++j)
    for (Eigen::Index i = 0; i < k; ++i) phi(i, j) = rng.uniform(-1.0, 1.0);
  p.chain = ChainData{default_proposal(a), Vector::Constant(k, 1.0 / static_cast<double>(n)), rng.next_seed()};
  p.A = std::move(a);
  p.b = std::move(b);
  p.Phi = std::move(phi);
  p.metadata = {{"seed", seed}, {"scale", scale}, {"description", "scaled stochastic chain with random features"}};
  return p;
}

Problem gen_piecewise(std::size_t n, std::size_t pieces, Combinator combinator, std::uint64_t seed) {
  if (n == 0 || pieces == 0) fail(ErrorCode::BadParams, "piecewise needs n > 0 and at least one piece");
  Rng rng(seed);
  const auto k = static_cast<Eigen::Index>(n);
  Problem p;
  p.kind = ProblemKind::Piecewise;
  p.n = n;
  PiecewiseData data;
  data.combinator = combinator;
  for (std::size_t c = 0; c < pieces; ++c) {
    Matrix a(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) a(i, j) = rng.uniform();
      a.row(i) *= rng.uniform(0.3, 0.9) / a.row(i).sum();
    }
    Vector b(k);
    for (Eigen::Index i = 0; i < k; ++i) b(i) = rng.uniform(-1.0, 1.0);
    data.pieces.push_back({std::move(a), std::move(b)});
  }
  if (combinator == Combinator::MinMax) {
    for (std::size_t c = 0; c < pieces; ++c) data.groups.push_back(c % 2);
  }
  p.piecewise = std::move(data);
  p.metadata = {{"seed", seed}, {"x0", 10.0}, {"description", "random nonnegative sup-norm contractions"}};
  return p;
}

Problem gen_quadratic_family(std::size_t grid) {
  if (grid == 0) fail(ErrorCode::BadParams, "grid must be positive");
  Problem p;
  p.kind = ProblemKind::Piecewise;
  p.n = 1;
  PiecewiseData data;
  for (std::size_t k = 1; k <= grid; ++k) {
    const double mu = static_cast<double>(k) / static_cast<double>(grid);
    data.pieces.push_back({Matrix::Constant(1, 1, 1.0 - mu * mu), Vector::Constant(1, -mu)});
  }
  p.piecewise = std::move(data);
  p.metadata = {{"x0", 0.0}, {"grid", grid}, {"expected_limit", -static_cast<double>(grid)},
                {"description", "min over mu of (1 - mu^2) x - mu"}};
  return p;
}

Problem gen_min_one_x() {
  Problem p;
  p.kind = ProblemKind::Piecewise;
  p.n = 1;
  PiecewiseData data;
  data.pieces.push_back({Matrix::Zero(1, 1), Vector::Constant(1, 1.0)});
  data.pieces.push_back({Matrix::Identity(1, 1), Vector::Zero(1)});
  p.piecewise = std::move(data);
  p.metadata = {{"x0", 0.0}, {"description", "min{1, x}; every x <= 1 is a fixed point"}};
  return p;
}

Problem gen_nonlinear(std::size_t n, std::uint64_t seed) {
  if (n == 0) fail(ErrorCode::BadParams, "n must be positive");
  Rng rng(seed);
  const auto k = static_cast<Eigen::Index>(n);
  NonlinearData data;
  data.family = "tanh";
  data.a.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) data.a(i) = rng.uniform(0.3, 0.6);
  Matrix g(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) g(i, j) = rng.normal();
  const double norm = Eigen::JacobiSVD<Matrix>(g).singularValues()(0);
  data.B = 0.3 * g / norm;
  data.c.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) data.c(i) = rng.uniform(-1.0, 1.0);
  data.H = 0.2 * Matrix::Identity(k, k);
  Problem p;
  p.kind = ProblemKind::Nonlinear;
  p.n = n;
  p.nonlinear = std::move(data);
  p.metadata = {{"seed", seed}, {"description", "a .* tanh(x) + B x + c with H = 0.2 I"}};
  return p;
}

}  // namespace proxtd
