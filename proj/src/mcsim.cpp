#include "proxtd/mcsim.hpp"

#include <cmath>
#include <sstream>

#include "proxtd/error.hpp"

namespace proxtd {

ChainSpec::ChainSpec(Matrix p, Vector initial, std::uint64_t seed)
    : p_(std::move(p)), initial_(std::move(initial)), seed_(seed) {
  if (p_.rows() != p_.cols() || p_.rows() == 0) fail(ErrorCode::DimensionMismatch, "P must be square");
  if (initial_.size() != p_.rows()) fail(ErrorCode::DimensionMismatch, "initial distribution length");
  auto check = [](const Eigen::Ref<const Vector>& row, const std::string& what) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      if (!(row(j) >= 0.0) || !std::isfinite(row(j))) fail(ErrorCode::BadStochastic, what + " has a negative entry");
      sum += row(j);
    }
    if (std::abs(sum - 1.0) > 1e-10) fail(ErrorCode::BadStochastic, what + " does not sum to 1");
  };
  for (Eigen::Index i = 0; i < p_.rows(); ++i) check(p_.row(i).transpose(), "row " + std::to_string(i) + " of P");
  check(initial_, "initial distribution");
}

void check_support(const ChainSpec& chain, const AffineMap& map) {
  if (chain.n() != map.dim()) fail(ErrorCode::DimensionMismatch, "chain and map sizes differ");
  for (std::size_t i = 0; i < chain.n(); ++i)
    for (std::size_t j = 0; j < chain.n(); ++j)
      if (map.A()(i, j) != 0.0 && chain.P()(i, j) == 0.0) {
        std::ostringstream os;
        os << "transition " << i << " -> " << j << " has a_ij != 0 but p_ij = 0";
        fail(ErrorCode::UnsupportedTransition, os.str());
      }
}

Matrix default_proposal(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) fail(ErrorCode::DimensionMismatch, "A must be square");
  const auto n = a.rows();
  const double floor = 1e-6;
  Matrix p(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double total = a.row(i).cwiseAbs().sum();
    if (total == 0.0) {
      p.row(i).setConstant(1.0 / static_cast<double>(n));
      continue;
    }
    p.row(i) = (1.0 - floor) * a.row(i).cwiseAbs() / total;
    p.row(i).array() += floor / static_cast<double>(n);
  }
  return p;
}

Vector stationary_distribution(const Matrix& p) {
  const auto n = p.rows();
  Matrix m = Matrix::Identity(n, n) - p.transpose();
  m.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;
  return LuFactor(m).solve(rhs);
}

TrajectorySampler::TrajectorySampler(const ChainSpec& chain) : chain_(&chain), rng_(chain.seed()), current_(0) {
  current_ = draw(chain.initial());
}

std::size_t TrajectorySampler::draw(const Eigen::Ref<const Vector>& probs) {
  const double u = rng_.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (Eigen::Index j = 0; j < probs.size(); ++j) {
    if (probs(j) <= 0.0) continue;
    last_positive = static_cast<std::size_t>(j);
    cumulative += probs(j);
    if (u < cumulative) return last_positive;
  }
  // Rounding can leave the total a hair below u.
  return last_positive;
}

std::size_t TrajectorySampler::next() {
  current_ = draw(chain_->P().row(static_cast<Eigen::Index>(current_)).transpose());
  return current_;
}

std::vector<std::size_t> sample_trajectory(const ChainSpec& chain, std::size_t length) {
  TrajectorySampler sampler(chain);
  std::vector<std::size_t> out;
  out.reserve(length + 1);
  out.push_back(sampler.current());
  for (std::size_t k = 0; k < length; ++k) out.push_back(sampler.next());
  return out;
}

Vector temporal_difference(const AffineMap& map, const Vector& x, std::size_t ell) {
  Vector d = apply_T(map, x) - x;
  for (std::size_t k = 0; k < ell; ++k) d = map.A() * d;
  return d;
}

Vector multistep_via_td(const AffineMap& map, MultistepParam p, const Vector& x, double eps) {
  const double l = p.lambda();
  Vector term = apply_T(map, x) - x;
  Vector sum = x;
  double weight = 1.0;
  for (std::size_t ell = 0; ell < 1000000; ++ell) {
    sum += weight * term;
    if (weight * norm_inf(term) < eps) return sum;
    term = map.A() * term;
    weight *= l;
  }
  fail(ErrorCode::NoConvergence, "temporal-difference series did not settle");
}

EstimatorState EstimatorState::empty(std::size_t s, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) fail(ErrorCode::BadParams, "trace lambda must lie in [0, 1)");
  const auto k = static_cast<Eigen::Index>(s);
  EstimatorState st;
  st.z = Vector::Zero(k);
  st.c_raw = Matrix::Zero(k, k);
  st.d_raw = Vector::Zero(k);
  st.gram = Matrix::Zero(k, k);
  st.lambda = lambda;
  return st;
}

EstimatorState EstimatorState::from_estimates(Matrix c, Vector d, std::size_t t, double lambda) {
  if (c.rows() != c.cols() || c.rows() != d.size()) fail(ErrorCode::DimensionMismatch, "estimate shapes");
  EstimatorState st = empty(static_cast<std::size_t>(d.size()), lambda);
  st.gram = Matrix::Identity(c.rows(), c.cols());
  st.c_raw = std::move(c);
  st.d_raw = std::move(d);
  st.t = t;
  return st;
}

Matrix EstimatorState::chat() const {
  if (t == 0) return Matrix::Zero(c_raw.rows(), c_raw.cols());
  return LuFactor(gram).solve(c_raw);
}

Vector EstimatorState::dhat() const {
  if (t == 0) return Vector::Zero(d_raw.size());
  return LuFactor(gram).solve(d_raw);
}

EstimatorState update_estimates(EstimatorState state, const AffineMap& map, const ProjectionSpec& spec,
                                const ChainSpec& chain, Transition transition) {
  const auto i = static_cast<Eigen::Index>(transition.from);
  const auto j = static_cast<Eigen::Index>(transition.to);
  if (transition.from >= map.dim() || transition.to >= map.dim())
    fail(ErrorCode::DimensionMismatch, "transition index out of range");
  if (state.s() != spec.s()) fail(ErrorCode::DimensionMismatch, "estimator size differs from Phi");
  const double pij = chain.P()(i, j);
  const double aij = map.A()(i, j);
  if (pij == 0.0 && aij != 0.0) fail(ErrorCode::UnsupportedTransition, "sampled transition has p_ij = 0");
  const double w = pij == 0.0 ? 0.0 : aij / pij;

  const Vector phi_i = spec.Phi().row(i).transpose();
  const Vector phi_j = spec.Phi().row(j).transpose();
  if (state.last_index && *state.last_index == transition.from) {
    state.z = state.lambda * state.prev_weight * state.z + phi_i;
  } else {
    state.z = phi_i;
  }

  const double inv = 1.0 / static_cast<double>(state.t + 1);
  state.c_raw += (state.z * (phi_i - w * phi_j).transpose() - state.c_raw) * inv;
  state.d_raw += (state.z * map.b()(i) - state.d_raw) * inv;
  state.gram += (phi_i * phi_i.transpose() - state.gram) * inv;
  state.t += 1;
  state.prev_weight = w;
  state.last_index = transition.to;
  return state;
}

EstimatorState collect_estimates(const AffineMap& map, const ProjectionSpec& spec, const ChainSpec& chain,
                                 double lambda, std::size_t samples,
                                 const std::function<void(const EstimatorState&)>& on_sample) {
  check_support(chain, map);
  EstimatorState state = EstimatorState::empty(spec.s(), lambda);
  TrajectorySampler sampler(chain);
  for (std::size_t k = 0; k < samples; ++k) {
    const std::size_t from = sampler.current();
    const std::size_t to = sampler.next();
    state = update_estimates(std::move(state), map, spec, chain, {from, to});
    if (on_sample) on_sample(state);
  }
  return state;
}

EstimatorState merge_estimates(const EstimatorState& a, const EstimatorState& b) {
  if (a.s() != b.s()) fail(ErrorCode::MismatchedConfig, "estimators have different s");
  if (a.lambda != b.lambda) fail(ErrorCode::MismatchedConfig, "estimators have different lambda");
  if (b.t == 0) return a;
  if (a.t == 0) return b;
  EstimatorState out = EstimatorState::empty(a.s(), a.lambda);
  const double total = static_cast<double>(a.t + b.t);
  const double wa = static_cast<double>(a.t) / total;
  const double wb = static_cast<double>(b.t) / total;
  out.c_raw = wa * a.c_raw + wb * b.c_raw;
  out.d_raw = wa * a.d_raw + wb * b.d_raw;
  out.gram = wa * a.gram + wb * b.gram;
  out.t = a.t + b.t;
  return out;
}

LowDimSystem estimated_system(const EstimatorState& state) {
  if (state.t == 0) fail(ErrorCode::SingularMatrix, "no samples collected");
  return LowDimSystem::from_c(state.chat(), state.dhat(), state.lambda);
}

Vector sim_lstd(const EstimatorState& state) { return lstd_solve(estimated_system(state)); }

Vector sim_lspe_step(const EstimatorState& state, const Vector& r, bool interpolated) {
  return lspe_iterate(estimated_system(state), r, interpolated, state.lambda);
}

Vector sim_prox_step(const EstimatorState& state, const Vector& r, double chat,
                     const std::optional<Matrix>& sigma, bool extrapolated) {
  const LowDimSystem sys = estimated_system(state);
  if (sigma) return sigma_regularized_iterate(sys, *sigma, chat, r, extrapolated);
  return prox_projected_iterate(sys, chat, r, extrapolated);
}

double StepRule::at(std::size_t k) const {
  if (kind == Kind::Harmonic) return value / static_cast<double>(k + 1);
  return value;
}

TdState td_lambda_step(TdState td, const Vector& z, double q) {
  if (z.size() != td.r.size()) fail(ErrorCode::DimensionMismatch, "trace and r lengths differ");
  td.r += td.rule.at(td.k) * q * z;
  td.k += 1;
  return td;
}

TdState run_td_lambda(const AffineMap& map, const ProjectionSpec& spec, const ChainSpec& chain,
                      double lambda, std::size_t steps, TdState td,
                      const std::function<void(const TdState&)>& on_step) {
  check_support(chain, map);
  if (static_cast<std::size_t>(td.r.size()) != spec.s()) fail(ErrorCode::DimensionMismatch, "r length");
  if (!(lambda >= 0.0 && lambda < 1.0)) fail(ErrorCode::BadParams, "trace lambda must lie in [0, 1)");
  TrajectorySampler sampler(chain);
  Vector z = Vector::Zero(td.r.size());
  double prev_weight = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const auto i = static_cast<Eigen::Index>(sampler.current());
    const auto j = static_cast<Eigen::Index>(sampler.next());
    const double w = map.A()(i, j) / chain.P()(i, j);
    const Vector phi_i = spec.Phi().row(i).transpose();
    z = lambda * prev_weight * z + phi_i;
    const double q = map.b()(i) + w * spec.Phi().row(j).dot(td.r) - phi_i.dot(td.r);
    td = td_lambda_step(std::move(td), z, q);
    prev_weight = w;
    if (on_step) on_step(td);
  }
  return td;
}

}  // namespace proxtd
