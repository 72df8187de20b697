#pragma once

// Monte-Carlo estimation of the projected system from one Markov-chain
// trajectory with importance weights a_ij / p_ij and an eligibility trace.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "proxtd/galerkin.hpp"
#include "proxtd/linalg.hpp"
#include "proxtd/proxmulti.hpp"
#include "proxtd/rng.hpp"

namespace proxtd {

/// Row-stochastic transition matrix, initial distribution and seed.
class ChainSpec {
 public:
  ChainSpec(Matrix p, Vector initial, std::uint64_t seed);

  const Matrix& P() const { return p_; }
  const Vector& initial() const { return initial_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t n() const { return static_cast<std::size_t>(p_.rows()); }

 private:
  Matrix p_;
  Vector initial_;
  std::uint64_t seed_;
};

/// UnsupportedTransition when some a_ij != 0 has p_ij = 0.
void check_support(const ChainSpec& chain, const AffineMap& map);

/// P_ij proportional to |A_ij|, mixed with a 1e-6 uniform floor; zero rows
/// of A become uniform rows.
Matrix default_proposal(const Matrix& a);

/// xi with xi' P = xi' and sum 1.
Vector stationary_distribution(const Matrix& p);

/// Inverse-CDF sampling of the chain, one RNG stream per sampler.
class TrajectorySampler {
 public:
  explicit TrajectorySampler(const ChainSpec& chain);

  std::size_t current() const { return current_; }
  std::size_t next();

 private:
  std::size_t draw(const Eigen::Ref<const Vector>& probs);

  const ChainSpec* chain_;
  Rng rng_;
  std::size_t current_;
};

/// i_0, ..., i_length (length + 1 indices, 0-based).
std::vector<std::size_t> sample_trajectory(const ChainSpec& chain, std::size_t length);

/// A^ell (A x + b - x).
Vector temporal_difference(const AffineMap& map, const Vector& x, std::size_t ell);

/// x + sum_{ell <= L} lambda^ell d(x, ell), stopping at the first L with
/// lambda^L ||d(x, L)||inf < eps (cap 1e6 terms).
Vector multistep_via_td(const AffineMap& map, MultistepParam p, const Vector& x, double eps);

/// Running means over transitions (i_t, i_{t+1}):
///   c_raw = mean z_t (phi(i_t) - w_t phi(i_{t+1}))'
///   d_raw = mean z_t b(i_t)
///   gram  = mean phi(i_t) phi(i_t)'
/// with z_t = lambda w_{t-1} z_{t-1} + phi(i_t). The projected system is
/// C = gram^-1 c_raw, d = gram^-1 d_raw.
struct EstimatorState {
  Vector z;
  Matrix c_raw;
  Vector d_raw;
  Matrix gram;
  std::size_t t = 0;
  double lambda = 0.0;
  /// State the trace expects next; a transition starting elsewhere resets z.
  std::optional<std::size_t> last_index;
  double prev_weight = 0.0;

  static EstimatorState empty(std::size_t s, double lambda);
  /// State with gram = I holding the given C and d directly.
  static EstimatorState from_estimates(Matrix c, Vector d, std::size_t t, double lambda);

  std::size_t s() const { return static_cast<std::size_t>(z.size()); }
  Matrix chat() const;
  Vector dhat() const;
};

struct Transition {
  std::size_t from;
  std::size_t to;
};

EstimatorState update_estimates(EstimatorState state, const AffineMap& map, const ProjectionSpec& spec,
                                const ChainSpec& chain, Transition transition);

/// Draws `samples` transitions from a fresh sampler on `chain`;
/// `on_sample` sees the state after every update.
EstimatorState collect_estimates(const AffineMap& map, const ProjectionSpec& spec, const ChainSpec& chain,
                                 double lambda, std::size_t samples,
                                 const std::function<void(const EstimatorState&)>& on_sample = {});

/// Count-weighted average with a reset trace; an empty side returns the other.
EstimatorState merge_estimates(const EstimatorState& a, const EstimatorState& b);

LowDimSystem estimated_system(const EstimatorState& state);

Vector sim_lstd(const EstimatorState& state);
Vector sim_lspe_step(const EstimatorState& state, const Vector& r, bool interpolated);
Vector sim_prox_step(const EstimatorState& state, const Vector& r, double chat,
                     const std::optional<Matrix>& sigma, bool extrapolated);

struct StepRule {
  enum class Kind { Harmonic, Constant };
  Kind kind = Kind::Harmonic;
  double value = 1.0;

  static StepRule harmonic(double a) { return {Kind::Harmonic, a}; }
  static StepRule constant(double g) { return {Kind::Constant, g}; }
  double at(std::size_t k) const;
};

struct TdState {
  Vector r;
  std::size_t k = 0;
  StepRule rule;
};

/// r <- r + gamma_k z q, k <- k + 1.
TdState td_lambda_step(TdState td, const Vector& z, double q);

/// TD(lambda) along one trajectory with q_t = b(i_t) + w_t phi(i_{t+1})' r - phi(i_t)' r.
TdState run_td_lambda(const AffineMap& map, const ProjectionSpec& spec, const ChainSpec& chain,
                      double lambda, std::size_t steps, TdState td,
                      const std::function<void(const TdState&)>& on_step = {});

}  // namespace proxtd
