#pragma once

// Fixed points of piecewise-affine maps T(x) = min / max / min-max over a
// finite family of affine components, by linearized multistep iterations.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "proxtd/linalg.hpp"
#include "proxtd/proxmulti.hpp"
#include "proxtd/trace.hpp"

namespace proxtd {

struct AffinePiece {
  Matrix A;
  Vector b;
};

enum class Combinator { Min, Max, MinMax };

/// Row i of T(x) combines row i of every component. MinMax takes, per row,
/// the minimum over groups of the maximum over the components in a group;
/// `group_of[k]` names the group of component k (groups numbered 0..G-1).
class PiecewiseAffineMap {
 public:
  PiecewiseAffineMap(std::vector<AffinePiece> pieces, Combinator combinator,
                     std::vector<std::size_t> group_of = {});

  const std::vector<AffinePiece>& pieces() const { return pieces_; }
  Combinator combinator() const { return combinator_; }
  std::size_t dim() const { return n_; }
  std::size_t size() const { return pieces_.size(); }
  /// Number of choices per row: components for Min/Max, groups for MinMax.
  std::size_t choices() const { return combinator_ == Combinator::MinMax ? groups_.size() : pieces_.size(); }
  const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }

  /// a(i, k)' x + b(i, k), the single arithmetic path used for every row value.
  double row_value(std::size_t k, std::size_t i, const Vector& x) const;

 private:
  std::vector<AffinePiece> pieces_;
  Combinator combinator_;
  std::size_t n_ = 0;
  std::vector<std::vector<std::size_t>> groups_;
};

/// Per-row choice: a component index for Min/Max, a group index for MinMax.
using Selection = std::vector<std::size_t>;

struct PwValue {
  Vector value;
  Selection selection;
};

/// Ties go to the lowest index.
PwValue pw_apply(const PiecewiseAffineMap& pmap, const Vector& x);
Selection greedy_select(const PiecewiseAffineMap& pmap, const Vector& x);

/// T_mu x for any combinator (rowwise max over the group for MinMax).
Vector apply_selected(const PiecewiseAffineMap& pmap, const Selection& mu, const Vector& x);

/// (A_mu, b_mu) assembled from the selected component rows; Min/Max only.
AffinePiece assemble_selected(const PiecewiseAffineMap& pmap, const Selection& mu);

struct LinearizedVariant {
  enum class Kind { Multistep, Proximal, MFold };
  Kind kind = Kind::Multistep;
  std::size_t m = 1;

  static LinearizedVariant multistep() { return {Kind::Multistep}; }
  static LinearizedVariant proximal() { return {Kind::Proximal}; }
  static LinearizedVariant mfold(std::size_t m) { return {Kind::MFold, m}; }
};

/// T_mu^(lambda) x, P_mu^(c) x or T_mu^m x at mu = greedy_select(x). For
/// MinMax, T_mu is nonlinear: the multistep value uses the truncated series
/// (1-lambda)(T x + ... + lambda^(L-1) T^L x) + lambda^L T^L x with
/// lambda^L < 1e-15, and the proximal value an inner fixed-point iteration.
/// This MinMax path is experimental.
Vector linearized_iterate(const PiecewiseAffineMap& pmap, MultistepParam p, const Vector& x,
                          LinearizedVariant variant);

/// Truncated-series multistep value of a selected (possibly nonlinear) T_mu.
Vector selected_multistep_series(const PiecewiseAffineMap& pmap, const Selection& mu, MultistepParam p,
                                 const Vector& x);

/// Real entries plus -inf/+inf markers.
struct ExtendedVector {
  Vector values;

  bool finite() const { return values.allFinite(); }
  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

/// T on extended reals with 0 * (+-inf) = 0; Min/Max only.
ExtendedVector pw_apply_extended(const PiecewiseAffineMap& pmap, const ExtendedVector& x);

/// Tolerance below 1 for calling a component proper.
inline constexpr double kProperSlack = 1e-8;

struct ProperEntry {
  Selection selection;
  double spectral = 0.0;
  bool proper = false;
  std::optional<Vector> x_mu;
};

enum class Enumeration {
  /// The full product family when it has at most 1e6 members, else per component.
  Auto,
  /// The full product family; EnumerationTooLarge above 1e6 members.
  Full,
  /// The listed components only (uniform selections).
  PerComponent,
};

struct ProperReport {
  std::vector<ProperEntry> entries;
  bool full_product = false;

  std::size_t proper_count() const;
  std::size_t improper_count() const;
};

inline constexpr std::size_t kEnumerationCap = 1000000;

/// Min/Max only.
ProperReport properness_report(const PiecewiseAffineMap& pmap, Enumeration mode = Enumeration::Auto);

/// Componentwise min (max for Max) of x_mu over proper mu in the full
/// product family; NoProperComponent when there is none.
ExtendedVector brute_force_xstar(const PiecewiseAffineMap& pmap, Enumeration mode = Enumeration::Full);

struct MonotoneOptions {
  double tol = 1e-10;
  std::size_t max_iter = 100000;
  double floor = -1e12;
};

struct MonotoneResult {
  IterateTrace trace;
  /// Final iterate with coordinates below the floor marked -inf.
  ExtendedVector limit;
  std::size_t violations = 0;
  /// Accepted mu_k (T_mu x <= x) whose spectral estimate is not below 1.
  std::size_t improper_accepts = 0;
  std::vector<Selection> selections;
};

/// x_{k+1} = T_{mu_k}^(lambda) x_k with mu_k greedy; requires Min, nonnegative
/// components and x0 >= T(x0). Throws NonMonotoneStep if an iterate increases.
MonotoneResult monotone_solve(const PiecewiseAffineMap& pmap, MultistepParam p, const Vector& x0,
                              const MonotoneOptions& opts = {});

struct RandomizedOptions {
  double prob = 0.2;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  std::size_t max_iter = 100000;
  /// Weights v of the sup-norm max_i |x_i| / v_i; all ones when empty.
  Vector weights;
};

/// Weighted sup-norm modulus max_i sum_j |a_ij| v_j / v_i over every
/// component row, which bounds every A_mu in the product family.
double weighted_sup_modulus(const PiecewiseAffineMap& pmap, const Vector& weights);

/// With probability prob: x <- T(x) and mu <- greedy_select at the old x;
/// otherwise x <- T_mu^(lambda) x. ContractionCheckFailed unless the
/// weighted sup-norm modulus and every component's spectral estimate are
/// below 1. A non-converged trace is returned with converged = false.
IterateTrace randomized_solve(const PiecewiseAffineMap& pmap, MultistepParam p, const Vector& x0,
                              const RandomizedOptions& opts = {});

/// Same scheme for x = W T(x), stepping with W T and with the multistep map
/// of (W A_mu, W b_mu). When some (W A_mu)^(lambda) has spectral estimate
/// at or above 1, or a sampled sup-norm ratio of W o T reaches 1, the trace
/// carries a "WarnNormMismatch" note and runs with a divergence guard at 1e12.
/// Min/Max only.
IterateTrace composed_randomized_solve(const PiecewiseAffineMap& pmap, const Matrix& w, MultistepParam p,
                                       const Vector& x0, const RandomizedOptions& opts = {});

}  // namespace proxtd
