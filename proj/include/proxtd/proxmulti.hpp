#pragma once

// Proximal and multistep mappings for the affine fixed-point problem
// x = Ax + b, the identities relating them, and the iterations built on them.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "proxtd/linalg.hpp"
#include "proxtd/trace.hpp"

namespace proxtd {

/// Tolerance on the spectral-radius side of the standing assumption.
inline constexpr double kAssumptionSlack = 1e-8;

/// T x = A x + b.
///
/// The checked constructor factors I - A (SingularMatrix when it is singular),
/// caches the fixed point and records whether the estimated spectral radius
/// of A is at most 1 + kAssumptionSlack. `unchecked` skips both; it is used
/// for maps built on the fly (piecewise selections, projected compositions)
/// whose I - A may legitimately be singular.
class AffineMap {
 public:
  AffineMap(Matrix a, Vector b);

  static AffineMap unchecked(Matrix a, Vector b);

  const Matrix& A() const { return a_; }
  const Vector& b() const { return b_; }
  std::size_t dim() const { return static_cast<std::size_t>(b_.size()); }

  bool checked() const { return checked_; }
  /// NaN for unchecked maps.
  double spectral_estimate() const { return spectral_; }
  bool assumption_ok() const { return checked_ && spectral_ <= 1.0 + kAssumptionSlack; }

  /// x* = (I - A)^-1 b; cached when checked, solved on demand otherwise.
  Vector fixed_point() const;

 private:
  struct Unchecked {};
  AffineMap(Matrix a, Vector b, Unchecked);

  Matrix a_;
  Vector b_;
  bool checked_ = false;
  double spectral_;
  Vector fixed_point_;
};

/// lambda in (0, 1) and c = lambda / (1 - lambda) > 0.
class MultistepParam {
 public:
  static MultistepParam from_lambda(double lambda);
  static MultistepParam from_c(double c);

  double lambda() const { return lambda_; }
  double c() const { return c_; }
  /// (c + 1) / c, equal to 1 / lambda.
  double extrapolation_factor() const { return (c_ + 1.0) / c_; }

 private:
  MultistepParam(double lambda, double c) : lambda_(lambda), c_(c) {}
  double lambda_;
  double c_;
};

/// Factorization of I - lambda A shared by the proximal and multistep maps.
class MultistepResolvent {
 public:
  MultistepResolvent(const AffineMap& map, MultistepParam p);

  /// (I - lambda A)^-1 (lambda b + (1 - lambda) x).
  Vector proximal(const Vector& x) const;
  /// (I - lambda A)^-1 (b + (1 - lambda) A x).
  Vector multistep(const Vector& x) const;

  MultistepParam param() const { return p_; }

 private:
  const AffineMap* map_;
  MultistepParam p_;
  LuFactor lu_;
};

Vector apply_T(const AffineMap& map, const Vector& x);
Vector proximal_apply(const AffineMap& map, MultistepParam p, const Vector& x);
Vector multistep_apply(const AffineMap& map, MultistepParam p, const Vector& x);

/// x + ((c + 1) / c) (px - x).
Vector extrapolate_from_prox(const Vector& x, const Vector& px, MultistepParam p);

/// (1 - gamma) P x + gamma T^(lambda) x, gamma >= 0.
Vector gamma_iterate(const AffineMap& map, MultistepParam p, double gamma, const Vector& x);

enum class WVariant { W, Wbar };

/// W: (1 - lambda) T(anchor) + lambda T(y); Wbar: (1 - lambda) anchor + lambda T(y).
Vector w_mapping_apply(const AffineMap& map, MultistepParam p, const Vector& anchor,
                       const Vector& y, WVariant variant);

/// m applications of W anchored at x, started from x.
Vector vm_apply(const AffineMap& map, MultistepParam p, std::size_t m, const Vector& x);

struct LambdaMatrices {
  Matrix a_lambda;   // (I - lambda A)^-1 (1 - lambda) A
  Vector b_lambda;   // (I - lambda A)^-1 b
  Matrix a_bar;      // (I - lambda A)^-1 (1 - lambda)
  Vector b_bar;      // (I - lambda A)^-1 lambda b
};

LambdaMatrices lambda_matrices(const AffineMap& map, MultistepParam p);

struct FixedPointMethod {
  enum class Kind { Proximal, Multistep, Gamma, Vm, PlainT };

  Kind kind = Kind::Multistep;
  double gamma = 0.0;
  std::size_t m = 1;

  static FixedPointMethod proximal() { return {Kind::Proximal}; }
  static FixedPointMethod multistep() { return {Kind::Multistep}; }
  static FixedPointMethod plain() { return {Kind::PlainT}; }
  static FixedPointMethod with_gamma(double g) { return {Kind::Gamma, g}; }
  static FixedPointMethod vm(std::size_t m) { return {Kind::Vm, 0.0, m}; }

  /// "proximal", "multistep", "plainT", "gamma:<g>", "vm:<m>".
  std::string label() const;
  static std::optional<FixedPointMethod> parse(std::string_view text);
};

struct SolveOptions {
  double tol = 1e-10;
  std::size_t max_iter = 100000;
  /// Run even when the spectral assumption is not certified.
  bool force = false;
};

/// Iterates x_{k+1} = F(x_k) for the chosen F until ||x_k - T x_k||inf <= tol.
/// Throws AssumptionViolated when the map's assumption flag is off and
/// `force` is not set; otherwise a non-converged trace is returned with
/// converged = false.
IterateTrace solve_fixed_point(const AffineMap& map, const FixedPointMethod& method,
                               MultistepParam p, const Vector& x0, const SolveOptions& options = {});

}  // namespace proxtd
