#include "proxtd/proxmulti.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "proxtd/error.hpp"

namespace proxtd {

namespace {

void check_square(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    fail(ErrorCode::DimensionMismatch, "affine map needs square A and matching b");
}

void check_dim(const AffineMap& map, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != map.dim())
    fail(ErrorCode::DimensionMismatch, "vector length does not match the map");
}

Matrix shifted(const Matrix& a, double lambda) {
  return Matrix::Identity(a.rows(), a.cols()) - lambda * a;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

}  // namespace

AffineMap::AffineMap(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  check_square(a_, b_);
  if (!a_.allFinite() || !b_.allFinite()) fail(ErrorCode::BadParams, "affine map has non-finite entries");
  const Matrix i_minus_a = shifted(a_, 1.0);
  fixed_point_ = LuFactor(i_minus_a, 1.0 + norm_inf(a_)).solve(b_);
  spectral_ = estimate_spectral_radius(a_, 1e-9).value;
  checked_ = true;
}

AffineMap::AffineMap(Matrix a, Vector b, Unchecked)
    : a_(std::move(a)), b_(std::move(b)), spectral_(std::numeric_limits<double>::quiet_NaN()) {
  check_square(a_, b_);
}

AffineMap AffineMap::unchecked(Matrix a, Vector b) {
  return AffineMap(std::move(a), std::move(b), Unchecked{});
}

Vector AffineMap::fixed_point() const {
  if (checked_) return fixed_point_;
  return LuFactor(shifted(a_, 1.0), 1.0 + norm_inf(a_)).solve(b_);
}

MultistepParam MultistepParam::from_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) fail(ErrorCode::BadParams, "lambda must lie in (0, 1)");
  return MultistepParam(lambda, lambda / (1.0 - lambda));
}

MultistepParam MultistepParam::from_c(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) fail(ErrorCode::BadParams, "c must be positive");
  return MultistepParam(c / (c + 1.0), c);
}

MultistepResolvent::MultistepResolvent(const AffineMap& map, MultistepParam p)
    : map_(&map), p_(p), lu_(shifted(map.A(), p.lambda()), 1.0 + p.lambda() * norm_inf(map.A())) {}

Vector MultistepResolvent::proximal(const Vector& x) const {
  check_dim(*map_, x);
  const double l = p_.lambda();
  return lu_.solve(Vector(l * map_->b() + (1.0 - l) * x));
}

Vector MultistepResolvent::multistep(const Vector& x) const {
  check_dim(*map_, x);
  const double l = p_.lambda();
  return lu_.solve(Vector(map_->b() + (1.0 - l) * (map_->A() * x)));
}

Vector apply_T(const AffineMap& map, const Vector& x) {
  check_dim(map, x);
  return map.A() * x + map.b();
}

Vector proximal_apply(const AffineMap& map, MultistepParam p, const Vector& x) {
  return MultistepResolvent(map, p).proximal(x);
}

Vector multistep_apply(const AffineMap& map, MultistepParam p, const Vector& x) {
  return MultistepResolvent(map, p).multistep(x);
}

Vector extrapolate_from_prox(const Vector& x, const Vector& px, MultistepParam p) {
  if (x.size() != px.size()) fail(ErrorCode::DimensionMismatch, "extrapolation operands differ in length");
  return x + p.extrapolation_factor() * (px - x);
}

Vector gamma_iterate(const AffineMap& map, MultistepParam p, double gamma, const Vector& x) {
  if (!(gamma >= 0.0)) fail(ErrorCode::BadParams, "gamma must be nonnegative");
  const MultistepResolvent r(map, p);
  return (1.0 - gamma) * r.proximal(x) + gamma * r.multistep(x);
}

Vector w_mapping_apply(const AffineMap& map, MultistepParam p, const Vector& anchor, const Vector& y,
                       WVariant variant) {
  check_dim(map, anchor);
  check_dim(map, y);
  const double l = p.lambda();
  const Vector first = variant == WVariant::W ? apply_T(map, anchor) : anchor;
  return (1.0 - l) * first + l * apply_T(map, y);
}

Vector vm_apply(const AffineMap& map, MultistepParam p, std::size_t m, const Vector& x) {
  if (m == 0) fail(ErrorCode::BadParams, "vm needs m >= 1");
  check_dim(map, x);
  const double l = p.lambda();
  const Vector base = (1.0 - l) * apply_T(map, x);
  Vector y = x;
  for (std::size_t k = 0; k < m; ++k) y = base + l * apply_T(map, y);
  return y;
}

LambdaMatrices lambda_matrices(const AffineMap& map, MultistepParam p) {
  const double l = p.lambda();
  const LuFactor lu(shifted(map.A(), l), 1.0 + l * norm_inf(map.A()));
  LambdaMatrices out;
  out.a_bar = lu.inverse() * (1.0 - l);
  out.a_lambda = out.a_bar * map.A();
  out.b_lambda = lu.solve(map.b());
  out.b_bar = l * out.b_lambda;
  return out;
}

std::string FixedPointMethod::label() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Proximal: return "proximal";
    case Kind::Multistep: return "multistep";
    case Kind::PlainT: return "plainT";
    case Kind::Gamma: os << "gamma:" << gamma; return os.str();
    case Kind::Vm: os << "vm:" << m; return os.str();
  }
  return "unknown";
}

std::optional<FixedPointMethod> FixedPointMethod::parse(std::string_view text) {
  if (text == "proximal") return proximal();
  if (text == "multistep") return multistep();
  if (text == "plainT" || text == "plain") return plain();
  std::string_view head;
  std::string_view arg;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    head = text.substr(0, colon);
    arg = text.substr(colon + 1);
  } else if (const auto open = text.find('('); open != std::string_view::npos && text.back() == ')') {
    head = text.substr(0, open);
    arg = text.substr(open + 1, text.size() - open - 2);
  } else {
    return std::nullopt;
  }
  const auto value = parse_double(arg);
  if (!value) return std::nullopt;
  if (head == "gamma" && *value >= 0.0) return with_gamma(*value);
  if (head == "vm" && *value >= 1.0 && std::floor(*value) == *value)
    return vm(static_cast<std::size_t>(*value));
  return std::nullopt;
}

IterateTrace solve_fixed_point(const AffineMap& map, const FixedPointMethod& method, MultistepParam p,
                               const Vector& x0, const SolveOptions& options) {
  check_dim(map, x0);
  IterateTrace trace;
  trace.method = method.label();
  if (!map.assumption_ok()) {
    if (!options.force) {
      std::ostringstream os;
      os << "spectral radius estimate " << map.spectral_estimate() << " exceeds 1";
      fail(ErrorCode::AssumptionViolated, os.str());
    }
    trace.assumption_violated = true;
  }

  const MultistepResolvent resolvent(map, p);
  auto step = [&](const Vector& x) -> Vector {
    switch (method.kind) {
      case FixedPointMethod::Kind::Proximal: return resolvent.proximal(x);
      case FixedPointMethod::Kind::Multistep: return resolvent.multistep(x);
      case FixedPointMethod::Kind::Gamma:
        return (1.0 - method.gamma) * resolvent.proximal(x) + method.gamma * resolvent.multistep(x);
      case FixedPointMethod::Kind::Vm: return vm_apply(map, p, method.m, x);
      case FixedPointMethod::Kind::PlainT: return apply_T(map, x);
    }
    return x;
  };
  auto residual = [&](const Vector& x) { return norm_inf(Vector(x - apply_T(map, x))); };

  Vector x = x0;
  double r = residual(x);
  trace.push(x, r);
  while (true) {
    if (!std::isfinite(r) || r > 1e300) {
      trace.status = TraceStatus::Diverged;
      return trace;
    }
    if (r <= options.tol) {
      trace.converged = true;
      trace.status = TraceStatus::Converged;
      return trace;
    }
    if (trace.iterations() >= options.max_iter) return trace;
    x = step(x);
    r = residual(x);
    trace.push(x, r);
  }
}

}  // namespace proxtd
