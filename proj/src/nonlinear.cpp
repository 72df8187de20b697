#include "proxtd/nonlinear.hpp"

#include <cmath>
#include <sstream>

#include "proxtd/error.hpp"
#include "proxtd/rng.hpp"

namespace proxtd {

namespace {

void require_contraction(const NonlinearMap& t) {
  if (!t.modulus) fail(ErrorCode::AssumptionViolated, "map has no declared modulus");
  if (!(*t.modulus < 1.0)) fail(ErrorCode::AssumptionViolated, "declared modulus is not below 1");
}

void require_positive(double c, const char* what) {
  if (!(c > 0.0) || !std::isfinite(c)) fail(ErrorCode::BadParams, what);
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

template <class Step, class Residual>
IterateTrace iterate(const Vector& x0, const NonlinearSolveOptions& opts, std::string method, Step step,
                     Residual residual) {
  IterateTrace trace;
  trace.method = std::move(method);
  Vector x = x0;
  double r = residual(x);
  trace.push(x, r);
  while (true) {
    if (!std::isfinite(r) || r > 1e300) {
      trace.status = TraceStatus::Diverged;
      return trace;
    }
    if (r <= opts.tol) {
      trace.converged = true;
      trace.status = TraceStatus::Converged;
      return trace;
    }
    if (trace.iterations() >= opts.max_iter) return trace;
    x = step(x);
    r = residual(x);
    trace.push(x, r);
  }
}

}  // namespace

Vector NonlinearMap::operator()(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim) fail(ErrorCode::DimensionMismatch, "argument length");
  Vector y = eval(x);
  if (static_cast<std::size_t>(y.size()) != dim) fail(ErrorCode::DimensionMismatch, "evaluator output length");
  return y;
}

NonlinearMap affine_nonlinear(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) fail(ErrorCode::DimensionMismatch, "affine map shapes");
  return {static_cast<std::size_t>(b.size()), [a, b](const Vector& x) -> Vector { return a * x + b; },
          spectral_norm(a)};
}

NonlinearMap scaled_tanh(const Vector& a, const Matrix& b, const Vector& c) {
  if (b.rows() != b.cols() || b.rows() != a.size() || c.size() != a.size())
    fail(ErrorCode::DimensionMismatch, "tanh map shapes");
  const double scale = a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
  return {static_cast<std::size_t>(a.size()),
          [a, b, c](const Vector& x) -> Vector {
            return (a.array() * x.array().tanh()).matrix() + b * x + c;
          },
          scale + spectral_norm(b)};
}

Vector nonlinear_prox(const NonlinearMap& t, double c, const Vector& x, const ProxOptions& opts) {
  require_contraction(t);
  require_positive(c, "c must be positive");
  const double keep = c / (c + 1.0);
  const Vector anchor = x / (c + 1.0);
  Vector y = x;
  for (std::size_t k = 0; k < opts.max_inner; ++k) {
    const Vector next = keep * t(y) + anchor;
    // y - T(y) - (x - y)/c equals ((c+1)/c)(y - next).
    const double res = norm_inf(Vector(next - y)) / keep;
    if (res <= opts.inner_tol) return y;
    y = next;
  }
  std::ostringstream os;
  os << "inner iteration did not reach " << opts.inner_tol << " in " << opts.max_inner
     << " steps; the declared modulus may be wrong";
  fail(ErrorCode::InnerNotConverged, os.str());
}

ExtrapolatedProx extrapolated_prox_detail(const NonlinearMap& t, double c, const Vector& x,
                                          const ProxOptions& opts) {
  ExtrapolatedProx out;
  out.prox = nonlinear_prox(t, c, x, opts);
  out.value = x + ((c + 1.0) / c) * (out.prox - x);
  out.identity_gap = norm_inf(Vector(out.value - t(out.prox)));
  if (out.identity_gap > 10.0 * opts.inner_tol) {
    std::ostringstream os;
    os << "extrapolated value differs from T(P(x)) by " << out.identity_gap;
    fail(ErrorCode::SelfCheckFailed, os.str());
  }
  return out;
}

Vector extrapolated_prox(const NonlinearMap& t, double c, const Vector& x, const ProxOptions& opts) {
  return extrapolated_prox_detail(t, c, x, opts).value;
}

double modulus_probe(const NonlinearMap& t, std::size_t pairs, std::uint64_t seed, double radius,
                     const Vector& center) {
  if (pairs == 0) fail(ErrorCode::BadParams, "modulus probe needs at least one pair");
  const Vector mid = center.size() == 0 ? Vector::Zero(static_cast<Eigen::Index>(t.dim)) : center;
  if (static_cast<std::size_t>(mid.size()) != t.dim) fail(ErrorCode::DimensionMismatch, "probe center");
  Rng rng(seed);
  auto draw = [&] {
    Vector v(mid.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = mid(i) + rng.uniform(-radius, radius);
    return v;
  };
  double best = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const Vector x1 = draw();
    const Vector x2 = draw();
    const double gap = (x1 - x2).norm();
    if (gap == 0.0) continue;
    best = std::max(best, (t(x1) - t(x2)).norm() / gap);
  }
  return best;
}

FbsStep fbs_step_detail(const SplitProblem& prob, const Vector& x, bool extrapolated, const ProxOptions& opts) {
  require_positive(prob.alpha, "alpha must be positive");
  const double alpha = prob.alpha;
  const Vector z = x - alpha * prob.smooth(x);
  FbsStep out;
  out.xbar = nonlinear_prox(prob.prox_part, alpha, z, opts);
  if (!extrapolated) {
    out.value = out.xbar;
    return out;
  }
  const Vector h = prob.smooth(out.xbar);
  out.value = out.xbar + (out.xbar - z) / alpha - h;
  out.identity_gap = norm_inf(Vector(out.value - (prob.prox_part(out.xbar) - h)));
  if (out.identity_gap > 10.0 * opts.inner_tol) {
    std::ostringstream os;
    os << "extrapolated forward-backward value differs from T(xbar) - H(xbar) by " << out.identity_gap;
    fail(ErrorCode::SelfCheckFailed, os.str());
  }
  return out;
}

Vector fbs_step(const SplitProblem& prob, const Vector& x, bool extrapolated, const ProxOptions& opts) {
  return fbs_step_detail(prob, x, extrapolated, opts).value;
}

IterateTrace nonlinear_solve(const NonlinearMap& t, double c, const Vector& x0, bool extrapolated,
                             const NonlinearSolveOptions& opts) {
  return iterate(
      x0, opts, extrapolated ? "extrapolated" : "proximal",
      [&](const Vector& x) {
        return extrapolated ? extrapolated_prox(t, c, x, opts.prox) : nonlinear_prox(t, c, x, opts.prox);
      },
      [&](const Vector& x) { return norm_inf(Vector(x - t(x))); });
}

IterateTrace fbs_solve(const SplitProblem& prob, const Vector& x0, bool extrapolated,
                       const NonlinearSolveOptions& opts) {
  return iterate(
      x0, opts, extrapolated ? "fbs-extrapolated" : "fbs",
      [&](const Vector& x) { return fbs_step(prob, x, extrapolated, opts.prox); },
      [&](const Vector& x) { return norm_inf(Vector(x - prob.prox_part(x) + prob.smooth(x))); });
}

}  // namespace proxtd
