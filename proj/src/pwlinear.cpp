#include "proxtd/pwlinear.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "proxtd/error.hpp"
#include "proxtd/rng.hpp"

namespace proxtd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double slack(double v) { return 1e-12 * (1.0 + std::abs(v)); }

// Affine selections met during a solve, each with its multistep resolvent.
class SelectionCache {
 public:
  struct Entry {
    Entry(AffinePiece piece, MultistepParam p)
        : map(AffineMap::unchecked(std::move(piece.A), std::move(piece.b))), resolvent(map, p) {}
    AffineMap map;
    MultistepResolvent resolvent;
    std::optional<double> spectral;
  };

  explicit SelectionCache(MultistepParam p) : p_(p) {}

  template <class Build>
  Entry& get(const Selection& mu, Build build) {
    auto it = entries_.find(mu);
    if (it == entries_.end()) it = entries_.emplace(mu, std::make_unique<Entry>(build(), p_)).first;
    return *it->second;
  }

  static double spectral(Entry& e) {
    if (!e.spectral) e.spectral = estimate_spectral_radius(e.map.A(), 1e-10).value;
    return *e.spectral;
  }

 private:
  MultistepParam p_;
  std::map<Selection, std::unique_ptr<Entry>> entries_;
};

void check_x(const PiecewiseAffineMap& pmap, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != pmap.dim()) fail(ErrorCode::DimensionMismatch, "x has wrong length");
}

void require_affine(const PiecewiseAffineMap& pmap, const char* what) {
  if (pmap.combinator() == Combinator::MinMax)
    fail(ErrorCode::BadParams, std::string(what) + " needs a min or max combinator");
}

std::size_t family_size(std::size_t k, std::size_t n) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > kEnumerationCap / k) return kEnumerationCap + 1;
    total *= k;
  }
  return total;
}

std::vector<Selection> enumerate(const PiecewiseAffineMap& pmap, Enumeration mode, bool* full) {
  const std::size_t k = pmap.size();
  const std::size_t n = pmap.dim();
  const std::size_t total = family_size(k, n);
  bool use_full = mode == Enumeration::Full || (mode == Enumeration::Auto && total <= kEnumerationCap);
  if (mode == Enumeration::Full && total > kEnumerationCap) {
    std::ostringstream os;
    os << "product family has more than " << kEnumerationCap << " members";
    fail(ErrorCode::EnumerationTooLarge, os.str());
  }
  if (k == 1) use_full = true;
  *full = use_full;
  std::vector<Selection> out;
  if (!use_full) {
    for (std::size_t c = 0; c < k; ++c) out.emplace_back(n, c);
    return out;
  }
  out.reserve(total);
  Selection mu(n, 0);
  while (true) {
    out.push_back(mu);
    std::size_t i = 0;
    while (i < n && ++mu[i] == k) mu[i++] = 0;
    if (i == n) break;
  }
  return out;
}

Vector series_multistep(const std::function<Vector(const Vector&)>& t, double lambda, const Vector& x) {
  const auto terms = static_cast<std::size_t>(std::ceil(std::log(1e-15) / std::log(lambda)));
  Vector y = x;
  Vector sum = Vector::Zero(x.size());
  double weight = 1.0;
  for (std::size_t l = 0; l < terms; ++l) {
    y = t(y);
    sum += (1.0 - lambda) * weight * y;
    weight *= lambda;
  }
  return sum + weight * y;
}

}  // namespace

PiecewiseAffineMap::PiecewiseAffineMap(std::vector<AffinePiece> pieces, Combinator combinator,
                                       std::vector<std::size_t> group_of)
    : pieces_(std::move(pieces)), combinator_(combinator) {
  if (pieces_.empty()) fail(ErrorCode::BadParams, "piecewise map needs at least one component");
  n_ = static_cast<std::size_t>(pieces_.front().b.size());
  for (const auto& piece : pieces_) {
    if (static_cast<std::size_t>(piece.A.rows()) != n_ || static_cast<std::size_t>(piece.A.cols()) != n_ ||
        static_cast<std::size_t>(piece.b.size()) != n_)
      fail(ErrorCode::DimensionMismatch, "components differ in dimension");
    if (!piece.A.allFinite() || !piece.b.allFinite()) fail(ErrorCode::BadParams, "component has non-finite entries");
  }
  if (combinator_ != Combinator::MinMax) {
    if (!group_of.empty()) fail(ErrorCode::BadParams, "groups are only used by the min-max combinator");
    return;
  }
  if (group_of.size() != pieces_.size()) fail(ErrorCode::BadParams, "every component needs a group");
  std::size_t count = 0;
  for (auto g : group_of) count = std::max(count, g + 1);
  groups_.assign(count, {});
  for (std::size_t k = 0; k < group_of.size(); ++k) groups_[group_of[k]].push_back(k);
  for (const auto& g : groups_)
    if (g.empty()) fail(ErrorCode::BadParams, "group numbering has a gap");
}

double PiecewiseAffineMap::row_value(std::size_t k, std::size_t i, const Vector& x) const {
  const auto& piece = pieces_[k];
  const auto r = static_cast<Eigen::Index>(i);
  return piece.A.row(r).dot(x) + piece.b(r);
}

PwValue pw_apply(const PiecewiseAffineMap& pmap, const Vector& x) {
  check_x(pmap, x);
  const std::size_t n = pmap.dim();
  PwValue out{Vector(static_cast<Eigen::Index>(n)), Selection(n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    double best = 0.0;
    std::size_t arg = 0;
    if (pmap.combinator() == Combinator::MinMax) {
      const auto& groups = pmap.groups();
      for (std::size_t g = 0; g < groups.size(); ++g) {
        double inner = -kInf;
        for (auto k : groups[g]) inner = std::max(inner, pmap.row_value(k, i, x));
        if (g == 0 || inner < best) {
          best = inner;
          arg = g;
        }
      }
    } else {
      const bool minimize = pmap.combinator() == Combinator::Min;
      for (std::size_t k = 0; k < pmap.size(); ++k) {
        const double v = pmap.row_value(k, i, x);
        if (k == 0 || (minimize ? v < best : v > best)) {
          best = v;
          arg = k;
        }
      }
    }
    out.value(static_cast<Eigen::Index>(i)) = best;
    out.selection[i] = arg;
  }
  return out;
}

Selection greedy_select(const PiecewiseAffineMap& pmap, const Vector& x) { return pw_apply(pmap, x).selection; }

Vector apply_selected(const PiecewiseAffineMap& pmap, const Selection& mu, const Vector& x) {
  check_x(pmap, x);
  if (mu.size() != pmap.dim()) fail(ErrorCode::DimensionMismatch, "selection has wrong length");
  Vector out(x.size());
  for (std::size_t i = 0; i < pmap.dim(); ++i) {
    if (mu[i] >= pmap.choices()) fail(ErrorCode::BadParams, "selection index out of range");
    double v;
    if (pmap.combinator() == Combinator::MinMax) {
      v = -kInf;
      for (auto k : pmap.groups()[mu[i]]) v = std::max(v, pmap.row_value(k, i, x));
    } else {
      v = pmap.row_value(mu[i], i, x);
    }
    out(static_cast<Eigen::Index>(i)) = v;
  }
  return out;
}

AffinePiece assemble_selected(const PiecewiseAffineMap& pmap, const Selection& mu) {
  require_affine(pmap, "assembling a selected affine map");
  if (mu.size() != pmap.dim()) fail(ErrorCode::DimensionMismatch, "selection has wrong length");
  const auto n = static_cast<Eigen::Index>(pmap.dim());
  AffinePiece out{Matrix(n, n), Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = mu[static_cast<std::size_t>(i)];
    if (k >= pmap.size()) fail(ErrorCode::BadParams, "selection index out of range");
    out.A.row(i) = pmap.pieces()[k].A.row(i);
    out.b(i) = pmap.pieces()[k].b(i);
  }
  return out;
}

Vector selected_multistep_series(const PiecewiseAffineMap& pmap, const Selection& mu, MultistepParam p,
                                 const Vector& x) {
  return series_multistep([&](const Vector& y) { return apply_selected(pmap, mu, y); }, p.lambda(), x);
}

Vector linearized_iterate(const PiecewiseAffineMap& pmap, MultistepParam p, const Vector& x,
                          LinearizedVariant variant) {
  const Selection mu = greedy_select(pmap, x);
  if (variant.kind == LinearizedVariant::Kind::MFold) {
    if (variant.m == 0) fail(ErrorCode::BadParams, "m-fold iteration needs m >= 1");
    Vector y = x;
    for (std::size_t k = 0; k < variant.m; ++k) y = apply_selected(pmap, mu, y);
    return y;
  }
  if (pmap.combinator() != Combinator::MinMax) {
    auto piece = assemble_selected(pmap, mu);
    const AffineMap map = AffineMap::unchecked(std::move(piece.A), std::move(piece.b));
    const MultistepResolvent r(map, p);
    return variant.kind == LinearizedVariant::Kind::Multistep ? r.multistep(x) : r.proximal(x);
  }
  if (variant.kind == LinearizedVariant::Kind::Multistep) return selected_multistep_series(pmap, mu, p, x);

  const double c = p.c();
  Vector y = x;
  for (std::size_t k = 0; k < 10000; ++k) {
    const Vector next = (c / (c + 1.0)) * apply_selected(pmap, mu, y) + x / (c + 1.0);
    const double change = norm_inf(Vector(next - y));
    y = next;
    if (change <= 1e-14 * (1.0 + norm_inf(y))) return y;
  }
  fail(ErrorCode::InnerNotConverged, "min-max proximal inner iteration did not settle");
}

ExtendedVector pw_apply_extended(const PiecewiseAffineMap& pmap, const ExtendedVector& x) {
  require_affine(pmap, "extended evaluation");
  if (x.size() != pmap.dim()) fail(ErrorCode::DimensionMismatch, "x has wrong length");
  const auto n = static_cast<Eigen::Index>(pmap.dim());
  const bool minimize = pmap.combinator() == Combinator::Min;
  ExtendedVector out{Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = minimize ? kInf : -kInf;
    for (const auto& piece : pmap.pieces()) {
      double v = piece.b(i);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double a = piece.A(i, j);
        if (a != 0.0) v += a * x.values(j);
      }
      best = minimize ? std::min(best, v) : std::max(best, v);
    }
    out.values(i) = best;
  }
  return out;
}

std::size_t ProperReport::proper_count() const {
  std::size_t count = 0;
  for (const auto& e : entries) count += e.proper ? 1 : 0;
  return count;
}

std::size_t ProperReport::improper_count() const { return entries.size() - proper_count(); }

ProperReport properness_report(const PiecewiseAffineMap& pmap, Enumeration mode) {
  require_affine(pmap, "properness classification");
  ProperReport report;
  for (auto& mu : enumerate(pmap, mode, &report.full_product)) {
    const AffinePiece piece = assemble_selected(pmap, mu);
    ProperEntry entry;
    entry.selection = std::move(mu);
    entry.spectral = estimate_spectral_radius(piece.A, 1e-10).value;
    entry.proper = entry.spectral < 1.0 - kProperSlack;
    if (entry.proper) {
      const auto n = piece.A.rows();
      try {
        entry.x_mu = LuFactor(Matrix(Matrix::Identity(n, n) - piece.A), 1.0 + norm_inf(piece.A)).solve(piece.b);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularMatrix) throw;
        entry.proper = false;
      }
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

ExtendedVector brute_force_xstar(const PiecewiseAffineMap& pmap, Enumeration mode) {
  const ProperReport report = properness_report(pmap, mode);
  const bool minimize = pmap.combinator() == Combinator::Min;
  ExtendedVector out{Vector::Constant(static_cast<Eigen::Index>(pmap.dim()), minimize ? kInf : -kInf)};
  bool any = false;
  for (const auto& e : report.entries) {
    if (!e.proper) continue;
    any = true;
    if (minimize) {
      out.values = out.values.cwiseMin(*e.x_mu);
    } else {
      out.values = out.values.cwiseMax(*e.x_mu);
    }
  }
  if (!any) fail(ErrorCode::NoProperComponent, "no proper selection in the family");
  return out;
}

MonotoneResult monotone_solve(const PiecewiseAffineMap& pmap, MultistepParam p, const Vector& x0,
                              const MonotoneOptions& opts) {
  check_x(pmap, x0);
  if (pmap.combinator() != Combinator::Min) fail(ErrorCode::BadParams, "monotone algorithm needs the min combinator");
  for (const auto& piece : pmap.pieces())
    if ((piece.A.array() < 0.0).any())
      fail(ErrorCode::AssumptionViolated, "monotone algorithm needs nonnegative component matrices");

  PwValue pv = pw_apply(pmap, x0);
  for (Eigen::Index i = 0; i < x0.size(); ++i)
    if (pv.value(i) > x0(i) + slack(x0(i))) {
      std::ostringstream os;
      os << "x0 >= T(x0) fails in coordinate " << i << ": " << x0(i) << " < " << pv.value(i);
      fail(ErrorCode::BadInitialCondition, os.str());
    }

  MonotoneResult result;
  result.trace.method = "monotone";
  SelectionCache cache(p);
  Vector x = x0;
  while (true) {
    const double r = norm_inf(Vector(x - pv.value));
    result.trace.push(x, r);
    result.selections.push_back(pv.selection);

    auto& entry = cache.get(pv.selection, [&] { return assemble_selected(pmap, pv.selection); });
    if (!(SelectionCache::spectral(entry) < 1.0 - kProperSlack)) {
      if (result.improper_accepts++ == 0)
        result.trace.notes.push_back("accepted a selection that is not proper (T_mu x <= x with spectral radius >= 1)");
    }

    if (r <= opts.tol) {
      result.trace.converged = true;
      result.trace.status = TraceStatus::Converged;
      break;
    }
    if (x.minCoeff() < opts.floor) {
      result.trace.status = TraceStatus::DivergentToMinusInfinity;
      break;
    }
    if (result.trace.iterations() >= opts.max_iter) break;

    const Vector next = entry.resolvent.multistep(x);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (next(i) > x(i) + slack(x(i)) || next(i) > pv.value(i) + slack(pv.value(i))) {
        ++result.violations;
        std::ostringstream os;
        os << "iterate increased in coordinate " << i << " at step " << result.trace.iterations();
        fail(ErrorCode::NonMonotoneStep, os.str());
      }
    }
    x = next;
    pv = pw_apply(pmap, x);
  }

  result.limit.values = x;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) < opts.floor) result.limit.values(i) = -kInf;
  return result;
}

double weighted_sup_modulus(const PiecewiseAffineMap& pmap, const Vector& weights) {
  const auto n = static_cast<Eigen::Index>(pmap.dim());
  const Vector v = weights.size() == 0 ? Vector::Ones(n) : weights;
  if (v.size() != n) fail(ErrorCode::DimensionMismatch, "weight vector length");
  if (!(v.array() > 0.0).all()) fail(ErrorCode::BadParams, "sup-norm weights must be positive");
  double rho = 0.0;
  for (const auto& piece : pmap.pieces())
    for (Eigen::Index i = 0; i < n; ++i)
      rho = std::max(rho, piece.A.row(i).cwiseAbs().dot(v) / v(i));
  return rho;
}

IterateTrace randomized_solve(const PiecewiseAffineMap& pmap, MultistepParam p, const Vector& x0,
                              const RandomizedOptions& opts) {
  check_x(pmap, x0);
  if (!(opts.prob > 0.0 && opts.prob < 1.0)) fail(ErrorCode::BadParams, "probability must lie in (0, 1)");
  const double rho = weighted_sup_modulus(pmap, opts.weights);
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "components are not weighted sup-norm contractions (modulus " << rho << ")";
    fail(ErrorCode::ContractionCheckFailed, os.str());
  }
  for (const auto& piece : pmap.pieces())
    if (!(estimate_spectral_radius(piece.A, 1e-10).value < 1.0))
      fail(ErrorCode::ContractionCheckFailed, "component spectral radius is not below 1");

  IterateTrace trace;
  trace.method = "randomized";
  if (pmap.combinator() == Combinator::MinMax) trace.notes.push_back("experimental min-max multistep series");
  const bool affine = pmap.combinator() != Combinator::MinMax;
  SelectionCache cache(p);
  Rng rng(opts.seed);
  Vector x = x0;
  PwValue pv = pw_apply(pmap, x);
  Selection mu = pv.selection;
  while (true) {
    const double r = norm_inf(Vector(x - pv.value));
    trace.push(x, r);
    if (!std::isfinite(r)) {
      trace.status = TraceStatus::Diverged;
      return trace;
    }
    if (r <= opts.tol) {
      trace.converged = true;
      trace.status = TraceStatus::Converged;
      return trace;
    }
    if (trace.iterations() >= opts.max_iter) return trace;
    if (rng.uniform() < opts.prob) {
      x = pv.value;
      mu = pv.selection;
    } else if (affine) {
      x = cache.get(mu, [&] { return assemble_selected(pmap, mu); }).resolvent.multistep(x);
    } else {
      x = selected_multistep_series(pmap, mu, p, x);
    }
    pv = pw_apply(pmap, x);
  }
}

IterateTrace composed_randomized_solve(const PiecewiseAffineMap& pmap, const Matrix& w, MultistepParam p,
                                       const Vector& x0, const RandomizedOptions& opts) {
  check_x(pmap, x0);
  require_affine(pmap, "the composed algorithm");
  const auto n = static_cast<Eigen::Index>(pmap.dim());
  if (w.rows() != n || w.cols() != n) fail(ErrorCode::DimensionMismatch, "W must be n x n");
  if (!(opts.prob > 0.0 && opts.prob < 1.0)) fail(ErrorCode::BadParams, "probability must lie in (0, 1)");

  auto composed_piece = [&](const Selection& mu) {
    AffinePiece piece = assemble_selected(pmap, mu);
    return AffinePiece{w * piece.A, w * piece.b};
  };

  bool mismatch = false;
  bool full = false;
  for (const auto& mu : enumerate(pmap, Enumeration::Auto, &full)) {
    const AffinePiece piece = composed_piece(mu);
    try {
      const auto lm = lambda_matrices(AffineMap::unchecked(piece.A, piece.b), p);
      if (!(estimate_spectral_radius(lm.a_lambda, 1e-10).value < 1.0)) mismatch = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularMatrix) throw;
      mismatch = true;
    }
    if (mismatch) break;
  }
  auto wt = [&](const Vector& x) { return Vector(w * pw_apply(pmap, x).value); };
  if (!mismatch) {
    Rng probe(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    const double radius = 1.0 + norm_inf(x0);
    for (int k = 0; k < 200 && !mismatch; ++k) {
      Vector x1(n), x2(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        x1(i) = x0(i) + probe.uniform(-radius, radius);
        x2(i) = x0(i) + probe.uniform(-radius, radius);
      }
      const double gap = norm_inf(Vector(x1 - x2));
      if (gap > 0.0 && norm_inf(Vector(wt(x1) - wt(x2))) / gap >= 1.0) mismatch = true;
    }
  }

  IterateTrace trace;
  trace.method = "composed-randomized";
  if (mismatch) trace.notes.push_back("WarnNormMismatch");
  SelectionCache cache(p);
  Rng rng(opts.seed);
  Vector x = x0;
  PwValue pv = pw_apply(pmap, x);
  Selection mu = pv.selection;
  while (true) {
    const Vector target = w * pv.value;
    const double r = norm_inf(Vector(x - target));
    trace.push(x, r);
    if (!std::isfinite(r) || norm_inf(x) > 1e12) {
      trace.status = TraceStatus::Diverged;
      return trace;
    }
    if (r <= opts.tol) {
      trace.converged = true;
      trace.status = TraceStatus::Converged;
      return trace;
    }
    if (trace.iterations() >= opts.max_iter) return trace;
    if (rng.uniform() < opts.prob) {
      x = target;
      mu = pv.selection;
    } else {
      x = cache.get(mu, [&] { return composed_piece(mu); }).resolvent.multistep(x);
    }
    pv = pw_apply(pmap, x);
  }
}

}  // namespace proxtd
