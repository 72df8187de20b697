#include "proxtd/verify/suites.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "proxtd/galerkin.hpp"
#include "proxtd/generate.hpp"
#include "proxtd/mcsim.hpp"
#include "proxtd/nonlinear.hpp"
#include "proxtd/proxmulti.hpp"
#include "proxtd/pwlinear.hpp"
#include "proxtd/runner.hpp"
#include "proxtd/verify/oracles.hpp"

namespace proxtd::verify {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rel(const Vector& a, const Vector& ref) {
  return (a - ref).lpNorm<Eigen::Infinity>() / std::max(1.0, ref.lpNorm<Eigen::Infinity>());
}

double rel(const Matrix& a, const Matrix& ref) {
  return (a - ref).lpNorm<Eigen::Infinity>() / std::max(1.0, ref.lpNorm<Eigen::Infinity>());
}

Vector uniform_vector(Rng& rng, Eigen::Index n, double lo, double hi) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

/// Running worst values of named checks; NaN always fails.
class Checks {
 public:
  void at_most(const std::string& label, double value, double limit) { record(label, value, limit, true, false); }
  void at_least(const std::string& label, double value, double limit) { record(label, value, limit, false, false); }
  void expect(const std::string& label, bool ok) { record(label, ok ? 1.0 : 0.0, 1.0, false, true); }

  bool pass() const {
    for (const auto& item : items_)
      if (!item.ok) return false;
    return !items_.empty();
  }

  std::string detail() const {
    std::ostringstream os;
    os.precision(4);
    bool first = true;
    for (const auto& item : items_) {
      if (!first) os << "; ";
      first = false;
      os << item.label << ' ';
      if (item.boolean) {
        os << (item.ok ? "ok" : "FAILED");
      } else {
        os << item.worst << (item.upper ? " <= " : " >= ") << item.limit;
        if (!item.ok) os << " FAILED";
      }
    }
    return os.str();
  }

 private:
  struct Item {
    std::string label;
    double worst;
    double limit;
    bool upper;
    bool boolean;
    bool ok;
  };

  void record(const std::string& label, double value, double limit, bool upper, bool boolean) {
    const bool ok = upper ? value <= limit : value >= limit;
    for (auto& item : items_) {
      if (item.label != label) continue;
      item.worst = upper ? std::max(item.worst, value) : std::min(item.worst, value);
      if (std::isnan(value)) item.worst = value;
      item.ok = item.ok && ok;
      return;
    }
    items_.push_back({label, value, limit, upper, boolean, ok});
  }

  std::vector<Item> items_;
};

SuiteResult finish(int id, std::string name, const Checks& checks, Clock::time_point start) {
  SuiteResult r;
  r.id = id;
  r.name = std::move(name);
  r.pass = checks.pass();
  r.detail = checks.detail();
  r.seconds = seconds_since(start);
  return r;
}

}  // namespace

SuiteResult identity_suite(std::uint64_t seed) {
  const auto start = Clock::now();
  Rng rng(seed);
  Checks checks;
  const double lambdas[] = {0.1, 0.5, 0.9};
  for (int f = 0; f < 200; ++f) {
    const std::size_t n = 1 + rng.index(50);
    const double sigma = rng.uniform(0.05, 0.99);
    const Matrix a = make_similar({random_spectrum(n, sigma, 1.0, rng), rng.next_seed()});
    const auto k = static_cast<Eigen::Index>(n);
    const Vector b = uniform_vector(rng, k, -1.0, 1.0);
    const Vector x = uniform_vector(rng, k, -2.0, 2.0);
    const double lambda = lambdas[f % 3];
    const AffineMap map(a, b);
    const MultistepParam p = MultistepParam::from_lambda(lambda);
    const MultistepResolvent res(map, p);
    const Vector px = res.proximal(x);
    const Vector mx = res.multistep(x);
    const Vector tx = apply_T(map, x);

    checks.at_most("interpolation", rel(px, Vector((1.0 - lambda) * x + lambda * mx)), 1e-8);
    checks.at_most("commutation", std::max(rel(mx, apply_T(map, px)), rel(mx, res.proximal(tx))), 1e-8);
    checks.at_most("closed form vs series", rel(mx, oracle::series_multistep(a, b, lambda, x)), 1e-8);
    checks.at_most("proximal vs series", rel(px, oracle::series_proximal(a, b, lambda, x)), 1e-8);
    checks.at_most("td expansion", rel(mx, oracle::td_expansion(a, b, lambda, x)), 1e-8);
    checks.at_most("td expansion (library)", rel(multistep_via_td(map, p, x, 1e-14), mx), 1e-8);
    checks.at_most("extrapolation", rel(extrapolate_from_prox(x, px, p), mx), 1e-8);
    for (std::size_t m : {1, 2, 5, 20})
      checks.at_most("vm closed form", rel(vm_apply(map, p, m, x), oracle::vm_closed_form(a, b, lambda, m, x)), 1e-10);
    if (f % 10 == 0) {
      const LambdaMatrices lm = lambda_matrices(map, p);
      const double worst = std::max({rel(lm.a_lambda, oracle::series_a_lambda(a, lambda)),
                                     rel(lm.a_bar, oracle::series_a_bar(a, lambda)),
                                     rel(lm.b_lambda, oracle::series_b_lambda(a, b, lambda))});
      checks.at_most("lambda matrices vs series", worst, 1e-8);
    }
  }
  checks.at_most("seconds", seconds_since(start), 10.0);
  return finish(1, "identities", checks, start);
}

SuiteResult eigen_transform_suite(std::uint64_t seed) {
  const auto start = Clock::now();
  Rng rng(seed);
  Checks checks;
  std::vector<std::vector<Complex>> spectra;
  auto unit = [](double angle) { return std::polar(1.0, angle); };
  const double pi = std::numbers::pi;
  spectra.push_back({Complex(-1.0, 0.0), Complex(0.5, 0.0)});
  spectra.push_back({Complex(0.0, 1.0), Complex(0.0, -1.0), Complex(0.3, 0.0)});
  spectra.push_back({unit(2 * pi / 3), unit(-2 * pi / 3), Complex(-1.0, 0.0), Complex(0.2, 0.0)});
  spectra.push_back({unit(0.3), unit(-0.3), Complex(0.9, 0.0), Complex(-0.4, 0.0)});
  spectra.push_back({unit(0.05), unit(-0.05), Complex(0.5, 0.0)});
  spectra.push_back({unit(1.0), unit(-1.0), unit(2.5), unit(-2.5), Complex(-1.0, 0.0)});
  for (int f = 0; f < 30; ++f)
    spectra.push_back(random_spectrum(1 + rng.index(10), rng.uniform(0.1, 0.99), 1.0, rng));

  for (const auto& eigs : spectra) {
    const Matrix a = make_similar({eigs, rng.next_seed()});
    const AffineMap map(a, Vector::Ones(a.rows()));
    double sigma_a = 0.0;
    double gap_to_one = INFINITY;
    for (const auto& z : eigs) {
      sigma_a = std::max(sigma_a, std::abs(z));
      gap_to_one = std::min(gap_to_one, std::abs(1.0 - z));
    }
    for (double lambda : {0.1, 0.5, 0.9}) {
      const LambdaMatrices lm = lambda_matrices(map, MultistepParam::from_lambda(lambda));
      for (const auto& z : eigs) {
        const Complex theta = z * (1.0 - lambda) / (1.0 - z * lambda);
        const Complex theta_bar = (1.0 - lambda) / (1.0 - z * lambda);
        checks.at_most("|char poly of A(lambda) at image|", std::abs(oracle::char_poly(lm.a_lambda, theta)), 1e-6);
        checks.at_most("|char poly of Abar(lambda) at image|", std::abs(oracle::char_poly(lm.a_bar, theta_bar)), 1e-6);
      }
      const double s_l = spectral_radius_estimate(lm.a_lambda, 1e-10);
      const double s_b = spectral_radius_estimate(lm.a_bar, 1e-10);
      checks.at_most("estimate vs eigensolver", std::max(std::abs(s_l - oracle::spectral_radius(lm.a_lambda)),
                                                         std::abs(s_b - oracle::spectral_radius(lm.a_bar))),
                     1e-6);
      checks.at_most("ordering excess", s_l - sigma_a * s_b, 1e-6);
      checks.at_most("sigma(Abar) - 1", s_b - 1.0, -1e-12);
    }
    if (gap_to_one >= 0.1) {
      const LambdaMatrices lm = lambda_matrices(map, MultistepParam::from_lambda(0.999));
      checks.at_most("sigma(A(0.999))", spectral_radius_estimate(lm.a_lambda, 1e-10), 0.05);
    }
  }
  return finish(2, "eigenvalue transforms", checks, start);
}

SuiteResult acceleration_suite(std::uint64_t seed) {
  const auto start = Clock::now();
  Checks checks;
  const double lambda = 0.5;
  const MultistepParam p = MultistepParam::from_lambda(lambda);
  {
    const AffineMap map(Matrix::Constant(1, 1, 0.9), Vector::Constant(1, 0.1));
    const double prox_pred = (1.0 - lambda) / (1.0 - 0.9 * lambda);
    const double multi_pred = 0.9 * prox_pred;
    const Vector x0 = Vector::Zero(1);
    const double prox = measured_rate(solve_fixed_point(map, FixedPointMethod::proximal(), p, x0));
    const double multi = measured_rate(solve_fixed_point(map, FixedPointMethod::multistep(), p, x0));
    checks.at_most("|proximal rate - 10/11|", std::abs(prox - prox_pred), 0.02);
    checks.at_most("|multistep rate - 9/11|", std::abs(multi - multi_pred), 0.02);
  }
  Rng rng(seed);
  for (int f = 0; f < 20; ++f) {
    const std::size_t n = 3 + rng.index(10);
    const double zeta = rng.uniform(0.6, 0.95);
    const Matrix a = make_similar({random_spectrum(n, zeta, 0.5, rng), rng.next_seed()});
    const AffineMap map(a, uniform_vector(rng, a.rows(), 0.0, 1.0));
    const Vector x0 = Vector::Zero(a.rows());
    const double base = measured_rate(solve_fixed_point(map, FixedPointMethod::with_gamma(0.0), p, x0));
    for (double g : {0.25, 0.5, 1.0}) {
      const double rate = measured_rate(solve_fixed_point(map, FixedPointMethod::with_gamma(g), p, x0));
      checks.at_least("rate margin over gamma=0", base - rate, 0.005);
    }
  }
  checks.at_most("seconds", seconds_since(start), 5.0);
  return finish(3, "acceleration", checks, start);
}

SuiteResult galerkin_suite(std::uint64_t seed) {
  const auto start = Clock::now();
  Checks checks;
  {
    const AffineMap map(Matrix(Vector::Constant(2, 0.5).asDiagonal()), (Vector(2) << 1.0, 2.0).finished());
    const ProjectionSpec spec(Matrix::Ones(2, 1), Vector::Constant(2, 0.5));
    const MultistepParam p = MultistepParam::from_lambda(0.5);
    const LowDimSystem sys = assemble_lowdim(map, spec, p);
    const double worst = std::max({std::abs(sys.Q()(0, 0) - 1.0 / 3.0), std::abs(sys.C()(0, 0) - 2.0 / 3.0),
                                   std::abs(sys.d()(0) - 2.0), std::abs(lstd_solve(sys)(0) - 3.0)});
    checks.at_most("hand fixture Q, C, d, r", worst, 1e-12);
    Vector r = Vector::Zero(1);
    const double expected[] = {2.0, 8.0 / 3.0, 26.0 / 9.0};
    double lspe_gap = 0.0;
    for (double e : expected) {
      r = lspe_iterate(sys, r, false, 0.5);
      lspe_gap = std::max(lspe_gap, std::abs(r(0) - e));
    }
    for (int k = 0; k < 60; ++k) r = lspe_iterate(sys, r, false, 0.5);
    checks.at_most("LSPE iterates 2, 2.6667, 2.8889", lspe_gap, 1e-12);
    checks.at_most("LSPE limit - 3", std::abs(r(0) - 3.0), 1e-10);
    checks.at_least("hand bound - 1", error_bound(map, spec, p, BoundNorm::Inf) - 1.0, -1e-12);
  }
  Rng rng(seed);
  const double lambdas[] = {0.1, 0.5, 0.9};
  for (int f = 0; f < 100; ++f) {
    const std::size_t n = 3 + rng.index(18);
    const std::size_t s = 1 + rng.index(3);
    const auto k = static_cast<Eigen::Index>(n);
    const Matrix a = make_similar({random_spectrum(n, rng.uniform(0.3, 0.95), 1.0, rng), rng.next_seed()});
    const Vector b = uniform_vector(rng, k, -1.0, 1.0);
    Matrix phi(k, static_cast<Eigen::Index>(s));
    for (Eigen::Index j = 0; j < phi.cols(); ++j) phi.col(j) = uniform_vector(rng, k, -1.0, 1.0);
    Vector xi = uniform_vector(rng, k, 0.1, 1.0);
    xi /= xi.sum();
    const bool oblique = f % 2 == 1;
    Matrix psi = phi;
    if (oblique)
      for (Eigen::Index j = 0; j < psi.cols(); ++j) psi.col(j) += 0.1 * uniform_vector(rng, k, -1.0, 1.0);
    const double lambda = lambdas[f % 3];
    const AffineMap map(a, b);
    const ProjectionSpec spec(phi, psi, xi);
    const MultistepParam p = MultistepParam::from_lambda(lambda);
    const auto ref = oracle::projected_system(a, b, phi, psi, xi, lambda);
    const Vector r = lstd_solve(assemble_lowdim(map, spec, p));
    checks.at_most("LSTD vs series system", rel(r, ref.r), 1e-8);
    const Vector xstar = Eigen::FullPivLU<Matrix>(Matrix::Identity(k, k) - a).solve(b);
    const Vector gap = xstar - phi * ref.r;
    checks.at_most("inf error - bound", gap.lpNorm<Eigen::Infinity>() - error_bound(map, spec, p, BoundNorm::Inf), 1e-8);
    checks.at_most("weighted error - bound", weighted_norm(gap, xi) - error_bound(map, spec, p, BoundNorm::Weighted),
                   1e-8);
  }
  return finish(4, "galerkin", checks, start);
}

SuiteResult simulation_suite(std::uint64_t seed) {
  const auto start = Clock::now();
  Checks checks;
  const Problem problem = gen_chain(20, 3, seed);
  const double lambda = 0.5;
  const std::size_t samples = 200000;
  const Vector xi = stationary_distribution(problem.chain->P);
  const auto ref = oracle::projected_system(*problem.A, *problem.b, *problem.Phi, *problem.Phi, xi, lambda);

  const auto sim_start = Clock::now();
  const AffineMap map(*problem.A, *problem.b);
  const ProjectionSpec spec(*problem.Phi, xi);
  const ChainSpec chain(problem.chain->P, problem.chain->initial, problem.chain->seed);
  const EstimatorState state = collect_estimates(map, spec, chain, lambda, samples);
  const Vector r = sim_lstd(state);
  const double sim_seconds = seconds_since(sim_start);
  checks.at_most("||Chat - C||F / ||C||F", (state.chat() - ref.C).norm() / ref.C.norm(), 0.05);
  checks.at_most("||r - r_lambda|| / ||r_lambda||", (r - ref.r).norm() / ref.r.norm(), 0.05);
  checks.at_most("simulation seconds", sim_seconds, 30.0);

  RunConfig config;
  config.method = "sim-lstd";
  config.lambda = lambda;
  config.samples = samples;
  const RunResult first = run_method(problem, config);
  const RunResult second = run_method(problem, config);
  checks.expect("identical seed gives identical CSV bytes", trace_csv(first, false) == trace_csv(second, false));
  checks.expect("identical seed gives identical summaries",
                summary_json(first, config).dump() == summary_json(second, config).dump());
  return finish(5, "simulation", checks, start);
}

SuiteResult nonlinear_suite(std::uint64_t seed) {
  const auto start = Clock::now();
  Checks checks;
  Rng rng(seed);
  const ProxOptions opts;
  const double slack = 10.0 * opts.inner_tol;
  for (int f = 0; f < 8; ++f) {
    const auto n = static_cast<Eigen::Index>(2 + rng.index(5));
    NonlinearMap t;
    if (f % 2 == 0) {
      Matrix g(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal();
      const double gamma = std::array<double, 4>{0.3, 0.6, 0.9, 0.95}[static_cast<std::size_t>(f / 2)];
      t = affine_nonlinear(Matrix(gamma * g / Eigen::JacobiSVD<Matrix>(g).singularValues()(0)),
                           uniform_vector(rng, n, -1.0, 1.0));
    } else {
      const Problem problem = gen_nonlinear(static_cast<std::size_t>(n), rng.next_seed());
      t = build_nonlinear(problem);
    }
    const double gamma = *t.modulus;
    const Vector xstar = oracle::banach_fixed_point(t.eval, Vector::Zero(n), gamma);
    for (double c : {0.5, 1.0, 3.0}) {
      const double prox_bound = 1.0 / (1.0 + c * (1.0 - gamma));
      double worst_p = -INFINITY;
      double worst_e = -INFINITY;
      for (int k = 0; k < 50; ++k) {
        const Vector x1 = uniform_vector(rng, n, -3.0, 3.0);
        const Vector x2 = uniform_vector(rng, n, -3.0, 3.0);
        const ExtrapolatedProx e1 = extrapolated_prox_detail(t, c, x1, opts);
        const ExtrapolatedProx e2 = extrapolated_prox_detail(t, c, x2, opts);
        const double dist = (x1 - x2).norm();
        worst_p = std::max(worst_p, (e1.prox - e2.prox).norm() / dist - prox_bound);
        worst_e = std::max(worst_e, (e1.value - e2.value).norm() / dist - gamma * prox_bound);
        checks.at_most("self-check gap", std::max(e1.identity_gap, e2.identity_gap), slack);
      }
      checks.at_most("prox Lipschitz - 1/(1+c(1-g))", worst_p, 1e-6);
      checks.at_most("extrapolated Lipschitz - g/(1+c(1-g))", worst_e, 1e-6);
      for (int k = 0; k < 100; ++k) {
        const Vector x = uniform_vector(rng, n, -3.0, 3.0);
        const ExtrapolatedProx e = extrapolated_prox_detail(t, c, x, opts);
        checks.at_most("dominance excess", (e.value - xstar).norm() - gamma * (e.prox - xstar).norm(), slack);
        checks.at_most("self-check gap", e.identity_gap, slack);
      }
      const IterateTrace plain = nonlinear_solve(t, c, Vector::Zero(n), false);
      const IterateTrace extra = nonlinear_solve(t, c, Vector::Zero(n), true);
      checks.expect("both prox loops converge", plain.converged && extra.converged);
      checks.at_most("prox loop limits vs x*",
                     std::max(rel(plain.final_iterate(), xstar), rel(extra.final_iterate(), xstar)), 1e-8);
      const double rp = measured_rate(plain);
      const double re = measured_rate(extra);
      if (std::isfinite(rp) && std::isfinite(re)) checks.at_most("extrapolated rate - plain rate", re - rp, 0.0);
    }
    const Matrix h = 0.2 * Matrix::Identity(n, n);
    const SplitProblem split{t, [h](const Vector& x) { return Vector(h * x); }, 0.2, 1.0};
    for (int k = 0; k < 50; ++k) {
      const Vector x = uniform_vector(rng, n, -3.0, 3.0);
      const FbsStep step = fbs_step_detail(split, x, true, opts);
      const Vector direct = t(step.xbar) - h * step.xbar;
      checks.at_most("FBS T(xbar) - H(xbar) gap", (step.value - direct).lpNorm<Eigen::Infinity>(), slack);
      checks.at_most("self-check gap", step.identity_gap, slack);
    }
    const IterateTrace fp = fbs_solve(split, Vector::Zero(n), false);
    const IterateTrace fe = fbs_solve(split, Vector::Zero(n), true);
    checks.expect("both FBS loops converge", fp.converged && fe.converged);
    checks.at_most("FBS limits agree", rel(fe.final_iterate(), fp.final_iterate()), 1e-8);
  }
  return finish(6, "nonlinear", checks, start);
}

SuiteResult piecewise_suite(std::uint64_t seed) {
  const auto start = Clock::now();
  Checks checks;
  const MultistepParam p = MultistepParam::from_lambda(0.5);
  for (int f = 0; f < 7; ++f) {
    const bool maximize = f >= 5;
    const std::size_t n = 1 + static_cast<std::size_t>(f % 4);
    const std::size_t pieces = 2 + static_cast<std::size_t>(f % 3);
    const Problem problem =
        gen_piecewise(n, pieces, maximize ? Combinator::Max : Combinator::Min, seed + static_cast<std::uint64_t>(f));
    const PiecewiseAffineMap pmap = build_piecewise(problem);
    const auto ref = oracle::brute_force(problem.piecewise->pieces, maximize);
    checks.at_most("library enumeration vs oracle", rel(brute_force_xstar(pmap).values, ref.xstar), 1e-10);
    const Vector x0 = Vector::Constant(static_cast<Eigen::Index>(n), 10.0);
    if (!maximize) {
      const MonotoneResult mr = monotone_solve(pmap, p, x0);
      checks.expect("monotone converges", mr.trace.converged);
      checks.at_most("|monotone - x*|", (mr.limit.values - ref.xstar).lpNorm<Eigen::Infinity>(), 1e-8);
      checks.at_most("monotone violations", static_cast<double>(mr.violations), 0.0);
      double rise = 0.0;
      double below = 0.0;
      for (std::size_t k = 1; k < mr.trace.iterates.size(); ++k) {
        rise = std::max(rise, (mr.trace.iterates[k] - mr.trace.iterates[k - 1]).maxCoeff());
        below = std::max(below, (ref.xstar - mr.trace.iterates[k]).maxCoeff());
      }
      checks.at_most("largest coordinate increase", rise, 1e-12 * (1.0 + x0.maxCoeff()));
      checks.at_most("iterate below x*", below, 1e-9);
    }
    for (std::uint64_t s = 1; s <= 50; ++s) {
      RandomizedOptions ro;
      ro.seed = s;
      const IterateTrace tr = randomized_solve(pmap, p, x0, ro);
      checks.expect("randomized converges for 50 seeds", tr.converged);
      checks.at_most("|randomized - x*|", (tr.final_iterate() - ref.xstar).lpNorm<Eigen::Infinity>(), 1e-8);
    }
  }

  double previous = INFINITY;
  for (std::size_t grid : {10, 20, 40}) {
    const PiecewiseAffineMap pmap = build_piecewise(gen_quadratic_family(grid));
    MonotoneOptions mo;
    mo.tol = 1e-13;
    const MonotoneResult mr = monotone_solve(pmap, p, Vector::Zero(1), mo);
    const double limit = mr.limit.values(0);
    checks.expect("quadratic family converges", mr.trace.converged);
    checks.at_most("|limit + grid| / grid", std::abs(limit + static_cast<double>(grid)) / static_cast<double>(grid),
                   1e-8);
    checks.expect("refinement lowers the limit", limit < previous);
    previous = limit;
  }

  {
    const PiecewiseAffineMap pmap = build_piecewise(gen_min_one_x());
    const ProperReport report = properness_report(pmap);
    checks.expect("min{1,x}: one proper and one improper component",
                  report.proper_count() == 1 && report.improper_count() == 1);
    const MonotoneResult mr = monotone_solve(pmap, p, Vector::Zero(1));
    const double xstar = brute_force_xstar(pmap).values(0);
    checks.expect("min{1,x}: monotone stops at 0 while enumeration gives 1",
                  mr.trace.converged && mr.limit.values(0) == 0.0 && xstar == 1.0);
    checks.expect("min{1,x}: improper selection reported", mr.improper_accepts >= 1 && !mr.trace.notes.empty());
  }
  return finish(7, "piecewise", checks, start);
}

std::vector<SuiteResult> run_all(std::uint64_t seed) {
  return {identity_suite(seed),   eigen_transform_suite(seed), acceleration_suite(seed), galerkin_suite(seed),
          simulation_suite(3),    nonlinear_suite(seed),       piecewise_suite(seed)};
}

std::string format(const SuiteResult& result) {
  std::ostringstream os;
  os.precision(3);
  os << (result.pass ? "[PASS] " : "[FAIL] ") << result.id << ' ' << result.name << " (" << std::fixed
     << result.seconds << " s): " << result.detail;
  return os.str();
}

}  // namespace proxtd::verify
