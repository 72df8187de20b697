#include "proxtd/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include "proxtd/galerkin.hpp"
#include "proxtd/mcsim.hpp"
#include "proxtd/nonlinear.hpp"
#include "proxtd/proxmulti.hpp"
#include "proxtd/pwlinear.hpp"

namespace proxtd {

using nlohmann::json;

namespace {

const std::vector<std::string> kProjected = {"lstd", "lspe", "lspe-interp", "prox-proj", "prox-proj-extrap"};
const std::vector<std::string> kSimulation = {"sim-lstd", "sim-lspe", "sim-lspe-interp",
                                              "sim-prox", "sim-prox-extrap", "td"};
const std::vector<std::string> kPiecewise = {"monotone", "randomized", "composed", "linearized",
                                             "linearized-prox", "mfold", "plainT"};
const std::vector<std::string> kNonlinear = {"proximal", "extrapolated", "fbs", "fbs-extrap", "plainT"};

bool contains(const std::vector<std::string>& list, const std::string& item) {
  for (const auto& s : list)
    if (s == item) return true;
  return false;
}

[[noreturn]] void incompatible(const std::string& method, ProblemKind kind) {
  fail(ErrorCode::BadParams, "method '" + method + "' does not apply to " + to_string(kind) + " problems");
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json extended_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v(i))) {
      out.push_back(v(i));
    } else {
      out.push_back(format_double(v(i)));
    }
  }
  return out;
}

Vector start_vector(const Problem& problem, const RunConfig& config, std::size_t dim) {
  double fill = 0.0;
  if (config.x0) {
    fill = *config.x0;
  } else if (problem.metadata.contains("x0") && problem.metadata["x0"].is_number()) {
    fill = problem.metadata["x0"].get<double>();
  }
  return Vector::Constant(static_cast<Eigen::Index>(dim), fill);
}

/// A single-piece piecewise file is a linear problem.
bool linear_view(const Problem& problem) {
  if (problem.A && problem.b) return true;
  return problem.piecewise && problem.piecewise->pieces.size() == 1;
}

AffineMap linear_map(const Problem& problem) {
  if (problem.A && problem.b) return AffineMap(*problem.A, *problem.b);
  const auto& piece = problem.piecewise->pieces.front();
  return AffineMap(piece.A, piece.b);
}

Vector weights_xi(const Problem& problem) {
  if (problem.xi) return *problem.xi;
  if (problem.kind == ProblemKind::Chain && problem.chain) return stationary_distribution(problem.chain->P);
  return Vector::Constant(static_cast<Eigen::Index>(problem.n), 1.0 / static_cast<double>(problem.n));
}

ProjectionSpec projection_spec(const Problem& problem) {
  if (!problem.Phi) fail(ErrorCode::BadParams, "projected methods need Phi in the problem file");
  if (problem.Psi) return ProjectionSpec(*problem.Phi, *problem.Psi, weights_xi(problem));
  return ProjectionSpec(*problem.Phi, weights_xi(problem));
}

std::optional<FixedPointMethod> linear_method(const RunConfig& config) {
  if (config.method == "gamma") return FixedPointMethod::with_gamma(config.gamma);
  if (config.method == "vm") return FixedPointMethod::vm(config.m);
  return FixedPointMethod::parse(config.method);
}

void attach_errors(RunResult& result, const Vector& oracle) {
  result.errors.clear();
  for (const auto& x : result.trace.iterates) result.errors.push_back(norm_inf(Vector(x - oracle)));
}

/// Generic fixed-point loop: push residual, stop at tol, step.
template <class Step, class Residual>
IterateTrace iterate_loop(const std::string& label, Vector x, const RunConfig& config, Step step, Residual residual) {
  IterateTrace trace;
  trace.method = label;
  while (true) {
    const double r = residual(x);
    trace.push(x, r);
    if (!std::isfinite(r) || r > 1e300) {
      trace.status = TraceStatus::Diverged;
      return trace;
    }
    if (r <= config.tol) {
      trace.converged = true;
      trace.status = TraceStatus::Converged;
      return trace;
    }
    if (trace.iterations() >= config.max_iter) return trace;
    x = step(x);
  }
}

struct ProjectedSetup {
  AffineMap map;
  ProjectionSpec spec;
  LowDimSystem sys;
  Vector r_lambda;
};

ProjectedSetup projected_setup(const Problem& problem, const RunConfig& config) {
  AffineMap map = linear_map(problem);
  ProjectionSpec spec = projection_spec(problem);
  LowDimSystem sys = assemble_lowdim(map, spec, MultistepParam::from_lambda(config.lambda));
  Vector r = lstd_solve(sys);
  return {std::move(map), std::move(spec), std::move(sys), std::move(r)};
}

double projected_residual(const LowDimSystem& sys, const Vector& r) {
  return norm_inf(Vector(sys.C() * r - sys.d()));
}

void projected_extras(RunResult& result, const ProjectedSetup& setup) {
  attach_errors(result, setup.r_lambda);
  result.extras["r_lambda"] = vector_to_json(setup.r_lambda);
  if (!result.trace.iterates.empty()) {
    const Vector& r = result.trace.final_iterate();
    result.extras["r_relative_error"] = number_or_null((r - setup.r_lambda).norm() / setup.r_lambda.norm());
    result.extras["r"] = vector_to_json(r);
  }
}

RunResult run_linear(const Problem& problem, const RunConfig& config, const FixedPointMethod& method) {
  const AffineMap map = linear_map(problem);
  RunResult result;
  result.method = method.label();
  const Vector x0 = start_vector(problem, config, map.dim());
  result.trace = solve_fixed_point(map, method, MultistepParam::from_lambda(config.lambda), x0,
                                   {config.tol, config.max_iter, config.force});
  result.extras["spectral_estimate"] = number_or_null(map.spectral_estimate());
  try {
    attach_errors(result, map.fixed_point());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularMatrix) throw;
  }
  return result;
}

RunResult run_projected(const Problem& problem, const RunConfig& config) {
  const ProjectedSetup setup = projected_setup(problem, config);
  RunResult result;
  result.method = config.method;
  const Vector r0 = Vector::Zero(static_cast<Eigen::Index>(setup.spec.s()));
  auto residual = [&](const Vector& r) { return projected_residual(setup.sys, r); };
  if (config.method == "lstd") {
    result.trace.method = "lstd";
    result.trace.push(setup.r_lambda, residual(setup.r_lambda));
    result.trace.converged = true;
    result.trace.status = TraceStatus::Converged;
  } else {
    const bool variant = config.method == "lspe-interp" || config.method == "prox-proj-extrap";
    const bool lspe = config.method.rfind("lspe", 0) == 0;
    result.trace = iterate_loop(config.method, r0, config, [&](const Vector& r) {
      if (lspe) return lspe_iterate(setup.sys, r, variant, config.lambda);
      return prox_projected_iterate(setup.sys, config.chat, r, variant);
    }, residual);
  }
  result.extras["sigma_I_minus_C"] = number_or_null(setup.sys.spectral_i_minus_c());
  projected_extras(result, setup);
  return result;
}

RunResult run_simulation(const Problem& problem, const RunConfig& config) {
  if (!problem.chain) fail(ErrorCode::BadParams, "simulation methods need a chain block");
  if (problem.Psi && (*problem.Psi - *problem.Phi).norm() != 0.0)
    fail(ErrorCode::BadParams, "simulation supports Psi = Phi only");
  const ProjectedSetup setup = projected_setup(problem, config);
  const ChainSpec chain(problem.chain->P, problem.chain->initial, config.seed.value_or(problem.chain->seed));
  RunResult result;
  result.method = config.method;
  if (config.lambda > 0.9)
    result.warnings.push_back("lambda above 0.9: simulation noise grows quickly with the trace length");
  auto residual = [&](const Vector& r) { return projected_residual(setup.sys, r); };
  const std::size_t samples = config.samples;
  const auto s = static_cast<Eigen::Index>(setup.spec.s());

  if (config.method == "td") {
    result.trace.method = "td";
    const std::size_t every = std::max<std::size_t>(1, samples / 100);
    TdState td{Vector::Zero(s), 0, StepRule::harmonic(config.alpha)};
    result.trace.push(td.r, residual(td.r));
    run_td_lambda(setup.map, setup.spec, chain, config.lambda, samples, std::move(td), [&](const TdState& st) {
      if (st.k % every == 0 || st.k == samples) result.trace.push(st.r, residual(st.r));
    });
    result.trace.converged = true;
    result.trace.status = TraceStatus::Converged;
    result.trace.notes.push_back("sample-budget estimator: converged means the budget was consumed");
    result.extras["samples"] = samples;
    projected_extras(result, setup);
    return result;
  }

  EstimatorState state;
  if (config.method == "sim-lstd") {
    result.trace.method = "sim-lstd";
    const std::size_t every = std::max<std::size_t>(1, samples / 10);
    state = collect_estimates(setup.map, setup.spec, chain, config.lambda, samples, [&](const EstimatorState& st) {
      if (st.t % every != 0 && st.t != samples) return;
      try {
        const Vector r = sim_lstd(st);
        result.trace.push(r, residual(r));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularMatrix || st.t == samples) throw;
      }
    });
    result.trace.converged = true;
    result.trace.status = TraceStatus::Converged;
    result.trace.notes.push_back("sample-budget estimator: converged means the budget was consumed");
  } else {
    state = collect_estimates(setup.map, setup.spec, chain, config.lambda, samples);
    const LowDimSystem est = estimated_system(state);
    const bool variant = config.method == "sim-lspe-interp" || config.method == "sim-prox-extrap";
    const bool lspe = config.method.rfind("sim-lspe", 0) == 0;
    // Stopping uses the estimated system; the recorded residual is exact.
    IterateTrace trace;
    trace.method = config.method;
    Vector r = Vector::Zero(s);
    while (true) {
      trace.push(r, residual(r));
      const double est_res = norm_inf(Vector(est.C() * r - est.d()));
      if (!std::isfinite(est_res) || est_res > 1e300) {
        trace.status = TraceStatus::Diverged;
        break;
      }
      if (est_res <= config.tol) {
        trace.converged = true;
        trace.status = TraceStatus::Converged;
        break;
      }
      if (trace.iterations() >= config.max_iter) break;
      r = lspe ? lspe_iterate(est, r, variant, config.lambda) : prox_projected_iterate(est, config.chat, r, variant);
    }
    trace.notes.push_back("stopping rule: estimated-system residual");
    result.trace = std::move(trace);
  }
  const Matrix chat = state.chat();
  result.extras["samples"] = samples;
  result.extras["chat_relative_error_fro"] = number_or_null((chat - setup.sys.C()).norm() / setup.sys.C().norm());
  result.extras["dhat_relative_error"] = number_or_null((state.dhat() - setup.sys.d()).norm() / setup.sys.d().norm());
  projected_extras(result, setup);
  return result;
}

std::optional<Vector> piecewise_oracle(const PiecewiseAffineMap& pmap) {
  try {
    if (pmap.combinator() != Combinator::MinMax) {
      ExtendedVector xs = brute_force_xstar(pmap);
      return xs.values;
    }
    if (!(weighted_sup_modulus(pmap, {}) < 1.0)) return std::nullopt;
    Vector x = Vector::Zero(static_cast<Eigen::Index>(pmap.dim()));
    for (int k = 0; k < 1000000; ++k) {
      const Vector next = pw_apply(pmap, x).value;
      const bool done = norm_inf(Vector(next - x)) <= 1e-15 * (1.0 + norm_inf(x));
      x = next;
      if (done) return x;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EnumerationTooLarge && e.code() != ErrorCode::NoProperComponent &&
        e.code() != ErrorCode::SingularMatrix)
      throw;
  }
  return std::nullopt;
}

Matrix composed_w(const Problem& problem) {
  return build_projection(projection_spec(problem));
}

RunResult run_piecewise(const Problem& problem, const RunConfig& config) {
  const PiecewiseAffineMap pmap = build_piecewise(problem);
  const MultistepParam p = MultistepParam::from_lambda(config.lambda);
  const Vector x0 = start_vector(problem, config, pmap.dim());
  RunResult result;
  result.method = config.method;
  const std::uint64_t seed = config.seed.value_or(1);
  if (config.method == "monotone") {
    MonotoneResult mr = monotone_solve(pmap, p, x0, {config.tol, config.max_iter});
    result.trace = std::move(mr.trace);
    result.extras["violations"] = mr.violations;
    result.extras["improper_accepts"] = mr.improper_accepts;
    result.extras["limit"] = extended_json(mr.limit.values);
  } else if (config.method == "randomized") {
    result.trace = randomized_solve(pmap, p, x0, {config.p, seed, config.tol, config.max_iter, {}});
  } else if (config.method == "composed") {
    result.trace = composed_randomized_solve(pmap, composed_w(problem), p, x0,
                                             {config.p, seed, config.tol, config.max_iter, {}});
  } else {
    auto residual = [&](const Vector& x) { return norm_inf(Vector(x - pw_apply(pmap, x).value)); };
    std::optional<LinearizedVariant> variant;
    if (config.method == "linearized") variant = LinearizedVariant::multistep();
    if (config.method == "linearized-prox") variant = LinearizedVariant::proximal();
    if (config.method == "mfold") variant = LinearizedVariant::mfold(config.m);
    if (config.method == "mfold") result.method = "mfold:" + std::to_string(config.m);
    result.trace = iterate_loop(result.method, x0, config, [&](const Vector& x) {
      if (variant) return linearized_iterate(pmap, p, x, *variant);
      return Vector(pw_apply(pmap, x).value);
    }, residual);
  }
  if (pmap.combinator() != Combinator::MinMax) {
    try {
      const ProperReport report = properness_report(pmap);
      result.extras["proper_count"] = report.proper_count();
      result.extras["improper_count"] = report.improper_count();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EnumerationTooLarge) throw;
    }
  }
  if (const auto oracle = piecewise_oracle(pmap)) {
    if (config.method == "composed") {
      result.extras["xstar_unprojected"] = extended_json(*oracle);
    } else {
      attach_errors(result, *oracle);
      result.extras["xstar"] = extended_json(*oracle);
    }
  }
  if (!result.trace.iterates.empty()) result.extras["x"] = extended_json(result.trace.final_iterate());
  return result;
}

SplitProblem split_problem(const Problem& problem, const RunConfig& config) {
  if (!problem.nonlinear->H) fail(ErrorCode::BadParams, "forward-backward methods need nonlinear.H");
  const Matrix h = *problem.nonlinear->H;
  if (h.rows() != static_cast<Eigen::Index>(problem.n) || h.cols() != h.rows())
    fail(ErrorCode::DimensionMismatch, "H must be n x n");
  return SplitProblem{build_nonlinear(problem), [h](const Vector& x) { return Vector(h * x); }, 0.0, config.alpha};
}

RunResult run_nonlinear(const Problem& problem, const RunConfig& config) {
  const NonlinearMap t = build_nonlinear(problem);
  const double c = config.lambda / (1.0 - config.lambda);
  const Vector x0 = start_vector(problem, config, t.dim);
  NonlinearSolveOptions opts;
  opts.tol = config.tol;
  opts.max_iter = config.max_iter;
  RunResult result;
  result.method = config.method;
  result.extras["c"] = c;
  if (t.modulus) result.extras["declared_modulus"] = *t.modulus;
  std::optional<Vector> oracle;
  if (config.method == "fbs" || config.method == "fbs-extrap") {
    const SplitProblem split = split_problem(problem, config);
    result.trace = fbs_solve(split, x0, config.method == "fbs-extrap", opts);
    NonlinearSolveOptions tight = opts;
    tight.tol = 1e-12;
    const IterateTrace ref = fbs_solve(split, x0, false, tight);
    if (ref.converged) oracle = ref.final_iterate();
  } else {
    if (config.method == "plainT") {
      auto residual = [&](const Vector& x) { return norm_inf(Vector(x - t(x))); };
      result.trace = iterate_loop("plainT", x0, config, [&](const Vector& x) { return t(x); }, residual);
    } else {
      result.trace = nonlinear_solve(t, c, x0, config.method == "extrapolated", opts);
    }
    if (t.modulus && *t.modulus < 1.0) {
      // Banach iteration with the declared modulus as the stopping certificate.
      Vector x = x0;
      const double q = *t.modulus;
      for (int k = 0; k < 1000000; ++k) {
        const Vector next = t(x);
        const double step = norm_inf(Vector(next - x));
        x = next;
        if (step * q / (1.0 - q) <= 1e-15 * (1.0 + norm_inf(x)) || step == 0.0) {
          oracle = x;
          break;
        }
      }
    }
  }
  if (oracle) attach_errors(result, *oracle);
  return result;
}

std::optional<std::function<double(const Vector&)>> linear_residual(const Problem& problem,
                                                                    const RunConfig& config) {
  if (!linear_view(problem)) return std::nullopt;
  if (linear_method(config)) {
    auto map = std::make_shared<AffineMap>(AffineMap::unchecked(
        problem.A ? *problem.A : problem.piecewise->pieces.front().A,
        problem.b ? *problem.b : problem.piecewise->pieces.front().b));
    return [map](const Vector& x) { return norm_inf(Vector(x - apply_T(*map, x))); };
  }
  if (contains(kProjected, config.method) || contains(kSimulation, config.method)) {
    auto setup = std::make_shared<ProjectedSetup>(projected_setup(problem, config));
    return [setup](const Vector& r) { return projected_residual(setup->sys, r); };
  }
  return std::nullopt;
}

}  // namespace

void validate(const RunConfig& config) {
  auto bad = [](const std::string& what) { fail(ErrorCode::BadParams, what); };
  if (!(config.lambda > 0.0 && config.lambda < 1.0)) bad("lambda must lie in (0, 1)");
  if (!(config.gamma >= 0.0) || !std::isfinite(config.gamma)) bad("gamma must be >= 0");
  if (!(config.chat > 0.0) || !std::isfinite(config.chat)) bad("chat must be > 0");
  if (!(config.p > 0.0 && config.p < 1.0)) bad("p must lie in (0, 1)");
  if (!(config.alpha > 0.0) || !std::isfinite(config.alpha)) bad("alpha must be > 0");
  if (config.m == 0) bad("m must be >= 1");
  if (!(config.tol > 0.0)) bad("tol must be > 0");
  if (config.samples == 0) bad("samples must be >= 1");
  if (config.x0 && !std::isfinite(*config.x0)) bad("x0 must be finite");
}

std::vector<std::string> methods_for(const Problem& problem) {
  std::vector<std::string> out;
  if (problem.kind == ProblemKind::Piecewise) {
    out = kPiecewise;
    if (linear_view(problem)) {
      for (const char* m : {"proximal", "multistep", "gamma", "vm"}) out.emplace_back(m);
    }
    return out;
  }
  if (problem.kind == ProblemKind::Nonlinear) return kNonlinear;
  out = {"proximal", "multistep", "gamma", "vm", "plainT"};
  if (problem.Phi) out.insert(out.end(), kProjected.begin(), kProjected.end());
  if (problem.kind == ProblemKind::Chain) out.insert(out.end(), kSimulation.begin(), kSimulation.end());
  return out;
}

RunResult run_method(const Problem& problem, const RunConfig& config) {
  validate(config);
  RunResult result;
  switch (problem.kind) {
    case ProblemKind::Spectrum:
    case ProblemKind::Linear:
    case ProblemKind::Chain:
      if (contains(kSimulation, config.method)) {
        if (problem.kind != ProblemKind::Chain) incompatible(config.method, problem.kind);
        result = run_simulation(problem, config);
      } else if (contains(kProjected, config.method)) {
        result = run_projected(problem, config);
      } else if (const auto m = linear_method(config)) {
        result = run_linear(problem, config, *m);
      } else {
        incompatible(config.method, problem.kind);
      }
      break;
    case ProblemKind::Piecewise:
      if (contains(kPiecewise, config.method)) {
        result = run_piecewise(problem, config);
      } else if (const auto m = linear_method(config); m && linear_view(problem)) {
        result = run_linear(problem, config, *m);
      } else {
        incompatible(config.method, problem.kind);
      }
      break;
    case ProblemKind::Nonlinear:
      if (!contains(kNonlinear, config.method)) incompatible(config.method, problem.kind);
      result = run_nonlinear(problem, config);
      break;
  }
  result.kind = problem.kind;
  return result;
}

std::function<double(const Vector&)> residual_function(const Problem& problem, const RunConfig& config) {
  switch (problem.kind) {
    case ProblemKind::Spectrum:
    case ProblemKind::Linear:
    case ProblemKind::Chain:
      if (auto f = linear_residual(problem, config)) return *f;
      break;
    case ProblemKind::Piecewise: {
      auto pmap = std::make_shared<PiecewiseAffineMap>(build_piecewise(problem));
      if (config.method == "composed") {
        auto w = std::make_shared<Matrix>(composed_w(problem));
        return [pmap, w](const Vector& x) { return norm_inf(Vector(x - *w * pw_apply(*pmap, x).value)); };
      }
      if (contains(kPiecewise, config.method) || config.method.rfind("mfold", 0) == 0)
        return [pmap](const Vector& x) { return norm_inf(Vector(x - pw_apply(*pmap, x).value)); };
      if (auto f = linear_residual(problem, config)) return *f;
      break;
    }
    case ProblemKind::Nonlinear: {
      auto t = std::make_shared<NonlinearMap>(build_nonlinear(problem));
      if (config.method == "fbs" || config.method == "fbs-extrap") {
        auto split = std::make_shared<SplitProblem>(split_problem(problem, config));
        return [split](const Vector& x) {
          return norm_inf(Vector(x - split->prox_part(x) + split->smooth(x)));
        };
      }
      return [t](const Vector& x) { return norm_inf(Vector(x - (*t)(x))); };
    }
  }
  incompatible(config.method, problem.kind);
}

std::vector<RunResult> compare_methods(const Problem& problem, const RunConfig& base,
                                       const std::vector<std::string>& methods) {
  if (methods.empty()) fail(ErrorCode::BadParams, "compare needs at least one method");
  std::vector<std::future<RunResult>> jobs;
  for (const auto& method : methods) {
    RunConfig config = base;
    config.method = method;
    jobs.push_back(std::async(std::launch::async, [&problem, config] { return run_method(problem, config); }));
  }
  std::vector<RunResult> out;
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_csv(const RunResult& result, bool timing) {
  const bool with_error = !result.errors.empty();
  std::string out = with_error ? "iter,residual_inf,error_inf,wall_ns\n" : "iter,residual_inf,wall_ns\n";
  const auto& tr = result.trace;
  for (std::size_t k = 0; k < tr.residuals.size(); ++k) {
    out += std::to_string(k);
    out += ',';
    out += format_double(tr.residuals[k]);
    if (with_error) {
      out += ',';
      out += format_double(result.errors[k]);
    }
    out += ',';
    out += timing && k < tr.wall_ns.size() ? std::to_string(tr.wall_ns[k]) : "0";
    out += '\n';
  }
  return out;
}

std::string iterates_csv(const IterateTrace& trace) {
  std::string out = "iter";
  const Eigen::Index n = trace.iterates.empty() ? 0 : trace.iterates.front().size();
  for (Eigen::Index i = 0; i < n; ++i) out += ",x" + std::to_string(i);
  out += '\n';
  for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
    out += std::to_string(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      out += ',';
      out += format_double(trace.iterates[k](i));
    }
    out += '\n';
  }
  return out;
}

json summary_json(const RunResult& result, const RunConfig& config) {
  const auto& tr = result.trace;
  json s;
  s["method"] = result.method;
  s["kind"] = to_string(result.kind);
  s["converged"] = tr.converged;
  s["status"] = to_string(tr.status);
  s["iters"] = tr.iterations();
  s["final_residual"] = tr.residuals.empty() ? json(nullptr) : number_or_null(tr.final_residual());
  s["measured_rate"] = number_or_null(measured_rate(tr));
  s["final_error"] = result.errors.empty() ? json(nullptr) : number_or_null(result.errors.back());
  s["assumption_violated"] = tr.assumption_violated;
  s["notes"] = tr.notes;
  s["params"] = {{"lambda", config.lambda}, {"gamma", config.gamma}, {"chat", config.chat},
                 {"m", config.m}, {"p", config.p}, {"alpha", config.alpha}, {"tol", config.tol},
                 {"max_iter", config.max_iter}, {"samples", config.samples}};
  if (config.seed) s["params"]["seed"] = *config.seed;
  for (auto it = result.extras.begin(); it != result.extras.end(); ++it) s[it.key()] = it.value();
  return s;
}

std::string compare_csv(const std::vector<RunResult>& results) {
  std::string out = "method,iters_to_tol,measured_rate,final_error\n";
  for (const auto& r : results) {
    const double rate = measured_rate(r.trace);
    out += r.method;
    out += ',';
    out += r.trace.converged ? std::to_string(r.trace.iterations()) : "NA";
    out += ',';
    out += std::isnan(rate) ? "NA" : format_double(rate);
    out += ',';
    out += r.errors.empty() ? "NA" : format_double(r.errors.back());
    out += '\n';
  }
  return out;
}

void write_run_outputs(const RunResult& result, const RunConfig& config, const std::string& prefix,
                       bool dump_iterates, bool timing) {
  auto write = [](const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::BadParams, "cannot write " + path);
    out << text;
  };
  write(prefix + ".csv", trace_csv(result, timing));
  write(prefix + ".summary.json", summary_json(result, config).dump(1) + "\n");
  if (dump_iterates) write(prefix + ".iterates.csv", iterates_csv(result.trace));
}

int exit_code(const RunResult& result) {
  if (result.trace.converged || result.trace.status == TraceStatus::DivergentToMinusInfinity) return 0;
  return 2;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotConverged:
    case ErrorCode::InnerNotConverged:
    case ErrorCode::NoConvergence:
      return 2;
    case ErrorCode::AssumptionViolated:
    case ErrorCode::ContractionCheckFailed:
    case ErrorCode::NonMonotoneStep:
    case ErrorCode::NoProperComponent:
    case ErrorCode::SelfCheckFailed:
      return 3;
    case ErrorCode::SingularMatrix:
      return 4;
    case ErrorCode::BadParams:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::BadStochastic:
    case ErrorCode::BadSpectrum:
    case ErrorCode::BadInitialCondition:
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::UnsupportedTransition:
    case ErrorCode::EnumerationTooLarge:
    case ErrorCode::MismatchedConfig:
      return 5;
  }
  return 1;
}

namespace {

std::vector<std::vector<double>> read_csv_rows(const std::string& path, std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::BadParams, "cannot open " + path);
  std::string line;
  std::vector<std::vector<double>> rows;
  header.clear();
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      if (first) {
        header.push_back(cell);
      } else {
        row.push_back(std::strtod(cell.c_str(), nullptr));
      }
    }
    if (!first) rows.push_back(std::move(row));
    first = false;
  }
  return rows;
}

}  // namespace

SpotCheck spot_check(const Problem& problem, const std::string& prefix) {
  std::ifstream sin(prefix + ".summary.json");
  if (!sin) fail(ErrorCode::BadParams, "cannot open " + prefix + ".summary.json");
  json summary;
  try {
    sin >> summary;
  } catch (const json::exception& e) {
    fail(ErrorCode::BadParams, std::string("summary: ") + e.what());
  }
  RunConfig config;
  try {
    config.method = summary.at("method").get<std::string>();
    const auto& p = summary.at("params");
    config.lambda = p.at("lambda").get<double>();
    config.gamma = p.at("gamma").get<double>();
    config.chat = p.at("chat").get<double>();
    config.m = p.at("m").get<std::size_t>();
    config.alpha = p.at("alpha").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorCode::BadParams, std::string("summary: ") + e.what());
  }
  if (config.method.rfind("mfold:", 0) == 0) config.method = "mfold";
  const auto residual = residual_function(problem, config);

  std::vector<std::string> header;
  const auto trace_rows = read_csv_rows(prefix + ".csv", header);
  const auto iter_rows = read_csv_rows(prefix + ".iterates.csv", header);
  if (trace_rows.size() != iter_rows.size())
    fail(ErrorCode::DimensionMismatch, "trace and iterate files have different lengths");
  SpotCheck out;
  out.rows = trace_rows.size();
  out.ok = true;
  for (std::size_t k = 0; k < trace_rows.size(); ++k) {
    const auto& row = iter_rows[k];
    Vector x(static_cast<Eigen::Index>(row.size() - 1));
    for (std::size_t i = 1; i < row.size(); ++i) x(static_cast<Eigen::Index>(i - 1)) = row[i];
    const double recorded = trace_rows[k][1];
    const double again = residual(x);
    const double dev = std::abs(again - recorded) / (1e-300 + std::max(std::abs(recorded), 1e-12));
    if (std::isfinite(recorded) || std::isfinite(again)) out.max_deviation = std::max(out.max_deviation, dev);
    if (!(dev <= 1e-9)) out.ok = false;
  }
  return out;
}

}  // namespace proxtd
