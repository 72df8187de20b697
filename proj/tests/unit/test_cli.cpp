#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "helpers.hpp"
#include "proxtd/generate.hpp"
#include "proxtd/mcsim.hpp"
#include "proxtd/problem.hpp"
#include "proxtd/runner.hpp"
#include "proxtd/verify/oracles.hpp"

using namespace proxtd;
using namespace testing;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "proxtd_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

RunConfig config(const std::string& method) {
  RunConfig c;
  c.method = method;
  return c;
}

double max_rel(const Matrix& a, const Matrix& b) {
  return ((a - b).array().abs() / (1e-300 + b.array().abs())).maxCoeff();
}

}  // namespace

TEST_CASE("problem files round-trip") {
  for (const Problem& p : {gen_spectrum({0.9, 0.5, Complex(0.1, 0.3)}, 7), gen_chain(10, 3, 3),
                           gen_piecewise(5, 3, Combinator::MinMax, 2), gen_nonlinear(4, 6)}) {
    const Problem q = problem_from_json(nlohmann::json::parse(dump_problem(p)));
    CHECK(q.kind == p.kind);
    CHECK(q.n == p.n);
    if (p.A) CHECK(max_rel(*q.A, *p.A) <= 1e-15);
    if (p.b) CHECK(max_rel(*q.b, *p.b) <= 1e-15);
    if (p.Phi) CHECK(max_rel(*q.Phi, *p.Phi) <= 1e-15);
    if (p.chain) CHECK(max_rel(q.chain->P, p.chain->P) <= 1e-15);
    if (p.piecewise) {
      REQUIRE(q.piecewise->pieces.size() == p.piecewise->pieces.size());
      CHECK(q.piecewise->groups == p.piecewise->groups);
      CHECK(max_rel(q.piecewise->pieces[1].A, p.piecewise->pieces[1].A) <= 1e-15);
    }
    if (p.nonlinear) CHECK(max_rel(q.nonlinear->B, p.nonlinear->B) <= 1e-15);
    CHECK(dump_problem(q) == dump_problem(p));
  }
}

TEST_CASE("malformed problem files") {
  CHECK(error_of([] { problem_from_json(nlohmann::json::parse(R"({"kind":"teapot"})")); }) == ErrorCode::BadParams);
  CHECK(error_of([] { problem_from_json(nlohmann::json::parse(R"({"kind":"linear","A":[[0.5]]})")); }) ==
        ErrorCode::BadParams);
  CHECK(error_of([] { problem_from_json(nlohmann::json::parse(R"({"kind":"linear","A":[[0.5,1]],"b":[1]})")); }) ==
        ErrorCode::BadParams);
  CHECK(error_of([] { load_problem("/nonexistent/problem.json"); }) == ErrorCode::BadParams);
}

TEST_CASE("gen spectrum") {
  const Problem p = gen_spectrum({0.9, 0.5}, 7);
  CHECK(p.kind == ProblemKind::Spectrum);
  CHECK(std::abs(spectral_radius_estimate(*p.A, 1e-10) - 0.9) < 1e-9);
  CHECK(p.metadata["eigenvalues"].size() == 2);
  CHECK(dump_problem(p) == dump_problem(gen_spectrum({0.9, 0.5}, 7)));
  CHECK(gen_spectrum({Complex(0.2, 0.5)}, 1).n == 2);
}

TEST_CASE("gen chain") {
  const Problem p = gen_chain(20, 3, 3);
  REQUIRE(p.chain.has_value());
  const ChainSpec chain(p.chain->P, p.chain->initial, p.chain->seed);
  check_support(chain, AffineMap(*p.A, *p.b));
  CHECK(p.Phi->cols() == 3);
  CHECK(Eigen::FullPivLU<Matrix>(*p.Phi).rank() == 3);
}

TEST_CASE("a one-piece piecewise file behaves as a linear problem") {
  Problem p;
  p.kind = ProblemKind::Piecewise;
  p.n = 1;
  p.piecewise = PiecewiseData{{{Matrix::Constant(1, 1, 0.5), vec({1.0})}}, Combinator::Min, {}};
  for (const char* method : {"multistep", "monotone", "randomized"}) {
    RunConfig c = config(method);
    c.x0 = 10.0;
    const auto r = run_method(p, c);
    CHECK(r.trace.converged);
    CHECK(r.trace.final_iterate()(0) == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("validate") {
  CHECK(error_of([] {
          RunConfig c;
          c.lambda = 1.0;
          validate(c);
        }) == ErrorCode::BadParams);
  CHECK(error_of([] {
          RunConfig c;
          c.gamma = -1.0;
          validate(c);
        }) == ErrorCode::BadParams);
  CHECK(error_of([] {
          RunConfig c;
          c.chat = 0.0;
          validate(c);
        }) == ErrorCode::BadParams);
  CHECK(error_of([] {
          RunConfig c;
          c.p = 1.0;
          validate(c);
        }) == ErrorCode::BadParams);
  validate(RunConfig{});
}

TEST_CASE("proximal and multistep rates on the 0.9 fixture") {
  const Problem p = gen_spectrum({0.9}, 7);
  const auto prox = run_method(p, config("proximal"));
  const auto multi = run_method(p, config("multistep"));
  const double rp = summary_json(prox, config("proximal"))["measured_rate"].get<double>();
  const double rm = summary_json(multi, config("multistep"))["measured_rate"].get<double>();
  CHECK(std::abs((rp - rm) - (10.0 / 11 - 9.0 / 11)) < 0.01);
}

TEST_CASE("tolerance met at the start") {
  const Problem p = gen_spectrum({0.5}, 1);
  RunConfig c = config("multistep");
  c.x0 = (*p.b)(0) / 0.5;
  c.tol = 1e-6;
  const auto r = run_method(p, c);
  const auto s = summary_json(r, c);
  CHECK(s["iters"] == 0);
  CHECK(s["converged"] == true);
  CHECK(exit_code(r) == 0);
}

TEST_CASE("sim-lstd summary on the chain fixture") {
  const Problem p = gen_chain(20, 3, 3);
  const auto r = run_method(p, config("sim-lstd"));
  CHECK(r.extras["r_relative_error"].get<double>() <= 0.05);
}

TEST_CASE("compare ordering and rows") {
  const Problem p = gen_spectrum({0.9, 0.5, -0.3}, 7);
  const auto results = compare_methods(p, RunConfig{}, {"proximal", "multistep", "gamma"});
  REQUIRE(results.size() == 3);
  CHECK(results[2].method == "gamma:0.5");
  const auto prox = results[0].trace.iterations();
  const auto multi = results[1].trace.iterations();
  const auto gam = results[2].trace.iterations();
  CHECK(multi <= gam);
  CHECK(gam <= prox);

  const std::string csv = compare_csv(results);
  CHECK(csv.rfind("method,iters_to_tol,measured_rate,final_error\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  const auto single = compare_methods(p, RunConfig{}, {"plainT"});
  const std::string one = compare_csv(single);
  CHECK(std::count(one.begin(), one.end(), '\n') == 2);
}

TEST_CASE("lspe and lstd on the chain fixture") {
  const Problem p = gen_chain(20, 3, 3);
  const auto results = compare_methods(p, RunConfig{}, {"lspe", "lstd"});
  for (const auto& r : results) CHECK(r.extras["r_relative_error"].get<double>() <= 0.05);
}

TEST_CASE("trace and summary files") {
  const Problem p = gen_spectrum({0.8, 0.3}, 2);
  const RunConfig c = config("multistep");
  const auto r = run_method(p, c);
  const std::string csv = trace_csv(r, false);
  CHECK(csv.rfind("iter,residual_inf,error_inf,wall_ns\n", 0) == 0);
  CHECK(csv == trace_csv(run_method(p, c), false));

  const auto prefix = scratch("multistep").string();
  write_run_outputs(r, c, prefix, true, false);
  const auto summary = nlohmann::json::parse(slurp(prefix + ".summary.json"));
  for (const char* key : {"converged", "iters", "final_residual", "measured_rate"}) CHECK(summary.contains(key));
  const auto check = spot_check(p, prefix);
  CHECK(check.ok);
  CHECK(check.rows == r.trace.iterates.size());

  const Problem nl = gen_nonlinear(3, 4);
  Problem no_oracle = nl;
  no_oracle.nonlinear->a *= 10.0;
  RunConfig force = config("plainT");
  force.max_iter = 5;
  const auto unknown = run_method(no_oracle, force);
  CHECK(trace_csv(unknown, false).rfind("iter,residual_inf,wall_ns\n", 0) == 0);
}

TEST_CASE("format_double") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(NAN) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("exit codes") {
  CHECK(exit_code(ErrorCode::NotConverged) == 2);
  CHECK(exit_code(ErrorCode::AssumptionViolated) == 3);
  CHECK(exit_code(ErrorCode::SingularMatrix) == 4);
  CHECK(exit_code(ErrorCode::BadParams) == 5);
  CHECK(exit_code(ErrorCode::DimensionMismatch) == 5);

  const Problem p = gen_spectrum({0.99}, 1);
  RunConfig c = config("proximal");
  c.max_iter = 3;
  CHECK(exit_code(run_method(p, c)) == 2);

  const Problem big = gen_spectrum({1.5}, 1);
  CHECK(error_of([&] { run_method(big, config("multistep")); }) == ErrorCode::AssumptionViolated);
  CHECK(error_of([&] { run_method(big, config("newton")); }) == ErrorCode::BadParams);
}
