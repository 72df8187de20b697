// proxtd: generate problems, run and compare solvers, verify invariants.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "proxtd/error.hpp"
#include "proxtd/generate.hpp"
#include "proxtd/problem.hpp"
#include "proxtd/runner.hpp"
#include "proxtd/verify/suites.hpp"

namespace {

using namespace proxtd;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) fail(ErrorCode::BadParams, "not a number: '" + text + "'");
  return v;
}

/// "0.9,0.5,0.3:0.2" with re[:im] entries.
std::vector<Complex> parse_eigenvalues(const std::string& text) {
  std::vector<Complex> out;
  for (const auto& entry : split(text, ',')) {
    const auto parts = split(entry, ':');
    if (parts.empty() || parts.size() > 2) fail(ErrorCode::BadParams, "bad eigenvalue '" + entry + "'");
    out.emplace_back(parse_number(parts[0]), parts.size() == 2 ? parse_number(parts[1]) : 0.0);
  }
  return out;
}

Combinator parse_combinator(const std::string& text) {
  if (text == "min") return Combinator::Min;
  if (text == "max") return Combinator::Max;
  if (text == "minmax") return Combinator::MinMax;
  fail(ErrorCode::BadParams, "combinator must be min, max or minmax");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::BadParams, "cannot write " + path);
  out << text;
}

struct RunFlags {
  RunConfig config;
  std::uint64_t seed = 1;
  double x0 = 0.0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* x0_opt = nullptr;

  void add(CLI::App* app) {
    app->add_option("--lambda", config.lambda, "multistep weight in (0, 1)");
    app->add_option("--gamma", config.gamma, "interpolation weight for method gamma");
    app->add_option("--chat", config.chat, "proximal parameter of the projected iteration");
    app->add_option("--m", config.m, "steps for vm and mfold");
    app->add_option("--p", config.p, "probability of a plain step in the randomized solvers");
    app->add_option("--alpha", config.alpha, "FBS step size; TD step constant");
    app->add_option("--tol", config.tol, "residual tolerance");
    app->add_option("--max-iter", config.max_iter, "iteration cap");
    seed_opt = app->add_option("--seed", seed, "sampling seed (defaults to the problem's chain seed)");
    app->add_option("--samples", config.samples, "simulation sample budget");
    x0_opt = app->add_option("--x0", x0, "constant starting vector");
    app->add_flag("--force", config.force, "run even when the spectral assumption is not certified");
  }

  RunConfig resolve() const {
    RunConfig c = config;
    if (seed_opt->count() > 0) c.seed = seed;
    if (x0_opt->count() > 0) c.x0 = x0;
    return c;
  }
};

void print_warnings(const RunResult& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << r.method << ": " << w << "\n";
  for (const auto& note : r.trace.notes)
    if (note.rfind("Warn", 0) == 0) std::cerr << "warning: " << r.method << ": " << note << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proximal and multistep fixed-point solvers"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "write a problem file");
  std::string gen_kind;
  std::string eigen_text;
  std::size_t gen_n = 20;
  std::size_t gen_s = 3;
  std::size_t gen_pieces = 3;
  std::string gen_combinator = "min";
  std::string gen_family = "random";
  std::size_t gen_grid = 10;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("kind", gen_kind, "spectrum | chain | piecewise | nonlinear")->required();
  gen->add_option("--eigenvalues", eigen_text, "spectrum: comma list of re or re:im");
  gen->add_option("--n", gen_n, "dimension");
  gen->add_option("--s", gen_s, "chain: number of features");
  gen->add_option("--pieces", gen_pieces, "piecewise: number of components");
  gen->add_option("--combinator", gen_combinator, "piecewise: min | max | minmax");
  gen->add_option("--family", gen_family, "piecewise: random | quadratic | min-one");
  gen->add_option("--grid", gen_grid, "piecewise quadratic family: grid size");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output path (stdout when omitted)");

  auto* run = app.add_subcommand("run", "run one method");
  std::string run_problem;
  std::string run_out = "run";
  bool dump_iterates = false;
  bool timing = false;
  RunFlags run_flags;
  run->add_option("--problem", run_problem, "problem JSON")->required();
  run->add_option("--method", run_flags.config.method, "solver method");
  run->add_option("--out", run_out, "output prefix");
  run->add_flag("--dump-iterates", dump_iterates, "also write PREFIX.iterates.csv");
  run->add_flag("--timing", timing, "record wall_ns (otherwise 0 for byte-stable output)");
  run_flags.add(run);

  auto* compare = app.add_subcommand("compare", "run several methods and tabulate them");
  std::string cmp_problem;
  std::string cmp_methods;
  std::string cmp_out;
  RunFlags cmp_flags;
  compare->add_option("--problem", cmp_problem, "problem JSON")->required();
  compare->add_option("--methods", cmp_methods, "comma-separated methods")->required();
  compare->add_option("--out", cmp_out, "report CSV (stdout when omitted)");
  cmp_flags.add(compare);

  auto* verify = app.add_subcommand("verify", "run the invariant suites or spot-check a trace");
  std::uint64_t verify_seed = 20240601;
  std::vector<int> verify_suites;
  std::string verify_trace;
  std::string verify_problem;
  verify->add_option("--seed", verify_seed, "fixture seed");
  verify->add_option("--suite", verify_suites, "suite numbers 1-7 (all when omitted)");
  verify->add_option("--trace", verify_trace, "trace prefix to spot-check (needs --dump-iterates output)");
  verify->add_option("--problem", verify_problem, "problem JSON for --trace");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 5;
  }

  try {
    if (*gen) {
      Problem problem;
      if (gen_kind == "spectrum") {
        if (eigen_text.empty()) fail(ErrorCode::BadParams, "spectrum needs --eigenvalues");
        problem = gen_spectrum(parse_eigenvalues(eigen_text), gen_seed);
      } else if (gen_kind == "chain") {
        problem = gen_chain(gen_n, gen_s, gen_seed);
      } else if (gen_kind == "piecewise") {
        if (gen_family == "random") {
          problem = gen_piecewise(gen_n, gen_pieces, parse_combinator(gen_combinator), gen_seed);
        } else if (gen_family == "quadratic") {
          problem = gen_quadratic_family(gen_grid);
        } else if (gen_family == "min-one") {
          problem = gen_min_one_x();
        } else {
          fail(ErrorCode::BadParams, "family must be random, quadratic or min-one");
        }
      } else if (gen_kind == "nonlinear") {
        problem = gen_nonlinear(gen_n, gen_seed);
      } else {
        fail(ErrorCode::BadParams, "unknown kind '" + gen_kind + "'");
      }
      write_text(gen_out, dump_problem(problem));
      return 0;
    }

    if (*run) {
      const Problem problem = load_problem(run_problem);
      const RunConfig config = run_flags.resolve();
      const RunResult result = run_method(problem, config);
      print_warnings(result);
      write_run_outputs(result, config, run_out, dump_iterates, timing);
      const auto s = summary_json(result, config);
      std::cerr << result.method << ": " << s["status"].get<std::string>() << " after " << s["iters"] << " iterations\n";
      return exit_code(result);
    }

    if (*compare) {
      const Problem problem = load_problem(cmp_problem);
      const auto methods = split(cmp_methods, ',');
      const RunConfig config = cmp_flags.resolve();
      const auto results = compare_methods(problem, config, methods);
      for (const auto& r : results) print_warnings(r);
      write_text(cmp_out, compare_csv(results));
      for (const auto& r : results)
        if (exit_code(r) != 0) return exit_code(r);
      return 0;
    }

    if (*verify) {
      if (!verify_trace.empty()) {
        if (verify_problem.empty()) fail(ErrorCode::BadParams, "--trace needs --problem");
        const SpotCheck check = spot_check(load_problem(verify_problem), verify_trace);
        std::cout << (check.ok ? "[PASS]" : "[FAIL]") << " residual column of " << verify_trace << ".csv: "
                  << check.rows << " rows, max relative deviation " << check.max_deviation << "\n";
        return check.ok ? 0 : 1;
      }
      using Suite = verify::SuiteResult (*)(std::uint64_t);
      const Suite suites[] = {verify::identity_suite,   verify::eigen_transform_suite, verify::acceleration_suite,
                              verify::galerkin_suite,   verify::simulation_suite,      verify::nonlinear_suite,
                              verify::piecewise_suite};
      if (verify_suites.empty()) verify_suites = {1, 2, 3, 4, 5, 6, 7};
      bool all = true;
      for (int id : verify_suites) {
        if (id < 1 || id > 7) fail(ErrorCode::BadParams, "suite numbers run from 1 to 7");
        const auto result = suites[id - 1](id == 5 ? 3 : verify_seed);
        std::cout << verify::format(result) << "\n";
        all = all && result.pass;
      }
      return all ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
