#pragma once

// Method dispatch for `proxtd run` and `proxtd compare`, plus the trace,
// summary and report writers.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "proxtd/error.hpp"
#include "proxtd/problem.hpp"
#include "proxtd/trace.hpp"

namespace proxtd {

struct RunConfig {
  std::string method = "multistep";
  double lambda = 0.5;
  double gamma = 0.5;
  double chat = 1.0;
  std::size_t m = 5;
  double p = 0.2;
  double alpha = 1.0;
  double tol = 1e-10;
  std::size_t max_iter = 100000;
  /// Overrides the chain seed of the problem file; randomized solvers use 1 when unset.
  std::optional<std::uint64_t> seed;
  std::size_t samples = 200000;
  /// Constant starting vector; the problem's metadata.x0 or 0 when unset.
  std::optional<double> x0;
  bool force = false;
};

/// BadParams unless lambda in (0, 1), gamma >= 0, chat > 0, p in (0, 1),
/// alpha > 0, m >= 1, tol > 0 and samples >= 1.
void validate(const RunConfig& config);

/// Methods accepted for a problem kind, in display order.
std::vector<std::string> methods_for(const Problem& problem);

struct RunResult {
  /// Resolved label ("gamma" becomes "gamma:<g>", "vm" becomes "vm:<m>").
  std::string method;
  ProblemKind kind = ProblemKind::Linear;
  IterateTrace trace;
  /// ||x_k - x*||inf per iterate; empty when no oracle solution exists.
  std::vector<double> errors;
  /// Method-specific summary fields.
  nlohmann::json extras = nlohmann::json::object();
  /// Printed on stderr by the CLI.
  std::vector<std::string> warnings;
};

RunResult run_method(const Problem& problem, const RunConfig& config);

/// The residual the trace of `config.method` records for an iterate, built
/// from the problem alone.
std::function<double(const Vector&)> residual_function(const Problem& problem, const RunConfig& config);

/// Runs every method concurrently with copies of `base`; results keep the
/// order of `methods`. The first failure in that order is rethrown.
std::vector<RunResult> compare_methods(const Problem& problem, const RunConfig& base,
                                       const std::vector<std::string>& methods);

/// %.17g; "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double v);

/// iter,residual_inf[,error_inf],wall_ns. wall_ns is 0 unless `timing`.
std::string trace_csv(const RunResult& result, bool timing);
/// iter,x0,...,x{n-1}.
std::string iterates_csv(const IterateTrace& trace);
nlohmann::json summary_json(const RunResult& result, const RunConfig& config);
/// method,iters_to_tol,measured_rate,final_error ("NA" where undefined).
std::string compare_csv(const std::vector<RunResult>& results);

/// Writes PREFIX.csv, PREFIX.summary.json and, when asked, PREFIX.iterates.csv.
void write_run_outputs(const RunResult& result, const RunConfig& config, const std::string& prefix,
                       bool dump_iterates, bool timing);

/// 0 for a converged or diverged-to-minus-infinity trace, 2 otherwise.
int exit_code(const RunResult& result);
/// 2 no convergence, 3 assumption failures, 4 singular systems, 5 bad input, 1 otherwise.
int exit_code(ErrorCode code);

struct SpotCheck {
  std::size_t rows = 0;
  double max_deviation = 0.0;
  bool ok = false;
};

/// Recomputes the residual column of PREFIX.csv from PREFIX.iterates.csv,
/// reading the method and parameters from PREFIX.summary.json.
SpotCheck spot_check(const Problem& problem, const std::string& prefix);

}  // namespace proxtd
