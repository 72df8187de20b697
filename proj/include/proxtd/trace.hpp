#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "proxtd/linalg.hpp"

namespace proxtd {

enum class TraceStatus {
  Converged,
  NotConverged,
  DivergentToMinusInfinity,
  Diverged,
};

std::string to_string(TraceStatus status);

/// Iterates and residual norms of one solve; residuals[k] belongs to iterates[k].
/// wall_ns[k] is the steady-clock time of push k relative to the first push.
struct IterateTrace {
  std::vector<Vector> iterates;
  std::vector<double> residuals;
  std::vector<std::int64_t> wall_ns;
  std::string method;
  bool converged = false;
  TraceStatus status = TraceStatus::NotConverged;
  bool assumption_violated = false;
  std::vector<std::string> notes;

  std::size_t iterations() const { return iterates.empty() ? 0 : iterates.size() - 1; }
  const Vector& final_iterate() const { return iterates.back(); }
  double final_residual() const { return residuals.back(); }
  void push(Vector x, double residual) {
    const auto now = std::chrono::steady_clock::now();
    if (iterates.empty()) start_ = now;
    wall_ns.push_back(std::chrono::duration_cast<std::chrono::nanoseconds>(now - start_).count());
    iterates.push_back(std::move(x));
    residuals.push_back(residual);
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Geometric decay rate exp(slope) of the least-squares fit of log residual
/// against iteration count, over the last `window` residuals preceding the
/// first one at or below tolerance (or the last `window` when the trace did
/// not converge). Non-positive residuals are skipped. NaN when fewer than
/// two usable points remain.
double measured_rate(const IterateTrace& trace, std::size_t window = 30);

}  // namespace proxtd
