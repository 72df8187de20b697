#include "proxtd/trace.hpp"

#include <cmath>
#include <limits>

namespace proxtd {

std::string to_string(TraceStatus status) {
  switch (status) {
    case TraceStatus::Converged: return "converged";
    case TraceStatus::NotConverged: return "not_converged";
    case TraceStatus::DivergentToMinusInfinity: return "divergent_to_minus_infinity";
    case TraceStatus::Diverged: return "diverged";
  }
  return "unknown";
}

double measured_rate(const IterateTrace& trace, std::size_t window) {
  const auto& r = trace.residuals;
  if (r.empty()) return std::numeric_limits<double>::quiet_NaN();
  // The converged trace ends with the first residual at or below tol.
  const std::size_t end = trace.converged ? r.size() - 1 : r.size();
  const std::size_t begin = end > window ? end - window : 0;

  double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = begin; k < end; ++k) {
    if (!(r[k] > 0.0) || !std::isfinite(r[k])) continue;
    const double x = static_cast<double>(k);
    const double y = std::log(r[k]);
    n += 1.0;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (n < 2.0 || denom <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::exp((n * sxy - sx * sy) / denom);
}

}  // namespace proxtd
