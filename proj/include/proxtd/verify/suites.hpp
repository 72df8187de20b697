#pragma once

// Property suites shared by `proxtd verify` and the acceptance binary.

#include <cstdint>
#include <string>
#include <vector>

namespace proxtd::verify {

struct SuiteResult {
  int id = 0;
  std::string name;
  bool pass = false;
  /// Measured quantities next to their thresholds.
  std::string detail;
  double seconds = 0.0;
};

/// Interpolation, commutation, closed form against the series and the
/// temporal-difference expansion on 200 random fixtures (< 10 s).
SuiteResult identity_suite(std::uint64_t seed);
/// Eigenvalue images as characteristic roots, spectral ordering and the
/// lambda -> 1 limit, including unit-modulus eigenvalues.
SuiteResult eigen_transform_suite(std::uint64_t seed);
/// Scalar tail rates and gamma acceleration on 20 random fixtures (< 5 s).
SuiteResult acceleration_suite(std::uint64_t seed);
/// Hand fixture values, LSPE iterates and the error bound on 100 fixtures.
SuiteResult galerkin_suite(std::uint64_t seed);
/// Simulated system accuracy on a seeded chain (< 30 s) and byte determinism.
SuiteResult simulation_suite(std::uint64_t seed);
/// Prox moduli, dominance of the extrapolated step and the self-checks.
SuiteResult nonlinear_suite(std::uint64_t seed);
/// Monotone and randomized solvers against enumeration, the quadratic
/// family limits and the min{1, x} fixture.
SuiteResult piecewise_suite(std::uint64_t seed);

std::vector<SuiteResult> run_all(std::uint64_t seed);

/// "[PASS] 3 acceleration (0.41 s): detail".
std::string format(const SuiteResult& result);

}  // namespace proxtd::verify
