#pragma once

// Seeded problem generators behind `proxtd gen`.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "proxtd/linalg.hpp"
#include "proxtd/problem.hpp"
#include "proxtd/rng.hpp"

namespace proxtd {

/// A = make_similar(eigenvalues) (a conjugate is added for every complex
/// entry given without one), b ~ U[0, 1]^n. The eigenvalue list is stored in
/// the file and in metadata.eigenvalues.
Problem gen_spectrum(const std::vector<Complex>& eigenvalues, std::uint64_t seed);

/// Dominant real eigenvalue `sigma` plus n - 1 further eigenvalues (real or
/// conjugate pairs) of modulus at most ratio * sigma.
std::vector<Complex> random_spectrum(std::size_t n, double sigma, double ratio, Rng& rng);

/// Row-stochastic matrix with U(0, 1] entries normalized by row.
Matrix random_stochastic(std::size_t n, Rng& rng);

/// A = scale * random stochastic, b ~ U[0, 1]^n, P = default_proposal(A),
/// uniform initial distribution, Phi = [1, U[-1, 1]^(s-1)].
Problem gen_chain(std::size_t n, std::size_t s, std::uint64_t seed, double scale = 0.9);

/// `pieces` random nonnegative components with row sums in [0.3, 0.9] and
/// b ~ U[-1, 1]^n. metadata.x0 = 10 satisfies x0 >= T(x0).
Problem gen_piecewise(std::size_t n, std::size_t pieces, Combinator combinator, std::uint64_t seed);

/// Scalar family T_mu(x) = (1 - mu^2) x - mu on the grid mu = k/grid,
/// k = 1..grid, combined by min. The limit is -1/mu_min = -grid.
Problem gen_quadratic_family(std::size_t grid);

/// min{1, x} in one dimension: the identity piece is improper.
Problem gen_min_one_x();

/// T(x) = a .* tanh(x) + B x + c with a ~ U[0.3, 0.6], ||B||_2 = 0.3 and
/// c ~ U[-1, 1]; H = 0.2 I.
Problem gen_nonlinear(std::size_t n, std::uint64_t seed);

}  // namespace proxtd
