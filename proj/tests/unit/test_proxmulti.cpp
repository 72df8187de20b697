#include <doctest.h>

#include "helpers.hpp"
#include "proxtd/proxmulti.hpp"
#include "proxtd/verify/oracles.hpp"

using namespace proxtd;
using namespace testing;

namespace {

const AffineMap& half_map() {
  static const AffineMap map(Matrix::Identity(2, 2) * 0.5, vec({1, 1}));
  return map;
}

const auto half = MultistepParam::from_lambda(0.5);
const Vector origin = Vector::Zero(2);

}  // namespace

TEST_CASE("apply_T") {
  CHECK(dist(apply_T(half_map(), origin), vec({1, 1})) == 0.0);
  CHECK(dist(apply_T(half_map(), vec({2, 2})), vec({2, 2})) == 0.0);
  CHECK(dist(apply_T(half_map(), vec({4, 0})), vec({3, 1})) == 0.0);
}

TEST_CASE("AffineMap checks") {
  CHECK(error_of([] { AffineMap bad(Matrix::Identity(2, 2), vec({1, 1})); }) == ErrorCode::SingularMatrix);
  CHECK(error_of([] { AffineMap bad(Matrix::Identity(2, 2) * 0.5, vec({1, 1, 1})); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(half_map().assumption_ok());
  CHECK(!AffineMap(Matrix::Identity(1, 1) * 1.5, vec({1})).assumption_ok());
  CHECK(dist(half_map().fixed_point(), vec({2, 2})) < 1e-15);
}

TEST_CASE("MultistepParam") {
  const auto p = MultistepParam::from_c(3.0);
  CHECK(p.lambda() == doctest::Approx(0.75));
  CHECK(p.extrapolation_factor() == doctest::Approx(1.0 / 0.75));
  CHECK(error_of([] { MultistepParam::from_lambda(1.0); }) == ErrorCode::BadParams);
  CHECK(error_of([] { MultistepParam::from_lambda(0.0); }) == ErrorCode::BadParams);
}

TEST_CASE("proximal_apply") {
  CHECK(dist(proximal_apply(half_map(), half, origin), vec({2.0 / 3, 2.0 / 3})) < 1e-15);
  CHECK(dist(proximal_apply(half_map(), MultistepParam::from_lambda(0.3), vec({2, 2})), vec({2, 2})) < 1e-15);
  const AffineMap zero(Matrix::Zero(2, 2), vec({4, -2}));
  const auto p = MultistepParam::from_lambda(0.3);
  const Vector x = vec({1, 5});
  CHECK(dist(proximal_apply(zero, p, x), 0.3 * vec({4, -2}) + 0.7 * x) < 1e-15);
}

TEST_CASE("multistep_apply") {
  CHECK(dist(multistep_apply(half_map(), half, origin), vec({4.0 / 3, 4.0 / 3})) < 1e-15);
  CHECK(dist(multistep_apply(half_map(), half, vec({2, 2})), vec({2, 2})) < 1e-15);
  const AffineMap zero(Matrix::Zero(2, 2), vec({4, -2}));
  CHECK(dist(multistep_apply(zero, MultistepParam::from_lambda(0.8), vec({9, 9})), vec({4, -2})) < 1e-15);
}

TEST_CASE("extrapolate_from_prox") {
  CHECK(dist(extrapolate_from_prox(origin, vec({2.0 / 3, 2.0 / 3}), MultistepParam::from_c(1.0)),
             vec({4.0 / 3, 4.0 / 3})) < 1e-15);
  CHECK(dist(extrapolate_from_prox(vec({1, 2}), vec({1, 2}), half), vec({1, 2})) == 0.0);
  CHECK(dist(extrapolate_from_prox(vec({1, 1}), vec({1.2, 1.2}), MultistepParam::from_c(0.5)), vec({1.6, 1.6})) <
        1e-14);
}

TEST_CASE("gamma_iterate") {
  CHECK(dist(gamma_iterate(half_map(), half, 0.5, origin), vec({1, 1})) < 1e-15);
  CHECK(dist(gamma_iterate(half_map(), half, 0.0, origin), vec({2.0 / 3, 2.0 / 3})) < 1e-15);
  CHECK(dist(gamma_iterate(half_map(), half, 1.0, origin), vec({4.0 / 3, 4.0 / 3})) < 1e-15);
  CHECK(error_of([] { gamma_iterate(half_map(), half, -0.1, origin); }) == ErrorCode::BadParams);
}

TEST_CASE("w_mapping_apply") {
  CHECK(dist(w_mapping_apply(half_map(), half, origin, origin, WVariant::W), vec({1, 1})) < 1e-15);
  const Vector anchor = vec({0.5, -1.0});
  const Vector y = multistep_apply(half_map(), half, anchor);
  CHECK(dist(w_mapping_apply(half_map(), half, anchor, y, WVariant::W), y) < 1e-14);
  const Vector xs = vec({2, 2});
  CHECK(dist(w_mapping_apply(half_map(), half, xs, xs, WVariant::Wbar), xs) < 1e-15);
}

TEST_CASE("vm_apply") {
  CHECK(dist(vm_apply(half_map(), half, 2, origin), vec({1.25, 1.25})) < 1e-15);
  const Vector x = vec({0.3, -0.7});
  CHECK(dist(vm_apply(half_map(), half, 1, x), apply_T(half_map(), x)) < 1e-15);
  CHECK(dist(vm_apply(half_map(), half, 40, origin), vec({4.0 / 3, 4.0 / 3})) < 1e-12);
  CHECK(error_of([] { vm_apply(half_map(), half, 0, origin); }) == ErrorCode::BadParams);
}

TEST_CASE("lambda_matrices") {
  const AffineMap scalar(Matrix::Constant(1, 1, 0.9), vec({0.1}));
  const auto lm = lambda_matrices(scalar, half);
  CHECK(lm.a_lambda(0, 0) == doctest::Approx(9.0 / 11).epsilon(1e-14));
  CHECK(lm.a_bar(0, 0) == doctest::Approx(10.0 / 11).epsilon(1e-14));
  CHECK(lm.a_lambda(0, 0) == doctest::Approx(oracle::series_a_lambda(scalar.A(), 0.5)(0, 0)).epsilon(1e-12));
  CHECK(lm.a_bar(0, 0) == doctest::Approx(oracle::series_a_bar(scalar.A(), 0.5)(0, 0)).epsilon(1e-12));

  const AffineMap zero(Matrix::Zero(2, 2), vec({1, 2}));
  const auto p = MultistepParam::from_lambda(0.3);
  const auto lz = lambda_matrices(zero, p);
  CHECK(lz.a_lambda.norm() == 0.0);
  CHECK((lz.a_bar - 0.7 * Matrix::Identity(2, 2)).norm() < 1e-15);

  const AffineMap a5(Matrix::Constant(1, 1, 0.5), vec({3.0}));
  const auto l5 = lambda_matrices(a5, half);
  CHECK(l5.a_lambda(0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(l5.b_lambda(0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(l5.b_bar(0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("method labels round-trip") {
  for (const char* text : {"proximal", "multistep", "plainT", "gamma:0.25", "vm:7"}) {
    const auto m = FixedPointMethod::parse(text);
    REQUIRE(m.has_value());
    CHECK(m->label() == text);
  }
  CHECK(!FixedPointMethod::parse("gamma:abc").has_value());
  CHECK(!FixedPointMethod::parse("vm:0").has_value());
  CHECK(!FixedPointMethod::parse("newton").has_value());
}

TEST_CASE("solve_fixed_point") {
  const auto trace = solve_fixed_point(half_map(), FixedPointMethod::multistep(), half, origin, {1e-10, 1000});
  CHECK(trace.converged);
  CHECK(trace.status == TraceStatus::Converged);
  CHECK(dist(trace.final_iterate(), vec({2, 2})) < 1e-9);
  CHECK(trace.residuals.size() == trace.iterates.size());

  const auto at_star = solve_fixed_point(half_map(), FixedPointMethod::proximal(), half, vec({2, 2}));
  CHECK(at_star.converged);
  CHECK(at_star.iterations() == 0);

  const auto capped = solve_fixed_point(half_map(), FixedPointMethod::plain(), half, origin, {1e-14, 3});
  CHECK(!capped.converged);
  CHECK(capped.iterations() == 3);
}

TEST_CASE("tail rates on the scalar 0.9 fixture") {
  const AffineMap scalar(Matrix::Constant(1, 1, 0.9), vec({0.1}));
  const Vector x0 = vec({0.0});
  const auto prox = solve_fixed_point(scalar, FixedPointMethod::proximal(), half, x0, {1e-12, 10000});
  const auto multi = solve_fixed_point(scalar, FixedPointMethod::multistep(), half, x0, {1e-12, 10000});
  CHECK(measured_rate(prox) == doctest::Approx(10.0 / 11).epsilon(1e-6));
  CHECK(measured_rate(multi) == doctest::Approx(9.0 / 11).epsilon(1e-6));
  CHECK(multi.iterations() < prox.iterations());
  CHECK(dist(prox.final_iterate(), vec({1.0})) < 1e-10);
}

TEST_CASE("assumption gate") {
  const AffineMap expanding(Matrix::Constant(1, 1, 1.5), vec({1.0}));
  CHECK(error_of([&] { solve_fixed_point(expanding, FixedPointMethod::multistep(), half, vec({0.0})); }) ==
        ErrorCode::AssumptionViolated);
  const auto forced = solve_fixed_point(expanding, FixedPointMethod::plain(), half, vec({0.0}), {1e-10, 50, true});
  CHECK(forced.assumption_violated);
  CHECK(!forced.converged);
}

TEST_CASE("identities on a random fixture against the series oracles") {
  const Matrix a = make_similar({{0.9, -0.5, Complex(0.3, 0.6), Complex(0.3, -0.6)}, 5});
  const AffineMap map(a, vec({0.2, -1.0, 0.5, 0.7}));
  const Vector x = vec({1, 2, 3, 4});
  for (double lambda : {0.1, 0.5, 0.9}) {
    const auto p = MultistepParam::from_lambda(lambda);
    const Vector t = multistep_apply(map, p, x);
    const Vector px = proximal_apply(map, p, x);
    const double scale = 1.0 + x.lpNorm<Eigen::Infinity>();
    CHECK(dist(t, oracle::series_multistep(a, map.b(), lambda, x)) < 1e-10 * scale);
    CHECK(dist(px, oracle::series_proximal(a, map.b(), lambda, x)) < 1e-10 * scale);
    CHECK(dist(t, oracle::td_expansion(a, map.b(), lambda, x)) < 1e-10 * scale);
    // T^(lambda) = T P and P T = T P.
    CHECK(dist(t, apply_T(map, px)) < 1e-12 * scale);
    CHECK(dist(proximal_apply(map, p, apply_T(map, x)), apply_T(map, px)) < 1e-12 * scale);
  }
}
