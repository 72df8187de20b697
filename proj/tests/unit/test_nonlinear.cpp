#include <cmath>

#include <doctest.h>

#include "helpers.hpp"
#include "proxtd/nonlinear.hpp"

using namespace proxtd;
using namespace testing;

namespace {

NonlinearMap scalar_affine() { return affine_nonlinear(Matrix::Constant(1, 1, 0.5), vec({1.0})); }

NonlinearMap scalar_tanh(double scale, double shift) {
  return scaled_tanh(vec({scale}), Matrix::Zero(1, 1), vec({shift}));
}

VectorFunction linear_h(double h) {
  return [h](const Vector& x) { return Vector(h * x); };
}

}  // namespace

TEST_CASE("nonlinear_prox") {
  const auto t = scalar_affine();
  CHECK(nonlinear_prox(t, 1.0, vec({0}), {1e-13, 1000})(0) == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(nonlinear_prox(t, 1.0, vec({2}))(0) == doctest::Approx(2.0).epsilon(1e-15));

  const NonlinearMap zero{1, [](const Vector& x) { return Vector(Vector::Zero(x.size())); }, 0.0};
  for (double c : {0.5, 1.0, 4.0}) CHECK(nonlinear_prox(zero, c, vec({3}))(0) == doctest::Approx(3 / (c + 1)));
}

TEST_CASE("nonlinear_prox preconditions") {
  const NonlinearMap undeclared{1, [](const Vector& x) { return x; }, std::nullopt};
  CHECK(error_of([&] { nonlinear_prox(undeclared, 1.0, vec({0})); }) == ErrorCode::AssumptionViolated);
  CHECK(error_of([] { nonlinear_prox(scalar_affine(), 0.0, vec({0})); }) == ErrorCode::BadParams);
  // Declared as a contraction but expanding: the inner loop cannot settle.
  const NonlinearMap liar{1, [](const Vector& x) { return Vector(3.0 * x + Vector::Ones(1)); }, 0.5};
  CHECK(error_of([&] { nonlinear_prox(liar, 1.0, vec({0}), {1e-12, 200}); }) == ErrorCode::InnerNotConverged);
}

TEST_CASE("extrapolated_prox") {
  const auto t = scalar_affine();
  const ProxOptions tight{1e-13, 1000};
  const auto e = extrapolated_prox_detail(t, 1.0, vec({0}), tight);
  CHECK(e.value(0) == doctest::Approx(4.0 / 3).epsilon(1e-11));
  CHECK(e.value(0) == doctest::Approx(t(e.prox)(0)).epsilon(1e-11));
  CHECK(extrapolated_prox(t, 1.0, vec({2}))(0) == doctest::Approx(2.0).epsilon(1e-14));

  const double inner = 1e-11;
  const auto th = extrapolated_prox_detail(scalar_tanh(0.8, 0.1), 1.0, vec({0}), {inner, 10000});
  CHECK(th.identity_gap <= 10 * inner);
}

TEST_CASE("modulus_probe") {
  CHECK(modulus_probe(scalar_affine(), 20, 1, 5.0) == doctest::Approx(0.5).epsilon(1e-12));
  const auto th = scaled_tanh(vec({0.8, 0.8}), Matrix::Zero(2, 2), Vector::Zero(2));
  const double q = modulus_probe(th, 200, 3, 0.2);
  CHECK(q <= 0.8);
  CHECK(q >= 0.75);
  const NonlinearMap constant{2, [](const Vector&) { return vec({1, 2}); }, 0.0};
  CHECK(modulus_probe(constant, 10, 1, 1.0) == 0.0);
  CHECK(error_of([] { modulus_probe(scalar_affine(), 0, 1, 1.0); }) == ErrorCode::BadParams);
}

TEST_CASE("declared moduli") {
  CHECK(*scalar_affine().modulus == doctest::Approx(0.5));
  const auto t = scaled_tanh(vec({0.3, 0.5}), Matrix::Identity(2, 2) * 0.2, Vector::Zero(2));
  CHECK(*t.modulus == doctest::Approx(0.7));
}

TEST_CASE("fbs_step") {
  const auto t = scalar_affine();
  const ProxOptions tight{1e-13, 1000};
  const SplitProblem no_h{t, linear_h(0.0), 0.0, 1.0};
  const Vector x = vec({0.4});
  CHECK(fbs_step(no_h, x, false, tight)(0) == doctest::Approx(nonlinear_prox(t, 1.0, x, tight)(0)).epsilon(1e-12));
  CHECK(fbs_step(no_h, x, true, tight)(0) ==
        doctest::Approx(extrapolated_prox(t, 1.0, x, tight)(0)).epsilon(1e-12));

  const SplitProblem split{t, linear_h(0.2), 0.2, 1.0};
  const auto step = fbs_step_detail(split, vec({0}), true, tight);
  CHECK(step.xbar(0) == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(step.value(0) == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(step.identity_gap <= 10 * tight.inner_tol);

  // x = T(x) - H(x) = 0.3 x + 1 at x = 1/0.7.
  const Vector xs = vec({1.0 / 0.7});
  CHECK(fbs_step(split, xs, false, tight)(0) == doctest::Approx(xs(0)).epsilon(1e-12));
  CHECK(fbs_step(split, xs, true, tight)(0) == doctest::Approx(xs(0)).epsilon(1e-12));
}

TEST_CASE("nonlinear_solve") {
  const auto t = scaled_tanh(vec({0.5, 0.4}), mat({{0.1, 0.2}, {0.0, 0.1}}), vec({0.3, -0.6}));
  const auto plain = nonlinear_solve(t, 1.0, Vector::Zero(2), false);
  const auto extra = nonlinear_solve(t, 1.0, Vector::Zero(2), true);
  CHECK(plain.converged);
  CHECK(extra.converged);
  CHECK(dist(plain.final_iterate(), extra.final_iterate()) < 1e-9);
  CHECK(dist(t(extra.final_iterate()), extra.final_iterate()) <= 1e-10);
  CHECK(extra.iterations() <= plain.iterations());
}

TEST_CASE("fbs_solve") {
  const auto t = scaled_tanh(vec({0.5}), Matrix::Zero(1, 1), vec({0.2}));
  const SplitProblem split{t, linear_h(0.2), 0.2, 1.0};
  const auto plain = fbs_solve(split, vec({0}), false);
  const auto extra = fbs_solve(split, vec({0}), true);
  CHECK(plain.converged);
  CHECK(extra.converged);
  const double x = extra.final_iterate()(0);
  CHECK(std::abs(0.5 * std::tanh(x) + 0.2 - 0.2 * x - x) <= 1e-10);
  CHECK(std::abs(plain.final_iterate()(0) - x) < 1e-9);
}
