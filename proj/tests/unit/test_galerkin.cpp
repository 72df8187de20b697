#include <doctest.h>

#include "helpers.hpp"
#include "proxtd/galerkin.hpp"
#include "proxtd/verify/oracles.hpp"

using namespace proxtd;
using namespace testing;

namespace {

// n = 2, s = 1 hand fixture: A = 0.5 I, b = (1, 2), Phi = (1, 1)', xi = (0.5, 0.5).
struct Hand {
  AffineMap map{Matrix::Identity(2, 2) * 0.5, vec({1, 2})};
  ProjectionSpec spec{mat({{1}, {1}}), vec({0.5, 0.5})};
  MultistepParam p = MultistepParam::from_lambda(0.5);
  LowDimSystem sys = assemble_lowdim(map, spec, p);
};

}  // namespace

TEST_CASE("build_projection") {
  const ProjectionSpec full(Matrix::Identity(3, 3), Vector::Ones(3));
  CHECK((build_projection(full) - Matrix::Identity(3, 3)).norm() < 1e-15);

  const Matrix pi = build_projection(ProjectionSpec(mat({{1}, {1}}), vec({0.5, 0.5})));
  CHECK((pi - Matrix::Constant(2, 2, 0.5)).norm() < 1e-15);

  const Matrix phi = mat({{1, 0.2}, {1, -0.4}, {1, 0.9}, {1, 0.1}});
  const Matrix psi = mat({{1, 0.5}, {0.3, -0.2}, {1, 1.0}, {0.8, 0.0}});
  const ProjectionSpec oblique(phi, psi, vec({0.1, 0.2, 0.3, 0.4}));
  CHECK(!oblique.symmetric());
  const Matrix p = build_projection(oblique);
  const Vector r = vec({0.7, -1.3});
  CHECK(dist(p * (phi * r), phi * r) < 1e-13);
  CHECK((p * p - p).norm() < 1e-13);
}

TEST_CASE("ProjectionSpec rejects rank-deficient Phi") {
  CHECK(error_of([] { ProjectionSpec bad(mat({{1, 2}, {2, 4}, {3, 6}}), Vector::Ones(3)); }) ==
        ErrorCode::SingularMatrix);
  CHECK(error_of([] { ProjectionSpec bad(mat({{1}, {1}}), vec({-1, 1})); }) == ErrorCode::BadParams);
}

TEST_CASE("seminorm_project") {
  const ProjectionSpec id(Matrix::Identity(2, 2), Vector::Ones(2));
  CHECK(dist(seminorm_project(id, vec({3, 7})), vec({3, 7})) < 1e-15);
  const ProjectionSpec masked(mat({{1}, {1}}), vec({1, 0}));
  CHECK(dist(seminorm_project(masked, vec({3, 7})), vec({3, 3})) < 1e-15);
  const ProjectionSpec line(mat({{1}, {2}, {3}}), vec({0.2, 0.3, 0.5}));
  CHECK(dist(seminorm_project(line, vec({2, 4, 6})), vec({2, 4, 6})) < 1e-14);
}

TEST_CASE("projection_from_aggregation") {
  const auto id = projection_from_aggregation(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  CHECK((id.Pi - Matrix::Identity(2, 2)).norm() == 0.0);
  CHECK(!id.not_idempotent);

  const auto avg = projection_from_aggregation(mat({{1}, {1}}), mat({{0.5, 0.5}}));
  CHECK((avg.Pi - Matrix::Constant(2, 2, 0.5)).norm() < 1e-15);
  CHECK(!avg.not_idempotent);

  CHECK(error_of([] { projection_from_aggregation(mat({{1}, {0.5}}), mat({{0.5, 0.5}})); }) ==
        ErrorCode::BadStochastic);

  const auto skew = projection_from_aggregation(mat({{1, 0}, {0, 1}, {0, 1}}), mat({{0.5, 0.5, 0}, {0, 0.5, 0.5}}));
  CHECK(skew.not_idempotent);
}

TEST_CASE("hand fixture system") {
  const Hand h;
  CHECK(h.sys.Q()(0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(h.sys.C()(0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-14));
  CHECK(h.sys.d()(0) == doctest::Approx(2.0).epsilon(1e-14));
  const Vector r = lstd_solve(h.sys);
  CHECK(r(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(dist(h.spec.Phi() * r, vec({3, 3})) < 1e-13);
}

TEST_CASE("assemble_lowdim without projection and with b = 0") {
  const Matrix a = mat({{0.5, 0}, {0, 0.5}});
  const AffineMap map(a, vec({1, 2}));
  const ProjectionSpec id(Matrix::Identity(2, 2), Vector::Ones(2));
  const auto p = MultistepParam::from_lambda(0.5);
  const auto sys = assemble_lowdim(map, id, p);
  CHECK((sys.C() - (Matrix::Identity(2, 2) - lambda_matrices(map, p).a_lambda)).norm() < 1e-15);
  CHECK(dist(lstd_solve(sys), vec({2, 4})) < 1e-13);

  const AffineMap zero_b(a, Vector::Zero(2));
  const auto sys0 = assemble_lowdim(zero_b, ProjectionSpec(mat({{1}, {1}}), vec({0.5, 0.5})), p);
  CHECK(sys0.d().norm() == 0.0);
  CHECK(lstd_solve(sys0).norm() == 0.0);
}

TEST_CASE("assemble_lowdim matches the series oracle on an oblique fixture") {
  const Matrix a = make_similar({{0.8, -0.3, 0.5, Complex(0.1, 0.4), Complex(0.1, -0.4)}, 9});
  const Vector b = vec({1, -1, 0.5, 0.2, 0.0});
  const Matrix phi = mat({{1, 0.1}, {1, -0.5}, {1, 0.3}, {1, 0.8}, {1, -0.2}});
  const Matrix psi = mat({{1, 0}, {1, 1}, {0, 1}, {1, 0.5}, {0.5, 0.5}});
  const Vector xi = vec({0.1, 0.3, 0.2, 0.25, 0.15});
  const auto sys = assemble_lowdim(AffineMap(a, b), ProjectionSpec(phi, psi, xi), MultistepParam::from_lambda(0.7));
  const auto ref = oracle::projected_system(a, b, phi, psi, xi, 0.7);
  CHECK((sys.C() - ref.C).norm() < 1e-10);
  CHECK((sys.d() - ref.d).norm() < 1e-10);
  CHECK((lstd_solve(sys) - ref.r).norm() < 1e-9);
}

TEST_CASE("lstd_solve refuses a singular C") {
  const auto sys = LowDimSystem::from_c(Matrix::Zero(1, 1), vec({1.0}), 0.5);
  CHECK(error_of([&] { lstd_solve(sys); }) == ErrorCode::SingularMatrix);
}

TEST_CASE("lspe_iterate") {
  const Hand h;
  Vector r = Vector::Zero(1);
  r = lspe_iterate(h.sys, r, false, 0.5);
  CHECK(r(0) == doctest::Approx(2.0).epsilon(1e-14));
  r = lspe_iterate(h.sys, r, false, 0.5);
  CHECK(r(0) == doctest::Approx(8.0 / 3).epsilon(1e-14));
  for (int k = 0; k < 60; ++k) r = lspe_iterate(h.sys, r, false, 0.5);
  CHECK(r(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(lspe_iterate(h.sys, vec({3}), false, 0.5)(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(lspe_iterate(h.sys, Vector::Zero(1), true, 0.5)(0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("prox_projected_iterate") {
  const Hand h;
  CHECK(prox_projected_iterate(h.sys, 1.0, Vector::Zero(1), false)(0) == doctest::Approx(1.2).epsilon(1e-14));
  CHECK(prox_projected_iterate(h.sys, 1.0, Vector::Zero(1), true)(0) == doctest::Approx(2.4).epsilon(1e-14));
  CHECK(prox_projected_iterate(h.sys, 1.0, vec({3}), false)(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(prox_projected_iterate(h.sys, 1.0, vec({3}), true)(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(error_of([&] { prox_projected_iterate(h.sys, 0.0, vec({3}), false); }) == ErrorCode::BadParams);

  const auto wide = LowDimSystem::from_c(Matrix::Constant(1, 1, -1.5), vec({1.0}), 0.5);
  CHECK(error_of([&] { prox_projected_iterate(wide, 1.0, vec({0}), true); }) == ErrorCode::AssumptionViolated);
}

TEST_CASE("sigma_regularized_iterate") {
  const Hand h;
  const Matrix id = Matrix::Identity(1, 1);
  CHECK(sigma_regularized_iterate(h.sys, id, 1.0, Vector::Zero(1), false)(0) ==
        doctest::Approx(12.0 / 13).epsilon(1e-14));
  CHECK(sigma_regularized_iterate(h.sys, id, 1.0, vec({3}), true)(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(sigma_regularized_iterate(h.sys, 4.0 * id, 1.0, Vector::Zero(1), false)(0) ==
        doctest::Approx(0.3).epsilon(1e-14));
  CHECK(error_of([&] { sigma_regularized_iterate(h.sys, -id, 1.0, vec({0}), false); }) ==
        ErrorCode::NotPositiveDefinite);
}

TEST_CASE("error_bound") {
  const Hand h;
  const Vector xs = h.map.fixed_point();
  const Vector xl = h.spec.Phi() * lstd_solve(h.sys);
  const double gap = dist(xs, xl);
  CHECK(gap == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(error_bound(h.map, h.spec, h.p, BoundNorm::Inf) >= gap);
  CHECK(error_bound(h.map, h.spec, h.p, BoundNorm::Weighted) >= weighted_norm(xs - xl, h.spec.xi()));

  const ProjectionSpec id(Matrix::Identity(2, 2), Vector::Ones(2));
  CHECK(error_bound(h.map, id, h.p, BoundNorm::Inf) < 1e-14);
  const AffineMap zero_b(Matrix::Identity(2, 2) * 0.5, Vector::Zero(2));
  CHECK(error_bound(zero_b, h.spec, h.p, BoundNorm::Inf) == 0.0);

  const ProjectionSpec masked(mat({{1}, {1}}), vec({1, 0}));
  CHECK(error_of([&] { error_bound(h.map, masked, h.p, BoundNorm::Weighted); }) == ErrorCode::BadParams);
}
