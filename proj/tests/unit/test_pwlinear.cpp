#include <algorithm>

#include <doctest.h>

#include "helpers.hpp"
#include "proxtd/generate.hpp"
#include "proxtd/galerkin.hpp"
#include "proxtd/problem.hpp"
#include "proxtd/pwlinear.hpp"
#include "proxtd/verify/oracles.hpp"

using namespace proxtd;
using namespace testing;

namespace {

AffinePiece piece(double a, double b) { return {Matrix::Constant(1, 1, a), vec({b})}; }

// {0.5 x + 1, 0.8 x + 0.1}: fixed points 2 and 0.5, the lines cross at 3.
PiecewiseAffineMap scalar_family(Combinator c = Combinator::Min) {
  return PiecewiseAffineMap({piece(0.5, 1.0), piece(0.8, 0.1)}, c);
}

const auto half = MultistepParam::from_lambda(0.5);

}  // namespace

TEST_CASE("construction checks") {
  CHECK(error_of([] { PiecewiseAffineMap bad({}, Combinator::Min); }) == ErrorCode::BadParams);
  CHECK(error_of([] {
          PiecewiseAffineMap bad({piece(0.5, 1), {Matrix::Identity(2, 2), vec({1, 1})}}, Combinator::Min);
        }) == ErrorCode::DimensionMismatch);
  CHECK(error_of([] { PiecewiseAffineMap bad({piece(0.5, 1)}, Combinator::Min, {0}); }) == ErrorCode::BadParams);
  CHECK(error_of([] { PiecewiseAffineMap bad({piece(0.5, 1), piece(0.1, 0)}, Combinator::MinMax, {0, 2}); }) ==
        ErrorCode::BadParams);
}

TEST_CASE("pw_apply and greedy_select") {
  const auto pmap = scalar_family();
  auto v = pw_apply(pmap, vec({0.5}));
  CHECK(v.value(0) == doctest::Approx(0.5));
  CHECK(v.selection == Selection{1});
  v = pw_apply(pmap, vec({3}));
  CHECK(v.value(0) == doctest::Approx(2.5));
  CHECK(v.selection == Selection{0});
  CHECK(greedy_select(pmap, vec({0.5})) == Selection{1});

  const auto mx = scalar_family(Combinator::Max);
  CHECK(pw_apply(mx, vec({0.5})).value(0) == doctest::Approx(1.25));
  CHECK(greedy_select(mx, vec({0.5})) == Selection{0});
  CHECK(greedy_select(mx, vec({10})) == Selection{1});

  // 0.5 x + 1 and 0.25 x + 1.5 meet exactly at x = 2.
  const std::vector<AffinePiece> tie = {piece(0.5, 1.0), piece(0.25, 1.5)};
  CHECK(greedy_select(PiecewiseAffineMap(tie, Combinator::Min), vec({2})) == Selection{0});
  CHECK(greedy_select(PiecewiseAffineMap(tie, Combinator::Max), vec({2})) == Selection{0});
}

TEST_CASE("rowwise selection in two dimensions") {
  const PiecewiseAffineMap pmap({{mat({{0.5, 0}, {0, 0.1}}), vec({0, 5})}, {mat({{0.1, 0}, {0, 0.5}}), vec({5, 0})}},
                                Combinator::Min);
  const auto v = pw_apply(pmap, vec({1, 1}));
  CHECK(v.selection == Selection{0, 1});
  CHECK(dist(v.value, vec({0.5, 0.5})) < 1e-15);
  const auto sel = assemble_selected(pmap, v.selection);
  CHECK(dist(Vector(sel.A * vec({1, 1}) + sel.b), v.value) < 1e-15);
  CHECK(dist(apply_selected(pmap, v.selection, vec({1, 1})), v.value) < 1e-15);
}

TEST_CASE("minmax combinator") {
  // Row value min(max(x, 0.5x + 1), 0.2x + 3).
  const PiecewiseAffineMap pmap({piece(1.0, 0.0), piece(0.5, 1.0), piece(0.2, 3.0)}, Combinator::MinMax, {0, 0, 1});
  CHECK(pmap.choices() == 2);
  CHECK(pw_apply(pmap, vec({0})).value(0) == doctest::Approx(1.0));
  CHECK(pw_apply(pmap, vec({4})).value(0) == doctest::Approx(3.8));
  CHECK(pw_apply(pmap, vec({10})).value(0) == doctest::Approx(5.0));
  CHECK(greedy_select(pmap, vec({10})) == Selection{1});
}

TEST_CASE("linearized_iterate") {
  const auto pmap = scalar_family();
  CHECK(linearized_iterate(pmap, half, vec({3}), LinearizedVariant::multistep())(0) ==
        doctest::Approx(7.0 / 3).epsilon(1e-14));
  for (auto variant : {LinearizedVariant::multistep(), LinearizedVariant::proximal(), LinearizedVariant::mfold(3)})
    CHECK(linearized_iterate(pmap, half, vec({0.5}), variant)(0) == doctest::Approx(0.5).epsilon(1e-14));
  for (double x : {-1.0, 0.7, 3.0, 8.0})
    CHECK(linearized_iterate(pmap, half, vec({x}), LinearizedVariant::mfold(1))(0) ==
          doctest::Approx(pw_apply(pmap, vec({x})).value(0)).epsilon(1e-15));
}

TEST_CASE("properness_report") {
  const auto report = properness_report(scalar_family());
  REQUIRE(report.entries.size() == 2);
  CHECK(report.proper_count() == 2);
  CHECK((*report.entries[0].x_mu)(0) == doctest::Approx(2.0));
  CHECK((*report.entries[1].x_mu)(0) == doctest::Approx(0.5));

  const auto min_one = properness_report(build_piecewise(gen_min_one_x()));
  CHECK(min_one.proper_count() == 1);
  CHECK(min_one.improper_count() == 1);
  for (const auto& e : min_one.entries)
    if (e.proper) CHECK((*e.x_mu)(0) == doctest::Approx(1.0));

  const auto zero = properness_report(PiecewiseAffineMap({piece(0.0, 4.0)}, Combinator::Min));
  CHECK(zero.entries[0].proper);
  CHECK((*zero.entries[0].x_mu)(0) == 4.0);
}

TEST_CASE("properness_report enumeration limits") {
  std::vector<AffinePiece> pieces;
  for (int k = 0; k < 10; ++k) pieces.push_back({Matrix::Identity(7, 7) * 0.1 * (k % 5), Vector::Ones(7)});
  const PiecewiseAffineMap big(pieces, Combinator::Min);
  CHECK(error_of([&] { properness_report(big, Enumeration::Full); }) == ErrorCode::EnumerationTooLarge);
  const auto per = properness_report(big, Enumeration::Auto);
  CHECK(!per.full_product);
  CHECK(per.entries.size() == 10);
}

TEST_CASE("brute_force_xstar") {
  CHECK(brute_force_xstar(scalar_family()).values(0) == doctest::Approx(0.5));
  CHECK(brute_force_xstar(scalar_family(Combinator::Max)).values(0) == doctest::Approx(2.0));
  CHECK(brute_force_xstar(PiecewiseAffineMap({piece(0.25, 3.0)}, Combinator::Min)).values(0) ==
        doctest::Approx(4.0));
  CHECK(brute_force_xstar(build_piecewise(gen_quadratic_family(10))).values(0) == doctest::Approx(-10.0));
  CHECK(error_of([] { brute_force_xstar(PiecewiseAffineMap({piece(1.0, 0.0)}, Combinator::Min)); }) ==
        ErrorCode::NoProperComponent);

  const auto random = build_piecewise(gen_piecewise(4, 3, Combinator::Min, 5));
  const auto ref = oracle::brute_force(random.pieces(), false);
  CHECK(dist(brute_force_xstar(random).values, ref.xstar) < 1e-12);
}

TEST_CASE("monotone_solve") {
  const auto pmap = scalar_family();
  const auto r = monotone_solve(pmap, half, vec({3}));
  CHECK(r.trace.converged);
  CHECK(r.violations == 0);
  CHECK(r.limit.values(0) == doctest::Approx(0.5).epsilon(1e-9));
  for (std::size_t k = 1; k < r.trace.iterates.size(); ++k)
    CHECK(r.trace.iterates[k](0) <= r.trace.iterates[k - 1](0));

  const auto at_star = monotone_solve(pmap, half, vec({0.5}));
  CHECK(at_star.trace.iterations() == 0);

  CHECK(error_of([&] { monotone_solve(pmap, half, vec({-5})); }) == ErrorCode::BadInitialCondition);
  CHECK(error_of([] { monotone_solve(scalar_family(Combinator::Max), half, vec({3})); }) == ErrorCode::BadParams);
  CHECK(error_of([] {
          monotone_solve(PiecewiseAffineMap({piece(-0.5, 1.0)}, Combinator::Min), half, vec({3}));
        }) == ErrorCode::AssumptionViolated);
}

TEST_CASE("monotone_solve on the quadratic family") {
  double previous = 0.0;
  for (std::size_t grid : {10u, 20u}) {
    const auto r = monotone_solve(build_piecewise(gen_quadratic_family(grid)), half, vec({0}), {1e-12, 1000000});
    CHECK(r.trace.converged);
    CHECK(r.limit.values(0) == doctest::Approx(-static_cast<double>(grid)).epsilon(1e-9));
    CHECK(r.limit.values(0) < previous);
    previous = r.limit.values(0);
  }
}

TEST_CASE("monotone_solve on min{1, x} stops short of the componentwise minimum") {
  const auto pmap = build_piecewise(gen_min_one_x());
  const auto r = monotone_solve(pmap, half, vec({0}));
  CHECK(r.trace.converged);
  CHECK(r.limit.values(0) == 0.0);
  CHECK(r.improper_accepts >= 1);
  CHECK(brute_force_xstar(pmap).values(0) == 1.0);
}

TEST_CASE("monotone_solve reports divergence below the floor") {
  const PiecewiseAffineMap drift({piece(1.0, -1.0), piece(0.5, 10.0)}, Combinator::Min);
  const auto r = monotone_solve(drift, half, vec({0}), {1e-10, 100000, -1e3});
  CHECK(r.trace.status == TraceStatus::DivergentToMinusInfinity);
  CHECK(!r.limit.finite());
}

TEST_CASE("pw_apply_extended") {
  const auto pmap = scalar_family();
  ExtendedVector x{vec({-INFINITY})};
  CHECK(pw_apply_extended(pmap, x).values(0) == -INFINITY);
  const PiecewiseAffineMap flat({piece(0.0, 2.0)}, Combinator::Min);
  CHECK(pw_apply_extended(flat, x).values(0) == 2.0);
}

TEST_CASE("randomized_solve") {
  const auto pmap = scalar_family();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto trace = randomized_solve(pmap, half, vec({10}), {0.3, seed, 1e-12, 100000, {}});
    CHECK(trace.converged);
    CHECK(trace.final_iterate()(0) == doctest::Approx(0.5).epsilon(1e-8));
  }
  const auto mx = randomized_solve(scalar_family(Combinator::Max), half, vec({10}), {0.3, 4, 1e-12, 100000, {}});
  CHECK(mx.final_iterate()(0) == doctest::Approx(2.0).epsilon(1e-8));

  const auto a = randomized_solve(pmap, half, vec({10}), {0.3, 9, 1e-12, 100000, {}});
  const auto b = randomized_solve(pmap, half, vec({10}), {0.3, 9, 1e-12, 100000, {}});
  CHECK(a.iterates.size() == b.iterates.size());
  CHECK(a.final_iterate()(0) == b.final_iterate()(0));

  CHECK(error_of([] { randomized_solve(scalar_family(), half, vec({10}), {1.0, 1, 1e-10, 10, {}}); }) ==
        ErrorCode::BadParams);
  CHECK(error_of([] {
          randomized_solve(PiecewiseAffineMap({piece(1.2, 0.0)}, Combinator::Min), half, vec({1}), {});
        }) == ErrorCode::ContractionCheckFailed);
}

TEST_CASE("weighted_sup_modulus") {
  CHECK(weighted_sup_modulus(scalar_family(), vec({1})) == doctest::Approx(0.8));
  const PiecewiseAffineMap two({{mat({{0, 0.9}, {0.1, 0}}), vec({0, 0})}}, Combinator::Min);
  CHECK(weighted_sup_modulus(two, vec({1, 1})) == doctest::Approx(0.9));
  CHECK(weighted_sup_modulus(two, vec({3, 1})) == doctest::Approx(0.3));
}

TEST_CASE("composed_randomized_solve") {
  const auto pmap = build_piecewise(gen_piecewise(4, 3, Combinator::Min, 8));
  const RandomizedOptions opts{0.3, 2, 1e-12, 100000, {}};
  const Vector x0 = Vector::Constant(4, 10.0);

  const auto plain = randomized_solve(pmap, half, x0, opts);
  const auto with_id = composed_randomized_solve(pmap, Matrix::Identity(4, 4), half, x0, opts);
  CHECK(dist(plain.final_iterate(), with_id.final_iterate()) < 1e-9);

  const Matrix phi = mat({{1, 0.2}, {1, -0.5}, {1, 0.7}, {1, 0.1}});
  const Matrix w = build_projection(ProjectionSpec(phi, Vector::Constant(4, 0.25)));
  const auto proj = composed_randomized_solve(pmap, w, half, x0, opts);
  CHECK(proj.converged);
  const Vector x = proj.final_iterate();
  CHECK(dist(x, w * pw_apply(pmap, x).value) <= 1e-12);

  const auto zero = composed_randomized_solve(pmap, Matrix::Zero(4, 4), half, x0, opts);
  CHECK(zero.final_iterate().lpNorm<Eigen::Infinity>() == 0.0);
}
