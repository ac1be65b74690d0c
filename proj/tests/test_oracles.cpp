// Reference oracles are pinned first, against values worked out by hand, so
// the solvers can later be tested against the oracles rather than against
// themselves.

#include <catch2/catch_amalgamated.hpp>

#include "otmarl/oracles.hpp"
#include "test_support.hpp"

using namespace otmarl;

namespace {

GroundPtr line_ground(const std::vector<double>& xs) { return GroundSpace::from_line(xs); }

}  // namespace

TEST_CASE("quantile oracle: two points, crossing masses") {
  auto g = line_ground({0.0, 1.0});
  auto mu = make_distribution(g, {0.7, 0.3});
  auto nu = make_distribution(g, {0.3, 0.7});
  // Sorted-mass matching moves 0.4 of mass across distance 1.
  REQUIRE(quantile_oracle_1d(mu, nu, {0.0, 1.0}, 1.0) == Catch::Approx(0.4).margin(1e-15));
  // Same coupling under p = 2: (0.4 * 1^2)^(1/2).
  REQUIRE(quantile_oracle_1d(mu, nu, {0.0, 1.0}, 2.0) ==
          Catch::Approx(0.6324555320336759).margin(1e-14));
}

TEST_CASE("quantile oracle: three points, worked by hand") {
  auto g = line_ground({0.0, 1.0, 3.0});
  auto mu = make_distribution(g, {0.5, 0.5, 0.0});
  auto nu = make_distribution(g, {0.0, 0.25, 0.75});
  // Pieces: 0.25 across |0-1|, 0.25 across |0-3|, 0.5 across |1-3|.
  REQUIRE(quantile_oracle_1d(mu, nu, {0.0, 1.0, 3.0}, 1.0) ==
          Catch::Approx(2.0).margin(1e-14));
  // Squared pieces: 0.25*1 + 0.25*9 + 0.5*4 = 4.5.
  REQUIRE(quantile_oracle_1d(mu, nu, {0.0, 1.0, 3.0}, 2.0) ==
          Catch::Approx(std::sqrt(4.5)).margin(1e-14));
}

TEST_CASE("quantile oracle: point masses at distance 3") {
  auto g = line_ground({0.0, 3.0});
  auto mu = point_mass(g, 0);
  auto nu = point_mass(g, 1);
  for (double p : {1.0, 2.0, 3.0})
    REQUIRE(quantile_oracle_1d(mu, nu, {0.0, 3.0}, p) == Catch::Approx(3.0).margin(1e-13));
}

TEST_CASE("quantile oracle: identical distributions cost zero") {
  auto g = line_ground({0.0, 0.5, 2.0});
  auto mu = make_distribution(g, {0.2, 0.5, 0.3});
  REQUIRE(quantile_oracle_1d(mu, mu, {0.0, 0.5, 2.0}, 1.0) == 0.0);
  REQUIRE(quantile_oracle_1d(mu, mu, {0.0, 0.5, 2.0}, 2.0) == 0.0);
}

TEST_CASE("quantile oracle rejects grounds that are not the line metric") {
  Matrix cost(2, 2, 0.0);
  cost(0, 1) = 5.0;
  cost(1, 0) = 5.0;
  auto g = GroundSpace::from_cost(std::move(cost), false);
  auto mu = make_distribution(g, {0.5, 0.5});
  auto nu = make_distribution(g, {0.4, 0.6});
  REQUIRE_THROWS_AS(quantile_oracle_1d(mu, nu, {0.0, 1.0}, 1.0), NotOneDimensional);
}

TEST_CASE("quantile oracle is symmetric and obeys the triangle inequality") {
  auto gen = testutil::rng(411);
  auto xs = testutil::random_line_positions(gen, 9);
  auto g = line_ground(xs);
  for (int rep = 0; rep < 25; ++rep) {
    auto mu = make_distribution(g, testutil::random_weights(gen, 9));
    auto nu = make_distribution(g, testutil::random_weights(gen, 9));
    auto rho = make_distribution(g, testutil::random_weights(gen, 9));
    for (double p : {1.0, 2.0}) {
      const double ab = quantile_oracle_1d(mu, nu, xs, p);
      const double ba = quantile_oracle_1d(nu, mu, xs, p);
      const double ac = quantile_oracle_1d(mu, rho, xs, p);
      const double cb = quantile_oracle_1d(rho, nu, xs, p);
      REQUIRE(std::abs(ab - ba) <= 1e-12);
      REQUIRE(ab <= ac + cb + 1e-12);
    }
  }
}

TEST_CASE("assignment oracle: hand-enumerated 3x3 block") {
  Matrix c = Matrix::from_rows({{1.0, 2.0, 4.0}, {3.0, 1.0, 2.0}, {4.0, 3.0, 1.0}});
  // Identity assignment wins with total 3 under both exponents.
  REQUIRE(assignment_oracle(c, 1.0) == Catch::Approx(1.0).margin(1e-15));
  REQUIRE(assignment_oracle(c, 2.0) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("assignment oracle: block where the off-diagonal wins") {
  Matrix c = Matrix::from_rows({{0.5, 2.0}, {1.0, 3.0}});
  // p=1: swap gives (2+1)/2; p=2: swap gives ((4+1)/2)^(1/2).
  REQUIRE(assignment_oracle(c, 1.0) == Catch::Approx(1.5).margin(1e-15));
  REQUIRE(assignment_oracle(c, 2.0) ==
          Catch::Approx(1.5811388300841898).margin(1e-14));
}

TEST_CASE("assignment oracle caps enumeration at 7 points") {
  Matrix ok(7, 7, 1.0);
  for (std::size_t i = 0; i < 7; ++i) ok(i, i) = 0.5;
  REQUIRE(assignment_oracle(ok, 1.0) == Catch::Approx(0.5));
  Matrix big(8, 8, 1.0);
  REQUIRE_THROWS_AS(assignment_oracle(big, 1.0), OracleTooLarge);
}

TEST_CASE("oracles agree with each other on a line with uniform masses") {
  // n equal masses on a line: the assignment view and the quantile view must
  // give the same distance.
  auto gen = testutil::rng(902);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 5;
    auto xs = testutil::random_line_positions(gen, n);
    auto ys = testutil::random_line_positions(gen, n);
    Matrix block(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) block(i, j) = std::abs(xs[i] - ys[j]);

    std::vector<double> pos = xs;
    pos.insert(pos.end(), ys.begin(), ys.end());
    Matrix cost(2 * n, 2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i)
      for (std::size_t j = 0; j < 2 * n; ++j) cost(i, j) = std::abs(pos[i] - pos[j]);
    auto g = GroundSpace::from_cost(std::move(cost), true);
    std::vector<double> wa(2 * n, 0.0), wb(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) wa[i] = 1.0;
    for (std::size_t j = n; j < 2 * n; ++j) wb[j] = 1.0;
    auto mu = make_distribution(g, wa);
    auto nu = make_distribution(g, wb);
    for (double p : {1.0, 2.0}) {
      const double via_assignment = assignment_oracle(block, p);
      const double via_quantiles = quantile_oracle_1d(mu, nu, pos, p);
      REQUIRE(via_assignment == Catch::Approx(via_quantiles).margin(1e-12));
    }
  }
}
