// Alignment: pairwise distance matrices, descent on the debiased entropic
// objective with its finite-difference gradient oracle, and the shaping
// penalty's structural properties.

#include <catch2/catch_amalgamated.hpp>

#include "otmarl/alignment.hpp"
#include "otmarl/oracles.hpp"
#include "test_support.hpp"

using namespace otmarl;

namespace {

OccupancyMeasure measure_of(const DiscreteDistribution& d) { return {d, {}}; }

std::vector<double> line_points(std::size_t n) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = static_cast<double>(i);
  return xs;
}

}  // namespace

TEST_CASE("pairwise_wasserstein: identical measures give a zero objective") {
  auto g = GroundSpace::from_line(line_points(6));
  auto d = make_distribution(g, {0.1, 0.3, 0.2, 0.1, 0.2, 0.1});
  std::vector<OccupancyMeasure> ms = {measure_of(d), measure_of(d), measure_of(d)};
  auto obj = pairwise_wasserstein(ms, g, 1.0);
  REQUIRE(obj.total <= 1e-9);
  for (std::size_t i = 0; i < 3; ++i) REQUIRE(obj.pairwise(i, i) == 0.0);
}

TEST_CASE("pairwise_wasserstein: two agents double the single distance") {
  auto g = GroundSpace::from_line(line_points(5));
  auto a = make_distribution(g, {0.5, 0.5, 0.0, 0.0, 0.0});
  auto b = make_distribution(g, {0.0, 0.0, 0.0, 0.5, 0.5});
  auto obj = pairwise_wasserstein({measure_of(a), measure_of(b)}, g, 1.0);
  const double w = wasserstein(a, b, 1.0);
  REQUIRE(obj.total == Catch::Approx(2.0 * w).margin(1e-12));
  REQUIRE(obj.pairwise(0, 1) == Catch::Approx(w).margin(1e-12));
  REQUIRE(obj.pairwise(1, 0) == obj.pairwise(0, 1));
}

TEST_CASE("pairwise_wasserstein matches the 1-D oracle entrywise") {
  auto gen = testutil::rng(3101);
  auto xs = line_points(5);
  auto g = GroundSpace::from_line(xs);
  std::vector<OccupancyMeasure> ms;
  for (int i = 0; i < 3; ++i)
    ms.push_back(measure_of(make_distribution(g, testutil::random_weights(gen, 5))));
  auto obj = pairwise_wasserstein(ms, g, 1.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) {
      const double oracle =
          quantile_oracle_1d(ms[i].distribution, ms[j].distribution, xs, 1.0);
      REQUIRE(obj.pairwise(i, j) == Catch::Approx(oracle).margin(1e-8));
    }
  double manual_total = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) manual_total += obj.pairwise(i, j);
  REQUIRE(obj.total == Catch::Approx(manual_total).margin(1e-12));
}

TEST_CASE("pairwise matrix follows agent reordering") {
  auto gen = testutil::rng(3102);
  auto g = GroundSpace::from_line(line_points(6));
  std::vector<OccupancyMeasure> ms;
  for (int i = 0; i < 4; ++i)
    ms.push_back(measure_of(make_distribution(g, testutil::random_weights(gen, 6))));
  auto obj = pairwise_wasserstein(ms, g, 2.0);
  std::vector<OccupancyMeasure> shuffled = {ms[2], ms[0], ms[3], ms[1]};
  auto obj2 = pairwise_wasserstein(shuffled, g, 2.0);
  const std::size_t perm[4] = {2, 0, 3, 1};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      REQUIRE(obj2.pairwise(i, j) ==
              Catch::Approx(obj.pairwise(perm[i], perm[j])).margin(1e-12));
  REQUIRE(obj2.total == Catch::Approx(obj.total).margin(1e-9));
}

TEST_CASE("pairwise_wasserstein entropic mode is symmetric and near exact") {
  auto gen = testutil::rng(3103);
  auto g = GroundSpace::from_line(line_points(6));
  std::vector<OccupancyMeasure> ms;
  for (int i = 0; i < 3; ++i)
    ms.push_back(measure_of(make_distribution(g, testutil::random_weights(gen, 6))));
  auto exact = pairwise_wasserstein(ms, g, 1.0);
  auto ent = pairwise_wasserstein(ms, g, 1.0, AlignmentMode::with_entropy(0.01));
  REQUIRE(ent.epsilon == 0.01);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      REQUIRE(ent.pairwise(i, j) == ent.pairwise(j, i));
      REQUIRE(ent.pairwise(i, j) >= exact.pairwise(i, j) - 1e-9);
    }
  REQUIRE(ent.total == Catch::Approx(exact.total).epsilon(0.1));
}

TEST_CASE("pairwise_wasserstein rejects mismatched grounds and tiny sets") {
  auto g = GroundSpace::from_line(line_points(4));
  auto other = GroundSpace::from_line({0.0, 2.0, 5.0, 9.0});
  auto d = uniform_distribution(g);
  REQUIRE_THROWS_AS(pairwise_wasserstein({measure_of(d)}, g, 1.0), InvalidArgument);
  REQUIRE_THROWS_AS(
      pairwise_wasserstein({measure_of(d), measure_of(uniform_distribution(other))},
                           g, 1.0),
      DimensionMismatch);
}

TEST_CASE("alignment gradient matches central finite differences") {
  auto gen = testutil::rng(3104);
  const std::size_t n = 5;
  auto g = GroundSpace::from_line(line_points(n));
  const double eps = 0.1, p = 1.0, h = 1e-5;
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int rep = 0; rep < 3; ++rep) {
    std::vector<std::vector<double>> logits(3, std::vector<double>(n));
    for (auto& row : logits)
      for (auto& v : row) v = unif(gen);
    auto eval = align_objective_and_gradient(logits, g, p, eps, 1e-12, 500000);
    double worst = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t x = 0; x < n; ++x) {
        auto lp = logits, lm = logits;
        lp[k][x] += h;
        lm[k][x] -= h;
        const double op =
            align_objective_and_gradient(lp, g, p, eps, 1e-12, 500000).objective;
        const double om =
            align_objective_and_gradient(lm, g, p, eps, 1e-12, 500000).objective;
        const double fd = (op - om) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - eval.logit_gradients[k][x]));
        scale = std::max(scale, std::abs(fd));
      }
    REQUIRE(worst <= 1e-3 * std::max(scale, 1e-3));
  }
}

TEST_CASE("align_descent: identical initialization is already optimal") {
  auto g = GroundSpace::from_line(line_points(5));
  std::vector<double> theta = {0.2, -0.1, 0.4, 0.0, -0.3};
  auto res = align_descent({theta, theta, theta}, g, 1.0, 0.05);
  REQUIRE(res.converged);
  REQUIRE(res.trace.size() == 1);
  REQUIRE(std::abs(res.trace[0].objective) <= 1e-9);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t x = 0; x < 5; ++x)
      REQUIRE(res.parameters[k][x] == theta[x]);
}

TEST_CASE("align_descent pulls concentrated agents toward each other") {
  auto g = GroundSpace::from_line(line_points(5));
  // Sharp softmax concentrations at the two ends of the line.
  std::vector<double> left = {4.0, 0.0, 0.0, 0.0, -4.0};
  std::vector<double> right = {-4.0, 0.0, 0.0, 0.0, 4.0};
  auto res = align_descent({left, right}, g, 1.0, 0.05, 60, 0.5);
  REQUIRE(res.trace.size() >= 2);
  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    REQUIRE(res.trace[i].objective < res.trace[i - 1].objective);
    REQUIRE(res.trace[i].step_size > 0.0);
  }

  auto mean_of = [&](const std::vector<double>& theta) {
    auto probs = softmax(theta);
    double m = 0.0;
    for (std::size_t x = 0; x < probs.size(); ++x)
      m += probs[x] * static_cast<double>(x);
    return m;
  };
  const double gap_before = mean_of(right) - mean_of(left);
  const double gap_after = mean_of(res.parameters[1]) - mean_of(res.parameters[0]);
  REQUIRE(gap_after < gap_before);
}

TEST_CASE("align_descent trace never increases on random instances") {
  auto gen = testutil::rng(3105);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  auto g = GroundSpace::from_line(line_points(5));
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<std::vector<double>> init(3, std::vector<double>(5));
    for (auto& row : init)
      for (auto& v : row) v = unif(gen);
    auto res = align_descent(init, g, 1.0, 0.05, 25, 0.2);
    for (std::size_t i = 1; i < res.trace.size(); ++i)
      REQUIRE(res.trace[i].objective <= res.trace[i - 1].objective);
    REQUIRE(res.trace.back().objective >= -1e-9);
  }
}

TEST_CASE("align_descent validates its inputs") {
  auto g = GroundSpace::from_line(line_points(4));
  std::vector<std::vector<double>> init(2, std::vector<double>(4, 0.0));
  REQUIRE_THROWS_AS(align_descent(init, g, 1.0, 0.0), BadRegularization);
  REQUIRE_THROWS_AS(align_descent(init, g, 1.0, 0.05, 10, 0.0), InvalidArgument);
}

TEST_CASE("shaping_penalty: beta zero short-circuits to zeros") {
  auto g = GroundSpace::from_line(line_points(4));
  auto a = make_distribution(g, {0.7, 0.3, 0.0, 0.0});
  auto b = make_distribution(g, {0.0, 0.0, 0.4, 0.6});
  auto pen = shaping_penalty(0, {measure_of(a), measure_of(b)}, g, 1.0, 0.05, 0.0);
  for (double v : pen) REQUIRE(v == 0.0);
}

TEST_CASE("shaping_penalty: identical measures give identical centered signals") {
  auto g = GroundSpace::from_line(line_points(5));
  auto d = make_distribution(g, {0.2, 0.2, 0.2, 0.2, 0.2});
  std::vector<OccupancyMeasure> ms = {measure_of(d), measure_of(d), measure_of(d)};
  auto p0 = shaping_penalty(0, ms, g, 1.0, 0.05, 0.5);
  auto p1 = shaping_penalty(1, ms, g, 1.0, 0.05, 0.5);
  auto p2 = shaping_penalty(2, ms, g, 1.0, 0.05, 0.5);
  double mean = 0.0;
  for (std::size_t x = 0; x < p0.size(); ++x) {
    REQUIRE(p0[x] == Catch::Approx(p1[x]).margin(1e-9));
    REQUIRE(p0[x] == Catch::Approx(p2[x]).margin(1e-9));
    mean += p0[x];
  }
  REQUIRE(std::abs(mean / static_cast<double>(p0.size())) <= 1e-9);
}

TEST_CASE("shaping_penalty scales linearly in beta and stays finite") {
  auto gen = testutil::rng(3106);
  auto g = GroundSpace::from_line(line_points(6));
  std::vector<OccupancyMeasure> ms;
  for (int i = 0; i < 3; ++i)
    ms.push_back(
        measure_of(make_distribution(g, testutil::sparse_weights(gen, 6, 0.4))));
  auto p1 = shaping_penalty(1, ms, g, 1.0, 0.05, 0.5);
  auto p2 = shaping_penalty(1, ms, g, 1.0, 0.05, 1.0);
  for (std::size_t x = 0; x < p1.size(); ++x) {
    REQUIRE(std::isfinite(p1[x]));
    REQUIRE(p2[x] == Catch::Approx(2.0 * p1[x]).margin(1e-12));
  }
  REQUIRE_THROWS_AS(shaping_penalty(3, ms, g, 1.0, 0.05, 0.5), InvalidArgument);
  REQUIRE_THROWS_AS(shaping_penalty(0, ms, g, 1.0, 0.05, -0.1), InvalidArgument);
}

TEST_CASE("policy set rows are valid distributions") {
  PolicySet set;
  set.logits.push_back(Matrix::from_rows({{0.5, -0.5, 1.0}, {0.0, 0.0, 0.0}}));
  auto probs = set.probabilities(0);
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < probs.cols(); ++c) {
      REQUIRE(probs(r, c) > 0.0);
      sum += probs(r, c);
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
  }
}
