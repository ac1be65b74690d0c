// Hierarchical solving: deterministic k-medoids partitioning, the upper and
// lower solves, composition feasibility, and the optimality gap against the
// flat exact solve.

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstddef>
#include <random>
#include <vector>

#include "otmarl/hierarchy.hpp"
#include "test_support.hpp"

using namespace otmarl;

namespace {

// Exhaustive weighted 2-medoid partition objective: best over all proper
// bipartitions, where each side pays the mass-weighted distance to its best
// in-side medoid. Only for small n; the partition test compares against it.
std::pair<double, std::vector<std::size_t>> best_bipartition(
    const GroundPtr& ground, const std::vector<double>& masses) {
  const std::size_t n = ground->point_count();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_assign;
  // Point 0 stays on side 0, which halves the enumeration without losing a
  // partition (sides are unordered).
  for (std::size_t code = 0; code < (1ull << (n - 1)); ++code) {
    std::vector<std::size_t> assign(n, 0);
    bool has_one = false;
    for (std::size_t i = 1; i < n; ++i)
      if (code & (1ull << (i - 1))) {
        assign[i] = 1;
        has_one = true;
      }
    if (!has_one) continue;
    double total = 0.0;
    for (std::size_t side = 0; side < 2; ++side) {
      double side_best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < n; ++c) {
        if (assign[c] != side) continue;
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          if (assign[i] == side) cost += masses[i] * ground->cost_at(i, c);
        side_best = std::min(side_best, cost);
      }
      total += side_best;
    }
    if (total < best) {
      best = total;
      best_assign = assign;
    }
  }
  return {best, best_assign};
}

double partition_objective(const GroundPtr& ground, const std::vector<double>& masses,
                           const Partition& part) {
  double total = 0.0;
  for (std::size_t c = 0; c < part.k; ++c) {
    double side_best = std::numeric_limits<double>::infinity();
    for (std::size_t cand = 0; cand < ground->point_count(); ++cand) {
      if (part.assignment[cand] != c) continue;
      double cost = 0.0;
      for (std::size_t i = 0; i < ground->point_count(); ++i)
        if (part.assignment[i] == c) cost += masses[i] * ground->cost_at(i, cand);
      side_best = std::min(side_best, cost);
    }
    total += side_best;
  }
  return total;
}

struct RandomPair {
  GroundPtr ground;
  DiscreteDistribution mu;
  DiscreteDistribution nu;
};

RandomPair random_pair(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::array<double, 2>> pts(n);
  for (auto& pt : pts) pt = {unif(gen), unif(gen)};
  auto g = GroundSpace::from_plane_points(pts, GroundSpace::PlaneMetric::kEuclidean);
  std::vector<double> wa(n), wb(n);
  for (std::size_t i = 0; i < n; ++i) {
    wa[i] = 0.05 + unif(gen);
    wb[i] = 0.05 + unif(gen);
  }
  return {g, make_distribution(g, wa), make_distribution(g, wb)};
}

}  // namespace

TEST_CASE("partition_points: trivial cluster counts and validation") {
  auto g = GroundSpace::from_line({0.0, 1.0, 2.0, 3.0});
  std::vector<double> masses{0.1, 0.2, 0.3, 0.4};

  auto whole = partition_points(g, masses, 1);
  REQUIRE(whole.k == 1);
  for (std::size_t c : whole.assignment) REQUIRE(c == 0);

  auto singletons = partition_points(g, masses, 4);
  REQUIRE(singletons.k == 4);
  std::vector<int> counts(4, 0);
  for (std::size_t c : singletons.assignment) counts[c] += 1;
  for (int cnt : counts) REQUIRE(cnt == 1);

  REQUIRE_THROWS_AS(partition_points(g, masses, 0), BadClusterCount);
  REQUIRE_THROWS_AS(partition_points(g, masses, 5), BadClusterCount);
  REQUIRE_THROWS_AS(partition_points(g, {0.1, 0.2}, 2), DimensionMismatch);
  REQUIRE_THROWS_AS(partition_points(g, {0.1, -0.2, 0.3, 0.4}, 2), NegativeWeight);
}

TEST_CASE("partition_points recovers well-separated groups") {
  auto gen = testutil::rng(5101);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<std::array<double, 2>> pts;
    for (int i = 0; i < 5; ++i) pts.push_back({unif(gen), unif(gen)});
    for (int i = 0; i < 4; ++i) pts.push_back({20.0 + unif(gen), unif(gen)});
    auto g = GroundSpace::from_plane_points(pts, GroundSpace::PlaneMetric::kEuclidean);
    std::vector<double> masses(pts.size());
    for (auto& m : masses) m = 0.1 + unif(gen);

    auto part = partition_points(g, masses, 2);
    REQUIRE(part.k == 2);
    // Group membership must match the construction.
    for (std::size_t i = 1; i < 5; ++i)
      REQUIRE(part.assignment[i] == part.assignment[0]);
    for (std::size_t i = 6; i < 9; ++i)
      REQUIRE(part.assignment[i] == part.assignment[5]);
    REQUIRE(part.assignment[0] != part.assignment[5]);

    // And it must be the exhaustive optimum, not just plausible.
    auto [oracle_cost, oracle_assign] = best_bipartition(g, masses);
    REQUIRE(partition_objective(g, masses, part) ==
            Catch::Approx(oracle_cost).margin(1e-12));
  }
}

TEST_CASE("partition_points is deterministic") {
  auto gen = testutil::rng(5102);
  auto inst = random_pair(gen, 12);
  auto a = partition_points(inst.ground, inst.mu.weights, 3);
  auto b = partition_points(inst.ground, inst.mu.weights, 3);
  REQUIRE(a.assignment == b.assignment);
}

TEST_CASE("solve_hierarchical with k = 1 reproduces the flat solve") {
  auto gen = testutil::rng(5103);
  for (double p : {1.0, 2.0}) {
    auto inst = random_pair(gen, 10);
    Partition whole;
    whole.k = 1;
    whole.assignment.assign(10, 0);
    auto sol = solve_hierarchical(inst.mu, inst.nu, inst.ground, p, whole, whole);
    REQUIRE(sol.upper.rows() == 1);
    REQUIRE(sol.upper(0, 0) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(sol.hier_cost == Catch::Approx(sol.flat_cost).margin(1e-9));
    REQUIRE(sol.gap_ratio == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(sol.lower.size() == 1);
  }
}

TEST_CASE("separated groups with matched masses close the gap") {
  auto g = GroundSpace::from_line({0.0, 1.0, 2.0, 50.0, 51.0, 52.0});
  auto mu = make_distribution(g, {0.3, 0.0, 0.2, 0.1, 0.15, 0.25});
  auto nu = make_distribution(g, {0.0, 0.5, 0.0, 0.0, 0.5, 0.0});
  Partition groups;
  groups.k = 2;
  groups.assignment = {0, 0, 0, 1, 1, 1};
  for (double p : {1.0, 2.0}) {
    auto sol = solve_hierarchical(mu, nu, g, p, groups, groups);
    // The flat optimum never crosses the gap either, so the ratio is one.
    REQUIRE(sol.gap_ratio == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(sol.composed.marginal_violation() <= 1e-8);
  }
}

TEST_CASE("identical marginals with shared partitions stay at zero cost") {
  auto gen = testutil::rng(5104);
  auto inst = random_pair(gen, 9);
  auto part = partition_points(inst.ground, inst.mu.weights, 3);
  auto sol = solve_hierarchical(inst.mu, inst.mu, inst.ground, 2.0, part, part);
  REQUIRE(sol.flat_cost == 0.0);
  REQUIRE(sol.hier_cost == 0.0);
  REQUIRE(sol.gap_ratio == 1.0);
}

TEST_CASE("random instances: gap at least one, composition feasible") {
  auto gen = testutil::rng(5105);
  for (int rep = 0; rep < 20; ++rep) {
    auto inst = random_pair(gen, 30);
    auto psrc = partition_points(inst.ground, inst.mu.weights, 3);
    auto ptgt = partition_points(inst.ground, inst.nu.weights, 3);
    auto sol = solve_hierarchical(inst.mu, inst.nu, inst.ground, 1.0, psrc, ptgt);
    REQUIRE(sol.gap_ratio >= 1.0 - 1e-9);
    REQUIRE(sol.composed.marginal_violation() <= 1e-8);
    REQUIRE(sol.flat_ms >= 0.0);
    REQUIRE(sol.hier_ms >= 0.0);
  }
}

TEST_CASE("upper plan couples exactly the cluster masses") {
  auto gen = testutil::rng(5106);
  auto inst = random_pair(gen, 16);
  auto psrc = partition_points(inst.ground, inst.mu.weights, 4);
  auto ptgt = partition_points(inst.ground, inst.nu.weights, 3);
  auto sol = solve_hierarchical(inst.mu, inst.nu, inst.ground, 2.0, psrc, ptgt);

  std::vector<double> src_mass(4, 0.0), tgt_mass(3, 0.0);
  for (std::size_t i = 0; i < 16; ++i) {
    src_mass[psrc.assignment[i]] += inst.mu.weights[i];
    tgt_mass[ptgt.assignment[i]] += inst.nu.weights[i];
  }
  auto rows = sol.upper.row_sums();
  auto cols = sol.upper.col_sums();
  for (std::size_t a = 0; a < 4; ++a)
    REQUIRE(rows[a] == Catch::Approx(src_mass[a]).margin(1e-9));
  for (std::size_t b = 0; b < 3; ++b)
    REQUIRE(cols[b] == Catch::Approx(tgt_mass[b]).margin(1e-9));
  // Each stored lower solve carries its scaling mass from the upper plan.
  for (const auto& entry : sol.lower)
    REQUIRE(entry.upper_mass ==
            sol.upper(entry.source_cluster, entry.target_cluster));
}

TEST_CASE("solve_hierarchical validates partitions") {
  auto gen = testutil::rng(5107);
  auto inst = random_pair(gen, 6);
  Partition good = partition_points(inst.ground, inst.mu.weights, 2);

  Partition short_assign;
  short_assign.k = 2;
  short_assign.assignment = {0, 1, 0};
  REQUIRE_THROWS_AS(
      solve_hierarchical(inst.mu, inst.nu, inst.ground, 1.0, short_assign, good),
      DimensionMismatch);

  Partition out_of_range;
  out_of_range.k = 2;
  out_of_range.assignment = {0, 1, 2, 0, 1, 0};
  REQUIRE_THROWS_AS(
      solve_hierarchical(inst.mu, inst.nu, inst.ground, 1.0, good, out_of_range),
      InvalidArgument);

  Partition empty_cluster;
  empty_cluster.k = 3;
  empty_cluster.assignment = {0, 1, 0, 1, 0, 1};
  REQUIRE_THROWS_AS(
      solve_hierarchical(inst.mu, inst.nu, inst.ground, 1.0, empty_cluster, good),
      InvalidArgument);

  Partition none;
  none.k = 0;
  none.assignment.assign(6, 0);
  REQUIRE_THROWS_AS(
      solve_hierarchical(inst.mu, inst.nu, inst.ground, 1.0, none, good),
      BadClusterCount);
}
