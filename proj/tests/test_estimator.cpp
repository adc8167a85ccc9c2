#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "distnn/error.hpp"
#include "distnn/estimator.hpp"
#include "distnn/rng.hpp"
#include "support.hpp"

using namespace distnn;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using testing::dist;

namespace {

std::vector<std::size_t> rows_of(const NeighborSet& s) {
  std::vector<std::size_t> r;
  for (const auto& n : s.members) r.push_back(n.row);
  return r;
}

// Rows 0 and 1 identical, row 2 shifted by 10.
DistributionalMatrix duplicate_rows() {
  DistributionalMatrix m(3, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    const auto d = dist({static_cast<double>(j), static_cast<double>(j) + 1.5, static_cast<double>(j) + 4});
    m.set(0, j, d);
    m.set(1, j, d);
    m.set(2, j, testing::shifted(d, 10.0));
  }
  m.erase(0, 2);
  return m;
}

}  // namespace

TEST_CASE("row distance", "[distnn]") {
  DistributionalMatrix m(2, 3);
  m.set(0, 0, dist({0, 1}));
  m.set(1, 0, dist({0, 1}));
  m.set(0, 1, dist({0, 1}));
  m.set(1, 1, dist({1, 2}));  // W2^2 = 1
  m.set(0, 2, dist({0, 1}));
  CHECK(row_distance(m, 0, 1, 2) == 0.5);
  CHECK(row_distance(m, 0, 1, 1) == 0.0);
  m.set(1, 2, testing::shifted(dist({0, 1}), std::sqrt(3.0)));
  CHECK_THAT(row_distance(m, 0, 1, 0), WithinRel(2.0, 1e-15));  // mean of 1 and 3
  CHECK(row_distance(m, 0, 1, 0, 3) == kInfiniteDistance);

  DistributionalMatrix apart(2, 2);
  apart.set(0, 0, dist({0}));
  apart.set(1, 1, dist({0}));
  CHECK(row_distance(apart, 0, 1, 0) == kInfiniteDistance);
  CHECK(row_distance(apart, 0, 1, 1) == kInfiniteDistance);
}

TEST_CASE("neighbor selection", "[distnn]") {
  const auto m = duplicate_rows();
  CHECK(rows_of(find_neighbors(m, 0, 2, 1e300)) == std::vector<std::size_t>{1, 2});
  CHECK(rows_of(find_neighbors(m, 0, 2, 0.0)) == std::vector<std::size_t>{1});
  CHECK(find_neighbors(m, 2, 0, 1.0).empty());
  const auto set = find_neighbors(m, 0, 2, 1e300);
  CHECK(set.members[0].overlap == 2);
  CHECK(set.members[1].distance == 100.0);
}

TEST_CASE("estimates", "[distnn]") {
  const auto m = duplicate_rows();
  const auto r = impute(m, 0, 2, 0.0);
  CHECK(std::get<EmpiricalDistribution>(r.estimate) == m.at(1, 2));

  DistributionalMatrix two(3, 2);
  for (std::size_t i = 0; i < 3; ++i) two.set(i, 0, dist({0}));
  two.set(1, 1, dist({0, 2}));
  two.set(2, 1, dist({4, 6}));
  const auto est = impute(two, 0, 1, 1.0);
  CHECK(std::get<EmpiricalDistribution>(est.estimate) == dist({2, 4}));
  CHECK(est.summaries.mean == 3.0);

  DistributionalMatrix same(4, 3);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 3; ++j) same.set(i, j, dist({1, 5, 2}));
  }
  CHECK(std::get<EmpiricalDistribution>(impute(same, 0, 1, 1e9).estimate) == dist({1, 2, 5}));
}

TEST_CASE("no neighbors is an explicit error", "[distnn][errors]") {
  const auto m = duplicate_rows();
  try {
    (void)impute(m, 2, 0, 1.0);
    FAIL("expected NoNeighbors");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoNeighbors);
  }
  CHECK_FALSE(try_impute(m, 2, 0, 1.0).has_value());
  const auto nearest = impute_nearest(m, 2, 0);
  REQUIRE(nearest.neighbors.size() == 1);
  CHECK(nearest.neighbors.members[0].row == 0);
}

TEST_CASE("ragged neighbor entries give a midpoint quantile grid", "[distnn]") {
  DistributionalMatrix m(3, 2);
  for (std::size_t i = 0; i < 3; ++i) m.set(i, 0, dist({0}));
  m.set(1, 1, dist({0, 4}));
  m.set(2, 1, dist({2}));
  const auto r = impute(m, 0, 1, 1.0);
  const auto& g = std::get<QuantileGrid>(r.estimate);
  CHECK(g.levels == std::vector<double>{0.25, 0.75});
  CHECK(g.values == std::vector<double>{1, 3});
  CHECK(r.atoms() == dist({1, 3}));
}

TEST_CASE("batch imputation", "[distnn]") {
  auto m = duplicate_rows();
  auto full = m;
  full.set(0, 2, m.at(1, 2));
  CHECK(impute_all(full, 1.0, 0.05).empty());
  const auto out = impute_all(m, 0.0, 0.05);
  REQUIRE(out.size() == 1);
  CHECK(out[0].cell == Cell{0, 2});
  REQUIRE(out[0].result);
  CHECK(out[0].result->atoms() == impute(m, 0, 2, 0.0).atoms());
  CHECK(impute_all(m, 0.0, 0.05, ImputeScope::AllCells).size() == 9);
}

TEST_CASE("row distance cache matches direct evaluation", "[distnn][property]") {
  Rng rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = testing::random_matrix(rng, 6, 5, 1 + rng.index(4), 0.7);
    const std::size_t i = rng.index(6);
    const RowDistanceCache cache(m, i);
    for (std::size_t u = 0; u < 6; ++u) {
      if (u == i) continue;
      for (std::size_t j = 0; j < 5; ++j) {
        const std::size_t ex[] = {j};
        const double a = cache.distance(u, ex);
        const double b = row_distance(m, i, u, j);
        REQUIRE(((a == b) || (std::isinf(a) && std::isinf(b))));
      }
    }
  }
}

TEST_CASE("property: neighbor sets nest as eta grows", "[distnn][property]") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = testing::random_matrix(rng, 8, 5, 3, 0.7);
    const std::size_t i = rng.index(8);
    const std::size_t j = rng.index(5);
    const double e1 = rng.uniform(0.0, 3.0);
    const double e2 = e1 + rng.uniform(0.0, 3.0);
    const auto small = rows_of(find_neighbors(m, i, j, e1));
    const auto large = rows_of(find_neighbors(m, i, j, e2));
    REQUIRE(std::includes(large.begin(), large.end(), small.begin(), small.end()));
  }
}

TEST_CASE("property: column j never enters the distances", "[distnn][property]") {
  Rng rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    auto m = testing::random_matrix(rng, 6, 5, 3, 0.8);
    const std::size_t i = rng.index(6);
    const std::size_t j = rng.index(5);
    std::vector<double> before;
    for (std::size_t u = 0; u < 6; ++u) {
      if (u != i) before.push_back(row_distance(m, i, u, j));
    }
    for (std::size_t u = 0; u < 6; ++u) {
      if (m.observed(u, j)) m.set(u, j, testing::random_dist(rng, 1 + rng.index(5), -100, 100));
    }
    std::size_t k = 0;
    for (std::size_t u = 0; u < 6; ++u) {
      if (u == i) continue;
      const double after = row_distance(m, i, u, j);
      REQUIRE(((after == before[k]) || (std::isinf(after) && std::isinf(before[k]))));
      ++k;
    }
  }
}

TEST_CASE("property: shifting column j shifts the estimate", "[distnn][property]") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    // Four neighbors keep the barycenter average exact.
    DistributionalMatrix m(5, 4);
    const std::size_t n = 1 + rng.index(5);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        auto xs = testing::grid_vector(rng, n, -32, 32);
        for (auto& x : xs) x /= 4.0;
        m.set(i, j, dist(xs));
      }
    }
    const std::size_t j = rng.index(4);
    const double c = static_cast<double>(static_cast<int>(rng.index(17)) - 8) / 2.0;
    auto moved = m;
    for (std::size_t u = 0; u < 5; ++u) moved.set(u, j, testing::shifted(m.at(u, j), c));
    const auto a = try_impute(m, 0, j, 1e9);
    const auto b = try_impute(moved, 0, j, 1e9);
    REQUIRE(a);
    REQUIRE(b);
    const auto da = a->atoms();
    const auto db = b->atoms();
    for (std::size_t k = 0; k < da.size(); ++k) REQUIRE(db[k] == da[k] + c);
  }
}

TEST_CASE("property: the estimate is no worse than any neighbor entry", "[distnn][property]") {
  Rng rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = testing::random_matrix(rng, 7, 4, 1 + rng.index(6));
    const auto r = impute(m, 0, 1, 1e9);
    auto cost = [&](const EmpiricalDistribution& c) {
      double s = 0.0;
      for (const auto& n : r.neighbors.members) s += w2_sq_general(c, m.at(n.row, 1));
      return s;
    };
    const double best = cost(r.atoms());
    for (const auto& n : r.neighbors.members) REQUIRE(best <= cost(m.at(n.row, 1)) + 1e-12);
  }
}
