#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "distnn/empdist.hpp"
#include "distnn/error.hpp"
#include "distnn/rng.hpp"
#include "support.hpp"

using namespace distnn;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using testing::dist;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

std::vector<double> as_vector(const EmpiricalDistribution& d) { return {d.samples().begin(), d.samples().end()}; }

}  // namespace

TEST_CASE("construction sorts and keeps duplicates", "[empdist]") {
  CHECK(as_vector(dist({3, 1, 2})) == std::vector<double>{1, 2, 3});
  CHECK(as_vector(dist({5})) == std::vector<double>{5});
  CHECK(as_vector(dist({1, 1, 1})) == std::vector<double>{1, 1, 1});
  CHECK(dist({5}).size() == 1);
}

TEST_CASE("construction rejects empty and non-finite input", "[empdist][errors]") {
  CHECK(code_of([] { (void)dist({}); }) == ErrorCode::EmptyInput);
  CHECK(code_of([] { (void)dist({1.0, std::numeric_limits<double>::quiet_NaN()}); }) == ErrorCode::NonFiniteSample);
  CHECK(code_of([] { (void)dist({std::numeric_limits<double>::infinity()}); }) == ErrorCode::NonFiniteSample);
  CHECK(code_of([] { (void)EmpiricalDistribution::from_sorted({2.0, 1.0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("step quantile", "[empdist]") {
  CHECK(dist({1, 2, 3, 4}).quantile(0.5) == 2.0);
  for (double t : {0.01, 0.5, 0.99}) CHECK(dist({7}).quantile(t) == 7.0);
  CHECK(dist({0, 10}).quantile(0.75) == 10.0);
  CHECK(dist({0, 10}).quantile(0.5) == 0.0);
  CHECK(dist({0, 10}).quantile(0.5000001) == 10.0);
  CHECK(code_of([] { (void)dist({1}).quantile(0.0); }) == ErrorCode::OutOfDomain);
  CHECK(code_of([] { (void)dist({1}).quantile(1.0); }) == ErrorCode::OutOfDomain);
}

TEST_CASE("equal-size W2 examples", "[empdist]") {
  CHECK(w2_equal_n(dist({1, 2, 3}), dist({1, 2, 3})) == 0.0);
  CHECK(w2_equal_n(dist({0, 0}), dist({2, 2})) == 2.0);
  CHECK_THAT(w2_equal_n(dist({0, 1}), dist({1, 3})), WithinRel(std::sqrt(2.5), 1e-15));
  CHECK(code_of([] { (void)w2_equal_n(dist({0}), dist({0, 1})); }) == ErrorCode::SizeMismatch);
}

TEST_CASE("general W2 examples", "[empdist]") {
  CHECK(w2_general(dist({0, 1}), dist({0, 1})) == 0.0);
  CHECK(w2_general(dist({0, 1}), dist({1, 3})) == w2_equal_n(dist({0, 1}), dist({1, 3})));
  CHECK_THAT(w2_general(dist({0}), dist({0, 2})), WithinRel(std::sqrt(2.0), 1e-15));
  // [0,0,3] vs [1,2]: gaps 1,1,4,1 on pieces of width 1/3,1/6,1/6,1/3
  CHECK_THAT(w2_sq_general(dist({0, 0, 3}), dist({1, 2})), WithinRel(1.5, 1e-15));
}

TEST_CASE("ordering of shifted uniform proxies", "[empdist]") {
  CHECK(w2_general(dist({0, 1}), dist({2, 3})) < w2_general(dist({0, 1}), dist({4, 5})));
}

TEST_CASE("barycenter examples", "[empdist]") {
  std::vector<EmpiricalDistribution> two{dist({1, 3}), dist({5, 7})};
  CHECK(as_vector(barycenter(two)) == std::vector<double>{3, 5});
  std::vector<EmpiricalDistribution> one{dist({4, -1, 2})};
  CHECK(barycenter(one) == one[0]);
  std::vector<EmpiricalDistribution> three{dist({0, 0}), dist({0, 2}), dist({0, 4})};
  CHECK(as_vector(barycenter(three)) == std::vector<double>{0, 2});
  CHECK(code_of([] { return barycenter(std::span<const EmpiricalDistribution>{}); }) == ErrorCode::EmptyCollection);
  std::vector<EmpiricalDistribution> ragged{dist({0}), dist({0, 1})};
  CHECK(code_of([&] { return barycenter(ragged); }) == ErrorCode::SizeMismatch);
}

TEST_CASE("general barycenter examples", "[empdist]") {
  const std::vector<double> lv{0.25, 0.75};
  std::vector<EmpiricalDistribution> single{dist({0, 2})};
  CHECK(general_barycenter(single, lv).values == std::vector<double>{0, 2});
  const std::vector<double> half{0.5};
  std::vector<EmpiricalDistribution> consts{dist({0}), dist({4})};
  CHECK(general_barycenter(consts, half).values == std::vector<double>{2});
  std::vector<EmpiricalDistribution> same{dist({0, 2}), dist({0, 2})};
  const auto levels = uniform_levels(9);
  const auto g = general_barycenter(same, levels);
  for (std::size_t k = 0; k < levels.size(); ++k) CHECK(g.values[k] == dist({0, 2}).quantile(levels[k]));
  const std::vector<double> bad{0.5, 0.5};
  CHECK(code_of([&] { return general_barycenter(same, bad); }) == ErrorCode::OutOfDomain);
}

TEST_CASE("level helpers", "[empdist]") {
  const auto u = uniform_levels(99);
  REQUIRE(u.size() == 99);
  CHECK_THAT(u.front(), WithinAbs(0.01, 1e-15));
  CHECK_THAT(u.back(), WithinAbs(0.99, 1e-15));
  CHECK(midpoint_levels(2) == std::vector<double>{0.25, 0.75});
}

TEST_CASE("summaries", "[empdist]") {
  const auto s = summaries(dist({1, 1, 1}), 0.05);
  CHECK(s.mean == 1.0);
  CHECK(s.median == 1.0);
  CHECK(s.std == 0.0);
  CHECK(s.var_at_risk == -1.0);
  const auto t = summaries(dist({-2, 2}), 0.05);
  CHECK(t.mean == 0.0);
  CHECK(t.std == 2.0);
  std::vector<double> hundred(100);
  for (int k = 0; k < 100; ++k) hundred[static_cast<std::size_t>(k)] = k + 1;
  CHECK(summaries(dist(hundred), 0.05).var_at_risk == -6.0);
  CHECK(code_of([] { (void)summaries(dist({1}), 0.0); }) == ErrorCode::OutOfDomain);
}

TEST_CASE("property: metric axioms on random triples", "[empdist][property]") {
  Rng rng(101);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto a = testing::random_dist(rng, 1 + rng.index(8));
    const auto b = testing::random_dist(rng, 1 + rng.index(8));
    const auto c = testing::random_dist(rng, 1 + rng.index(8));
    const double ab = w2_general(a, b);
    const double ba = w2_general(b, a);
    REQUIRE(ab >= 0.0);
    REQUIRE(ab == ba);
    REQUIRE(w2_general(a, a) == 0.0);
    REQUIRE(ab <= w2_general(a, c) + w2_general(c, b) + 1e-12);
    if (!(a == b)) REQUIRE(ab > 0.0);
  }
}

TEST_CASE("property: equal-size path agrees with the general integral", "[empdist][property]") {
  Rng rng(202);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng.index(40);
    const auto a = testing::random_dist(rng, n);
    const auto b = testing::random_dist(rng, n);
    const double fast = w2_sq_equal_n(a, b);
    REQUIRE_THAT(w2_sq_general(a, b), WithinRel(fast, 1e-12) || WithinAbs(fast, 1e-300));
  }
}

TEST_CASE("property: general W2 of a replicated sample is unchanged", "[empdist][property]") {
  // Repeating every atom r times leaves the measure unchanged.
  Rng rng(303);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = testing::random_dist(rng, 1 + rng.index(6));
    const auto b = testing::random_dist(rng, 1 + rng.index(6));
    std::vector<double> rep;
    for (double x : a.samples()) rep.insert(rep.end(), 3, x);
    REQUIRE_THAT(w2_sq_general(dist(rep), b), WithinRel(w2_sq_general(a, b), 1e-12));
  }
}

TEST_CASE("property: shift equivariance", "[empdist][property]") {
  Rng rng(404);
  for (int trial = 0; trial < 1000; ++trial) {
    // Dyadic samples and shifts keep every difference exact.
    auto xa = testing::grid_vector(rng, 1 + rng.index(7), -64, 64);
    auto xb = testing::grid_vector(rng, 1 + rng.index(7), -64, 64);
    for (auto& x : xa) x /= 8.0;
    for (auto& x : xb) x /= 8.0;
    const double c = static_cast<double>(static_cast<int>(rng.index(33)) - 16) / 4.0;
    const auto a = dist(xa);
    const auto b = dist(xb);
    REQUIRE(w2_sq_general(testing::shifted(a, c), testing::shifted(b, c)) == w2_sq_general(a, b));
    REQUIRE(w2_general(a, testing::shifted(a, c)) == std::fabs(c));
  }
}

TEST_CASE("property: barycenter beats every grid perturbation of its atoms", "[empdist][property]") {
  Rng rng(505);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + rng.index(4);
    const std::size_t n = 1 + rng.index(5);
    std::vector<EmpiricalDistribution> ds;
    for (std::size_t q = 0; q < k; ++q) ds.push_back(dist(testing::grid_vector(rng, n, -4, 4)));
    const auto bary = barycenter(ds);
    auto cost = [&](const EmpiricalDistribution& c) {
      double s = 0.0;
      for (const auto& d : ds) s += w2_sq_general(c, d);
      return s;
    };
    const double best = cost(bary);
    // Perturb each atom by a multiple of 1/k so candidates stay on the grid
    // the barycenter lives on.
    const double step = 1.0 / static_cast<double>(k);
    for (std::size_t atom = 0; atom < n; ++atom) {
      for (double delta : {-2 * step, -step, step, 2 * step}) {
        std::vector<double> xs(bary.samples().begin(), bary.samples().end());
        xs[atom] += delta;
        REQUIRE(best <= cost(dist(xs)) + 1e-12);
      }
    }
  }
}

TEST_CASE("property: general barycenter is the mean of member quantiles", "[empdist][property]") {
  Rng rng(606);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<EmpiricalDistribution> ds;
    const std::size_t k = 1 + rng.index(5);
    for (std::size_t q = 0; q < k; ++q) ds.push_back(testing::random_dist(rng, 1 + rng.index(9)));
    const auto levels = uniform_levels(1 + rng.index(20));
    const auto g = general_barycenter(ds, levels);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      double expect = 0.0;
      for (const auto& d : ds) {
        const auto n = static_cast<double>(d.size());
        const auto idx = static_cast<std::size_t>(std::clamp(std::ceil(levels[l] * n), 1.0, n)) - 1;
        expect += d[idx];
      }
      REQUIRE_THAT(g.values[l], WithinAbs(expect / static_cast<double>(k), 1e-12));
    }
  }
}
