#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "distnn/empdist.hpp"
#include "distnn/error.hpp"
#include "distnn/oracle.hpp"
#include "distnn/rng.hpp"
#include "support.hpp"

using namespace distnn;
using namespace distnn::oracle;
using Catch::Matchers::WithinRel;
using testing::dist;

TEST_CASE("closed-form uniform W2", "[oracle]") {
  CHECK(uniform_w2_sq({0, 1, 0, 1}) == 0.0);
  CHECK(uniform_w2_sq({0, 1, 2, 3}) == 4.0);
  CHECK_THAT(uniform_w2_sq({0, 2, 0, 1}), WithinRel(1.0 / 3.0, 1e-15));
  CHECK(uniform_w2_sq({0, 1, 4, 5}) == 16.0);
  CHECK(std::sqrt(uniform_w2_sq({0, 1, 2, 3})) < std::sqrt(uniform_w2_sq({0, 1, 4, 5})));
}

TEST_CASE("expected empirical error of a uniform sample", "[oracle]") {
  CHECK_THAT(uniform_empirical_expected_w2_sq({0, 1}, 1), WithinRel(1.0 / 6.0, 1e-15));
  CHECK(uniform_empirical_expected_w2_sq({0, 6}, 6) == 1.0);
  CHECK_THAT(uniform_empirical_expected_w2_sq({0, 3}, 5), WithinRel(9.0 * uniform_empirical_expected_w2_sq({0, 1}, 5), 1e-15));
}

TEST_CASE("expected W2 between two uniform samples", "[oracle]") {
  CHECK_THAT(uniform_pair_empirical_expected_w2_sq({0, 1, 0, 1}, 1), WithinRel(1.0 / 6.0, 1e-15));
  CHECK_THAT(uniform_pair_empirical_expected_w2_sq({0, 1, 2, 3}, 1000000), WithinRel(4.0, 1e-6));
  CHECK_THAT(uniform_pair_empirical_expected_w2_sq({0, 1, 0, 2}, 2), WithinRel(1.0 / 3.0 + 2.0 / 9.0, 1e-15));
}

TEST_CASE("expected barycenter error", "[oracle]") {
  const std::vector<UniformInterval> one{{0, 1}};
  CHECK_THAT(uniform_barycenter_expected_w2_sq(one, 1), WithinRel(1.0 / 6.0, 1e-15));
  CHECK_THAT(uniform_barycenter_expected_w2_sq(one, 1), WithinRel(uniform_empirical_expected_w2_sq({0, 1}, 1), 1e-15));
  const std::vector<UniformInterval> ten(10, UniformInterval{0, 1});
  CHECK_THAT(uniform_barycenter_expected_w2_sq(ten, 10), WithinRel(1.0 / 330.0, 1e-14));
  const std::vector<UniformInterval> flat{{2, 2}, {3, 3}};
  CHECK(uniform_barycenter_expected_w2_sq(flat, 4) == 0.0);
}

TEST_CASE("brute-force transport", "[oracle]") {
  CHECK(brute_force_w2_sq(dist({1, 2}), dist({1, 2})) == 0.0);
  CHECK(brute_force_w2_sq(dist({0, 1}), dist({1, 3})) == 2.5);
  CHECK_THROWS_AS(brute_force_w2_sq(dist({0}), dist({0, 1})), Error);
  const std::vector<double> seven(7, 0.0);
  try {
    (void)brute_force_w2_sq(dist(seven), dist(seven));
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooLarge);
  }
}

TEST_CASE("property: sorted matching is optimal", "[oracle][property]") {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.index(6);
    const auto a = testing::random_dist(rng, n);
    const auto b = testing::random_dist(rng, n);
    const double exact = brute_force_w2_sq(a, b);
    REQUIRE_THAT(w2_sq_equal_n(a, b), WithinRel(exact, 1e-12));
  }
}
