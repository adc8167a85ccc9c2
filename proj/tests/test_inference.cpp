#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "distnn/error.hpp"
#include "distnn/estimator.hpp"
#include "distnn/inference.hpp"
#include "distnn/synthetic.hpp"
#include "support.hpp"

using namespace distnn;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using testing::dist;

namespace {

LawEvaluator uniform_law(double a, double b) {
  const LocationScaleLaw law{BaseLaw(BaseFamily::Uniform), a, b - a};
  return {[law](double t) { return law.quantile(t); }, [law](double x) { return law.density(x); }};
}

// Three rows, column 0 identical so every row is a neighbor at any eta.
DistributionalMatrix small_panel(std::size_t n) {
  Rng rng(71);
  DistributionalMatrix m(4, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    m.set(i, 0, dist({0.0}));
    m.set(i, 1, testing::random_dist(rng, n, 0.0, 1.0));
  }
  return m;
}

double half_width(const ConfidenceBand& b, std::size_t k) { return b.upper[k] - b.estimate[k]; }

}  // namespace

TEST_CASE("sigma squared for uniform neighbors", "[inference]") {
  const std::vector<LawEvaluator> one{uniform_law(2.0, 5.0)};
  for (double t : {0.1, 0.5, 0.8}) CHECK_THAT(sigma_sq(one, t), WithinRel((t - t * t) * 9.0, 1e-12));
  const std::vector<LawEvaluator> two{uniform_law(0, 1), uniform_law(0, 1)};
  CHECK_THAT(sigma_sq(two, 0.5), WithinRel(0.25, 1e-15));
  const std::vector<LawEvaluator> mixed{uniform_law(0, 1), uniform_law(3, 7)};
  CHECK_THAT(sigma_sq(mixed, 0.5) / 0.25, WithinRel(sigma_sq(mixed, 0.25) / 0.1875, 1e-12));
}

TEST_CASE("sigma squared errors", "[inference][errors]") {
  const std::vector<LawEvaluator> one{uniform_law(0, 1)};
  CHECK_THROWS_AS(sigma_sq(one, 0.0), Error);
  CHECK_THROWS_AS(sigma_sq(std::span<const LawEvaluator>{}, 0.5), Error);
  const std::vector<LawEvaluator> flat{{[](double) { return 0.0; }, [](double) { return 0.0; }}};
  try {
    (void)sigma_sq(flat, 0.5);
    FAIL("expected DegenerateDensity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateDensity);
  }
}

TEST_CASE("Bonferroni split", "[inference]") {
  CHECK_THAT(per_level_alpha(0.05, 20, true), WithinRel(0.0025, 1e-15));
  CHECK(per_level_alpha(0.05, 99, true) == 0.05 / 99.0);
  CHECK(per_level_alpha(0.05, 99, false) == 0.05);
  CHECK_THROWS_AS(per_level_alpha(0.0, 3, false), Error);
  CHECK_THROWS_AS(per_level_alpha(1.5, 3, false), Error);
}

TEST_CASE("asymptotic band algebra", "[inference]") {
  const auto m = small_panel(8);
  const auto r = impute(m, 0, 1, 1.0);
  REQUIRE(r.neighbors.size() == 3);
  const std::vector<LawEvaluator> laws(3, uniform_law(0, 1));
  const SigmaFunction sigma(SigmaMode::Oracle, laws);
  const auto levels = uniform_levels(9);

  const auto base = asymptotic_band(r, sigma, 100, 0.05, levels, false);
  const auto doubled = asymptotic_band(r, sigma, 200, 0.05, levels, false);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    CHECK(base.estimate[k] == r.quantile(levels[k]));
    CHECK_THAT(half_width(base, k) / half_width(doubled, k), WithinRel(std::sqrt(2.0), 1e-12));
    const double expect = 1.959963984540054 * std::sqrt(levels[k] - levels[k] * levels[k]) / std::sqrt(300.0);
    CHECK_THAT(half_width(base, k), WithinRel(expect, 1e-9));
  }

  const auto collapsed = asymptotic_band(r, sigma, 100, 1.0, levels, false);
  CHECK(collapsed.lower == collapsed.estimate);
  CHECK(collapsed.upper == collapsed.estimate);

  const auto simul = asymptotic_band(r, sigma, 100, 0.05, levels, true);
  CHECK_THAT(simul.per_level_alpha, WithinRel(0.05 / 9.0, 1e-15));
  const auto wide = asymptotic_band(r, sigma, 100, 0.01, levels, false);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    CHECK(simul.lower[k] < base.lower[k]);
    CHECK(wide.lower[k] <= base.lower[k]);
    CHECK(wide.upper[k] >= base.upper[k]);
  }
  CHECK(base.method == BandMethod::AsymptoticOracle);
}

TEST_CASE("oracle sigma from the true laws", "[inference]") {
  DgpSpec spec;
  spec.n_per_entry = {5};
  const auto p = generate(spec, 4, 3);
  const auto set = find_neighbors(p.matrix, 0, 2, 1e9);
  const auto sigma = SigmaFunction::oracle(p.truth, set);
  double expect = 0.0;
  for (const auto& n : set.members) {
    const double s = p.truth.law(n.row, 2).scale;
    expect += 0.25 * s * s;
  }
  CHECK_THAT(sigma(0.5), WithinRel(expect / static_cast<double>(set.size()), 1e-12));
}

TEST_CASE("kernel density", "[inference]") {
  const auto d = dist({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const KernelDensity kde(d);
  const double sd = std::sqrt(82.5 / 9.0);
  const double iqr = d.quantile(0.75) - d.quantile(0.25);
  CHECK_THAT(kde.bandwidth(), WithinRel(0.9 * std::min(sd, iqr / 1.34) * std::pow(10.0, -0.2), 1e-12));
  CHECK(kde(4.5) > kde(20.0));
  CHECK(kde(4.5) > 0.0);
  const auto flat = SigmaFunction::kde(small_panel(30), find_neighbors(small_panel(30), 0, 1, 1.0));
  CHECK(flat.mode() == SigmaMode::Kde);
  CHECK(std::isfinite(flat(0.5)));
}

TEST_CASE("bootstrap bands", "[inference]") {
  DistributionalMatrix constant(3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    constant.set(i, 0, dist({1}));
    constant.set(i, 1, dist({4, 4, 4}));
  }
  const auto levels = uniform_levels(5);
  const auto zero = bootstrap_band(constant, 0, 1, 1.0, 0.05, levels, {}, false);
  CHECK(zero.lower == zero.upper);

  const auto m = small_panel(20);
  const BootstrapConfig single{1, 1, 3};
  const auto one = bootstrap_band(m, 0, 1, 1.0, 0.05, levels, single, false);
  CHECK(one.lower == one.upper);

  const BootstrapConfig defaults{};
  CHECK(defaults.reps_samples * defaults.reps_neighbors == 100);
  const auto a = bootstrap_band(m, 0, 1, 1.0, 0.1, levels, {10, 10, 5}, false);
  const auto b = bootstrap_band(m, 0, 1, 1.0, 0.1, levels, {10, 10, 5}, false);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
  for (std::size_t k = 0; k < levels.size(); ++k) CHECK(a.lower[k] <= a.upper[k]);
  const auto narrow = bootstrap_band(m, 0, 1, 1.0, 0.5, levels, {10, 10, 5}, false);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    CHECK(a.lower[k] <= narrow.lower[k]);
    CHECK(a.upper[k] >= narrow.upper[k]);
  }
  CHECK_THROWS_AS(bootstrap_band(m, 0, 1, 1.0, 0.1, levels, {0, 10, 5}, false), Error);
}
