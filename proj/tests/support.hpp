#pragma once

// Hand-rolled generators for the property tests.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "distnn/empdist.hpp"
#include "distnn/matrix.hpp"
#include "distnn/rng.hpp"

namespace testing {

inline std::vector<double> uniform_vector(distnn::Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

/// Integers in [lo, hi] as doubles; exact arithmetic for small grids.
inline std::vector<double> grid_vector(distnn::Rng& rng, std::size_t n, int lo, int hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = static_cast<double>(lo + static_cast<int>(rng.index(static_cast<std::size_t>(hi - lo + 1))));
  return v;
}

inline distnn::EmpiricalDistribution random_dist(distnn::Rng& rng, std::size_t n, double lo = -10.0,
                                                 double hi = 10.0) {
  return distnn::EmpiricalDistribution::from_samples(uniform_vector(rng, n, lo, hi));
}

inline distnn::EmpiricalDistribution dist(std::vector<double> xs) {
  return distnn::EmpiricalDistribution::from_samples(xs);
}

inline distnn::EmpiricalDistribution shifted(const distnn::EmpiricalDistribution& d, double c) {
  std::vector<double> xs(d.samples().begin(), d.samples().end());
  for (auto& x : xs) x += c;
  return distnn::EmpiricalDistribution::from_samples(xs);
}

/// rows x cols matrix with each cell observed with probability p and
/// `n` uniform samples whose centre depends on the row.
inline distnn::DistributionalMatrix random_matrix(distnn::Rng& rng, std::size_t rows, std::size_t cols,
                                                  std::size_t n, double p = 1.0) {
  distnn::DistributionalMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const double centre = rng.uniform(-3.0, 3.0);
    for (std::size_t j = 0; j < cols; ++j) {
      if (!rng.bernoulli(p)) continue;
      m.set(i, j, random_dist(rng, n, centre - 1.0, centre + 1.0));
    }
  }
  return m;
}

}  // namespace testing
