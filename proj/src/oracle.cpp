#include "distnn/oracle.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "distnn/error.hpp"

namespace distnn::oracle {

namespace {

void require_valid(const UniformPair& p) {
  if (!(p.a < p.b && p.c < p.d)) {
    throw Error(ErrorCode::InvalidArgument, "uniform intervals need a < b and c < d");
  }
}

void require_positive(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be positive");
}

}  // namespace

double uniform_w2_sq(const UniformPair& p) {
  require_valid(p);
  const double lo = p.a - p.c;
  const double hi = p.b - p.d;
  return (lo * lo + hi * hi + lo * hi) / 3.0;
}

double uniform_empirical_expected_w2_sq(UniformInterval interval, std::size_t n) {
  require_positive(n);
  const double w = interval.hi - interval.lo;
  return w * w / (6.0 * static_cast<double>(n));
}

double uniform_pair_empirical_expected_w2_sq(const UniformPair& p, std::size_t n) {
  require_positive(n);
  return uniform_w2_sq(p) + (p.b - p.a) * (p.d - p.c) / (3.0 * (static_cast<double>(n) + 1.0));
}

double uniform_barycenter_expected_w2_sq(std::span<const UniformInterval> intervals, std::size_t n) {
  require_positive(n);
  if (intervals.empty()) throw Error(ErrorCode::EmptyCollection, "no intervals");
  double a_bar = 0.0;
  double b_bar = 0.0;
  for (const auto& iv : intervals) {
    a_bar += iv.lo;
    b_bar += iv.hi;
  }
  const auto m = static_cast<double>(intervals.size());
  a_bar /= m;
  b_bar /= m;
  const double w2 = (b_bar - a_bar) * (b_bar - a_bar);
  const auto nd = static_cast<double>(n);
  return w2 / (6.0 * m * (nd + 1.0)) + w2 / (6.0 * nd * (nd + 1.0));
}

double brute_force_w2_sq(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::SizeMismatch, "brute force needs equal sizes");
  if (a.size() > 6) {
    throw Error(ErrorCode::TooLarge,
                "permutation enumeration capped at n = 6, got " + std::to_string(a.size()));
  }
  const std::size_t n = a.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = a[k] - b[perm[k]];
      cost += d * d;
    }
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

}  // namespace distnn::oracle
