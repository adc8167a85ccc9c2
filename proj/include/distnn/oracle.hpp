#pragma once

#include <cstddef>
#include <span>

#include "distnn/empdist.hpp"

// Closed-form results for uniform laws and an exhaustive discrete OT
// reference. Nothing here calls into the estimator code paths it checks.
namespace distnn::oracle {

/// Unif(a, b) and Unif(c, d); requires a < b and c < d.
struct UniformPair {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;
  double d = 1.0;
};

struct UniformInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// W2^2(Unif(a,b), Unif(c,d)) = ((a-c)^2 + (b-d)^2 + (a-c)(b-d)) / 3.
double uniform_w2_sq(const UniformPair& p);

/// E W2^2(mu_n, mu) = (b-a)^2 / (6n) for n i.i.d. draws from Unif(a, b).
double uniform_empirical_expected_w2_sq(UniformInterval interval, std::size_t n);

/// E W2^2(mu_n, nu_n) = W2^2(mu, nu) + (b-a)(d-c) / (3(n+1)) for independent
/// size-n samples.
double uniform_pair_empirical_expected_w2_sq(const UniformPair& p, std::size_t n);

/// E W2^2(empirical barycenter, barycenter) for m = intervals.size() uniform
/// laws with n draws each:
///   (bbar-abar)^2 / (6m(n+1)) + (bbar-abar)^2 / (6n(n+1)).
/// Exact when every interval has the same width.
double uniform_barycenter_expected_w2_sq(std::span<const UniformInterval> intervals, std::size_t n);

/// min over permutations pi of (1/n) sum (x_i - y_pi(i))^2 by enumeration.
/// Throws SizeMismatch, or TooLarge for n > 6.
double brute_force_w2_sq(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

}  // namespace distnn::oracle
