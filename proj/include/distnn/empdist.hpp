#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace distnn {

/// Discrete measure with mass 1/n on each of n finite samples. Samples are
/// kept sorted, so index k holds the (k+1)-th order statistic.
///
/// The quantile function is the right-continuous step function
/// F^{-1}(t) = X^(k) with k = ceil(t n), t in (0, 1).
class EmpiricalDistribution {
 public:
  /// Sorted copy of `raw`. Throws EmptyInput or NonFiniteSample.
  static EmpiricalDistribution from_samples(std::span<const double> raw);
  /// Adopts an already-sorted vector; throws InvalidArgument if unsorted.
  static EmpiricalDistribution from_sorted(std::vector<double> sorted);

  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
  [[nodiscard]] double operator[](std::size_t k) const noexcept { return samples_[k]; }

  /// Step quantile. Throws OutOfDomain unless 0 < t < 1.
  [[nodiscard]] double quantile(double t) const;

  friend bool operator==(const EmpiricalDistribution&, const EmpiricalDistribution&) = default;

 private:
  explicit EmpiricalDistribution(std::vector<double> sorted) : samples_(std::move(sorted)) {}
  std::vector<double> samples_;
};

/// Quantile function tabulated on strictly increasing levels in (0, 1).
struct QuantileGrid {
  std::vector<double> levels;
  std::vector<double> values;
};

/// Strictly increasing levels inside (0, 1); throws OutOfDomain otherwise.
void validate_levels(std::span<const double> levels);

/// `count` evenly spaced levels {1/(count+1), ..., count/(count+1)}. With
/// count = 99 this is {0.01, ..., 0.99}.
std::vector<double> uniform_levels(std::size_t count);

/// Midpoint levels (k - 1/2)/count, k = 1..count.
std::vector<double> midpoint_levels(std::size_t count);

/// Squared order-statistic W2 for equal sample counts. Throws SizeMismatch.
double w2_sq_equal_n(const EmpiricalDistribution& a, const EmpiricalDistribution& b);
double w2_equal_n(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// Exact squared W2 for arbitrary sizes: integrates the piecewise-constant
/// quantile difference over the merged breakpoints {k/n_a} U {l/n_b}.
double w2_sq_general(const EmpiricalDistribution& a, const EmpiricalDistribution& b);
double w2_general(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// Equal-size barycenter: k-th order statistic is the mean of the inputs'
/// k-th order statistics. Throws EmptyCollection or SizeMismatch.
EmpiricalDistribution barycenter(std::span<const EmpiricalDistribution> ds);
EmpiricalDistribution barycenter(std::span<const EmpiricalDistribution* const> ds);

/// Barycenter quantile on `levels`: mean of member quantiles. Sizes may differ.
QuantileGrid general_barycenter(std::span<const EmpiricalDistribution> ds,
                                std::span<const double> levels);
QuantileGrid general_barycenter(std::span<const EmpiricalDistribution* const> ds,
                                std::span<const double> levels);

struct Summaries {
  double mean = 0.0;
  double median = 0.0;
  /// Population standard deviation (divides by n); 0 for a single sample.
  double std = 0.0;
  /// VaR(alpha) = F^{-1}_{-X}(1 - alpha).
  double var_at_risk = 0.0;
};

/// Throws OutOfDomain unless 0 < var_alpha < 1.
Summaries summaries(const EmpiricalDistribution& d, double var_alpha);

}  // namespace distnn
