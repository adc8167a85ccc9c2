#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "distnn/estimator.hpp"
#include "distnn/matrix.hpp"
#include "distnn/synthetic.hpp"

namespace distnn {

/// Quantile and density of one neighbor law.
struct LawEvaluator {
  std::function<double(double)> quantile;
  std::function<double(double)> density;
};

/// sigma^2(t) = mean over neighbors of (t - t^2) / f_u(F_u^{-1}(t))^2.
/// Throws DegenerateDensity if a density is not strictly positive and finite,
/// EmptyCollection without neighbors, OutOfDomain unless 0 < t < 1.
double sigma_sq(std::span<const LawEvaluator> neighbors, double t);

/// Gaussian-kernel density estimate with Silverman's rule-of-thumb bandwidth
/// 0.9 min(sd, IQR/1.34) n^{-1/5}, sd being the sample standard deviation.
class KernelDensity {
 public:
  explicit KernelDensity(EmpiricalDistribution samples);

  [[nodiscard]] double bandwidth() const noexcept { return bandwidth_; }
  [[nodiscard]] double operator()(double x) const;

 private:
  EmpiricalDistribution samples_;
  double bandwidth_;
};

enum class SigmaMode { Oracle, Kde };

/// sigma^2 evaluator bound to one neighborhood.
class SigmaFunction {
 public:
  SigmaFunction(SigmaMode mode, std::vector<LawEvaluator> neighbors);

  /// True neighbor laws (simulation only).
  static SigmaFunction oracle(const TrueDistributions& truth, const NeighborSet& neighbors);
  /// Each neighbor's column-j samples: empirical quantile and a KDE density.
  static SigmaFunction kde(const DistributionalMatrix& m, const NeighborSet& neighbors);

  [[nodiscard]] SigmaMode mode() const noexcept { return mode_; }
  [[nodiscard]] std::size_t size() const noexcept { return neighbors_.size(); }
  [[nodiscard]] double operator()(double t) const { return sigma_sq(neighbors_, t); }

 private:
  SigmaMode mode_;
  std::vector<LawEvaluator> neighbors_;
};

enum class BandMethod { AsymptoticOracle, AsymptoticKde, Bootstrap };

std::string_view to_string(BandMethod method) noexcept;

struct ConfidenceBand {
  std::vector<double> levels;
  std::vector<double> estimate;
  std::vector<double> lower;
  std::vector<double> upper;
  double alpha = 0.05;
  /// alpha / |levels| when simultaneous, otherwise alpha.
  double per_level_alpha = 0.05;
  BandMethod method = BandMethod::Bootstrap;
  bool simultaneous = false;
};

/// Bonferroni split of alpha across `count` levels. alpha must lie in (0, 1].
double per_level_alpha(double alpha, std::size_t count, bool simultaneous);

/// Symmetric normal band: estimate(t) +- z_{1-a/2} sigma(t) / sqrt(n_j |N|).
/// Throws NoNeighbors for an empty neighborhood.
ConfidenceBand asymptotic_band(const ImputationResult& result, const SigmaFunction& sigma,
                               std::size_t n_j, double alpha, std::span<const double> levels,
                               bool simultaneous);

struct BootstrapConfig {
  std::size_t reps_samples = 10;
  std::size_t reps_neighbors = 10;
  std::uint64_t seed = 0;
};

/// Percentile bootstrap over both the neighbor multiset and each chosen
/// neighbor's samples; reps_neighbors * reps_samples replicates.
ConfidenceBand bootstrap_band(const DistributionalMatrix& m, std::size_t i, std::size_t j,
                              double eta, double alpha, std::span<const double> levels,
                              const BootstrapConfig& cfg, bool simultaneous,
                              const NeighborOptions& opts = {});

/// Same, for an already-selected neighborhood.
ConfidenceBand bootstrap_band(const DistributionalMatrix& m, const ImputationResult& result,
                              double alpha, std::span<const double> levels,
                              const BootstrapConfig& cfg, bool simultaneous);

}  // namespace distnn
