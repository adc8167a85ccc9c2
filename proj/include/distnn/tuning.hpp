#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "distnn/estimator.hpp"
#include "distnn/matrix.hpp"

namespace distnn {

enum class SearchStrategy { LogGrid, RandomLogUniform };

struct TuneConfig {
  std::size_t budget = 50;
  SearchStrategy search = SearchStrategy::LogGrid;
  /// When unset, the range is the [1%, 99%] quantile span of the finite row
  /// distances from the target row (column j excluded).
  std::optional<double> eta_min;
  std::optional<double> eta_max;
  std::uint64_t seed = 0;
  NeighborOptions neighbor_options;
};

struct TuneTrial {
  double eta = 0.0;
  /// Mean validation W2^2; NoNeighbors cells count as the worst finite loss
  /// seen at this eta. Infinite when no cell could be imputed.
  double loss = 0.0;
  std::size_t n_valid = 0;
  std::size_t n_no_neighbors = 0;
};

struct TuneReport {
  double best_eta = 0.0;
  double best_loss = 0.0;
  double eta_min = 0.0;
  double eta_max = 0.0;
  std::vector<TuneTrial> trials;
};

/// Candidate thresholds for a search: `budget` log-spaced points from lo to
/// hi inclusive (hi alone when budget == 1), or `budget` seeded log-uniform
/// draws, in draw order.
std::vector<double> eta_candidates(const TuneConfig& cfg, double lo, double hi);

/// Default search range for target (i, j); see TuneConfig.
std::pair<double, double> default_eta_range(const DistributionalMatrix& m, std::size_t i,
                                            std::size_t j, const NeighborOptions& opts = {});

/// Estimate of the held-out observed entry (i, v) when (i, j) is the tuning
/// target: both (i, v) and (i, j) are hidden, so neither influences it.
std::optional<ImputationResult> validation_estimate(const DistributionalMatrix& m, std::size_t i,
                                                    std::size_t j, std::size_t v, double eta,
                                                    const NeighborOptions& opts = {});

/// Leave-one-out selection of eta for target (i, j) over the observed
/// entries of row i. Throws NoObservedCells or AllTrialsFailed.
TuneReport tune_eta(const DistributionalMatrix& m, std::size_t i, std::size_t j,
                    const TuneConfig& cfg = {});

}  // namespace distnn
