#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "distnn/empdist.hpp"
#include "distnn/matrix.hpp"

namespace distnn {

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

struct NeighborOptions {
  /// Minimum number of shared columns for a finite row distance. 1 is the
  /// plain definition; larger values steady distances on sparse panels.
  std::size_t min_overlap = 1;
};

struct Neighbor {
  std::size_t row = 0;
  double distance = 0.0;
  std::size_t overlap = 0;
};

struct NeighborSet {
  std::size_t target_row = 0;
  std::size_t target_col = 0;
  double eta = 0.0;
  /// Ascending row index.
  std::vector<Neighbor> members;

  [[nodiscard]] std::size_t size() const noexcept { return members.size(); }
  [[nodiscard]] bool empty() const noexcept { return members.empty(); }
};

/// Squared W2 between two entries: order-statistic formula when the sizes
/// agree, exact piecewise integral otherwise.
double pair_w2_sq(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// Mean squared W2 between rows i and u over their shared columns other than
/// `exclude`; infinite when fewer than `min_overlap` columns are shared.
double row_distance(const DistributionalMatrix& m, std::size_t i, std::size_t u,
                    std::size_t exclude, std::size_t min_overlap = 1);

/// Per-column squared W2 between one target row and every other row,
/// computed once. Distances for any exclusion set are re-summed in column
/// order, so they are bitwise identical to row_distance.
class RowDistanceCache {
 public:
  RowDistanceCache(const DistributionalMatrix& m, std::size_t target_row);

  [[nodiscard]] std::size_t target_row() const noexcept { return row_; }
  [[nodiscard]] double distance(std::size_t u, std::span<const std::size_t> excluded,
                                std::size_t min_overlap = 1) const;
  [[nodiscard]] std::size_t overlap(std::size_t u, std::span<const std::size_t> excluded) const;

 private:
  std::size_t row_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> per_column_;  // NaN where the column is not shared
};

/// Every row u != i observed in column j with its distance (possibly
/// infinite), ascending row index. `excluded` lists the columns left out of
/// the distance; it always contains j.
std::vector<Neighbor> candidate_neighbors(const DistributionalMatrix& m, const RowDistanceCache& cache,
                                          std::size_t j, std::span<const std::size_t> excluded,
                                          const NeighborOptions& opts = {});

/// Members of `candidates` with distance <= eta (inclusive).
NeighborSet select_neighbors(std::span<const Neighbor> candidates, std::size_t i, std::size_t j,
                             double eta);

/// Rows u != i with column j observed and row distance <= eta.
NeighborSet find_neighbors(const DistributionalMatrix& m, std::size_t i, std::size_t j,
                           double eta, const NeighborOptions& opts = {});

/// Barycenter estimate: an empirical distribution when every neighbor entry
/// has the same size, otherwise the barycenter quantile on midpoint levels
/// (k - 1/2)/L with L the largest neighbor size.
using Estimate = std::variant<EmpiricalDistribution, QuantileGrid>;

struct ImputationResult {
  Estimate estimate;
  NeighborSet neighbors;
  Summaries summaries;

  /// Estimate as equally weighted atoms (grid values for the ragged path).
  [[nodiscard]] EmpiricalDistribution atoms() const;
  [[nodiscard]] double quantile(double t) const;
};

/// Barycenter of the neighbors' column-j entries. Throws NoNeighbors when
/// the set is empty.
ImputationResult estimate_from_neighbors(const DistributionalMatrix& m, NeighborSet neighbors,
                                         double var_alpha);

/// Dist-NN estimate of entry (i, j). The entry's own samples are never used.
/// Throws NoNeighbors when no row qualifies.
ImputationResult impute(const DistributionalMatrix& m, std::size_t i, std::size_t j, double eta,
                        double var_alpha = 0.05, const NeighborOptions& opts = {});

/// Same as impute but reports NoNeighbors as nullopt.
std::optional<ImputationResult> try_impute(const DistributionalMatrix& m, std::size_t i,
                                           std::size_t j, double eta, double var_alpha = 0.05,
                                           const NeighborOptions& opts = {});

/// Fallback used by the CLI: the single nearest finite-distance row.
ImputationResult impute_nearest(const DistributionalMatrix& m, std::size_t i, std::size_t j,
                                double var_alpha = 0.05, const NeighborOptions& opts = {});

enum class ImputeScope { MissingOnly, AllCells };

struct CellOutcome {
  Cell cell;
  double eta = 0.0;
  /// nullopt records NoNeighbors for this cell.
  std::optional<ImputationResult> result;
};

/// Row-major batch of independent impute calls; NoNeighbors never aborts.
std::vector<CellOutcome> impute_all(const DistributionalMatrix& m, double eta, double var_alpha,
                                    ImputeScope scope = ImputeScope::MissingOnly,
                                    const NeighborOptions& opts = {});
std::vector<CellOutcome> impute_all(const DistributionalMatrix& m,
                                    const std::function<double(Cell)>& eta_for, double var_alpha,
                                    ImputeScope scope = ImputeScope::MissingOnly,
                                    const NeighborOptions& opts = {});

}  // namespace distnn
