#include "distnn/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "distnn/error.hpp"
#include "distnn/summation.hpp"

namespace distnn {

namespace {

bool contains(std::span<const std::size_t> xs, std::size_t v) {
  return std::find(xs.begin(), xs.end(), v) != xs.end();
}

void require_eta(double eta) {
  if (!(eta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be >= 0");
}

[[noreturn]] void throw_no_neighbors(std::size_t i, std::size_t j, double eta) {
  throw Error(ErrorCode::NoNeighbors, "no neighbors for cell (" + std::to_string(i) + ", " +
                                          std::to_string(j) + ") at eta=" + std::to_string(eta));
}

}  // namespace

double pair_w2_sq(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  return a.size() == b.size() ? w2_sq_equal_n(a, b) : w2_sq_general(a, b);
}

double row_distance(const DistributionalMatrix& m, std::size_t i, std::size_t u,
                    std::size_t exclude, std::size_t min_overlap) {
  m.check_index(i, exclude);
  m.check_index(u, exclude);
  if (i == u) throw Error(ErrorCode::InvalidArgument, "row_distance needs two distinct rows");
  CompensatedSum acc;
  std::size_t count = 0;
  for (std::size_t v = 0; v < m.cols(); ++v) {
    if (v == exclude || !m.observed(i, v) || !m.observed(u, v)) continue;
    acc.add(pair_w2_sq(m.at(i, v), m.at(u, v)));
    ++count;
  }
  if (count == 0 || count < min_overlap) return kInfiniteDistance;
  return acc.value() / static_cast<double>(count);
}

RowDistanceCache::RowDistanceCache(const DistributionalMatrix& m, std::size_t target_row)
    : row_(target_row),
      rows_(m.rows()),
      cols_(m.cols()),
      per_column_(m.rows() * m.cols(), std::numeric_limits<double>::quiet_NaN()) {
  m.check_index(target_row, 0);
  for (std::size_t u = 0; u < rows_; ++u) {
    if (u == row_) continue;
    for (std::size_t v = 0; v < cols_; ++v) {
      if (m.observed(row_, v) && m.observed(u, v)) {
        per_column_[u * cols_ + v] = pair_w2_sq(m.at(row_, v), m.at(u, v));
      }
    }
  }
}

double RowDistanceCache::distance(std::size_t u, std::span<const std::size_t> excluded,
                                  std::size_t min_overlap) const {
  CompensatedSum acc;
  std::size_t count = 0;
  for (std::size_t v = 0; v < cols_; ++v) {
    const double d = per_column_[u * cols_ + v];
    if (std::isnan(d) || contains(excluded, v)) continue;
    acc.add(d);
    ++count;
  }
  if (count == 0 || count < min_overlap) return kInfiniteDistance;
  return acc.value() / static_cast<double>(count);
}

std::size_t RowDistanceCache::overlap(std::size_t u, std::span<const std::size_t> excluded) const {
  std::size_t count = 0;
  for (std::size_t v = 0; v < cols_; ++v) {
    if (!std::isnan(per_column_[u * cols_ + v]) && !contains(excluded, v)) ++count;
  }
  return count;
}

std::vector<Neighbor> candidate_neighbors(const DistributionalMatrix& m,
                                          const RowDistanceCache& cache, std::size_t j,
                                          std::span<const std::size_t> excluded,
                                          const NeighborOptions& opts) {
  const std::size_t i = cache.target_row();
  m.check_index(i, j);
  std::vector<Neighbor> out;
  for (std::size_t u = 0; u < m.rows(); ++u) {
    if (u == i || !m.observed(u, j)) continue;
    out.push_back({u, cache.distance(u, excluded, opts.min_overlap), cache.overlap(u, excluded)});
  }
  return out;
}

NeighborSet select_neighbors(std::span<const Neighbor> candidates, std::size_t i, std::size_t j,
                             double eta) {
  require_eta(eta);
  NeighborSet set{i, j, eta, {}};
  for (const auto& c : candidates) {
    if (c.distance <= eta) set.members.push_back(c);
  }
  return set;
}

NeighborSet find_neighbors(const DistributionalMatrix& m, std::size_t i, std::size_t j,
                           double eta, const NeighborOptions& opts) {
  require_eta(eta);
  m.check_index(i, j);
  NeighborSet set{i, j, eta, {}};
  for (std::size_t u = 0; u < m.rows(); ++u) {
    if (u == i || !m.observed(u, j)) continue;
    const double rho = row_distance(m, i, u, j, opts.min_overlap);
    if (rho <= eta) {
      set.members.push_back({u, rho, shared_columns(m, i, u, j).size()});
    }
  }
  return set;
}

EmpiricalDistribution ImputationResult::atoms() const {
  if (const auto* d = std::get_if<EmpiricalDistribution>(&estimate)) return *d;
  return EmpiricalDistribution::from_sorted(std::get<QuantileGrid>(estimate).values);
}

double ImputationResult::quantile(double t) const {
  if (const auto* d = std::get_if<EmpiricalDistribution>(&estimate)) return d->quantile(t);
  return atoms().quantile(t);
}

ImputationResult estimate_from_neighbors(const DistributionalMatrix& m, NeighborSet neighbors,
                                         double var_alpha) {
  if (neighbors.empty()) throw_no_neighbors(neighbors.target_row, neighbors.target_col, neighbors.eta);
  const std::size_t j = neighbors.target_col;
  std::vector<const EmpiricalDistribution*> entries;
  entries.reserve(neighbors.size());
  std::size_t max_n = 0;
  bool equal_sizes = true;
  for (const auto& nb : neighbors.members) {
    entries.push_back(&m.at(nb.row, j));
    if (max_n != 0 && entries.back()->size() != max_n) equal_sizes = false;
    max_n = std::max(max_n, entries.back()->size());
  }

  if (equal_sizes) {
    auto bary = barycenter(std::span<const EmpiricalDistribution* const>(entries));
    Summaries s = summaries(bary, var_alpha);
    return {std::move(bary), std::move(neighbors), s};
  }
  const auto levels = midpoint_levels(max_n);
  QuantileGrid grid = general_barycenter(std::span<const EmpiricalDistribution* const>(entries), levels);
  for (std::size_t k = 1; k < grid.values.size(); ++k) {
    grid.values[k] = std::max(grid.values[k], grid.values[k - 1]);
  }
  Summaries s = summaries(EmpiricalDistribution::from_sorted(grid.values), var_alpha);
  return {std::move(grid), std::move(neighbors), s};
}

ImputationResult impute(const DistributionalMatrix& m, std::size_t i, std::size_t j, double eta,
                        double var_alpha, const NeighborOptions& opts) {
  auto set = find_neighbors(m, i, j, eta, opts);
  if (set.empty()) throw_no_neighbors(i, j, eta);
  return estimate_from_neighbors(m, std::move(set), var_alpha);
}

std::optional<ImputationResult> try_impute(const DistributionalMatrix& m, std::size_t i,
                                           std::size_t j, double eta, double var_alpha,
                                           const NeighborOptions& opts) {
  auto set = find_neighbors(m, i, j, eta, opts);
  if (set.empty()) return std::nullopt;
  return estimate_from_neighbors(m, std::move(set), var_alpha);
}

ImputationResult impute_nearest(const DistributionalMatrix& m, std::size_t i, std::size_t j,
                                double var_alpha, const NeighborOptions& opts) {
  m.check_index(i, j);
  const RowDistanceCache cache(m, i);
  const std::size_t excluded[] = {j};
  const auto candidates = candidate_neighbors(m, cache, j, excluded, opts);
  const Neighbor* best = nullptr;
  for (const auto& c : candidates) {
    if (std::isfinite(c.distance) && (best == nullptr || c.distance < best->distance)) best = &c;
  }
  if (best == nullptr) throw_no_neighbors(i, j, kInfiniteDistance);
  NeighborSet set{i, j, best->distance, {*best}};
  return estimate_from_neighbors(m, std::move(set), var_alpha);
}

std::vector<CellOutcome> impute_all(const DistributionalMatrix& m, double eta, double var_alpha,
                                    ImputeScope scope, const NeighborOptions& opts) {
  return impute_all(m, [eta](Cell) { return eta; }, var_alpha, scope, opts);
}

std::vector<CellOutcome> impute_all(const DistributionalMatrix& m,
                                    const std::function<double(Cell)>& eta_for, double var_alpha,
                                    ImputeScope scope, const NeighborOptions& opts) {
  std::vector<CellOutcome> out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::optional<RowDistanceCache> cache;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (scope == ImputeScope::MissingOnly && m.observed(i, j)) continue;
      if (!cache) cache.emplace(m, i);
      const Cell cell{i, j};
      const double eta = eta_for(cell);
      const std::size_t excluded[] = {j};
      const auto candidates = candidate_neighbors(m, *cache, j, excluded, opts);
      auto set = select_neighbors(candidates, i, j, eta);
      CellOutcome outcome{cell, eta, std::nullopt};
      if (!set.empty()) outcome.result = estimate_from_neighbors(m, std::move(set), var_alpha);
      out.push_back(std::move(outcome));
    }
  }
  return out;
}

}  // namespace distnn
