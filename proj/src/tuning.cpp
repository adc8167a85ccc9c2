#include "distnn/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "distnn/error.hpp"
#include "distnn/rng.hpp"

namespace distnn {

namespace {

std::vector<std::size_t> holdout_columns(const DistributionalMatrix& m, std::size_t i,
                                         std::size_t j) {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < m.cols(); ++v) {
    if (v != j && m.observed(i, v)) out.push_back(v);
  }
  return out;
}

}  // namespace

std::vector<double> eta_candidates(const TuneConfig& cfg, double lo, double hi) {
  if (cfg.budget == 0) throw Error(ErrorCode::InvalidArgument, "tuning budget must be >= 1");
  if (!(lo > 0.0 && lo < hi)) {
    throw Error(ErrorCode::InvalidArgument, "eta range must satisfy 0 < eta_min < eta_max");
  }
  std::vector<double> out(cfg.budget);
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  if (cfg.search == SearchStrategy::LogGrid) {
    if (cfg.budget == 1) return {hi};
    for (std::size_t k = 0; k < cfg.budget; ++k) {
      const double f = static_cast<double>(k) / static_cast<double>(cfg.budget - 1);
      out[k] = std::exp(log_lo + f * (log_hi - log_lo));
    }
    out.front() = lo;
    out.back() = hi;
  } else {
    Rng rng(cfg.seed);
    for (auto& eta : out) eta = std::exp(rng.uniform(log_lo, log_hi));
  }
  return out;
}

std::pair<double, double> default_eta_range(const DistributionalMatrix& m, std::size_t i,
                                            std::size_t j, const NeighborOptions& opts) {
  m.check_index(i, j);
  const RowDistanceCache cache(m, i);
  const std::size_t excluded[] = {j};
  std::vector<double> finite;
  for (std::size_t u = 0; u < m.rows(); ++u) {
    if (u == i) continue;
    const double d = cache.distance(u, excluded, opts.min_overlap);
    if (std::isfinite(d)) finite.push_back(d);
  }
  if (finite.empty()) {
    throw Error(ErrorCode::AllTrialsFailed, "row " + std::to_string(i) +
                                                " shares no columns with any other row");
  }
  const auto dist = EmpiricalDistribution::from_samples(finite);
  double lo = dist.quantile(0.01);
  double hi = dist.quantile(0.99);
  // Degenerate spreads (identical rows, a single candidate) still need a
  // non-empty positive log range.
  if (!(hi > 0.0)) hi = 1.0;
  if (!(lo > 0.0)) lo = hi * 1e-6;
  if (!(lo < hi)) lo = hi * 1e-3;
  return {lo, hi};
}

std::optional<ImputationResult> validation_estimate(const DistributionalMatrix& m, std::size_t i,
                                                    std::size_t j, std::size_t v, double eta,
                                                    const NeighborOptions& opts) {
  m.check_index(i, j);
  m.check_index(i, v);
  const RowDistanceCache cache(m, i);
  const std::size_t excluded[] = {v, j};
  const auto candidates = candidate_neighbors(m, cache, v, excluded, opts);
  auto set = select_neighbors(candidates, i, v, eta);
  if (set.empty()) return std::nullopt;
  return estimate_from_neighbors(m, std::move(set), 0.05);
}

TuneReport tune_eta(const DistributionalMatrix& m, std::size_t i, std::size_t j,
                    const TuneConfig& cfg) {
  m.check_index(i, j);
  const auto holdouts = holdout_columns(m, i, j);
  if (holdouts.empty()) {
    throw Error(ErrorCode::NoObservedCells,
                "row " + std::to_string(i) + " has no observed entries to validate on");
  }

  TuneReport report;
  if (cfg.eta_min && cfg.eta_max) {
    report.eta_min = *cfg.eta_min;
    report.eta_max = *cfg.eta_max;
  } else {
    const auto [lo, hi] = default_eta_range(m, i, j, cfg.neighbor_options);
    report.eta_min = cfg.eta_min.value_or(lo);
    report.eta_max = cfg.eta_max.value_or(hi);
  }
  const auto etas = eta_candidates(cfg, report.eta_min, report.eta_max);

  // losses[c][h]: validation loss of holdout h at candidate c (nullopt when
  // no neighbors). Neighbor sets are nested in eta, so a set is identified by
  // its size and each distinct set is scored once.
  std::vector<std::vector<std::optional<double>>> losses(
      etas.size(), std::vector<std::optional<double>>(holdouts.size()));
  const RowDistanceCache cache(m, i);
  for (std::size_t h = 0; h < holdouts.size(); ++h) {
    const std::size_t v = holdouts[h];
    const std::size_t excluded[] = {v, j};
    const auto candidates = candidate_neighbors(m, cache, v, excluded, cfg.neighbor_options);
    const auto& held_out = m.at(i, v);
    std::map<std::size_t, double> by_size;
    for (std::size_t c = 0; c < etas.size(); ++c) {
      auto set = select_neighbors(candidates, i, v, etas[c]);
      if (set.empty()) continue;
      const std::size_t size = set.size();
      auto it = by_size.find(size);
      if (it == by_size.end()) {
        const auto est = estimate_from_neighbors(m, std::move(set), 0.05);
        it = by_size.emplace(size, pair_w2_sq(est.atoms(), held_out)).first;
      }
      losses[c][h] = it->second;
    }
  }

  bool any_valid = false;
  for (std::size_t c = 0; c < etas.size(); ++c) {
    TuneTrial trial{etas[c], kInfiniteDistance, 0, 0};
    double total = 0.0;
    double worst = 0.0;
    for (const auto& loss : losses[c]) {
      if (loss) {
        ++trial.n_valid;
        total += *loss;
        worst = std::max(worst, *loss);
      } else {
        ++trial.n_no_neighbors;
      }
    }
    if (trial.n_valid > 0) {
      trial.loss = (total + worst * static_cast<double>(trial.n_no_neighbors)) /
                   static_cast<double>(trial.n_valid + trial.n_no_neighbors);
      const bool better = !any_valid || trial.loss < report.best_loss ||
                          (trial.loss == report.best_loss && trial.eta < report.best_eta);
      if (better) {
        report.best_eta = trial.eta;
        report.best_loss = trial.loss;
      }
      any_valid = true;
    }
    report.trials.push_back(trial);
  }
  if (!any_valid) {
    throw Error(ErrorCode::AllTrialsFailed,
                "no candidate eta produced neighbors for any held-out entry of row " +
                    std::to_string(i));
  }
  return report;
}

}  // namespace distnn
