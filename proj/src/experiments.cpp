#include "distnn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "distnn/error.hpp"
#include "distnn/matrix.hpp"
#include "distnn/oracle.hpp"
#include "distnn/rng.hpp"
#include "distnn/tuning.hpp"

namespace distnn {

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  // Sorted reduction: the aggregate does not depend on trial order.
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double mean = 0.0;
  for (double x : sorted) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : sorted) ss += (x - mean) * (x - mean);
  const double sd = sorted.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, sd / std::sqrt(n)};
}

struct Setting {
  std::size_t rows;
  std::size_t cols;
  std::size_t n;
};

Setting setting_for(const ExperimentSpec& spec, std::size_t value) {
  Setting s{spec.n_rows, spec.n_cols, spec.n_samples};
  switch (spec.sweep) {
    case SweepVariable::NSamples: s.n = value; break;
    case SweepVariable::NRows:
    case SweepVariable::NTimesNeighbors: s.rows = value; break;
  }
  return s;
}

void check_failures(std::size_t failed, std::size_t trials, std::size_t value) {
  if (static_cast<double>(failed) > 0.2 * static_cast<double>(trials)) {
    throw Error(ErrorCode::ExperimentAborted,
                std::to_string(failed) + " of " + std::to_string(trials) +
                    " trials failed at sweep value " + std::to_string(value));
  }
}

bool by_distance(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.row < b.row);
}

}  // namespace

void validate(const ExperimentSpec& spec) {
  if (spec.trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  for (std::size_t k = 1; k < spec.values.size(); ++k) {
    if (spec.values[k] <= spec.values[k - 1]) {
      throw Error(ErrorCode::InvalidArgument, "sweep values must be strictly increasing");
    }
  }
  if (spec.max_neighbors && (*spec.max_neighbors == 0 || *spec.max_neighbors < spec.min_neighbors)) {
    throw Error(ErrorCode::InvalidArgument, "max_neighbors must be positive and >= min_neighbors");
  }
  if (spec.eta_policy == EtaPolicy::Fixed && !(spec.fixed_eta >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "fixed eta must be >= 0");
  }
}

TrialOutcome run_trial(const ExperimentSpec& spec, std::size_t rows, std::size_t cols,
                       std::size_t n_samples, std::uint64_t trial_seed) {
  DgpSpec dgp = spec.dgp;
  dgp.n_per_entry = {n_samples};
  dgp.seed = derive_seed(trial_seed, {0});
  const auto panel = generate(dgp, rows, cols);
  const std::size_t i = spec.target.row;
  const std::size_t j = spec.target.col;
  panel.matrix.check_index(i, j);
  const auto masked = apply_mcar(panel.matrix, {spec.mask_p, derive_seed(trial_seed, {1})}, spec.target);

  TrialOutcome out;
  out.n_samples = n_samples;
  out.truth = panel.truth.law(i, j);
  out.own_entry = panel.matrix.at(i, j);

  double eta = spec.fixed_eta;
  if (spec.eta_policy == EtaPolicy::Tuned) {
    TuneConfig cfg;
    cfg.budget = spec.tune_budget;
    cfg.seed = derive_seed(trial_seed, {3});
    try {
      eta = tune_eta(masked, i, j, cfg).best_eta;
    } catch (const Error&) {
      return out;
    }
  }

  const RowDistanceCache cache(masked, i);
  const std::size_t excluded[] = {j};
  auto candidates = candidate_neighbors(masked, cache, j, excluded);
  auto set = select_neighbors(candidates, i, j, eta);

  if (set.size() < spec.min_neighbors || (spec.max_neighbors && set.size() > *spec.max_neighbors)) {
    std::vector<Neighbor> ranked;
    for (const auto& c : candidates) {
      if (std::isfinite(c.distance)) ranked.push_back(c);
    }
    std::sort(ranked.begin(), ranked.end(), by_distance);
    if (set.size() < spec.min_neighbors && !ranked.empty()) {
      eta = ranked[std::min(spec.min_neighbors, ranked.size()) - 1].distance;
      set = select_neighbors(candidates, i, j, eta);
    }
    if (spec.max_neighbors && set.size() > *spec.max_neighbors) {
      std::vector<Neighbor> kept(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(*spec.max_neighbors));
      std::sort(kept.begin(), kept.end(), [](const Neighbor& a, const Neighbor& b) { return a.row < b.row; });
      set.members = std::move(kept);
    }
  }
  out.eta = eta;
  if (set.empty()) return out;

  out.result = estimate_from_neighbors(masked, std::move(set), 0.05);
  out.n_neighbors = out.result->neighbors.size();
  const auto pieces = base_pieces(out.truth.base, n_samples);
  out.error = w2_sq_to_law(out.result->atoms(), out.truth, pieces);

  if (spec.baseline_resamples > 0) {
    Rng rng(derive_seed(trial_seed, {2}));
    double total = 0.0;
    for (std::size_t r = 0; r < spec.baseline_resamples; ++r) {
      const auto fresh = out.truth.sample_sorted(rng, n_samples);
      total += w2_sq_to_law(fresh, out.truth, pieces);
    }
    out.baseline_error = total / static_cast<double>(spec.baseline_resamples);
  }
  out.ok = true;
  return out;
}

ScalingResult run_scaling(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.values.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs values");
  ScalingResult result;
  result.sweep = spec.sweep;
  for (const std::size_t value : spec.values) {
    const Setting s = setting_for(spec, value);
    ScalingPoint point;
    point.value = value;
    std::vector<double> errors;
    std::vector<double> baselines;
    double neighbors = 0.0;
    for (std::size_t t = 0; t < spec.trials; ++t) {
      const auto trial = run_trial(spec, s.rows, s.cols, s.n, derive_seed(spec.seed, {value, t}));
      if (!trial.ok) {
        ++point.trials_failed;
        continue;
      }
      ++point.trials_ok;
      errors.push_back(trial.error);
      baselines.push_back(trial.baseline_error);
      neighbors += static_cast<double>(trial.n_neighbors);
      result.trials.push_back(
          {value, static_cast<double>(trial.n_neighbors * s.n), trial.error});
    }
    check_failures(point.trials_failed, spec.trials, value);
    const auto e = mean_se(errors);
    const auto b = mean_se(baselines);
    point.mean_error = e.mean;
    point.se_error = e.se;
    point.mean_baseline = b.mean;
    point.se_baseline = b.se;
    point.mean_neighbors = neighbors / static_cast<double>(point.trials_ok);
    point.mean_n_times_neighbors = point.mean_neighbors * static_cast<double>(s.n);
    result.points.push_back(point);
  }

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : result.points) {
    xs.push_back(spec.sweep == SweepVariable::NTimesNeighbors ? p.mean_n_times_neighbors
                                                              : static_cast<double>(p.value));
    ys.push_back(p.mean_error);
    if (!(p.mean_error > 0.0)) result.degenerate = true;
  }
  if (!result.degenerate && xs.size() >= 2) {
    try {
      result.fit = fit_power_law(xs, ys);
    } catch (const Error&) {
      result.degenerate = true;
    }
  }
  std::vector<double> tx;
  std::vector<double> ty;
  for (const auto& t : result.trials) {
    if (!(t.error > 0.0)) continue;
    tx.push_back(t.n_times_neighbors);
    ty.push_back(t.error);
  }
  if (tx.size() >= 2) {
    try {
      result.trial_fit = fit_power_law(tx, ty);
    } catch (const Error&) {
    }
  }
  return result;
}

std::vector<DenoisingRow> run_denoising(const ExperimentSpec& spec) {
  const auto scaling = run_scaling(spec);
  std::vector<DenoisingRow> rows;
  for (const auto& p : scaling.points) {
    rows.push_back({p.value, p.mean_error, p.se_error, p.mean_baseline, p.se_baseline, p.trials_ok});
  }
  return rows;
}

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::Mean: return "mean";
    case Quantity::Median: return "median";
    case Quantity::Std: return "std";
    case Quantity::VaR5: return "var5";
  }
  return "unknown";
}

BoxStats box_stats(std::vector<double> xs) {
  if (xs.empty()) throw Error(ErrorCode::EmptyInput, "box_stats needs data");
  std::sort(xs.begin(), xs.end());
  auto at = [&](double p) {
    const double h = p * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
  };
  BoxStats s;
  s.min = xs.front();
  s.max = xs.back();
  s.q1 = at(0.25);
  s.median = at(0.5);
  s.q3 = at(0.75);
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  return s;
}

double true_quantity(const LocationScaleLaw& law, Quantity q) {
  switch (q) {
    case Quantity::Mean: return law.mean();
    case Quantity::Median: return law.quantile(0.5);
    case Quantity::Std: return law.stddev();
    case Quantity::VaR5: return -law.quantile(0.05);
  }
  return 0.0;
}

double summary_quantity(const Summaries& s, Quantity q) {
  switch (q) {
    case Quantity::Mean: return s.mean;
    case Quantity::Median: return s.median;
    case Quantity::Std: return s.std;
    case Quantity::VaR5: return s.var_at_risk;
  }
  return 0.0;
}

std::vector<QuantityErrors> run_quantity_eval(const ExperimentSpec& spec,
                                              const std::vector<Quantity>& quantities) {
  validate(spec);
  ExperimentSpec local = spec;
  local.baseline_resamples = 0;
  const std::size_t value = spec.values.empty() ? 0 : spec.values.front();
  const Setting s = spec.values.empty() ? Setting{spec.n_rows, spec.n_cols, spec.n_samples}
                                        : setting_for(spec, value);

  std::vector<QuantityErrors> out;
  for (Quantity q : quantities) out.push_back({q, {}, {}, 0, {}, {}});

  std::size_t failed = 0;
  for (std::size_t t = 0; t < spec.trials; ++t) {
    const auto trial = run_trial(local, s.rows, s.cols, s.n, derive_seed(spec.seed, {value, t}));
    if (!trial.ok) {
      ++failed;
      continue;
    }
    const Summaries own = summaries(*trial.own_entry, 0.05);
    for (auto& qe : out) {
      const double truth = true_quantity(trial.truth, qe.quantity);
      if (std::fabs(truth) < 1e-9) {
        ++qe.excluded;
        continue;
      }
      qe.dist_nn.push_back(std::fabs(summary_quantity(trial.result->summaries, qe.quantity) - truth) /
                           std::fabs(truth));
      qe.baseline.push_back(std::fabs(summary_quantity(own, qe.quantity) - truth) / std::fabs(truth));
    }
  }
  check_failures(failed, spec.trials, value);
  for (auto& qe : out) {
    if (!qe.dist_nn.empty()) {
      qe.dist_nn_stats = box_stats(qe.dist_nn);
      qe.baseline_stats = box_stats(qe.baseline);
    }
  }
  return out;
}

std::vector<UniformBarycenterRow> verify_uniform_barycenter(const UniformBarycenterConfig& cfg) {
  if (cfg.trials < 2) throw Error(ErrorCode::InvalidArgument, "uniform barycenter check needs >= 2 trials");
  if (!(cfg.width >= 0.0)) throw Error(ErrorCode::InvalidArgument, "width must be >= 0");
  const BaseLaw uniform(BaseFamily::Uniform);
  std::vector<UniformBarycenterRow> rows;
  for (const std::size_t m : cfg.m_list) {
    for (const std::size_t n : cfg.n_list) {
      if (m == 0 || n == 0) throw Error(ErrorCode::InvalidArgument, "m and n must be positive");
      const auto pieces = base_pieces(uniform, n);
      std::vector<double> errors(cfg.trials);
      std::vector<oracle::UniformInterval> intervals(m);
      std::vector<EmpiricalDistribution> members;
      std::vector<double> draws(n);
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        Rng rng(derive_seed(cfg.seed, {m, n, t}));
        members.clear();
        double a_bar = 0.0;
        for (auto& iv : intervals) {
          iv.lo = cfg.location_range.at(rng.open01());
          iv.hi = iv.lo + cfg.width;
          a_bar += iv.lo;
          for (auto& x : draws) x = iv.lo + cfg.width * rng.open01();
          members.push_back(EmpiricalDistribution::from_samples(draws));
        }
        a_bar /= static_cast<double>(m);
        const auto bary = barycenter(std::span<const EmpiricalDistribution>(members));
        errors[t] = w2_sq_to_law(bary, LocationScaleLaw{uniform, a_bar, cfg.width}, pieces);
      }
      UniformBarycenterRow row{m, n, 0.0, 0.0, 0.0, 0.0};
      const auto stats = mean_se(errors);
      row.simulated_mean = stats.mean;
      row.std_error = stats.se;
      if (cfg.width > 0.0) {
        row.closed_form = oracle::uniform_barycenter_expected_w2_sq(intervals, n);
      }
      const double gap = row.simulated_mean - row.closed_form;
      if (row.std_error > 0.0) {
        row.z = gap / row.std_error;
      } else {
        row.z = gap == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), gap);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<RateCell> verify_barycenter_rate(const BarycenterRateConfig& cfg) {
  if (cfg.trials < 2) throw Error(ErrorCode::InvalidArgument, "rate check needs >= 2 trials");
  const BaseLaw base(cfg.family, cfg.truncation);
  std::vector<RateCell> cells;
  for (const std::size_t k : cfg.k_list) {
    for (const std::size_t n : cfg.n_list) {
      if (k == 0 || n == 0) throw Error(ErrorCode::InvalidArgument, "k and n must be positive");
      const auto pieces = base_pieces(base, n);
      std::vector<double> errors(cfg.trials);
      std::vector<EmpiricalDistribution> members;
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        Rng rng(derive_seed(cfg.seed, {k, n, t}));
        members.clear();
        LocationScaleLaw mean_law{base, 0.0, 0.0};
        for (std::size_t m = 0; m < k; ++m) {
          const LocationScaleLaw law{base, cfg.location_range.at(rng.open01()),
                                     cfg.scale_range.at(rng.open01())};
          mean_law.location += law.location;
          mean_law.scale += law.scale;
          members.push_back(law.sample_sorted(rng, n));
        }
        mean_law.location /= static_cast<double>(k);
        mean_law.scale /= static_cast<double>(k);
        const auto bary = barycenter(std::span<const EmpiricalDistribution>(members));
        errors[t] = w2_sq_to_law(bary, mean_law, pieces);
      }
      const auto stats = mean_se(errors);
      cells.push_back({k, n, stats.mean, stats.se});
    }
  }
  return cells;
}

std::vector<double> halving_ratios(const std::vector<RateCell>& cells, std::size_t n) {
  std::vector<RateCell> at_n;
  for (const auto& c : cells) {
    if (c.n == n) at_n.push_back(c);
  }
  std::sort(at_n.begin(), at_n.end(), [](const RateCell& a, const RateCell& b) { return a.k < b.k; });
  std::vector<double> ratios;
  for (std::size_t q = 1; q < at_n.size(); ++q) {
    if (at_n[q].k == 2 * at_n[q - 1].k) ratios.push_back(at_n[q - 1].mean / at_n[q].mean);
  }
  return ratios;
}

PowerLawFit slope_in_n(const std::vector<RateCell>& cells, std::size_t k) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& c : cells) {
    if (c.k == k) {
      xs.push_back(static_cast<double>(c.n));
      ys.push_back(c.mean);
    }
  }
  return fit_power_law(xs, ys);
}

}  // namespace distnn
