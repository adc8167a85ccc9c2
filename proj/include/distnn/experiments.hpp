#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "distnn/empdist.hpp"
#include "distnn/estimator.hpp"
#include "distnn/powerlaw.hpp"
#include "distnn/synthetic.hpp"

namespace distnn {

enum class SweepVariable {
  /// Samples per entry n.
  NSamples,
  /// Number of rows.
  NRows,
  /// Swept over the row count, fitted against the realised n * |N|.
  NTimesNeighbors,
};

enum class EtaPolicy { Fixed, Tuned };

struct ExperimentSpec {
  DgpSpec dgp;
  SweepVariable sweep = SweepVariable::NSamples;
  std::vector<std::size_t> values;
  std::size_t trials = 50;
  /// Settings held fixed while another variable is swept.
  std::size_t n_rows = 50;
  std::size_t n_cols = 30;
  std::size_t n_samples = 500;
  EtaPolicy eta_policy = EtaPolicy::Tuned;
  double fixed_eta = 1.0;
  std::size_t tune_budget = 50;
  /// Widen eta until at least this many neighbors qualify (0 never widens).
  std::size_t min_neighbors = 0;
  /// Keep only the nearest rows when more qualify.
  std::optional<std::size_t> max_neighbors;
  /// Observation probability for the cells other than the target.
  double mask_p = 1.0;
  /// Fresh single-entry samples averaged for the baseline error.
  std::size_t baseline_resamples = 100;
  Cell target{0, 0};
  std::uint64_t seed = 0;
};

/// Throws InvalidArgument for an inconsistent spec.
void validate(const ExperimentSpec& spec);

/// One simulated instance: generate, hide the target, pick eta, impute, score.
struct TrialOutcome {
  bool ok = false;
  std::size_t n_samples = 0;
  double eta = 0.0;
  std::size_t n_neighbors = 0;
  /// W2^2(estimate, true law).
  double error = 0.0;
  /// Mean W2^2(fresh single-entry sample, true law).
  double baseline_error = 0.0;
  std::optional<ImputationResult> result;
  /// The target's own samples before masking.
  std::optional<EmpiricalDistribution> own_entry;
  LocationScaleLaw truth;
};

TrialOutcome run_trial(const ExperimentSpec& spec, std::size_t rows, std::size_t cols,
                       std::size_t n_samples, std::uint64_t trial_seed);

struct ScalingPoint {
  std::size_t value = 0;
  std::size_t trials_ok = 0;
  std::size_t trials_failed = 0;
  double mean_error = 0.0;
  double se_error = 0.0;
  double mean_baseline = 0.0;
  double se_baseline = 0.0;
  double mean_neighbors = 0.0;
  double mean_n_times_neighbors = 0.0;
};

/// One successful trial: n * |N| and its error.
struct TrialPoint {
  std::size_t value = 0;
  double n_times_neighbors = 0.0;
  double error = 0.0;
};

struct ScalingResult {
  SweepVariable sweep = SweepVariable::NSamples;
  std::vector<ScalingPoint> points;
  std::vector<TrialPoint> trials;
  /// Fit of mean error against the sweep value, or against mean n*|N| for
  /// NTimesNeighbors. Unset (and `degenerate` true) when an error mean is 0.
  std::optional<PowerLawFit> fit;
  /// Fit of every trial's error against its own n*|N|; trials with zero
  /// error are left out.
  std::optional<PowerLawFit> trial_fit;
  bool degenerate = false;
};

/// Aborts with ExperimentAborted when more than 20% of the trials at any
/// sweep value fail.
ScalingResult run_scaling(const ExperimentSpec& spec);

struct DenoisingRow {
  std::size_t value = 0;
  double estimator_mean = 0.0;
  double estimator_se = 0.0;
  double baseline_mean = 0.0;
  double baseline_se = 0.0;
  std::size_t trials_ok = 0;
};

std::vector<DenoisingRow> run_denoising(const ExperimentSpec& spec);

enum class Quantity { Mean, Median, Std, VaR5 };

std::string to_string(Quantity q);

struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

/// Linear-interpolation quartiles of a non-empty sample.
BoxStats box_stats(std::vector<double> xs);

struct QuantityErrors {
  Quantity quantity = Quantity::Mean;
  std::vector<double> dist_nn;
  std::vector<double> baseline;
  /// Trials whose true value is below 1e-9 in magnitude.
  std::size_t excluded = 0;
  BoxStats dist_nn_stats;
  BoxStats baseline_stats;
};

/// True value of a quantity for a law (VaR5 = -F^{-1}(0.05)).
double true_quantity(const LocationScaleLaw& law, Quantity q);
double summary_quantity(const Summaries& s, Quantity q);

/// Relative errors |est - true| / |true| for Dist-NN and for the target's own
/// samples, at the first value in spec.values.
std::vector<QuantityErrors> run_quantity_eval(const ExperimentSpec& spec,
                                              const std::vector<Quantity>& quantities);

struct UniformBarycenterRow {
  std::size_t m = 0;
  std::size_t n = 0;
  double simulated_mean = 0.0;
  double closed_form = 0.0;
  double std_error = 0.0;
  double z = 0.0;
};

struct UniformBarycenterConfig {
  std::vector<std::size_t> m_list{1, 5, 20};
  std::vector<std::size_t> n_list{5, 20, 100};
  std::size_t trials = 10000;
  /// Common interval width; locations are drawn from `location_range`.
  double width = 1.0;
  Interval location_range{-5.0, 5.0};
  std::uint64_t seed = 0;
};

/// Simulated mean W2^2(empirical barycenter, Unif(abar, bbar)) against the
/// closed form, per (m, n).
std::vector<UniformBarycenterRow> verify_uniform_barycenter(const UniformBarycenterConfig& cfg);

struct RateCell {
  std::size_t k = 0;
  std::size_t n = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

struct BarycenterRateConfig {
  std::vector<std::size_t> k_list{8, 16, 32};
  std::vector<std::size_t> n_list{500};
  std::size_t trials = 2000;
  /// A base whose density stays well away from zero; a far-truncated
  /// Gaussian adds a k-independent floor that hides the 1/(nk) term.
  BaseFamily family = BaseFamily::Uniform;
  double truncation = 4.0;
  Interval location_range{-5.0, 5.0};
  Interval scale_range{1.0, 5.0};
  std::uint64_t seed = 0;
};

/// Mean W2^2(barycenter of k empirical measures of n draws, true barycenter)
/// over the k x n grid, k-major.
std::vector<RateCell> verify_barycenter_rate(const BarycenterRateConfig& cfg);

/// mean(k) / mean(2k) at fixed n for consecutive doublings present in `cells`.
std::vector<double> halving_ratios(const std::vector<RateCell>& cells, std::size_t n);
/// Power-law exponent of mean error against n at fixed k.
PowerLawFit slope_in_n(const std::vector<RateCell>& cells, std::size_t k);

}  // namespace distnn
