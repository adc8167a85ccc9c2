#include "distnn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "distnn/error.hpp"
#include "distnn/rng.hpp"

namespace distnn {

namespace {

double normal_upper_quantile(double tail) {
  // z with P(Z > z) = tail; tail = 1/2 gives 0.
  if (tail >= 0.5) return 0.0;
  return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>{}, tail));
}

// Step quantile of a sorted sample at level p in [0, 1] (k = ceil(p R),
// clamped to [1, R]).
double sorted_quantile(std::span<const double> sorted, double p) {
  const std::size_t r = sorted.size();
  auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(r)));
  k = std::clamp<std::size_t>(k, 1, r);
  return sorted[k - 1];
}

}  // namespace

double sigma_sq(std::span<const LawEvaluator> neighbors, double t) {
  if (neighbors.empty()) throw Error(ErrorCode::EmptyCollection, "sigma^2 needs neighbors");
  if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::OutOfDomain, "sigma^2 level must lie in (0, 1)");
  double acc = 0.0;
  for (const auto& law : neighbors) {
    const double f = law.density(law.quantile(t));
    if (!(f > 0.0) || !std::isfinite(f)) {
      throw Error(ErrorCode::DegenerateDensity,
                  "neighbor density at its quantile is not positive and finite (t=" +
                      std::to_string(t) + ")");
    }
    acc += (t - t * t) / (f * f);
  }
  return acc / static_cast<double>(neighbors.size());
}

KernelDensity::KernelDensity(EmpiricalDistribution samples)
    : samples_(std::move(samples)), bandwidth_(0.0) {
  const auto xs = samples_.samples();
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  const double sd = xs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  double spread = sd;
  if (xs.size() > 1) {
    const double iqr = samples_.quantile(0.75) - samples_.quantile(0.25);
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  }
  bandwidth_ = 0.9 * spread * std::pow(n, -0.2);
}

double KernelDensity::operator()(double x) const {
  if (!(bandwidth_ > 0.0)) return std::numeric_limits<double>::infinity();
  const auto xs = samples_.samples();
  // Gaussian kernel contributions beyond 9 bandwidths are below 1e-17.
  const double reach = 9.0 * bandwidth_;
  const auto lo = std::lower_bound(xs.begin(), xs.end(), x - reach);
  const auto hi = std::upper_bound(xs.begin(), xs.end(), x + reach);
  double acc = 0.0;
  for (auto it = lo; it != hi; ++it) {
    const double z = (x - *it) / bandwidth_;
    acc += std::exp(-0.5 * z * z);
  }
  return acc / (static_cast<double>(xs.size()) * bandwidth_ * std::sqrt(2.0 * std::numbers::pi));
}

SigmaFunction::SigmaFunction(SigmaMode mode, std::vector<LawEvaluator> neighbors)
    : mode_(mode), neighbors_(std::move(neighbors)) {}

SigmaFunction SigmaFunction::oracle(const TrueDistributions& truth, const NeighborSet& neighbors) {
  std::vector<LawEvaluator> laws;
  for (const auto& nb : neighbors.members) {
    const LocationScaleLaw law = truth.law(nb.row, neighbors.target_col);
    if (!(law.scale > 0.0)) {
      throw Error(ErrorCode::DegenerateDensity, "neighbor law is a point mass");
    }
    laws.push_back({[law](double t) { return law.quantile(t); },
                    [law](double x) { return law.density(x); }});
  }
  return SigmaFunction(SigmaMode::Oracle, std::move(laws));
}

SigmaFunction SigmaFunction::kde(const DistributionalMatrix& m, const NeighborSet& neighbors) {
  std::vector<LawEvaluator> laws;
  for (const auto& nb : neighbors.members) {
    const auto& samples = m.at(nb.row, neighbors.target_col);
    auto density = std::make_shared<KernelDensity>(samples);
    laws.push_back({[samples](double t) { return samples.quantile(t); },
                    [density](double x) { return (*density)(x); }});
  }
  return SigmaFunction(SigmaMode::Kde, std::move(laws));
}

std::string_view to_string(BandMethod method) noexcept {
  switch (method) {
    case BandMethod::AsymptoticOracle: return "asymptotic_oracle";
    case BandMethod::AsymptoticKde: return "asymptotic_kde";
    case BandMethod::Bootstrap: return "bootstrap";
  }
  return "unknown";
}

double per_level_alpha(double alpha, std::size_t count, bool simultaneous) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::OutOfDomain, "alpha must lie in (0, 1]");
  }
  if (count == 0) throw Error(ErrorCode::EmptyCollection, "band needs at least one level");
  return simultaneous ? alpha / static_cast<double>(count) : alpha;
}

ConfidenceBand asymptotic_band(const ImputationResult& result, const SigmaFunction& sigma,
                               std::size_t n_j, double alpha, std::span<const double> levels,
                               bool simultaneous) {
  const std::size_t k = result.neighbors.size();
  if (k == 0) throw Error(ErrorCode::NoNeighbors, "asymptotic band needs at least one neighbor");
  if (n_j == 0) throw Error(ErrorCode::InvalidArgument, "n_j must be positive");
  validate_levels(levels);

  ConfidenceBand band;
  band.alpha = alpha;
  band.per_level_alpha = per_level_alpha(alpha, levels.size(), simultaneous);
  band.method = sigma.mode() == SigmaMode::Oracle ? BandMethod::AsymptoticOracle
                                                   : BandMethod::AsymptoticKde;
  band.simultaneous = simultaneous;
  band.levels.assign(levels.begin(), levels.end());

  const double z = normal_upper_quantile(band.per_level_alpha / 2.0);
  const double root_n = std::sqrt(static_cast<double>(n_j) * static_cast<double>(k));
  for (double t : levels) {
    const double center = result.quantile(t);
    const double half = z * std::sqrt(sigma(t)) / root_n;
    band.estimate.push_back(center);
    band.lower.push_back(center - half);
    band.upper.push_back(center + half);
  }
  return band;
}

ConfidenceBand bootstrap_band(const DistributionalMatrix& m, std::size_t i, std::size_t j,
                              double eta, double alpha, std::span<const double> levels,
                              const BootstrapConfig& cfg, bool simultaneous,
                              const NeighborOptions& opts) {
  const auto result = impute(m, i, j, eta, 0.05, opts);
  return bootstrap_band(m, result, alpha, levels, cfg, simultaneous);
}

ConfidenceBand bootstrap_band(const DistributionalMatrix& m, const ImputationResult& result,
                              double alpha, std::span<const double> levels,
                              const BootstrapConfig& cfg, bool simultaneous) {
  const auto& members = result.neighbors.members;
  if (members.empty()) throw Error(ErrorCode::NoNeighbors, "bootstrap band needs neighbors");
  if (cfg.reps_samples == 0 || cfg.reps_neighbors == 0) {
    throw Error(ErrorCode::InvalidArgument, "bootstrap replicate counts must be positive");
  }
  validate_levels(levels);
  const std::size_t j = result.neighbors.target_col;

  ConfidenceBand band;
  band.alpha = alpha;
  band.per_level_alpha = per_level_alpha(alpha, levels.size(), simultaneous);
  band.method = BandMethod::Bootstrap;
  band.simultaneous = simultaneous;
  band.levels.assign(levels.begin(), levels.end());
  for (double t : levels) band.estimate.push_back(result.quantile(t));

  const std::size_t reps = cfg.reps_neighbors * cfg.reps_samples;
  // replicate[l * reps + r]: barycenter quantile at level l in replicate r.
  std::vector<double> replicate(levels.size() * reps, 0.0);
  std::vector<std::size_t> chosen(members.size());
  std::vector<double> resample;
  for (std::size_t rn = 0; rn < cfg.reps_neighbors; ++rn) {
    Rng pick(derive_seed(cfg.seed, {rn}));
    for (auto& c : chosen) c = pick.index(members.size());
    for (std::size_t rs = 0; rs < cfg.reps_samples; ++rs) {
      const std::size_t r = rn * cfg.reps_samples + rs;
      Rng draw(derive_seed(cfg.seed, {rn, rs + 1}));
      for (std::size_t c : chosen) {
        const auto xs = m.at(members[c].row, j).samples();
        resample.resize(xs.size());
        for (auto& x : resample) x = xs[draw.index(xs.size())];
        std::sort(resample.begin(), resample.end());
        for (std::size_t l = 0; l < levels.size(); ++l) {
          replicate[l * reps + r] += sorted_quantile(resample, levels[l]);
        }
      }
      for (std::size_t l = 0; l < levels.size(); ++l) {
        replicate[l * reps + r] /= static_cast<double>(chosen.size());
      }
    }
  }

  const double tail = band.per_level_alpha / 2.0;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const std::span<double> values(replicate.data() + l * reps, reps);
    std::sort(values.begin(), values.end());
    band.lower.push_back(sorted_quantile(values, tail));
    band.upper.push_back(sorted_quantile(values, 1.0 - tail));
  }
  return band;
}

}  // namespace distnn
