#include "distnn/empdist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "distnn/error.hpp"
#include "distnn/summation.hpp"

namespace distnn {

namespace {

void require_finite(std::span<const double> xs) {
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (!std::isfinite(xs[k])) {
      throw Error(ErrorCode::NonFiniteSample,
                  "sample " + std::to_string(k) + " is not finite");
    }
  }
}

void require_open_unit(double t, const char* what) {
  if (!(t > 0.0 && t < 1.0)) {
    throw Error(ErrorCode::OutOfDomain,
                std::string(what) + " must lie in (0, 1), got " + std::to_string(t));
  }
}

template <class Get>
EmpiricalDistribution barycenter_impl(std::size_t count, Get get) {
  if (count == 0) throw Error(ErrorCode::EmptyCollection, "barycenter of an empty collection");
  const std::size_t n = get(0).size();
  for (std::size_t m = 1; m < count; ++m) {
    if (get(m).size() != n) {
      throw Error(ErrorCode::SizeMismatch,
                  "order-statistic barycenter needs equal sample counts (" + std::to_string(n) +
                      " vs " + std::to_string(get(m).size()) + ")");
    }
  }
  std::vector<double> out(n);
  const auto denom = static_cast<double>(count);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t m = 0; m < count; ++m) acc += get(m)[k];
    out[k] = acc / denom;
  }
  // Averages of sorted columns are sorted; the guard only absorbs rounding.
  for (std::size_t k = 1; k < n; ++k) out[k] = std::max(out[k], out[k - 1]);
  return EmpiricalDistribution::from_sorted(std::move(out));
}

template <class Get>
QuantileGrid general_barycenter_impl(std::size_t count, Get get,
                                     std::span<const double> levels) {
  if (count == 0) throw Error(ErrorCode::EmptyCollection, "barycenter of an empty collection");
  validate_levels(levels);
  QuantileGrid grid;
  grid.levels.assign(levels.begin(), levels.end());
  grid.values.resize(levels.size());
  const auto denom = static_cast<double>(count);
  for (std::size_t l = 0; l < levels.size(); ++l) {
    CompensatedSum acc;
    for (std::size_t m = 0; m < count; ++m) acc.add(get(m).quantile(levels[l]));
    grid.values[l] = acc.value() / denom;
  }
  return grid;
}

}  // namespace

EmpiricalDistribution EmpiricalDistribution::from_samples(std::span<const double> raw) {
  if (raw.empty()) throw Error(ErrorCode::EmptyInput, "empirical distribution needs samples");
  require_finite(raw);
  std::vector<double> sorted(raw.begin(), raw.end());
  std::stable_sort(sorted.begin(), sorted.end());
  return EmpiricalDistribution(std::move(sorted));
}

EmpiricalDistribution EmpiricalDistribution::from_sorted(std::vector<double> sorted) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "empirical distribution needs samples");
  require_finite(sorted);
  if (!std::is_sorted(sorted.begin(), sorted.end())) {
    throw Error(ErrorCode::InvalidArgument, "from_sorted: samples are not sorted");
  }
  return EmpiricalDistribution(std::move(sorted));
}

double EmpiricalDistribution::quantile(double t) const {
  require_open_unit(t, "quantile level");
  const std::size_t n = samples_.size();
  auto k = static_cast<std::size_t>(std::ceil(t * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  return samples_[k - 1];
}

void validate_levels(std::span<const double> levels) {
  for (std::size_t l = 0; l < levels.size(); ++l) {
    require_open_unit(levels[l], "level");
    if (l > 0 && !(levels[l] > levels[l - 1])) {
      throw Error(ErrorCode::OutOfDomain, "levels must be strictly increasing");
    }
  }
}

std::vector<double> uniform_levels(std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = static_cast<double>(k + 1) / static_cast<double>(count + 1);
  }
  return out;
}

std::vector<double> midpoint_levels(std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(count);
  }
  return out;
}

double w2_sq_equal_n(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::SizeMismatch, "w2_equal_n: sample counts differ (" +
                                             std::to_string(a.size()) + " vs " +
                                             std::to_string(b.size()) + ")");
  }
  CompensatedSum acc;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc.add(d * d);
  }
  return acc.value() / static_cast<double>(a.size());
}

double w2_equal_n(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  return std::sqrt(w2_sq_equal_n(a, b));
}

double w2_sq_general(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  // Work in units of 1/(na*nb) so every breakpoint is an integer.
  const std::uint64_t na = a.size();
  const std::uint64_t nb = b.size();
  CompensatedSum acc;
  std::uint64_t pos = 0;
  std::size_t ia = 0;
  std::size_t ib = 0;
  while (ia < na && ib < nb) {
    const std::uint64_t end_a = (ia + 1) * nb;
    const std::uint64_t end_b = (ib + 1) * na;
    const std::uint64_t end = std::min(end_a, end_b);
    const double d = a[ia] - b[ib];
    acc.add(d * d * static_cast<double>(end - pos));
    pos = end;
    if (end == end_a) ++ia;
    if (end == end_b) ++ib;
  }
  return acc.value() / (static_cast<double>(na) * static_cast<double>(nb));
}

double w2_general(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  return std::sqrt(w2_sq_general(a, b));
}

EmpiricalDistribution barycenter(std::span<const EmpiricalDistribution> ds) {
  return barycenter_impl(ds.size(), [&](std::size_t m) -> const EmpiricalDistribution& {
    return ds[m];
  });
}

EmpiricalDistribution barycenter(std::span<const EmpiricalDistribution* const> ds) {
  return barycenter_impl(ds.size(), [&](std::size_t m) -> const EmpiricalDistribution& {
    return *ds[m];
  });
}

QuantileGrid general_barycenter(std::span<const EmpiricalDistribution> ds,
                                std::span<const double> levels) {
  return general_barycenter_impl(
      ds.size(), [&](std::size_t m) -> const EmpiricalDistribution& { return ds[m]; }, levels);
}

QuantileGrid general_barycenter(std::span<const EmpiricalDistribution* const> ds,
                                std::span<const double> levels) {
  return general_barycenter_impl(
      ds.size(), [&](std::size_t m) -> const EmpiricalDistribution& { return *ds[m]; }, levels);
}

Summaries summaries(const EmpiricalDistribution& d, double var_alpha) {
  require_open_unit(var_alpha, "VaR alpha");
  const auto xs = d.samples();
  const auto n = static_cast<double>(xs.size());

  CompensatedSum total;
  for (double x : xs) total.add(x);
  Summaries s;
  s.mean = total.value() / n;

  CompensatedSum spread;
  for (double x : xs) spread.add((x - s.mean) * (x - s.mean));
  s.std = std::sqrt(spread.value() / n);

  s.median = d.quantile(0.5);

  std::vector<double> negated(xs.size());
  std::transform(xs.rbegin(), xs.rend(), negated.begin(), [](double x) { return -x; });
  s.var_at_risk = EmpiricalDistribution::from_sorted(std::move(negated)).quantile(1.0 - var_alpha);
  return s;
}

}  // namespace distnn
