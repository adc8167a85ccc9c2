#include "distnn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "distnn/error.hpp"
#include "distnn/summation.hpp"

namespace distnn {

namespace {

const boost::math::normal_distribution<double> kStdNormal{};

double phi(double z) {
  if (!std::isfinite(z)) return 0.0;
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// z * phi(z), with the limits at +-infinity.
double z_phi(double z) { return std::isfinite(z) ? z * phi(z) : 0.0; }

double normal_quantile(double t) {
  if (t <= 0.0) return -std::numeric_limits<double>::infinity();
  if (t >= 1.0) return std::numeric_limits<double>::infinity();
  return boost::math::quantile(kStdNormal, t);
}

void require_unit_interval(double t0, double t1) {
  if (!(t0 >= 0.0 && t0 <= t1 && t1 <= 1.0)) {
    throw Error(ErrorCode::OutOfDomain, "partial moment bounds must satisfy 0 <= t0 <= t1 <= 1");
  }
}

}  // namespace

BaseLaw::BaseLaw(BaseFamily family, double truncation) : family_(family), truncation_(truncation) {
  if (family_ == BaseFamily::TruncatedGaussian) {
    if (!(truncation_ > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "truncation point must be positive");
    }
    mass_lo_ = boost::math::cdf(kStdNormal, -truncation_);
    mass_ = boost::math::cdf(kStdNormal, truncation_) - mass_lo_;
  }
}

double BaseLaw::quantile(double t) const {
  switch (family_) {
    case BaseFamily::Uniform: return t;
    case BaseFamily::Gaussian: return normal_quantile(t);
    case BaseFamily::TruncatedGaussian:
      if (t <= 0.0) return -truncation_;
      if (t >= 1.0) return truncation_;
      return std::clamp(normal_quantile(mass_lo_ + t * mass_), -truncation_, truncation_);
  }
  return 0.0;
}

double BaseLaw::density(double x) const {
  switch (family_) {
    case BaseFamily::Uniform: return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
    case BaseFamily::Gaussian: return phi(x);
    case BaseFamily::TruncatedGaussian:
      return std::fabs(x) <= truncation_ ? phi(x) / mass_ : 0.0;
  }
  return 0.0;
}

double BaseLaw::density_at_quantile(double t) const {
  if (family_ == BaseFamily::Uniform) return 1.0;
  return density(quantile(t));
}

double BaseLaw::mean() const noexcept {
  return family_ == BaseFamily::Uniform ? 0.5 : 0.0;
}

double BaseLaw::second_moment() const noexcept {
  switch (family_) {
    case BaseFamily::Uniform: return 1.0 / 3.0;
    case BaseFamily::Gaussian: return 1.0;
    case BaseFamily::TruncatedGaussian:
      return 1.0 - 2.0 * truncation_ * phi(truncation_) / mass_;
  }
  return 0.0;
}

double BaseLaw::partial_first_moment(double t0, double t1) const {
  require_unit_interval(t0, t1);
  switch (family_) {
    case BaseFamily::Uniform: return 0.5 * (t1 - t0) * (t1 + t0);
    case BaseFamily::Gaussian: return phi(quantile(t0)) - phi(quantile(t1));
    case BaseFamily::TruncatedGaussian:
      return (phi(quantile(t0)) - phi(quantile(t1))) / mass_;
  }
  return 0.0;
}

double BaseLaw::partial_second_moment(double t0, double t1) const {
  require_unit_interval(t0, t1);
  switch (family_) {
    case BaseFamily::Uniform: return (t1 * t1 * t1 - t0 * t0 * t0) / 3.0;
    case BaseFamily::Gaussian:
      return (t1 - t0) - (z_phi(quantile(t1)) - z_phi(quantile(t0)));
    case BaseFamily::TruncatedGaussian:
      return (t1 - t0) - (z_phi(quantile(t1)) - z_phi(quantile(t0))) / mass_;
  }
  return 0.0;
}

double LocationScaleLaw::density_at_quantile(double t) const {
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::DegenerateDensity, "point mass has no density");
  }
  return base.density_at_quantile(t) / scale;
}

double LocationScaleLaw::density(double x) const {
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::DegenerateDensity, "point mass has no density");
  }
  return base.density((x - location) / scale) / scale;
}

double LocationScaleLaw::stddev() const {
  const double m = base.mean();
  return std::fabs(scale) * std::sqrt(std::max(0.0, base.second_moment() - m * m));
}

std::vector<double> LocationScaleLaw::sample(Rng& rng, std::size_t n) const {
  std::vector<double> out(n);
  for (auto& x : out) x = quantile(rng.open01());
  return out;
}

EmpiricalDistribution LocationScaleLaw::sample_sorted(Rng& rng, std::size_t n) const {
  std::vector<double> out(n);
  double total = 0.0;
  for (auto& x : out) {
    total -= std::log(rng.open01());
    x = total;
  }
  total -= std::log(rng.open01());
  // x / total can round up to 1 when the last spacing is tiny.
  constexpr double kBelowOne = 1.0 - 0x1.0p-53;
  for (auto& x : out) x = quantile(std::min(x / total, kBelowOne));
  if (!std::is_sorted(out.begin(), out.end())) return EmpiricalDistribution::from_samples(out);
  return EmpiricalDistribution::from_sorted(std::move(out));
}

double law_w2_sq(const LocationScaleLaw& a, const LocationScaleLaw& b) {
  if (a.base.family() != b.base.family() || a.base.truncation() != b.base.truncation()) {
    throw Error(ErrorCode::InvalidArgument, "law_w2_sq needs laws from the same base family");
  }
  const double dl = a.location - b.location;
  const double ds = a.scale - b.scale;
  if (a.base.family() == BaseFamily::Uniform) {
    // Unif(a0, a1) vs Unif(b0, b1): ((a0-b0)^2 + (a1-b1)^2 + (a0-b0)(a1-b1)) / 3.
    const double p = dl;
    const double q = dl + ds;
    return (p * p + q * q + p * q) / 3.0;
  }
  return dl * dl + 2.0 * dl * ds * a.base.mean() + ds * ds * a.base.second_moment();
}

BasePieces base_pieces(const BaseLaw& base, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "base_pieces needs n >= 1");
  BasePieces pieces;
  pieces.means.resize(n);
  const long double width = 1.0L / static_cast<long double>(n);
  long double within = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    const double t0 = static_cast<double>(k) / static_cast<double>(n);
    const double t1 = static_cast<double>(k + 1) / static_cast<double>(n);
    const long double p1 = base.partial_first_moment(t0, t1);
    const long double mean = p1 / width;
    pieces.means[k] = static_cast<double>(mean);
    if (base.family() == BaseFamily::Uniform) {
      within += width * width * width / 12.0L;
    } else {
      const long double p2 = base.partial_second_moment(t0, t1);
      within += std::max(0.0L, p2 - p1 * mean);
    }
  }
  pieces.within = static_cast<double>(within);
  return pieces;
}

double w2_sq_to_law(const EmpiricalDistribution& d, const LocationScaleLaw& law) {
  return w2_sq_to_law(d, law, base_pieces(law.base, d.size()));
}

double w2_sq_to_law(const EmpiricalDistribution& d, const LocationScaleLaw& law,
                    const BasePieces& pieces) {
  const std::size_t n = d.size();
  if (pieces.means.size() != n) {
    throw Error(ErrorCode::SizeMismatch, "piece table does not match the sample count");
  }
  CompensatedSum acc;
  for (std::size_t k = 0; k < n; ++k) {
    const double gap = d[k] - (law.location + law.scale * pieces.means[k]);
    acc.add(gap * gap);
  }
  return acc.value() / static_cast<double>(n) + law.scale * law.scale * pieces.within;
}

TrueDistributions::TrueDistributions(std::size_t rows, std::size_t cols,
                                     std::vector<LocationScaleLaw> laws)
    : rows_(rows), cols_(cols), laws_(std::move(laws)) {
  if (laws_.size() != rows_ * cols_) {
    throw Error(ErrorCode::SizeMismatch, "TrueDistributions: law count does not match grid");
  }
}

const LocationScaleLaw& TrueDistributions::law(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) {
    throw Error(ErrorCode::IndexOutOfRange, "TrueDistributions: cell out of range");
  }
  return laws_[i * cols_ + j];
}

LocationScaleLaw latent_law(const DgpSpec& spec, const std::vector<double>& row_factor,
                            const std::vector<double>& col_factor) {
  const BaseLaw base(spec.base, spec.truncation);
  if (spec.kind == DgpKind::Homoscedastic) {
    double inner = 0.0;
    for (std::size_t k = 0; k < row_factor.size(); ++k) inner += row_factor[k] * col_factor[k];
    return {base, inner, spec.sigma * spec.sigma};
  }
  return {base, spec.location_range.at(row_factor[0]), spec.scale_range.at(col_factor[0])};
}

std::size_t samples_in_column(const DgpSpec& spec, std::size_t j) {
  if (spec.n_per_entry.empty()) {
    throw Error(ErrorCode::InvalidArgument, "DgpSpec.n_per_entry is empty");
  }
  return spec.n_per_entry.size() == 1 ? spec.n_per_entry.front() : spec.n_per_entry.at(j);
}

SyntheticPanel generate(const DgpSpec& spec, std::size_t rows, std::size_t cols) {
  if (spec.n_per_entry.size() != 1 && spec.n_per_entry.size() != cols) {
    throw Error(ErrorCode::SizeMismatch, "n_per_entry must hold one count or one per column");
  }
  if (spec.kind == DgpKind::Heteroscedastic && !(spec.scale_range.lo > 0.0 && spec.scale_range.hi > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "scale range must be strictly positive");
  }
  if (spec.kind == DgpKind::Homoscedastic && spec.latent_dim == 0) {
    throw Error(ErrorCode::InvalidArgument, "latent dimension must be positive");
  }

  LatentFactors factors;
  factors.dim = spec.kind == DgpKind::Homoscedastic ? spec.latent_dim : 1;
  Rng factor_rng(derive_seed(spec.seed, {0}));
  auto draw = [&](std::size_t count) {
    std::vector<std::vector<double>> out(count, std::vector<double>(factors.dim));
    for (auto& f : out) {
      for (auto& x : f) x = factor_rng.open01();
    }
    return out;
  };
  factors.row_factors = draw(rows);
  factors.col_factors = draw(cols);

  std::vector<LocationScaleLaw> laws;
  laws.reserve(rows * cols);
  DistributionalMatrix matrix(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      laws.push_back(latent_law(spec, factors.row_factors[i], factors.col_factors[j]));
      const std::size_t n = samples_in_column(spec, j);
      if (n == 0) throw Error(ErrorCode::InvalidArgument, "samples per entry must be positive");
      Rng cell_rng(derive_seed(spec.seed, {1, i, j}));
      matrix.set(i, j, laws.back().sample_sorted(cell_rng, n));
    }
  }
  return {std::move(matrix), TrueDistributions(rows, cols, std::move(laws)), std::move(factors)};
}

double true_w2(const TrueDistributions& truth, Cell a, Cell b) {
  return std::sqrt(law_w2_sq(truth.law(a.row, a.col), truth.law(b.row, b.col)));
}

}  // namespace distnn
