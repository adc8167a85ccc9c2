#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "distnn/empdist.hpp"
#include "distnn/matrix.hpp"
#include "distnn/rng.hpp"

namespace distnn {

enum class DgpKind {
  /// Quantile sigma^2 F^{-1} + <x_row, x_col>, factors uniform on [0,1]^d.
  Homoscedastic,
  /// Quantile scale(x_col) F^{-1} + location(x_row): each row has its own
  /// location and each column its own scale.
  Heteroscedastic,
};

enum class BaseFamily {
  /// Unif(0, 1).
  Uniform,
  /// N(0, 1) conditioned on [-c, c].
  TruncatedGaussian,
  /// N(0, 1); unbounded support, so not a regular measure.
  Gaussian,
};

/// Standardised member of a location-scale family.
class BaseLaw {
 public:
  explicit BaseLaw(BaseFamily family = BaseFamily::Uniform, double truncation = 4.0);

  [[nodiscard]] BaseFamily family() const noexcept { return family_; }
  [[nodiscard]] double truncation() const noexcept { return truncation_; }

  [[nodiscard]] double quantile(double t) const;
  /// f(F^{-1}(t)).
  [[nodiscard]] double density_at_quantile(double t) const;
  [[nodiscard]] double density(double x) const;
  [[nodiscard]] double mean() const noexcept;
  [[nodiscard]] double second_moment() const noexcept;
  /// Integral of F^{-1} over [t0, t1], 0 <= t0 <= t1 <= 1.
  [[nodiscard]] double partial_first_moment(double t0, double t1) const;
  /// Integral of (F^{-1})^2 over [t0, t1].
  [[nodiscard]] double partial_second_moment(double t0, double t1) const;

 private:
  BaseFamily family_;
  double truncation_;
  double mass_lo_ = 0.0;  // Phi(-c) for the truncated family
  double mass_ = 1.0;     // Phi(c) - Phi(-c)
};

/// Law with quantile location + scale * F0^{-1}.
struct LocationScaleLaw {
  BaseLaw base;
  double location = 0.0;
  double scale = 1.0;

  [[nodiscard]] double quantile(double t) const { return location + scale * base.quantile(t); }
  /// Throws DegenerateDensity when scale <= 0.
  [[nodiscard]] double density_at_quantile(double t) const;
  /// Throws DegenerateDensity when scale <= 0.
  [[nodiscard]] double density(double x) const;
  [[nodiscard]] double mean() const { return location + scale * base.mean(); }
  [[nodiscard]] double stddev() const;
  /// n i.i.d. draws by inverse transform.
  [[nodiscard]] std::vector<double> sample(Rng& rng, std::size_t n) const;
  /// n i.i.d. draws already in ascending order: uniform order statistics
  /// from normalised exponential spacings, pushed through the quantile.
  [[nodiscard]] EmpiricalDistribution sample_sorted(Rng& rng, std::size_t n) const;
};

/// Exact W2^2 between two laws of the same base family.
double law_w2_sq(const LocationScaleLaw& a, const LocationScaleLaw& b);

/// Per-piece moments of a base quantile over the n pieces ((k-1)/n, k/n]:
/// the piece means and the summed within-piece squared deviation. A
/// location-scale law maps them affinely, so one table serves every law of
/// the same base and n.
struct BasePieces {
  std::vector<double> means;
  double within = 0.0;
};

BasePieces base_pieces(const BaseLaw& base, std::size_t n);

/// Exact W2^2 between an empirical distribution (equal atom masses) and a
/// law, integrating the step-vs-continuous quantile gap piece by piece.
double w2_sq_to_law(const EmpiricalDistribution& d, const LocationScaleLaw& law);
/// Same, reusing a table from base_pieces(law.base, d.size()).
double w2_sq_to_law(const EmpiricalDistribution& d, const LocationScaleLaw& law,
                    const BasePieces& pieces);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  [[nodiscard]] double at(double f) const { return lo + (hi - lo) * f; }
};

struct DgpSpec {
  DgpKind kind = DgpKind::Heteroscedastic;
  BaseFamily base = BaseFamily::Uniform;
  double truncation = 4.0;
  /// Homoscedastic scale parameter (the quantile is multiplied by sigma^2).
  double sigma = 1.0;
  /// Heteroscedastic location and scale ranges the factors are mapped onto.
  Interval location_range{-5.0, 5.0};
  Interval scale_range{1.0, 5.0};
  /// Homoscedastic latent dimension.
  std::size_t latent_dim = 1;
  /// Samples per entry, one per column; a single value applies to all.
  std::vector<std::size_t> n_per_entry{100};
  std::uint64_t seed = 0;
};

struct LatentFactors {
  std::size_t dim = 1;
  std::vector<std::vector<double>> row_factors;
  std::vector<std::vector<double>> col_factors;
};

class TrueDistributions {
 public:
  TrueDistributions(std::size_t rows, std::size_t cols, std::vector<LocationScaleLaw> laws);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] const LocationScaleLaw& law(std::size_t i, std::size_t j) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<LocationScaleLaw> laws_;
};

struct SyntheticPanel {
  DistributionalMatrix matrix;
  TrueDistributions truth;
  LatentFactors factors;
};

/// Law of a cell given its latent factors.
LocationScaleLaw latent_law(const DgpSpec& spec, const std::vector<double>& row_factor,
                            const std::vector<double>& col_factor);

/// Fully observed panel plus the exact laws it was drawn from. Factors come
/// from one seeded stream and each cell from its own derived stream.
SyntheticPanel generate(const DgpSpec& spec, std::size_t rows, std::size_t cols);

/// Samples per entry of column j.
std::size_t samples_in_column(const DgpSpec& spec, std::size_t j);

/// Exact W2 between the true laws of two cells.
double true_w2(const TrueDistributions& truth, Cell a, Cell b);

}  // namespace distnn
