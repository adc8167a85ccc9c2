#pragma once

#include <cstddef>
#include <span>

namespace distnn {

/// y = amplitude * x^exponent, fitted by ordinary least squares on
/// (log x, log y).
struct PowerLawFit {
  double amplitude = 0.0;
  double exponent = 0.0;
  double r_squared = 0.0;
  /// Root-mean-square residual in log space.
  double rms_log_residual = 0.0;
  std::size_t points = 0;
};

/// Throws InvalidArgument for fewer than two points, mismatched lengths,
/// non-positive values or a constant x.
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

}  // namespace distnn
