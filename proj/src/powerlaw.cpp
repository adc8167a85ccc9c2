#include "distnn/powerlaw.hpp"

#include <cmath>
#include <vector>

#include "distnn/error.hpp"

namespace distnn {

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::SizeMismatch, "power-law fit: length mismatch");
  if (x.size() < 2) throw Error(ErrorCode::InvalidArgument, "power-law fit needs >= 2 points");
  const std::size_t n = x.size();
  std::vector<double> lx(n);
  std::vector<double> ly(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0) || !std::isfinite(x[k]) || !std::isfinite(y[k])) {
      throw Error(ErrorCode::InvalidArgument, "power-law fit needs positive finite data");
    }
    lx[k] = std::log(x[k]);
    ly[k] = std::log(y[k]);
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
    syy += (ly[k] - my) * (ly[k] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::InvalidArgument, "power-law fit: x is constant");

  PowerLawFit fit;
  fit.points = n;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.amplitude = std::exp(intercept);
  double sse = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = ly[k] - (intercept + fit.exponent * lx[k]);
    sse += r * r;
  }
  fit.rms_log_residual = std::sqrt(sse / static_cast<double>(n));
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

}  // namespace distnn
