#pragma once

#include <cmath>
#include <vector>

#include "frohlich/errors.hpp"

namespace frohlich::analysis {

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;         // y = prefactor * x^exponent
  double exponent_stderr = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;  // log(y) - fitted log(y)
};

/// Least-squares line through (log x, log y).
inline PowerLawFit scaling_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("scaling fit needs matching x and y");
  const std::size_t n = x.size();
  if (n < 4) throw ValidationError("scaling fit needs at least 4 points");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ValidationError("scaling fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 1e-24 * (1.0 + mx * mx))) throw ValidationError("scaling fit grid is degenerate");
  PowerLawFit f;
  f.exponent = sxy / sxx;
  const double intercept = my - f.exponent * mx;
  f.prefactor = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (intercept + f.exponent * lx[i]);
    f.residuals.push_back(r);
    ss += r * r;
  }
  f.exponent_stderr = std::sqrt(ss / static_cast<double>(n - 2) / sxx);
  f.r_squared = syy > 0.0 ? 1.0 - ss / syy : 1.0;
  return f;
}

}  // namespace frohlich::analysis
