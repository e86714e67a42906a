#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>

#include "isolab/error.hpp"
#include "isolab/vector_ops.hpp"

namespace isolab {

/// Pearson correlation of the first `n` entries of x and y (two-pass,
/// double accumulation). nullopt when n < 2 or either prefix has zero variance.
template <RealVector X, RealVector Y>
std::optional<double> pearson_prefix(const X& x, const Y& y, std::size_t n) {
  if (n > std::ranges::size(x) || n > std::ranges::size(y)) {
    throw NumericError("pearson: prefix longer than input");
  }
  if (n < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += static_cast<double>(x[i]);
    my += static_cast<double>(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(x[i]) - mx;
    const double dy = static_cast<double>(y[i]) - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  // sqrt of the product keeps pearson(x, x) exactly 1.
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

template <RealVector X, RealVector Y>
std::optional<double> pearson(const X& x, const Y& y) {
  if (std::ranges::size(x) != std::ranges::size(y)) throw NumericError("pearson: length mismatch");
  return pearson_prefix(x, y, std::ranges::size(x));
}

}  // namespace isolab
