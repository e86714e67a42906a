#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <ranges>
#include <string>
#include <type_traits>

#include "isolab/error.hpp"

namespace isolab {

/// Any sized random-access range of arithmetic values (std::vector<float>,
/// std::span<const double>, std::array, ...).
template <class V>
concept RealVector =
    std::ranges::random_access_range<const V> && std::ranges::sized_range<const V> &&
    std::is_arithmetic_v<std::remove_cvref_t<std::ranges::range_reference_t<const V>>>;

template <RealVector U, RealVector V>
double dot(const U& u, const V& v) {
  const auto n = std::ranges::size(u);
  if (std::ranges::size(v) != n) {
    throw NumericError("dimension mismatch: " + std::to_string(n) + " vs " +
                       std::to_string(std::ranges::size(v)));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += static_cast<double>(u[i]) * static_cast<double>(v[i]);
  }
  return acc;
}

template <RealVector V>
double squared_norm(const V& v) {
  double acc = 0.0;
  for (const auto x : v) acc += static_cast<double>(x) * static_cast<double>(x);
  return acc;
}

template <RealVector V>
double l2_norm(const V& v) {
  return std::sqrt(squared_norm(v));
}

/// cos(u, v) = u.v / (|u| |v|). Throws on zero norm or mismatched dimension.
template <RealVector U, RealVector V>
double cosine(const U& u, const V& v) {
  const double uv = dot(u, v);
  const double nu = l2_norm(u);
  const double nv = l2_norm(v);
  if (nu == 0.0 || nv == 0.0) throw NumericError("cosine of a zero-norm vector");
  return uv / (nu * nv);
}

}  // namespace isolab
