#pragma once

// Dimension-level decomposition of cosine similarity: per-dimension expected
// contributions, rogue-dimension ranking, dominance shares, and the
// informativity of the representation once top-ranked dimensions are zeroed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "isolab/corpus.hpp"
#include "isolab/error.hpp"
#include "isolab/geometry.hpp"
#include "isolab/stats.hpp"
#include "isolab/vector_ops.hpp"

namespace isolab {

struct DominanceProfile {
  std::uint64_t layer = 0;
  /// contributions[i] = mean over unordered pairs of u_i v_i / (|u| |v|).
  std::vector<double> contributions;
  /// Dimensions by descending |contribution|, ties to the lower index.
  std::vector<std::size_t> sorted_indices;
  double total = 0.0;
  /// cumulative_topk[k - 1] = share of `total` carried by the top-k dimensions.
  /// Empty when the dominance shares are undefined (total <= 0).
  std::vector<double> cumulative_topk;

  std::size_t dim() const { return contributions.size(); }
  bool defined() const { return total > 0.0; }
};

namespace detail {

inline void require_defined(const DominanceProfile& profile) {
  if (!profile.defined()) {
    throw NumericError("dominance undefined: non-positive total contribution (near-isotropic sample)");
  }
}

}  // namespace detail

/// Expected per-dimension contribution to the mean pairwise cosine of `samples`.
template <RecordRange R>
DominanceProfile dim_contributions(const R& samples, std::uint64_t layer = 0) {
  const auto rows = detail::unit_rows(samples);
  if (rows.rows < 2) throw NumericError("dimension contributions need at least 2 samples");

  DominanceProfile p;
  p.layer = layer;
  std::vector<double> column_sum(rows.dim, 0.0), column_sq(rows.dim, 0.0);
  for (std::size_t k = 0; k < rows.rows; ++k) {
    const double* row = rows.row(k);
    for (std::size_t i = 0; i < rows.dim; ++i) {
      column_sum[i] += row[i];
      column_sq[i] += row[i] * row[i];
    }
  }
  const double n = static_cast<double>(rows.rows);
  p.contributions.resize(rows.dim);
  for (std::size_t i = 0; i < rows.dim; ++i) {
    p.contributions[i] = (column_sum[i] * column_sum[i] - column_sq[i]) / (n * (n - 1.0));
  }
  p.total = std::accumulate(p.contributions.begin(), p.contributions.end(), 0.0);

  p.sorted_indices.resize(rows.dim);
  std::iota(p.sorted_indices.begin(), p.sorted_indices.end(), std::size_t{0});
  std::stable_sort(p.sorted_indices.begin(), p.sorted_indices.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(p.contributions[a]) > std::abs(p.contributions[b]);
  });

  if (p.defined()) {
    p.cumulative_topk.resize(rows.dim);
    double prefix = 0.0;
    for (std::size_t k = 0; k < rows.dim; ++k) {
      prefix += p.contributions[p.sorted_indices[k]];
      p.cumulative_topk[k] = prefix / p.total;
    }
  }
  return p;
}

/// Share of the total carried by the top-k ranked dimensions.
inline double topk_share(const DominanceProfile& profile, std::size_t k) {
  detail::require_defined(profile);
  if (k < 1 || k > profile.dim()) {
    throw LookupError("top-k share needs 1 <= k <= " + std::to_string(profile.dim()));
  }
  return profile.cumulative_topk[k - 1];
}

/// Smallest m whose top-m ranked dimensions carry at least `fraction` of the total.
inline std::size_t dims_for_fraction(const DominanceProfile& profile, double fraction) {
  detail::require_defined(profile);
  if (!(fraction > 0.0 && fraction <= 1.0)) throw LookupError("fraction must lie in (0, 1]");
  const double target = fraction * profile.total;
  double prefix = 0.0;
  for (std::size_t m = 0; m < profile.dim(); ++m) {
    prefix += profile.contributions[profile.sorted_indices[m]];
    if (prefix >= target) return m + 1;
  }
  // Reached only through rounding in the last ulp of the full sum.
  return profile.dim();
}

/// Copy of `vec` with its k top-ranked coordinates zeroed.
template <RealVector V>
std::vector<double> remove_top_dims(const V& vec, const DominanceProfile& profile, std::size_t k) {
  if (std::ranges::size(vec) != profile.dim()) throw NumericError("vector dimension does not match profile");
  if (k >= profile.dim()) {
    throw LookupError("cannot remove " + std::to_string(k) + " of " + std::to_string(profile.dim()) +
                      " dimensions");
  }
  std::vector<double> out(std::ranges::begin(vec), std::ranges::end(vec));
  for (std::size_t i = 0; i < k; ++i) out[profile.sorted_indices[i]] = 0.0;
  return out;
}

inline std::vector<double> remove_top_dims(const TokenRecord& record, const DominanceProfile& profile,
                                           std::size_t k) {
  return remove_top_dims(record.vector, profile, k);
}

struct InformativityResult {
  std::size_t k = 0;
  double r = 0.0;
  double r_squared = 0.0;
  std::uint64_t n_pairs = 0;
};

/// Informativity for several k at once.
///
/// Dot products over the dimensions kept at the largest k are computed once;
/// smaller k add removed dimensions back, so each k costs O(n^2) per restored
/// dimension. The strict lower triangles (row-major, i > j) of the cosine
/// matrices before and after removal are correlated with Pearson r.
template <RecordRange R>
std::vector<InformativityResult> informativity_curve(const R& samples, const DominanceProfile& profile,
                                                     std::vector<std::size_t> ks) {
  std::vector<const std::vector<float>*> rows;
  for (const auto& e : samples) rows.push_back(&record_ref(e).vector);
  const std::size_t n = rows.size();
  if (n < 3) throw NumericError("informativity needs at least 3 samples");
  const std::size_t dim = profile.dim();
  for (const auto* v : rows) {
    if (v->size() != dim) throw NumericError("sample dimension does not match profile");
  }
  for (const auto k : ks) {
    if (k >= dim) throw LookupError("cannot remove " + std::to_string(k) + " of " + std::to_string(dim) + " dimensions");
  }
  if (ks.empty()) return {};

  const std::size_t n_pairs = n * (n - 1) / 2;
  std::vector<double> dots(n_pairs, 0.0), sq_norms(n, 0.0);
  auto add_dimension = [&](std::size_t d) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>((*rows[i])[d]);
      sq_norms[i] += x * x;
    }
    for (std::size_t i = 1, p = 0; i < n; ++i) {
      const double xi = static_cast<double>((*rows[i])[d]);
      for (std::size_t j = 0; j < i; ++j, ++p) dots[p] += xi * static_cast<double>((*rows[j])[d]);
    }
  };
  auto cosines = [&](std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      if (sq_norms[i] <= 0.0) throw NumericError("zero-norm vector after removing top dimensions");
    }
    out.resize(n_pairs);
    for (std::size_t i = 1, p = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j, ++p) out[p] = dots[p] / std::sqrt(sq_norms[i] * sq_norms[j]);
    }
  };

  std::vector<double> original, post;
  for (std::size_t d = 0; d < dim; ++d) add_dimension(d);
  cosines(original);

  std::vector<std::size_t> order(ks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ks[a] > ks[b]; });

  std::fill(dots.begin(), dots.end(), 0.0);
  std::fill(sq_norms.begin(), sq_norms.end(), 0.0);
  std::size_t kept_from = ks[order.front()];
  std::vector<bool> removed(dim, false);
  for (std::size_t r = 0; r < kept_from; ++r) removed[profile.sorted_indices[r]] = true;
  for (std::size_t d = 0; d < dim; ++d) {
    if (!removed[d]) add_dimension(d);
  }

  std::vector<InformativityResult> results(ks.size());
  for (const auto idx : order) {
    for (; kept_from > ks[idx]; --kept_from) add_dimension(profile.sorted_indices[kept_from - 1]);
    InformativityResult res;
    res.k = ks[idx];
    res.n_pairs = n_pairs;
    if (res.k == 0) {
      post = original;
    } else {
      cosines(post);
    }
    const auto r = pearson(original, post);
    if (!r) throw NumericError("informativity undefined: zero variance in a similarity list");
    res.r = *r;
    res.r_squared = *r * *r;
    results[idx] = res;
  }
  return results;
}

template <RecordRange R>
InformativityResult informativity(const R& samples, const DominanceProfile& profile, std::size_t k) {
  return informativity_curve(samples, profile, {k}).front();
}

}  // namespace isolab
