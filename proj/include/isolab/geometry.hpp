#pragma once

// Isotropy and contextualization metrics over token embeddings: anisotropy
// baseline, self-similarity, intra-sentence similarity, and per-layer reports.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "isolab/corpus.hpp"
#include "isolab/error.hpp"
#include "isolab/vector_ops.hpp"

namespace isolab {

namespace detail {

/// Rows of unit vectors in double precision, stored row-major.
struct UnitRows {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<double> norms;

  const double* row(std::size_t i) const { return values.data() + i * dim; }
};

template <RecordRange R>
UnitRows unit_rows(const R& samples) {
  UnitRows out;
  for (const auto& e : samples) {
    const TokenRecord& r = record_ref(e);
    if (out.rows == 0) {
      out.dim = r.vector.size();
    } else if (r.vector.size() != out.dim) {
      throw NumericError("dimension mismatch inside sample");
    }
    const double norm = l2_norm(r.vector);
    if (norm == 0.0) throw NumericError("zero-norm vector at record " + std::to_string(r.index));
    for (float x : r.vector) out.values.push_back(static_cast<double>(x) / norm);
    out.norms.push_back(norm);
    ++out.rows;
  }
  return out;
}

/// Mean of u.v over all unordered pairs of distinct rows, via
/// sum_{k != l} u_k.u_l = |sum_k u_k|^2 - sum_k |u_k|^2 (index-ordered sums).
inline double mean_pairwise_dot(const UnitRows& u) {
  std::vector<double> total(u.dim, 0.0);
  double diagonal = 0.0;
  for (std::size_t k = 0; k < u.rows; ++k) {
    const double* row = u.row(k);
    for (std::size_t i = 0; i < u.dim; ++i) {
      total[i] += row[i];
      diagonal += row[i] * row[i];
    }
  }
  double off_diagonal = -diagonal;
  for (double t : total) off_diagonal += t * t;
  const double n = static_cast<double>(u.rows);
  return off_diagonal / (n * (n - 1.0));
}

}  // namespace detail

/// Mean cosine over every unordered pair of the sample. The sample should
/// come from distinct sentences (see sample_tokens).
template <RecordRange R>
double anisotropy_baseline(const R& samples) {
  const auto rows = detail::unit_rows(samples);
  if (rows.rows < 2) throw NumericError("anisotropy baseline needs at least 2 samples");
  return detail::mean_pairwise_dot(rows);
}

/// Mean pairwise cosine among the occurrences of one token type.
///
/// Returns nullopt when the token does not qualify (fewer than two
/// occurrences, or all occurrences inside a single sentence); numeric
/// failures throw.
template <RecordRange R>
std::optional<double> self_similarity(const R& occurrences) {
  std::set<std::uint64_t> sentences;
  std::size_t count = 0;
  for (const auto& e : occurrences) {
    sentences.insert(record_ref(e).sentence_id);
    ++count;
  }
  if (count < 2 || sentences.size() < 2) return std::nullopt;
  return detail::mean_pairwise_dot(detail::unit_rows(occurrences));
}

/// Mean cosine between each token of one sentence and the sentence's
/// mean-pooled vector.
template <RecordRange R>
double intra_sentence_similarity(const R& sentence_tokens) {
  std::vector<double> mean;
  std::size_t n = 0;
  std::uint64_t sentence = 0;
  for (const auto& e : sentence_tokens) {
    const TokenRecord& r = record_ref(e);
    if (n == 0) {
      mean.assign(r.vector.size(), 0.0);
      sentence = r.sentence_id;
    } else if (r.sentence_id != sentence) {
      throw NumericError("intra-sentence similarity over tokens from different sentences");
    } else if (r.vector.size() != mean.size()) {
      throw NumericError("dimension mismatch inside sentence");
    }
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += static_cast<double>(r.vector[i]);
    ++n;
  }
  if (n == 0) throw NumericError("intra-sentence similarity of an empty sentence");
  for (double& m : mean) m /= static_cast<double>(n);
  if (l2_norm(mean) == 0.0) throw NumericError("sentence mean vector has zero norm");

  double acc = 0.0;
  for (const auto& e : sentence_tokens) acc += cosine(record_ref(e).vector, mean);
  return acc / static_cast<double>(n);
}

/// Per-layer metric bundle. Adjusted values subtract the same baseline value
/// that is reported, never a re-sampled one.
struct GeometryReport {
  std::uint64_t layer = 0;
  double anisotropy_baseline = 0.0;
  double mean_self_similarity = 0.0;
  double mean_intra_similarity = 0.0;
  double adjusted_self_similarity = 0.0;
  double adjusted_intra_similarity = 0.0;
  double mean_l2_norm = 0.0;
  std::uint64_t sample_seed = 0;
  std::uint64_t n_pairs = 0;
};

struct ReportOptions {
  /// Drop [CLS]/[SEP]-style tokens before intra-sentence pooling.
  bool exclude_specials_from_intra = false;
};

/// Aggregates one layer: baseline and mean L2 norm from the seeded sample,
/// self-similarity averaged over qualifying token types (unweighted), and
/// intra-sentence similarity averaged over sentences. A layer where no token
/// type qualifies reports NaN self-similarity.
inline GeometryReport layer_report(const EmbeddingCorpus& corpus, std::uint64_t layer, const SampleSpec& spec,
                                   const ReportOptions& options = {}) {
  GeometryReport report;
  report.layer = layer;
  report.sample_seed = spec.seed;

  const auto sample = sample_tokens(corpus, layer, spec);
  report.anisotropy_baseline = anisotropy_baseline(sample);
  const auto n = static_cast<std::uint64_t>(sample.size());
  report.n_pairs = n * (n - 1) / 2;
  double norm_sum = 0.0;
  for (const auto& r : sample) norm_sum += l2_norm(r.vector);
  report.mean_l2_norm = norm_sum / static_cast<double>(sample.size());

  double self_sum = 0.0;
  std::size_t self_count = 0;
  for (const auto& [token, occurrences] : group_by_token(corpus, layer)) {
    if (const auto ss = self_similarity(occurrences)) {
      self_sum += *ss;
      ++self_count;
    }
  }
  report.mean_self_similarity =
      self_count > 0 ? self_sum / static_cast<double>(self_count) : std::numeric_limits<double>::quiet_NaN();

  double intra_sum = 0.0;
  std::size_t intra_count = 0;
  for (const auto& sentence : corpus.sentences(layer)) {
    if (options.exclude_specials_from_intra) {
      std::vector<const TokenRecord*> kept;
      for (const auto& r : sentence) {
        if (!is_special_token(r.token)) kept.push_back(&r);
      }
      if (kept.empty()) continue;
      intra_sum += intra_sentence_similarity(kept);
    } else {
      intra_sum += intra_sentence_similarity(sentence);
    }
    ++intra_count;
  }
  if (intra_count == 0) throw NumericError("no sentence left for intra-sentence similarity");
  report.mean_intra_similarity = intra_sum / static_cast<double>(intra_count);

  report.adjusted_self_similarity = report.mean_self_similarity - report.anisotropy_baseline;
  report.adjusted_intra_similarity = report.mean_intra_similarity - report.anisotropy_baseline;
  return report;
}

}  // namespace isolab
