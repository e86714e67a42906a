#pragma once

// Frequency-conditioned contextualization shifts: Self-Similarity Change (SSC)
// between a vanilla and a fine-tuned corpus, and the prefix-correlation curve
// used to test whether two model pairs shift the same tokens the same way.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "isolab/corpus.hpp"
#include "isolab/error.hpp"
#include "isolab/geometry.hpp"
#include "isolab/stats.hpp"

namespace isolab {

struct TokenFrequency {
  std::string token;
  std::uint64_t frequency = 0;
};

struct FrequentTokens {
  std::vector<TokenFrequency> tokens;
  /// Fewer than the requested number of tokens qualified.
  bool truncated = false;
};

/// Most frequent qualifying tokens of a layer: descending occurrence count,
/// ties by first appearance. Only tokens seen in at least two sentences
/// qualify, since self-similarity is undefined otherwise.
inline FrequentTokens top_frequent_tokens(const EmbeddingCorpus& corpus, std::uint64_t layer, std::size_t n,
                                          bool skip_specials = false) {
  if (n < 1) throw LookupError("top_frequent_tokens needs n >= 1");
  struct Stats {
    std::uint64_t count = 0;
    std::size_t first = 0;
    std::set<std::uint64_t> sentences;
  };
  std::unordered_map<std::string, Stats> stats;
  const auto recs = corpus.layer_records(layer);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    auto [it, inserted] = stats.try_emplace(recs[i].token);
    if (inserted) it->second.first = i;
    ++it->second.count;
    it->second.sentences.insert(recs[i].sentence_id);
  }

  std::vector<std::pair<const std::string*, const Stats*>> ranked;
  for (const auto& [token, s] : stats) {
    if (s.count >= 2 && s.sentences.size() >= 2 && !(skip_specials && is_special_token(token))) {
      ranked.emplace_back(&token, &s);
    }
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second->count != b.second->count) return a.second->count > b.second->count;
    return a.second->first < b.second->first;
  });

  FrequentTokens out;
  out.truncated = ranked.size() < n;
  const std::size_t take = std::min(n, ranked.size());
  for (std::size_t i = 0; i < take; ++i) out.tokens.push_back({*ranked[i].first, ranked[i].second->count});
  return out;
}

struct SscRecord {
  std::string token_string;
  std::uint64_t frequency = 0;
  double ssc = 0.0;
  double ss_vanilla = 0.0;
  double ss_finetuned = 0.0;
  double ani_vanilla = 0.0;
  double ani_finetuned = 0.0;
};

struct SscTable {
  std::vector<SscRecord> records;
  /// Tokens absent or not qualifying in either corpus.
  std::vector<std::string> skipped;
};

/// ssc = (ss_finetuned - ani_finetuned) - (ss_vanilla - ani_vanilla) per token,
/// each anisotropy baseline drawn from its own corpus with the same SampleSpec.
/// `frequency` is the occurrence count in the vanilla corpus.
inline SscTable ssc_table(const EmbeddingCorpus& vanilla, std::uint64_t vanilla_layer,
                          const EmbeddingCorpus& finetuned, std::uint64_t finetuned_layer,
                          const std::vector<std::string>& tokens, const SampleSpec& spec) {
  const double ani_v = anisotropy_baseline(sample_tokens(vanilla, vanilla_layer, spec));
  const double ani_f = anisotropy_baseline(sample_tokens(finetuned, finetuned_layer, spec));
  const auto groups_v = group_by_token(vanilla, vanilla_layer);
  const auto groups_f = group_by_token(finetuned, finetuned_layer);

  SscTable table;
  for (const auto& token : tokens) {
    const auto gv = groups_v.find(token);
    const auto gf = groups_f.find(token);
    if (gv == groups_v.end() || gf == groups_f.end()) {
      table.skipped.push_back(token);
      continue;
    }
    const auto ss_v = self_similarity(gv->second);
    const auto ss_f = self_similarity(gf->second);
    if (!ss_v || !ss_f) {
      table.skipped.push_back(token);
      continue;
    }
    SscRecord r;
    r.token_string = token;
    r.frequency = gv->second.size();
    r.ss_vanilla = *ss_v;
    r.ss_finetuned = *ss_f;
    r.ani_vanilla = ani_v;
    r.ani_finetuned = ani_f;
    r.ssc = (r.ss_finetuned - r.ani_finetuned) - (r.ss_vanilla - r.ani_vanilla);
    table.records.push_back(std::move(r));
  }
  return table;
}

inline SscTable ssc_table(const EmbeddingCorpus& vanilla, const EmbeddingCorpus& finetuned, std::uint64_t layer,
                          const std::vector<std::string>& tokens, const SampleSpec& spec) {
  return ssc_table(vanilla, layer, finetuned, layer, tokens, spec);
}

struct AlignedSsc {
  std::vector<SscRecord> a;
  std::vector<SscRecord> b;
  /// Tokens of `a` with no counterpart in `b`, and vice versa.
  std::vector<std::string> skipped;
};

/// Restricts two SSC lists to their shared tokens, in the order of `a`.
inline AlignedSsc align_ssc(const std::vector<SscRecord>& a, const std::vector<SscRecord>& b) {
  std::map<std::string, const SscRecord*> by_token;
  for (const auto& r : b) by_token.emplace(r.token_string, &r);
  AlignedSsc out;
  std::set<std::string> used;
  for (const auto& r : a) {
    const auto it = by_token.find(r.token_string);
    if (it == by_token.end()) {
      out.skipped.push_back(r.token_string);
      continue;
    }
    out.a.push_back(r);
    out.b.push_back(*it->second);
    used.insert(r.token_string);
  }
  for (const auto& r : b) {
    if (!used.contains(r.token_string)) out.skipped.push_back(r.token_string);
  }
  return out;
}

struct CorrelationCurve {
  std::vector<std::size_t> n_values;
  /// Pearson correlation of the first n values; nullopt for n < 3 or zero variance.
  std::vector<std::optional<double>> correlations;
  std::size_t argmax_n = 0;
  double max_corr = 0.0;
};

/// Prefix correlations of two aligned SSC lists for n = 1..N. The argmax
/// resolves ties to the smallest n.
inline CorrelationCurve correlation_curve(const std::vector<SscRecord>& a, const std::vector<SscRecord>& b) {
  if (a.size() != b.size()) throw NumericError("correlation curve needs aligned lists of equal length");
  if (a.size() < 3) throw NumericError("correlation curve needs at least 3 aligned tokens");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].token_string != b[i].token_string) {
      throw NumericError("correlation curve lists are not aligned at position " + std::to_string(i));
    }
  }
  std::vector<double> xs(a.size()), ys(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    xs[i] = a[i].ssc;
    ys[i] = b[i].ssc;
  }

  CorrelationCurve curve;
  bool found = false;
  for (std::size_t n = 1; n <= xs.size(); ++n) {
    curve.n_values.push_back(n);
    std::optional<double> c;
    if (n >= 3) c = pearson_prefix(xs, ys, n);
    curve.correlations.push_back(c);
    if (c && (!found || *c > curve.max_corr)) {
      curve.max_corr = *c;
      curve.argmax_n = n;
      found = true;
    }
  }
  if (!found) throw NumericError("correlation curve has no defined entry (zero variance in every prefix)");
  return curve;
}

}  // namespace isolab
