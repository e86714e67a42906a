#pragma once

// Synthetic paired-sentence data for the contrastive lab. Each pair shares a
// topic; topic tokens come from the topic's vocabulary block, function tokens
// from a shared block independent of topic.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isolab/error.hpp"
#include "isolab/random.hpp"

namespace isolab {

struct SyntheticPairSpec {
  std::size_t n_topics = 40;
  std::size_t sentences_per_topic = 50;
  std::size_t tokens_per_sentence = 8;
  double function_token_ratio = 0.3;
  /// Scale of the per-token random part of the initial embeddings.
  double noise_scale = 1.0;
  /// Length of the shared offset added to every initial embedding.
  double anisotropy_bias = 2.0;
  /// Pairs in the held-out evaluation set; their first sentences form the
  /// evaluation corpus.
  std::size_t eval_sentences = 256;

  void validate() const {
    if (n_topics == 0) throw Error("n_topics must be positive");
    if (sentences_per_topic == 0) throw Error("sentences_per_topic must be positive");
    if (tokens_per_sentence < 2) throw Error("tokens_per_sentence must be at least 2");
    if (!(function_token_ratio >= 0.0 && function_token_ratio < 1.0)) {
      throw Error("function_token_ratio must lie in [0, 1)");
    }
    if (!(noise_scale > 0.0)) throw Error("noise_scale must be positive");
    if (!(anisotropy_bias >= 0.0)) throw Error("anisotropy_bias must be non-negative");
    if (eval_sentences < 2) throw Error("eval_sentences must be at least 2");
  }
};

/// Vocabulary layout: ids [0, n_function) are function tokens, the remaining
/// ids are split into one contiguous block per topic.
class SyntheticVocab {
 public:
  SyntheticVocab(std::size_t vocab_size, std::size_t n_topics)
      : vocab_size_(vocab_size), n_function_(std::max<std::size_t>(1, vocab_size / 10)), n_topics_(n_topics) {
    if (n_topics == 0 || vocab_size < n_function_ + n_topics) {
      throw Error("vocab_size " + std::to_string(vocab_size) + " too small for " + std::to_string(n_topics) +
                  " topics");
    }
  }

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t function_count() const { return n_function_; }
  std::size_t topic_count() const { return n_topics_; }

  std::size_t topic_begin(std::size_t topic) const {
    return n_function_ + topic * (vocab_size_ - n_function_) / n_topics_;
  }
  std::size_t topic_end(std::size_t topic) const { return topic_begin(topic + 1); }

  bool is_function(std::uint32_t id) const { return id < n_function_; }

  /// Topic owning a token, nullopt for function tokens.
  std::optional<std::size_t> topic_of(std::uint32_t id) const {
    if (id >= vocab_size_) throw Error("token id out of vocabulary");
    if (is_function(id)) return std::nullopt;
    for (std::size_t t = 0; t < n_topics_; ++t) {
      if (id < topic_end(t)) return t;
    }
    return std::nullopt;
  }

  std::string token_string(std::uint32_t id) const {
    return (is_function(id) ? "fn" : "w") + std::to_string(id);
  }

 private:
  std::size_t vocab_size_;
  std::size_t n_function_;
  std::size_t n_topics_;
};

struct SentencePair {
  std::size_t topic = 0;
  std::vector<std::uint32_t> a;
  std::vector<std::uint32_t> b;
};

namespace detail {

inline std::vector<std::uint32_t> synth_sentence(const SyntheticVocab& vocab, const SyntheticPairSpec& spec,
                                                 std::size_t topic, Rng& rng) {
  std::vector<std::uint32_t> ids(spec.tokens_per_sentence);
  for (auto& id : ids) {
    if (rng.bernoulli(spec.function_token_ratio)) {
      id = static_cast<std::uint32_t>(rng.uniform_index(vocab.function_count()));
    } else {
      const auto lo = vocab.topic_begin(topic);
      id = static_cast<std::uint32_t>(lo + rng.uniform_index(vocab.topic_end(topic) - lo));
    }
  }
  return ids;
}

}  // namespace detail

/// Training pairs: sentences_per_topic pairs for every topic, topic-major.
inline std::vector<SentencePair> generate_pairs(const SyntheticPairSpec& spec, const SyntheticVocab& vocab,
                                                std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::vector<SentencePair> pairs;
  pairs.reserve(spec.n_topics * spec.sentences_per_topic);
  for (std::size_t t = 0; t < spec.n_topics; ++t) {
    for (std::size_t s = 0; s < spec.sentences_per_topic; ++s) {
      SentencePair p;
      p.topic = t;
      p.a = detail::synth_sentence(vocab, spec, t, rng);
      p.b = detail::synth_sentence(vocab, spec, t, rng);
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

/// `count` pairs with uniformly drawn topics, for held-out evaluation.
inline std::vector<SentencePair> generate_eval_pairs(const SyntheticPairSpec& spec, const SyntheticVocab& vocab,
                                                     std::size_t count, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::vector<SentencePair> pairs(count);
  for (auto& p : pairs) {
    p.topic = rng.uniform_index(spec.n_topics);
    p.a = detail::synth_sentence(vocab, spec, p.topic, rng);
    p.b = detail::synth_sentence(vocab, spec, p.topic, rng);
  }
  return pairs;
}

}  // namespace isolab
