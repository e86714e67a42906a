#pragma once

// Desk-scale contrastive training with trajectory instrumentation: plain
// gradient descent with linear warm-up on the symmetric InfoNCE objective,
// recording a GeometryReport of a held-out corpus at fixed step intervals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "isolab/corpus.hpp"
#include "isolab/encoder.hpp"
#include "isolab/error.hpp"
#include "isolab/geometry.hpp"
#include "isolab/infonce.hpp"
#include "isolab/random.hpp"
#include "isolab/synthetic.hpp"

namespace isolab {

struct TrainConfig {
  double tau = 0.05;
  std::size_t batch_size = 64;
  std::size_t steps = 500;
  double learning_rate = 0.2;
  Pooling pooling = Pooling::kMean;
  std::uint64_t seed = 42;
  std::size_t record_every = 50;
  std::size_t dim = 32;
  std::size_t vocab_size = 200;
  double warmup_fraction = 0.1;

  void validate() const {
    if (!(tau > 0.0)) throw Error("tau must be positive");
    if (batch_size < 2) throw Error("batch_size must be at least 2");
    if (steps == 0) throw Error("steps must be positive");
    if (!(learning_rate >= 0.0)) throw Error("learning_rate must be non-negative");
    if (record_every == 0 || record_every > steps) throw Error("record_every must lie in [1, steps]");
    if (dim == 0) throw Error("dim must be positive");
    if (vocab_size == 0) throw Error("vocab_size must be positive");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) throw Error("warmup_fraction must lie in [0, 1)");
  }
};

struct TrajectoryPoint {
  std::size_t step = 0;
  /// Symmetric InfoNCE on the held-out pairs.
  double loss = 0.0;
  GeometryReport report;
};

struct TrainTrajectory {
  TrainConfig config;
  SyntheticPairSpec spec;
  std::vector<TrajectoryPoint> points;
  /// Training stopped early on a non-finite loss; `points` ends at the last
  /// valid checkpoint.
  bool diverged = false;
  std::size_t diverged_at_step = 0;
};

/// Learning rate at 1-based `step`: linear ramp over the warm-up steps, then constant.
inline double scheduled_rate(const TrainConfig& config, std::size_t step) {
  const auto warmup = static_cast<std::size_t>(std::ceil(config.warmup_fraction * static_cast<double>(config.steps)));
  if (warmup == 0 || step >= warmup) return config.learning_rate;
  return config.learning_rate * static_cast<double>(step) / static_cast<double>(warmup);
}

namespace detail {

inline Eigen::MatrixXd pooled_batch(const std::vector<EncodedSentence>& encoded) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(encoded.size()), encoded.front().pooled.size());
  for (std::size_t i = 0; i < encoded.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = encoded[i].pooled.transpose();
  return out;
}

/// Token vectors h_i of every first sentence as a one-layer corpus.
inline EmbeddingCorpus encode_corpus(const EncoderParams& params, const SyntheticVocab& vocab,
                                     const std::vector<SentencePair>& pairs, Pooling pooling) {
  std::vector<TokenRecord> records;
  for (std::size_t s = 0; s < pairs.size(); ++s) {
    const auto enc = encode(params, pairs[s].a, pooling);
    for (Eigen::Index i = 0; i < enc.hidden.rows(); ++i) {
      TokenRecord r;
      r.index = records.size();
      r.layer = 0;
      r.sentence_id = s;
      r.position = static_cast<std::uint64_t>(i);
      r.token = vocab.token_string(pairs[s].a[static_cast<std::size_t>(i)]);
      r.vector.resize(params.dim());
      for (std::size_t j = 0; j < params.dim(); ++j) r.vector[j] = static_cast<float>(enc.hidden(i, static_cast<Eigen::Index>(j)));
      records.push_back(std::move(r));
    }
  }
  return EmbeddingCorpus::from_records(params.dim(), {0}, std::move(records), "contrastive-lab");
}

inline double eval_loss(const EncoderParams& params, const std::vector<SentencePair>& pairs,
                        const TrainConfig& config) {
  double total = 0.0;
  std::size_t batches = 0;
  for (std::size_t begin = 0; begin + 2 <= pairs.size(); begin += config.batch_size) {
    const std::size_t end = std::min(pairs.size(), begin + config.batch_size);
    if (end - begin < 2) break;
    std::vector<EncodedSentence> a, b;
    for (std::size_t i = begin; i < end; ++i) {
      a.push_back(encode(params, pairs[i].a, config.pooling));
      b.push_back(encode(params, pairs[i].b, config.pooling));
    }
    total += symmetric_info_nce_grad(pooled_batch(a), pooled_batch(b), config.tau).loss;
    ++batches;
  }
  return total / static_cast<double>(batches);
}

}  // namespace detail

/// Checkpoint evaluation: held-out loss and the geometry of the held-out corpus.
struct Evaluator {
  SyntheticVocab vocab;
  std::vector<SentencePair> pairs;
  SampleSpec sample;
  TrainConfig config;

  TrajectoryPoint operator()(const EncoderParams& params, std::size_t step) const {
    TrajectoryPoint pt;
    pt.step = step;
    pt.loss = detail::eval_loss(params, pairs, config);
    pt.report = layer_report(detail::encode_corpus(params, vocab, pairs, config.pooling), 0, sample);
    return pt;
  }
};

inline Evaluator make_evaluator(const TrainConfig& config, const SyntheticPairSpec& spec) {
  SyntheticVocab vocab(config.vocab_size, spec.n_topics);
  SampleSpec sample;
  sample.count = std::min<std::size_t>(1000, spec.eval_sentences);
  sample.seed = derive_seed(config.seed, "eval-sample");
  return Evaluator{vocab, generate_eval_pairs(spec, vocab, spec.eval_sentences, derive_seed(config.seed, "eval-pairs")),
                   sample, config};
}

/// Runs one seeded training job. Records step 0, every `record_every` steps,
/// and the final step.
inline TrainTrajectory train(const TrainConfig& config, const SyntheticPairSpec& spec) {
  config.validate();
  spec.validate();
  const SyntheticVocab vocab(config.vocab_size, spec.n_topics);
  const auto pairs = generate_pairs(spec, vocab, derive_seed(config.seed, "train-pairs"));
  if (pairs.size() < config.batch_size) {
    throw Error("training set of " + std::to_string(pairs.size()) + " pairs is smaller than batch_size");
  }
  const Evaluator evaluate = make_evaluator(config, spec);
  EncoderParams params = init_encoder(config.vocab_size, config.dim, spec.anisotropy_bias, spec.noise_scale,
                                      derive_seed(config.seed, "encoder-init"));
  Rng batch_rng(derive_seed(config.seed, "batches"));

  TrainTrajectory traj;
  traj.config = config;
  traj.spec = spec;
  traj.points.push_back(evaluate(params, 0));

  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t cursor = order.size();

  for (std::size_t step = 1; step <= config.steps; ++step) {
    if (cursor + config.batch_size > order.size()) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[batch_rng.uniform_index(i)]);
      cursor = 0;
    }
    std::vector<EncodedSentence> enc_a, enc_b;
    for (std::size_t i = 0; i < config.batch_size; ++i) {
      const auto& pair = pairs[order[cursor + i]];
      enc_a.push_back(encode(params, pair.a, config.pooling));
      enc_b.push_back(encode(params, pair.b, config.pooling));
    }

    const auto g = symmetric_info_nce_grad(detail::pooled_batch(enc_a), detail::pooled_batch(enc_b), config.tau);
    if (!std::isfinite(g.loss)) {
      traj.diverged = true;
      traj.diverged_at_step = step;
      return traj;
    }

    EncoderParams grads = EncoderParams::zeros_like(params);
    for (std::size_t i = 0; i < config.batch_size; ++i) {
      const auto& pair = pairs[order[cursor + i]];
      const auto row = static_cast<Eigen::Index>(i);
      backward(params, pair.a, enc_a[i], config.pooling, g.d_anchors.row(row).transpose(), grads);
      backward(params, pair.b, enc_b[i], config.pooling, g.d_positives.row(row).transpose(), grads);
    }
    cursor += config.batch_size;

    const double rate = scheduled_rate(config, step);
    params.embedding -= rate * grads.embedding;
    params.token_mix -= rate * grads.token_mix;
    params.context_mix -= rate * grads.context_mix;
    params.bias -= rate * grads.bias;
    if (!params.all_finite()) {
      traj.diverged = true;
      traj.diverged_at_step = step;
      return traj;
    }

    if (step % config.record_every == 0 || step == config.steps) {
      auto pt = evaluate(params, step);
      if (!std::isfinite(pt.loss)) {
        traj.diverged = true;
        traj.diverged_at_step = step;
        return traj;
      }
      traj.points.push_back(std::move(pt));
    }
  }
  return traj;
}

}  // namespace isolab
