#pragma once

// Tiny contextualizing encoder for the contrastive lab.
//
//   r_i = E[x_i]                      token embedding lookup
//   m   = mean_j r_j                  sentence context
//   h_i = tanh(A r_i + B m + b)       contextual token vector
//   pooled = mean_i h_i | h_1 | max_i h_i (coordinatewise)

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isolab/error.hpp"
#include "isolab/random.hpp"

namespace isolab {

enum class Pooling { kMean, kCls, kMax };

inline std::string to_string(Pooling p) {
  switch (p) {
    case Pooling::kMean: return "mean";
    case Pooling::kCls: return "cls";
    case Pooling::kMax: return "max";
  }
  return "mean";
}

inline Pooling parse_pooling(const std::string& s) {
  if (s == "mean") return Pooling::kMean;
  if (s == "cls") return Pooling::kCls;
  if (s == "max") return Pooling::kMax;
  throw Error("unknown pooling '" + s + "' (expected mean, cls or max)");
}

struct EncoderParams {
  Eigen::MatrixXd embedding;    // vocab x dim
  Eigen::MatrixXd token_mix;    // A, dim x dim
  Eigen::MatrixXd context_mix;  // B, dim x dim
  Eigen::VectorXd bias;         // b

  static EncoderParams zeros_like(const EncoderParams& p) {
    EncoderParams z;
    z.embedding = Eigen::MatrixXd::Zero(p.embedding.rows(), p.embedding.cols());
    z.token_mix = Eigen::MatrixXd::Zero(p.token_mix.rows(), p.token_mix.cols());
    z.context_mix = Eigen::MatrixXd::Zero(p.context_mix.rows(), p.context_mix.cols());
    z.bias = Eigen::VectorXd::Zero(p.bias.size());
    return z;
  }

  std::size_t dim() const { return static_cast<std::size_t>(bias.size()); }
  std::size_t vocab_size() const { return static_cast<std::size_t>(embedding.rows()); }

  bool all_finite() const {
    return embedding.allFinite() && token_mix.allFinite() && context_mix.allFinite() && bias.allFinite();
  }
};

/// Initial parameters. Every embedding row is `anisotropy_bias` along one
/// shared random unit direction plus isotropic noise of expected length
/// `noise_scale`, which starts the encoder inside a narrow cone. A starts near
/// identity, B near zero.
inline EncoderParams init_encoder(std::size_t vocab_size, std::size_t dim, double anisotropy_bias,
                                  double noise_scale, std::uint64_t seed) {
  if (vocab_size == 0 || dim == 0) throw Error("encoder needs positive vocab_size and dim");
  Rng rng(seed);
  const double inv_sqrt_dim = 1.0 / std::sqrt(static_cast<double>(dim));

  Eigen::VectorXd direction(dim);
  for (auto& x : direction) x = rng.normal();
  direction.normalize();

  EncoderParams p;
  p.embedding.resize(vocab_size, dim);
  for (Eigen::Index v = 0; v < p.embedding.rows(); ++v) {
    for (Eigen::Index j = 0; j < p.embedding.cols(); ++j) {
      p.embedding(v, j) = anisotropy_bias * direction[j] + noise_scale * inv_sqrt_dim * rng.normal();
    }
  }
  p.token_mix = Eigen::MatrixXd::Identity(dim, dim);
  for (auto& x : p.token_mix.reshaped()) x += 0.1 * inv_sqrt_dim * rng.normal();
  p.context_mix.resize(dim, dim);
  for (auto& x : p.context_mix.reshaped()) x = 0.1 * inv_sqrt_dim * rng.normal();
  p.bias = Eigen::VectorXd::Zero(dim);
  return p;
}

/// Forward pass of one sentence, with what the backward pass needs.
struct EncodedSentence {
  Eigen::MatrixXd raw;     // n x dim, rows r_i
  Eigen::VectorXd context; // m
  Eigen::MatrixXd hidden;  // n x dim, rows h_i
  Eigen::VectorXd pooled;
  std::vector<Eigen::Index> max_rows;  // argmax row per coordinate (max pooling)
};

inline EncodedSentence encode(const EncoderParams& params, std::span<const std::uint32_t> token_ids,
                              Pooling pooling) {
  if (token_ids.empty()) throw Error("encode: empty token list");
  const auto n = static_cast<Eigen::Index>(token_ids.size());
  const auto dim = static_cast<Eigen::Index>(params.dim());

  EncodedSentence out;
  out.raw.resize(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto id = token_ids[static_cast<std::size_t>(i)];
    if (id >= params.vocab_size()) throw Error("encode: token id " + std::to_string(id) + " out of vocabulary");
    out.raw.row(i) = params.embedding.row(id);
  }
  out.context = out.raw.colwise().mean().transpose();
  const Eigen::RowVectorXd shared = (params.context_mix * out.context + params.bias).transpose();
  out.hidden = ((out.raw * params.token_mix.transpose()).rowwise() + shared).array().tanh().matrix();

  switch (pooling) {
    case Pooling::kMean:
      out.pooled = out.hidden.colwise().mean().transpose();
      break;
    case Pooling::kCls:
      out.pooled = out.hidden.row(0).transpose();
      break;
    case Pooling::kMax:
      out.pooled.resize(dim);
      out.max_rows.resize(static_cast<std::size_t>(dim));
      for (Eigen::Index j = 0; j < dim; ++j) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < n; ++i) {
          if (out.hidden(i, j) > out.hidden(best, j)) best = i;
        }
        out.max_rows[static_cast<std::size_t>(j)] = best;
        out.pooled[j] = out.hidden(best, j);
      }
      break;
  }
  return out;
}

/// Adds d(loss)/d(params) into `grads` given d(loss)/d(pooled) for one sentence.
inline void backward(const EncoderParams& params, std::span<const std::uint32_t> token_ids,
                     const EncodedSentence& enc, Pooling pooling, const Eigen::VectorXd& d_pooled,
                     EncoderParams& grads) {
  const Eigen::Index n = enc.hidden.rows();
  const Eigen::Index dim = enc.hidden.cols();

  Eigen::MatrixXd d_hidden = Eigen::MatrixXd::Zero(n, dim);
  switch (pooling) {
    case Pooling::kMean:
      d_hidden.rowwise() = d_pooled.transpose() / static_cast<double>(n);
      break;
    case Pooling::kCls:
      d_hidden.row(0) = d_pooled.transpose();
      break;
    case Pooling::kMax:
      for (Eigen::Index j = 0; j < dim; ++j) d_hidden(enc.max_rows[static_cast<std::size_t>(j)], j) = d_pooled[j];
      break;
  }

  const Eigen::MatrixXd d_pre = d_hidden.cwiseProduct((1.0 - enc.hidden.array().square()).matrix());
  const Eigen::VectorXd d_pre_sum = d_pre.colwise().sum().transpose();

  grads.token_mix.noalias() += d_pre.transpose() * enc.raw;
  grads.context_mix.noalias() += d_pre_sum * enc.context.transpose();
  grads.bias += d_pre_sum;

  const Eigen::RowVectorXd d_context_share =
      (params.context_mix.transpose() * d_pre_sum).transpose() / static_cast<double>(n);
  const Eigen::MatrixXd d_raw = (d_pre * params.token_mix).rowwise() + d_context_share;
  for (Eigen::Index i = 0; i < n; ++i) grads.embedding.row(token_ids[static_cast<std::size_t>(i)]) += d_raw.row(i);
}

}  // namespace isolab
