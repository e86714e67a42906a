#pragma once

// Brute-force double-precision reference implementations used as test
// oracles: explicit pair loops, no shared code with the library's algorithms.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "isolab/corpus.hpp"

namespace oracle {

using Vec = std::vector<double>;

inline Vec to_vec(const std::vector<float>& v) { return Vec(v.begin(), v.end()); }

inline double cos(const Vec& u, const Vec& v) {
  double uv = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

inline double norm(const Vec& u) {
  double s = 0;
  for (double x : u) s += x * x;
  return std::sqrt(s);
}

/// Mean cosine over every unordered pair.
inline double mean_pair_cosine(const std::vector<Vec>& xs) {
  double sum = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      sum += cos(xs[i], xs[j]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

inline double intra(const std::vector<Vec>& xs) {
  Vec mean(xs[0].size(), 0.0);
  for (const auto& x : xs)
    for (std::size_t i = 0; i < x.size(); ++i) mean[i] += x[i] / static_cast<double>(xs.size());
  double s = 0;
  for (const auto& x : xs) s += cos(x, mean);
  return s / static_cast<double>(xs.size());
}

/// contributions[d] = mean over unordered pairs of u_d v_d / (|u||v|).
inline Vec contributions(const std::vector<Vec>& xs) {
  const std::size_t dim = xs[0].size();
  Vec out(dim, 0.0);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const double denom = norm(xs[i]) * norm(xs[j]);
      for (std::size_t d = 0; d < dim; ++d) out[d] += xs[i][d] * xs[j][d] / denom;
      ++pairs;
    }
  }
  for (double& c : out) c /= static_cast<double>(pairs);
  return out;
}

inline std::optional<double> pearson(const Vec& x, const Vec& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cxy += (x[i] - mx) * (y[i] - my);
    cxx += (x[i] - mx) * (x[i] - mx);
    cyy += (y[i] - my) * (y[i] - my);
  }
  if (cxx == 0 || cyy == 0) return std::nullopt;
  return cxy / (std::sqrt(cxx) * std::sqrt(cyy));
}

/// Pearson r between strict-lower-triangle cosines before and after zeroing
/// the given dimensions.
inline double informativity_r(const std::vector<Vec>& xs, const std::vector<std::size_t>& removed) {
  std::vector<Vec> post = xs;
  for (auto& v : post)
    for (auto d : removed) v[d] = 0.0;
  Vec before, after;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      before.push_back(cos(xs[i], xs[j]));
      after.push_back(cos(post[i], post[j]));
    }
  }
  return pearson(before, after).value_or(std::nan(""));
}

/// Ranking by |contribution| descending, ties to lower index, by selection.
inline std::vector<std::size_t> rank_dims(const Vec& c) {
  std::vector<std::size_t> order;
  std::vector<bool> used(c.size(), false);
  for (std::size_t r = 0; r < c.size(); ++r) {
    std::size_t best = c.size();
    for (std::size_t d = 0; d < c.size(); ++d) {
      if (used[d]) continue;
      if (best == c.size() || std::abs(c[d]) > std::abs(c[best])) best = d;
    }
    used[best] = true;
    order.push_back(best);
  }
  return order;
}

/// Central differences of a scalar function of a matrix.
inline Eigen::MatrixXd central_diff(const std::function<double(const Eigen::MatrixXd&)>& f, const Eigen::MatrixXd& x,
                                    double h = 1e-4) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      Eigen::MatrixXd up = x, down = x;
      up(i, j) += h;
      down(i, j) -= h;
      out(i, j) = (f(up) - f(down)) / (2.0 * h);
    }
  }
  return out;
}

/// max |a - b| / max(|a|, |b|, 1e-6) over components.
inline double max_rel_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic.reshaped()[i], b = numeric.reshaped()[i];
    worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}));
  }
  return worst;
}

/// InfoNCE from a logit matrix: mean over i of log(1 + sum_{j != i} e^{l_ij - l_ii}).
inline double info_nce_from_logits(const Eigen::MatrixXd& logits) {
  double loss = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double others = 0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      if (j != i) others += std::exp(logits(i, j) - logits(i, i));
    }
    loss += std::log1p(others);
  }
  return loss / static_cast<double>(logits.rows());
}

/// d info_nce_from_logits / d logits = (softmax - I) / N, row by row.
inline Eigen::MatrixXd info_nce_logit_grad(const Eigen::MatrixXd& logits) {
  const auto n = logits.rows();
  Eigen::MatrixXd g(n, logits.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    double denom = 0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) denom += std::exp(logits(i, j) - logits(i, i));
    double off_diagonal = 0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      if (j == i) continue;
      g(i, j) = std::exp(logits(i, j) - logits(i, i)) / denom / static_cast<double>(n);
      off_diagonal += g(i, j);
    }
    g(i, i) = -off_diagonal;
  }
  return g;
}

inline Eigen::MatrixXd cosine_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) out(i, j) = a.row(i).dot(b.row(j)) / (a.row(i).norm() * b.row(j).norm());
  }
  return out;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (auto& x : m.reshaped()) x = normal(gen);
  return m;
}

// ------------------------------------------------------------ fixtures

inline isolab::TokenRecord record(std::uint64_t sentence, std::uint64_t position, std::string token,
                                  std::vector<float> v, std::uint64_t layer = 0) {
  isolab::TokenRecord r;
  r.layer = layer;
  r.sentence_id = sentence;
  r.position = position;
  r.token = std::move(token);
  r.vector = std::move(v);
  return r;
}

/// `n` records with random vectors, each in its own sentence. `offset`
/// adds a shared positive shift so the sample is anisotropic.
inline std::vector<isolab::TokenRecord> random_records(std::mt19937_64& gen, std::size_t n, std::size_t dim,
                                                       double offset = 0.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<isolab::TokenRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<float> v(dim);
    for (auto& x : v) x = static_cast<float>(normal(gen) + offset);
    out.push_back(record(i, 0, "t" + std::to_string(i), std::move(v)));
  }
  return out;
}

inline std::vector<Vec> vectors_of(const std::vector<isolab::TokenRecord>& rs) {
  std::vector<Vec> out;
  for (const auto& r : rs) out.push_back(to_vec(r.vector));
  return out;
}

}  // namespace oracle
