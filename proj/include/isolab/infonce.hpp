#pragma once

// InfoNCE with in-batch negatives over cosine similarities, its analytic
// gradient, and the closed-form loss bounds used in the temperature analysis.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

#include "isolab/error.hpp"

namespace isolab {

/// Loss and gradients with respect to every coordinate of both inputs.
struct InfoNceGrad {
  double loss = 0.0;
  Eigen::MatrixXd d_anchors;
  Eigen::MatrixXd d_positives;
};

namespace detail {

inline void check_batch(const Eigen::MatrixXd& anchors, const Eigen::MatrixXd& positives, double tau) {
  if (anchors.rows() != positives.rows() || anchors.cols() != positives.cols()) {
    throw NumericError("InfoNCE: anchors and positives must have the same shape");
  }
  if (anchors.rows() < 2) throw NumericError("InfoNCE: batch size must be at least 2");
  if (!(tau > 0.0)) throw NumericError("InfoNCE: temperature must be positive");
}

inline Eigen::VectorXd row_norms(const Eigen::MatrixXd& m) {
  Eigen::VectorXd norms = m.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (norms[i] == 0.0) throw NumericError("InfoNCE: zero-norm embedding in row " + std::to_string(i));
  }
  return norms;
}

/// Back-propagates through x / |x| row-wise.
inline Eigen::MatrixXd through_normalization(const Eigen::MatrixXd& d_unit, const Eigen::MatrixXd& unit,
                                             const Eigen::VectorXd& norms) {
  Eigen::MatrixXd out(d_unit.rows(), d_unit.cols());
  for (Eigen::Index i = 0; i < d_unit.rows(); ++i) {
    const double radial = d_unit.row(i).dot(unit.row(i));
    out.row(i) = (d_unit.row(i) - radial * unit.row(i)) / norms[i];
  }
  return out;
}

}  // namespace detail

/// Mean over anchors i of -log softmax_j(cos(a_i, p_j) / tau)[i]. Row i of
/// `anchors` pairs with row i of `positives`; every other row is a negative.
inline InfoNceGrad info_nce_grad(const Eigen::MatrixXd& anchors, const Eigen::MatrixXd& positives, double tau) {
  detail::check_batch(anchors, positives, tau);
  const Eigen::Index n = anchors.rows();
  const Eigen::VectorXd a_norm = detail::row_norms(anchors);
  const Eigen::VectorXd p_norm = detail::row_norms(positives);
  const Eigen::MatrixXd a_unit = a_norm.cwiseInverse().asDiagonal() * anchors;
  const Eigen::MatrixXd p_unit = p_norm.cwiseInverse().asDiagonal() * positives;

  const Eigen::MatrixXd logits = (a_unit * p_unit.transpose()) / tau;
  Eigen::MatrixXd d_cos(n, n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double peak = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd shifted = (logits.row(i).array() - peak).exp().matrix();
    const double denom = shifted.sum();
    loss += peak + std::log(denom) - logits(i, i);
    d_cos.row(i) = shifted / denom;
    d_cos(i, i) -= 1.0;
  }
  d_cos /= static_cast<double>(n) * tau;

  InfoNceGrad out;
  out.loss = loss / static_cast<double>(n);
  out.d_anchors = detail::through_normalization(d_cos * p_unit, a_unit, a_norm);
  out.d_positives = detail::through_normalization(d_cos.transpose() * a_unit, p_unit, p_norm);
  return out;
}

inline double info_nce_loss(const Eigen::MatrixXd& anchors, const Eigen::MatrixXd& positives, double tau) {
  return info_nce_grad(anchors, positives, tau).loss;
}

/// Average of both prediction directions (a -> b and b -> a).
inline InfoNceGrad symmetric_info_nce_grad(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tau) {
  const auto forward = info_nce_grad(a, b, tau);
  const auto backward = info_nce_grad(b, a, tau);
  InfoNceGrad out;
  out.loss = 0.5 * (forward.loss + backward.loss);
  out.d_anchors = 0.5 * (forward.d_anchors + backward.d_positives);
  out.d_positives = 0.5 * (forward.d_positives + backward.d_anchors);
  return out;
}

namespace detail {

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline void check_bound_args(double s, double tau, long long n) {
  if (!(s >= -1.0 && s <= 1.0)) throw NumericError("loss bound: similarity must lie in [-1, 1]");
  if (!(tau > 0.0)) throw NumericError("loss bound: temperature must be positive");
  if (n < 2) throw NumericError("loss bound: batch size must be at least 2");
}

}  // namespace detail

/// Loss of one anchor whose positive has similarity s and whose n - 1
/// negatives all sit at similarity 0:
///   -log(e^{s/tau} / (e^{s/tau} + n - 1)) = log(1 + (n - 1) e^{-s/tau}).
inline double loss_upper_bound(double s, double tau, long long n) {
  detail::check_bound_args(s, tau, n);
  return detail::softplus(std::log(static_cast<double>(n - 1)) - s / tau);
}

/// Same with every negative at similarity -1:
///   -log(e^{(s+1)/tau} / (e^{(s+1)/tau} + n - 1)).
inline double loss_lower_bound(double s, double tau, long long n) {
  detail::check_bound_args(s, tau, n);
  return detail::softplus(std::log(static_cast<double>(n - 1)) - (s + 1.0) / tau);
}

/// lower(s, 2 tau) - upper(s, tau). Zero at s = 1, where (s + 1) / 2 = s.
inline double bound_gap(double s, double tau, long long n) {
  return loss_lower_bound(s, 2.0 * tau, n) - loss_upper_bound(s, tau, n);
}

}  // namespace isolab
