// SPDX-License-Identifier: Apache-2.0
#pragma once

// Recurrent and dense layer kernels. Sequences are stored column-per-step:
// a sequence of T vectors of width I is an I x T matrix.
//
// LSTM (gate blocks of W, U, b in order input, forget, candidate, output):
//   a_t = W x_t + U h_{t-1} + b
//   i = sig(a_i), f = sig(a_f), g = tanh(a_g), o = sig(a_o)
//   c_t = f .* c_{t-1} + i .* g,   h_t = o .* tanh(c_t)
//
// GRU (gate blocks in order update, reset, candidate):
//   z = sig(W_z x_t + U_z h_{t-1} + b_z)
//   r = sig(W_r x_t + U_r h_{t-1} + b_r)
//   n = tanh(W_n x_t + U_n (r .* h_{t-1}) + b_n)
//   h_t = z .* h_{t-1} + (1 - z) .* n
//
// Initial states are zero.

#include <Eigen/Dense>
#include <cmath>

namespace thz::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmCache {
  Matrix x;      // I x T
  Matrix h;      // H x (T+1), column 0 is the zero initial state
  Matrix c;      // H x (T+1)
  Matrix gates;  // 4H x T, post-activation
  Matrix tanh_c; // H x T
};

inline void lstm_forward(const Matrix& w, const Matrix& u, const Matrix& b, const Matrix& x,
                         LstmCache& cache) {
  const Eigen::Index hidden = u.cols();
  const Eigen::Index steps = x.cols();
  cache.x = x;
  cache.h = Matrix::Zero(hidden, steps + 1);
  cache.c = Matrix::Zero(hidden, steps + 1);
  cache.gates.resize(4 * hidden, steps);
  cache.tanh_c.resize(hidden, steps);
  Matrix pre = w * x;
  pre.colwise() += b.col(0);
  Vector a(4 * hidden);
  for (Eigen::Index t = 0; t < steps; ++t) {
    a.noalias() = pre.col(t) + u * cache.h.col(t);
    auto gate = cache.gates.col(t);
    for (Eigen::Index k = 0; k < hidden; ++k) {
      gate[k] = sigmoid(a[k]);
      gate[hidden + k] = sigmoid(a[hidden + k]);
      gate[2 * hidden + k] = std::tanh(a[2 * hidden + k]);
      gate[3 * hidden + k] = sigmoid(a[3 * hidden + k]);
      const double c = gate[hidden + k] * cache.c(k, t) + gate[k] * gate[2 * hidden + k];
      cache.c(k, t + 1) = c;
      const double tc = std::tanh(c);
      cache.tanh_c(k, t) = tc;
      cache.h(k, t + 1) = gate[3 * hidden + k] * tc;
    }
  }
}

/// BPTT through one LSTM layer. `dh` holds dL/dh_t for every step (H x T);
/// parameter gradients are added into dw, du, db; returns dL/dx (I x T).
inline Matrix lstm_backward(const Matrix& w, const Matrix& u, const LstmCache& cache,
                            const Matrix& dh, Matrix& dw, Matrix& du, Matrix& db) {
  const Eigen::Index hidden = u.cols();
  const Eigen::Index steps = cache.x.cols();
  Matrix da(4 * hidden, steps);
  Vector dh_next = Vector::Zero(hidden);
  Vector dc_next = Vector::Zero(hidden);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto gate = cache.gates.col(t);
    auto d = da.col(t);
    for (Eigen::Index k = 0; k < hidden; ++k) {
      const double i = gate[k], f = gate[hidden + k], g = gate[2 * hidden + k],
                   o = gate[3 * hidden + k];
      const double tc = cache.tanh_c(k, t);
      const double dht = dh(k, t) + dh_next[k];
      const double dc = dht * o * (1.0 - tc * tc) + dc_next[k];
      d[k] = dc * g * i * (1.0 - i);
      d[hidden + k] = dc * cache.c(k, t) * f * (1.0 - f);
      d[2 * hidden + k] = dc * i * (1.0 - g * g);
      d[3 * hidden + k] = dht * tc * o * (1.0 - o);
      dc_next[k] = dc * f;
    }
    dh_next.noalias() = u.transpose() * d;
  }
  dw.noalias() += da * cache.x.transpose();
  du.noalias() += da * cache.h.leftCols(steps).transpose();
  db.col(0) += da.rowwise().sum();
  return w.transpose() * da;
}

struct GruCache {
  Matrix x;   // I x T
  Matrix h;   // H x (T+1)
  Matrix z;   // H x T
  Matrix r;   // H x T
  Matrix n;   // H x T
  Matrix rh;  // H x T, r .* h_{t-1}
};

inline void gru_forward(const Matrix& w, const Matrix& u, const Matrix& b, const Matrix& x,
                        GruCache& cache) {
  const Eigen::Index hidden = u.cols();
  const Eigen::Index steps = x.cols();
  cache.x = x;
  cache.h = Matrix::Zero(hidden, steps + 1);
  cache.z.resize(hidden, steps);
  cache.r.resize(hidden, steps);
  cache.n.resize(hidden, steps);
  cache.rh.resize(hidden, steps);
  Matrix pre = w * x;
  pre.colwise() += b.col(0);
  const auto u_zr = u.topRows(2 * hidden);
  const auto u_n = u.bottomRows(hidden);
  Vector a_zr(2 * hidden);
  Vector a_n(hidden);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const auto h_prev = cache.h.col(t);
    a_zr.noalias() = pre.col(t).head(2 * hidden) + u_zr * h_prev;
    for (Eigen::Index k = 0; k < hidden; ++k) {
      cache.z(k, t) = sigmoid(a_zr[k]);
      cache.r(k, t) = sigmoid(a_zr[hidden + k]);
      cache.rh(k, t) = cache.r(k, t) * h_prev[k];
    }
    a_n.noalias() = pre.col(t).tail(hidden) + u_n * cache.rh.col(t);
    for (Eigen::Index k = 0; k < hidden; ++k) {
      const double n = std::tanh(a_n[k]);
      cache.n(k, t) = n;
      const double z = cache.z(k, t);
      cache.h(k, t + 1) = z * h_prev[k] + (1.0 - z) * n;
    }
  }
}

inline Matrix gru_backward(const Matrix& w, const Matrix& u, const GruCache& cache,
                           const Matrix& dh, Matrix& dw, Matrix& du, Matrix& db) {
  const Eigen::Index hidden = u.cols();
  const Eigen::Index steps = cache.x.cols();
  const auto u_zr = u.topRows(2 * hidden);
  const auto u_n = u.bottomRows(hidden);
  Matrix da(3 * hidden, steps);
  Vector dh_next = Vector::Zero(hidden);
  Vector drh(hidden);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto h_prev = cache.h.col(t);
    auto d = da.col(t);
    Vector dh_prev(hidden);
    for (Eigen::Index k = 0; k < hidden; ++k) {
      const double dht = dh(k, t) + dh_next[k];
      const double z = cache.z(k, t), n = cache.n(k, t);
      d[k] = dht * (h_prev[k] - n) * z * (1.0 - z);
      d[2 * hidden + k] = dht * (1.0 - z) * (1.0 - n * n);
      dh_prev[k] = dht * z;
    }
    drh.noalias() = u_n.transpose() * d.tail(hidden);
    for (Eigen::Index k = 0; k < hidden; ++k) {
      const double r = cache.r(k, t);
      d[hidden + k] = drh[k] * h_prev[k] * r * (1.0 - r);
      dh_prev[k] += drh[k] * r;
    }
    dh_prev.noalias() += u_zr.transpose() * d.head(2 * hidden);
    dh_next = dh_prev;
  }
  dw.noalias() += da * cache.x.transpose();
  du.topRows(2 * hidden).noalias() +=
      da.topRows(2 * hidden) * cache.h.leftCols(steps).transpose();
  du.bottomRows(hidden).noalias() += da.bottomRows(hidden) * cache.rh.transpose();
  db.col(0) += da.rowwise().sum();
  return w.transpose() * da;
}

/// Reverses the step order of a sequence.
inline Matrix reversed(const Matrix& seq) { return seq.rowwise().reverse(); }

}  // namespace thz::nn
