// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "thz/error.hpp"
#include "thz/nn/layers.hpp"
#include "thz/random.hpp"

namespace thz::nn {

enum class Arch { BiLstmGru, Lstm, Dnn };

inline std::string to_string(Arch a) {
  switch (a) {
    case Arch::BiLstmGru: return "bilstm-gru";
    case Arch::Lstm: return "lstm";
    case Arch::Dnn: return "dnn";
  }
  return "unknown";
}

inline Arch parse_arch(const std::string& s) {
  if (s == "bilstm-gru") return Arch::BiLstmGru;
  if (s == "lstm") return Arch::Lstm;
  if (s == "dnn") return Arch::Dnn;
  throw ConfigError("unknown architecture '" + s + "' (expected bilstm-gru, lstm or dnn)");
}

/// Shape of a learned estimator. Recurrent models read the 2M features as a
/// 2M-step sequence with one feature per step and emit one value per step
/// through a shared single-neuron dense head, so they need seq_len ==
/// output_dim. The DNN maps 2M inputs to 2N outputs through tanh hidden
/// layers of widths dnn_hidden and a linear output layer.
struct ModelSpec {
  Arch arch = Arch::BiLstmGru;
  std::size_t seq_len = 0;
  std::size_t features_per_step = 1;
  std::size_t hidden_units = 0;
  std::size_t output_dim = 0;
  std::vector<std::size_t> dnn_hidden;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline void validate(const ModelSpec& s) {
  if (s.seq_len < 1) throw ConfigError("seq_len must be >= 1");
  if (s.output_dim < 1) throw ConfigError("output_dim must be >= 1");
  if (s.features_per_step != 1) throw ConfigError("features_per_step must be 1");
  if (s.arch != Arch::Dnn) {
    if (s.hidden_units < 1) throw ConfigError("hidden_units must be >= 1");
    if (s.seq_len != s.output_dim)
      throw ConfigError("recurrent models emit one value per step: seq_len (" +
                        std::to_string(s.seq_len) + ") must equal output_dim (" +
                        std::to_string(s.output_dim) + ")");
  }
  for (std::size_t w : s.dnn_hidden)
    if (w < 1) throw ConfigError("dnn_hidden widths must be >= 1");
}

/// Spec for M pilots and N antennas. For the DNN an empty `dnn_hidden`
/// means two hidden layers of width 4N.
inline ModelSpec make_spec(Arch arch, std::size_t pilots, std::size_t antennas,
                           std::size_t hidden, std::vector<std::size_t> dnn_hidden = {}) {
  ModelSpec s;
  s.arch = arch;
  s.seq_len = 2 * pilots;
  s.output_dim = 2 * antennas;
  s.hidden_units = hidden;
  if (arch == Arch::Dnn)
    s.dnn_hidden = dnn_hidden.empty() ? std::vector<std::size_t>{4 * antennas, 4 * antennas}
                                      : std::move(dnn_hidden);
  validate(s);
  return s;
}

struct Tensor {
  std::string name;
  Matrix value;
};

/// Ordered parameter tensors. Gradients and optimizer moments reuse the same
/// layout. `revision` changes on every optimizer update.
struct ModelParams {
  std::vector<Tensor> tensors;
  std::uint64_t revision = 0;

  Matrix& operator[](std::size_t i) { return tensors[i].value; }
  const Matrix& operator[](std::size_t i) const { return tensors[i].value; }
  std::size_t size() const { return tensors.size(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += static_cast<std::size_t>(t.value.size());
    return n;
  }

  bool all_finite() const {
    for (const auto& t : tensors)
      if (!t.value.allFinite()) return false;
    return true;
  }

  ModelParams zeros_like() const {
    ModelParams z;
    z.tensors.reserve(tensors.size());
    for (const auto& t : tensors) z.tensors.push_back({t.name, Matrix::Zero(t.value.rows(), t.value.cols())});
    return z;
  }

  void set_zero() {
    for (auto& t : tensors) t.value.setZero();
  }

  ModelParams& operator+=(const ModelParams& o) {
    for (std::size_t i = 0; i < tensors.size(); ++i) tensors[i].value += o.tensors[i].value;
    return *this;
  }
};

namespace layout {
// bilstm-gru
inline constexpr std::size_t kFwdW = 0, kFwdU = 1, kFwdB = 2;
inline constexpr std::size_t kBwdW = 3, kBwdU = 4, kBwdB = 5;
inline constexpr std::size_t kGruW = 6, kGruU = 7, kGruB = 8;
inline constexpr std::size_t kBgDenseW = 9, kBgDenseB = 10;
// lstm
inline constexpr std::size_t kLstmW = 0, kLstmU = 1, kLstmB = 2;
inline constexpr std::size_t kLstmDenseW = 3, kLstmDenseB = 4;
}  // namespace layout

inline std::size_t tensor_count(const ModelSpec& spec) {
  switch (spec.arch) {
    case Arch::BiLstmGru: return 11;
    case Arch::Lstm: return 5;
    case Arch::Dnn: return 2 * (spec.dnn_hidden.size() + 1);
  }
  return 0;
}

/// Zero-valued parameters with the right names and shapes.
inline ModelParams zero_params(const ModelSpec& spec) {
  validate(spec);
  const auto h = static_cast<Eigen::Index>(spec.hidden_units);
  const auto in = static_cast<Eigen::Index>(spec.features_per_step);
  ModelParams p;
  auto add = [&](std::string name, Eigen::Index r, Eigen::Index c) {
    p.tensors.push_back({std::move(name), Matrix::Zero(r, c)});
  };
  switch (spec.arch) {
    case Arch::BiLstmGru:
      add("bilstm.fwd.W", 4 * h, in);
      add("bilstm.fwd.U", 4 * h, h);
      add("bilstm.fwd.b", 4 * h, 1);
      add("bilstm.bwd.W", 4 * h, in);
      add("bilstm.bwd.U", 4 * h, h);
      add("bilstm.bwd.b", 4 * h, 1);
      add("gru.W", 3 * h, 2 * h);
      add("gru.U", 3 * h, h);
      add("gru.b", 3 * h, 1);
      add("dense.W", 1, h);
      add("dense.b", 1, 1);
      break;
    case Arch::Lstm:
      add("lstm.W", 4 * h, in);
      add("lstm.U", 4 * h, h);
      add("lstm.b", 4 * h, 1);
      add("dense.W", 1, h);
      add("dense.b", 1, 1);
      break;
    case Arch::Dnn: {
      auto width = static_cast<Eigen::Index>(spec.seq_len);
      std::vector<std::size_t> widths = spec.dnn_hidden;
      widths.push_back(spec.output_dim);
      for (std::size_t l = 0; l < widths.size(); ++l) {
        const auto out = static_cast<Eigen::Index>(widths[l]);
        add("dense" + std::to_string(l) + ".W", out, width);
        add("dense" + std::to_string(l) + ".b", out, 1);
        width = out;
      }
      break;
    }
  }
  return p;
}

namespace detail {
/// Glorot-uniform over `blocks` equal row blocks of m.
inline void glorot(Matrix& m, Eigen::Index blocks, Rng& rng) {
  const Eigen::Index rows = m.rows() / blocks;
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-limit, limit);
}
}  // namespace detail

/// Glorot-uniform weights (per gate block for recurrent kernels), zero
/// biases, LSTM forget-gate bias 1.
inline ModelParams init_params(const ModelSpec& spec, std::uint64_t seed) {
  ModelParams p = zero_params(spec);
  Rng rng = Rng::substream(seed, 0, StreamPurpose::Init);
  const auto h = static_cast<Eigen::Index>(spec.hidden_units);
  auto lstm = [&](std::size_t w, std::size_t u, std::size_t b) {
    detail::glorot(p[w], 4, rng);
    detail::glorot(p[u], 4, rng);
    p[b].block(h, 0, h, 1).setOnes();
  };
  using namespace layout;
  switch (spec.arch) {
    case Arch::BiLstmGru:
      lstm(kFwdW, kFwdU, kFwdB);
      lstm(kBwdW, kBwdU, kBwdB);
      detail::glorot(p[kGruW], 3, rng);
      detail::glorot(p[kGruU], 3, rng);
      detail::glorot(p[kBgDenseW], 1, rng);
      break;
    case Arch::Lstm:
      lstm(kLstmW, kLstmU, kLstmB);
      detail::glorot(p[kLstmDenseW], 1, rng);
      break;
    case Arch::Dnn:
      for (std::size_t i = 0; i < p.size(); i += 2) detail::glorot(p[i], 1, rng);
      break;
  }
  return p;
}

/// Intermediates of one forward pass, consumed by backward().
struct ForwardCache {
  Arch arch = Arch::BiLstmGru;
  std::uint64_t revision = 0;
  std::size_t param_count = 0;
  LstmCache fwd;
  LstmCache bwd;
  GruCache gru;
  Matrix head_in;                  // H x T input of the dense head
  std::vector<Vector> activations; // DNN: layer inputs, activations[0] = x
};

namespace detail {
inline void check_finite(const Matrix& m, const char* layer) {
  if (m.allFinite()) return;
  for (Eigen::Index t = 0; t < m.cols(); ++t)
    if (!m.col(t).allFinite())
      throw NumericError(std::string("non-finite activation in layer ") + layer + " at step " +
                         std::to_string(t));
}
}  // namespace detail

/// Runs the model on one feature vector; returns the prediction and fills `cache`.
inline Vector forward(const ModelParams& params, const ModelSpec& spec, const Vector& x,
                      ForwardCache& cache) {
  if (static_cast<std::size_t>(x.size()) != spec.seq_len * spec.features_per_step)
    throw DimensionError("input length " + std::to_string(x.size()) + " does not match seq_len " +
                         std::to_string(spec.seq_len));
  if (params.size() != tensor_count(spec))
    throw DimensionError("parameter set does not match the model spec");
  cache.arch = spec.arch;
  cache.revision = params.revision;
  cache.param_count = params.parameter_count();
  using namespace layout;

  if (spec.arch == Arch::Dnn) {
    cache.activations.clear();
    Vector a = x;
    const std::size_t layers = params.size() / 2;
    for (std::size_t l = 0; l < layers; ++l) {
      cache.activations.push_back(a);
      Vector z = params[2 * l] * a + params[2 * l + 1].col(0);
      detail::check_finite(z, ("dense" + std::to_string(l)).c_str());
      if (l + 1 < layers) z = z.array().tanh().matrix();
      a = std::move(z);
    }
    return a;
  }

  const Matrix seq = x.transpose();  // 1 x T
  if (spec.arch == Arch::Lstm) {
    lstm_forward(params[kLstmW], params[kLstmU], params[kLstmB], seq, cache.fwd);
    cache.head_in = cache.fwd.h.rightCols(seq.cols());
    detail::check_finite(cache.head_in, "lstm");
    Vector out = (params[kLstmDenseW] * cache.head_in).transpose();
    out.array() += params[kLstmDenseB](0, 0);
    return out;
  }

  const Eigen::Index steps = seq.cols();
  const auto h = static_cast<Eigen::Index>(spec.hidden_units);
  lstm_forward(params[kFwdW], params[kFwdU], params[kFwdB], seq, cache.fwd);
  lstm_forward(params[kBwdW], params[kBwdU], params[kBwdB], reversed(seq), cache.bwd);
  Matrix bi(2 * h, steps);
  bi.topRows(h) = cache.fwd.h.rightCols(steps);
  bi.bottomRows(h) = reversed(cache.bwd.h.rightCols(steps));
  detail::check_finite(bi, "bilstm");
  gru_forward(params[kGruW], params[kGruU], params[kGruB], bi, cache.gru);
  cache.head_in = cache.gru.h.rightCols(steps);
  detail::check_finite(cache.head_in, "gru");
  Vector out = (params[kBgDenseW] * cache.head_in).transpose();
  out.array() += params[kBgDenseB](0, 0);
  return out;
}

inline Vector forward(const ModelParams& params, const ModelSpec& spec, const Vector& x) {
  ForwardCache cache;
  return forward(params, spec, x, cache);
}

/// Output sequence of the bidirectional layer alone (2H x T); used to check
/// the directional symmetry of the construction.
inline Matrix bilstm_sequence(const ModelParams& params, const ModelSpec& spec, const Vector& x) {
  using namespace layout;
  if (spec.arch != Arch::BiLstmGru) throw ConfigError("bilstm_sequence needs a bilstm-gru model");
  const Matrix seq = x.transpose();
  const auto h = static_cast<Eigen::Index>(spec.hidden_units);
  LstmCache f, b;
  lstm_forward(params[kFwdW], params[kFwdU], params[kFwdB], seq, f);
  lstm_forward(params[kBwdW], params[kBwdU], params[kBwdB], reversed(seq), b);
  Matrix bi(2 * h, seq.cols());
  bi.topRows(h) = f.h.rightCols(seq.cols());
  bi.bottomRows(h) = reversed(b.h.rightCols(seq.cols()));
  return bi;
}

/// Adds dL/dparams into `grads` given dL/dprediction.
inline void backward(const ModelParams& params, const ModelSpec& spec, const ForwardCache& cache,
                     const Vector& grad_out, ModelParams& grads) {
  if (cache.arch != spec.arch || cache.revision != params.revision ||
      cache.param_count != params.parameter_count())
    throw DimensionError("forward cache is stale or belongs to a different model");
  if (static_cast<std::size_t>(grad_out.size()) != spec.output_dim)
    throw DimensionError("upstream gradient length does not match output_dim");
  if (grads.size() != params.size()) throw DimensionError("gradient buffer layout mismatch");
  using namespace layout;

  if (spec.arch == Arch::Dnn) {
    const std::size_t layers = params.size() / 2;
    Vector delta = grad_out;
    for (std::size_t l = layers; l-- > 0;) {
      grads[2 * l].noalias() += delta * cache.activations[l].transpose();
      grads[2 * l + 1].col(0) += delta;
      if (l == 0) break;
      Vector up = params[2 * l].transpose() * delta;
      // activations[l] = tanh(z_{l-1})
      delta = up.array() * (1.0 - cache.activations[l].array().square());
    }
    return;
  }

  const Matrix g_row = grad_out.transpose();  // 1 x T
  if (spec.arch == Arch::Lstm) {
    grads[kLstmDenseW].noalias() += g_row * cache.head_in.transpose();
    grads[kLstmDenseB](0, 0) += grad_out.sum();
    const Matrix dh = params[kLstmDenseW].transpose() * g_row;
    lstm_backward(params[kLstmW], params[kLstmU], cache.fwd, dh, grads[kLstmW], grads[kLstmU],
                  grads[kLstmB]);
    return;
  }

  const auto h = static_cast<Eigen::Index>(spec.hidden_units);
  grads[kBgDenseW].noalias() += g_row * cache.head_in.transpose();
  grads[kBgDenseB](0, 0) += grad_out.sum();
  const Matrix dgru = params[kBgDenseW].transpose() * g_row;
  const Matrix dbi = gru_backward(params[kGruW], params[kGruU], cache.gru, dgru, grads[kGruW],
                                  grads[kGruU], grads[kGruB]);
  lstm_backward(params[kFwdW], params[kFwdU], cache.fwd, dbi.topRows(h), grads[kFwdW],
                grads[kFwdU], grads[kFwdB]);
  lstm_backward(params[kBwdW], params[kBwdU], cache.bwd, reversed(dbi.bottomRows(h)),
                grads[kBwdW], grads[kBwdU], grads[kBwdB]);
}

/// Mean over output dimensions of the squared error.
inline double mse(const Vector& pred, const Vector& target) {
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

}  // namespace thz::nn
