// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "thz/config.hpp"
#include "thz/error.hpp"
#include "thz/nn/adam.hpp"
#include "thz/nn/model.hpp"
#include "thz/observation.hpp"
#include "thz/random.hpp"

namespace thz::nn {

struct Example {
  Vector input;
  Vector target;
};

/// Features X as input, [Re(H), Im(H)] as target.
inline std::vector<Example> make_examples(std::span<const ObservationSample> samples) {
  std::vector<Example> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.features, preprocess(s.truth)});
  return out;
}

struct BatchResult {
  double loss = 0.0;
  ModelParams grads;
};

/// Loss (mean over batch and output dimensions of the squared error) and its
/// gradient for examples[indices]. Per-sample gradients are summed in index
/// order, so the result does not depend on `threads`.
inline BatchResult batch_gradient(const ModelParams& params, const ModelSpec& spec,
                                  std::span<const Example> examples,
                                  std::span<const std::size_t> indices, std::size_t threads = 1) {
  if (indices.empty()) throw TrainingError("empty batch");
  const std::size_t b = indices.size();
  const double scale = 2.0 / (static_cast<double>(b) * static_cast<double>(spec.output_dim));
  std::vector<ModelParams> per_sample(b);
  std::vector<double> losses(b, 0.0);
  auto work = [&](std::size_t i) {
    const Example& ex = examples[indices[i]];
    ForwardCache cache;
    const Vector pred = forward(params, spec, ex.input, cache);
    if (pred.size() != ex.target.size()) throw DimensionError("target length mismatch");
    losses[i] = mse(pred, ex.target);
    per_sample[i] = params.zeros_like();
    backward(params, spec, cache, scale * (pred - ex.target), per_sample[i]);
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, b));
  if (workers == 1) {
    for (std::size_t i = 0; i < b; ++i) work(i);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < b; i += workers) work(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  BatchResult r;
  r.grads = params.zeros_like();
  for (std::size_t i = 0; i < b; ++i) {
    r.grads += per_sample[i];
    r.loss += losses[i];
  }
  r.loss /= static_cast<double>(b);
  return r;
}

inline double mean_loss(const ModelParams& params, const ModelSpec& spec,
                        std::span<const Example> examples) {
  if (examples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& ex : examples) acc += mse(forward(params, spec, ex.input), ex.target);
  return acc / static_cast<double>(examples.size());
}

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainHistory {
  double initial_train_loss = 0.0;
  double initial_val_loss = 0.0;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0 = initial parameters
  double best_val_loss = 0.0;
  bool stopped_early = false;
  std::size_t skipped_steps = 0;
  std::vector<std::string> events;
};

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

/// Mini-batch Adam on the MSE loss with per-epoch validation and early
/// stopping; the returned parameters are the best-validation ones.
inline TrainResult train(const ModelSpec& spec, ModelParams params,
                         std::span<const Example> train_set, std::span<const Example> val_set,
                         const TrainConfig& cfg) {
  if (train_set.empty() || val_set.empty()) throw TrainingError("training and validation splits must be non-empty");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  TrainResult result;
  TrainHistory& hist = result.history;
  hist.initial_train_loss = mean_loss(params, spec, train_set);
  hist.initial_val_loss = mean_loss(params, spec, val_set);
  hist.best_val_loss = hist.initial_val_loss;
  ModelParams best = params;
  AdamState adam = AdamState::for_params(params);
  std::size_t t = 0;
  std::size_t wait = 0;

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = Rng::substream(cfg.seed, epoch, StreamPurpose::Shuffle);
    std::shuffle(order.begin(), order.end(), shuffle.engine());

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      const std::span<const std::size_t> batch(order.data() + start, len);
      BatchResult br = batch_gradient(params, spec, train_set, batch, cfg.threads);
      epoch_loss += br.loss * static_cast<double>(len);
      if (!adam_step(params, br.grads, adam, ++t, cfg)) {
        --t;
        hist.events.push_back("epoch " + std::to_string(epoch) + ": skipped step with non-finite gradient");
      }
    }
    epoch_loss /= static_cast<double>(order.size());
    hist.skipped_steps = adam.skipped;
    if (!params.all_finite()) throw TrainingError("parameters became non-finite");
    if (epoch_loss > 1e3 * hist.initial_train_loss)
      throw TrainingError("training diverged at epoch " + std::to_string(epoch) + " (loss " +
                          std::to_string(epoch_loss) + " vs initial " +
                          std::to_string(hist.initial_train_loss) + ")");

    const double val = mean_loss(params, spec, val_set);
    hist.epochs.push_back({epoch, epoch_loss, val});
    if (val < hist.best_val_loss) {
      hist.best_val_loss = val;
      hist.best_epoch = epoch;
      best = params;
      wait = 0;
    } else if (++wait >= cfg.patience) {
      hist.stopped_early = true;
      break;
    }
  }
  result.params = std::move(best);
  return result;
}

/// Trains on the dataset's training split, holding out its last
/// `val_fraction` for validation.
inline TrainResult train_on_dataset(const ModelSpec& spec, const Dataset& ds, const TrainConfig& cfg) {
  const std::vector<ObservationSample> train_split = ds.train();
  const auto val_count = std::max<std::size_t>(
      1, static_cast<std::size_t>(cfg.val_fraction * static_cast<double>(train_split.size())));
  if (train_split.size() <= val_count)
    throw TrainingError("training split too small to hold out a validation set");
  const std::size_t fit_count = train_split.size() - val_count;
  const auto fit = make_examples(std::span(train_split).first(fit_count));
  const auto val = make_examples(std::span(train_split).subspan(fit_count));
  return train(spec, init_params(spec, cfg.seed), fit, val, cfg);
}

/// Complex channel estimate from the [Re, Im] model output.
inline CVector predict_channel(const ModelParams& params, const ModelSpec& spec,
                               const ObservationSample& sample) {
  if (static_cast<std::size_t>(sample.features.size()) != spec.seq_len)
    throw DimensionError("sample has " + std::to_string(sample.features.size()) +
                         " features, model expects " + std::to_string(spec.seq_len));
  return unpreprocess(forward(params, spec, sample.features));
}

}  // namespace thz::nn
