// src/train.cpp

// Copyright 2026  voicepd authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "voicepd/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include "voicepd/error.hpp"
#include "voicepd/util.hpp"

namespace voicepd {

namespace {

// rng stream ids
constexpr uint64_t kShuffleStream = 101;
constexpr uint64_t kAugmentStream = 102;

struct TensorView {
  std::string name;
  double* data;
  size_t size;
};

std::vector<TensorView> tensor_views(ModelParams& p, bool include_conv) {
  std::vector<TensorView> views;
  visit_trainable(p, include_conv,
                  [&](const std::string& name, double* data, long size) {
                    views.push_back({name, data, static_cast<size_t>(size)});
                  });
  return views;
}

std::vector<TensorView> tensor_views(GradientSet& g, bool include_conv) {
  std::vector<TensorView> views;
  visit_trainable(g, include_conv,
                  [&](const std::string& name, double* data, long size) {
                    views.push_back({name, data, static_cast<size_t>(size)});
                  });
  return views;
}

}  // namespace

const char* train_setup_name(TrainSetup s) {
  switch (s) {
    case TrainSetup::kFrozenConv: return "frozen_conv";
    case TrainSetup::kFullPretrained: return "full_pretrained";
    case TrainSetup::kFullScratch: return "full_scratch";
  }
  return "frozen_conv";
}

TrainSetup parse_train_setup(const std::string& s) {
  if (s == "frozen_conv" || s == "frozen") return TrainSetup::kFrozenConv;
  if (s == "full_pretrained" || s == "full-pretrained") {
    return TrainSetup::kFullPretrained;
  }
  if (s == "full_scratch" || s == "full-scratch") {
    return TrainSetup::kFullScratch;
  }
  throw ValidationError("unknown training configuration '" + s + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw ValidationError("learning_rate must be positive");
  }
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ValidationError("betas must be in [0, 1)");
  }
  if (epsilon <= 0.0) throw ValidationError("epsilon must be positive");
  if (threads < 1) throw ValidationError("threads must be >= 1");
  augmentation.validate();
}

AdamState init_adam_state(ModelParams& params, bool include_conv) {
  AdamState state;
  for (const auto& view : tensor_views(params, include_conv)) {
    state.names.push_back(view.name);
    state.m.push_back(Eigen::VectorXd::Zero(static_cast<long>(view.size)));
    state.v.push_back(Eigen::VectorXd::Zero(static_cast<long>(view.size)));
  }
  return state;
}

std::pair<double, Eigen::Vector2d> cross_entropy_loss(
    const Eigen::Vector2d& logits, Group target) {
  if (!logits.allFinite()) {
    throw ValidationError("non-finite logits in cross_entropy_loss");
  }
  const double m = logits.maxCoeff();
  const double e0 = std::exp(logits(0) - m);
  const double e1 = std::exp(logits(1) - m);
  const double lse = m + std::log(e0 + e1);
  const int t = static_cast<int>(target);
  const double loss = lse - logits(t);
  Eigen::Vector2d grad(e0 / (e0 + e1), e1 / (e0 + e1));
  grad(t) -= 1.0;
  return {loss, grad};
}

void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state,
               const TrainConfig& config) {
  if (params.conv.frozen && grads.conv.has_value()) {
    throw ValidationError("update request for a frozen conv stack");
  }
  const bool include_conv = grads.conv.has_value();
  auto p_views = tensor_views(params, include_conv);
  auto g_views = tensor_views(const_cast<GradientSet&>(grads), include_conv);
  if (p_views.size() != state.m.size() || g_views.size() != state.m.size()) {
    throw ValidationError("Adam state does not mirror the trainable set");
  }

  for (size_t i = 0; i < g_views.size(); ++i) {
    if (p_views[i].size != g_views[i].size ||
        static_cast<long>(p_views[i].size) != state.m[i].size()) {
      throw ValidationError("shape mismatch in adam_step at tensor " +
                            p_views[i].name);
    }
    for (size_t j = 0; j < g_views[i].size; ++j) {
      if (!std::isfinite(g_views[i].data[j])) {
        throw std::runtime_error("non-finite gradient in tensor " +
                                 g_views[i].name + "; step aborted");
      }
    }
  }

  state.t += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < g_views.size(); ++i) {
    double* p = p_views[i].data;
    const double* g = g_views[i].data;
    double* m = state.m[i].data();
    double* v = state.v[i].data();
    for (size_t j = 0; j < g_views[i].size; ++j) {
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
    }
  }
}

GradientSet zero_gradients(const ModelParams& params, bool include_conv) {
  GradientSet g;
  if (include_conv) {
    ConvStackParams conv;
    conv.layers.resize(params.conv.layers.size());
    for (size_t i = 0; i < conv.layers.size(); ++i) {
      const auto& src = params.conv.layers[i];
      auto& dst = conv.layers[i];
      dst.weight = Eigen::MatrixXd::Zero(src.weight.rows(), src.weight.cols());
      dst.bias = Eigen::VectorXd::Zero(src.bias.size());
      if (src.gamma.size() > 0) {
        dst.gamma = Eigen::VectorXd::Zero(src.gamma.size());
        dst.beta = Eigen::VectorXd::Zero(src.beta.size());
      }
    }
    g.conv = std::move(conv);
  }
  auto zero_direction = [](const GruDirectionParams& src) {
    GruDirectionParams d;
    d.w_input = Eigen::MatrixXd::Zero(src.w_input.rows(), src.w_input.cols());
    d.w_recur = Eigen::MatrixXd::Zero(src.w_recur.rows(), src.w_recur.cols());
    d.bias = Eigen::VectorXd::Zero(src.bias.size());
    return d;
  };
  g.gru.forward = zero_direction(params.gru.forward);
  g.gru.backward = zero_direction(params.gru.backward);
  g.head.w1 = Eigen::MatrixXd::Zero(params.head.w1.rows(), params.head.w1.cols());
  g.head.b1 = Eigen::VectorXd::Zero(params.head.b1.size());
  g.head.w2 = Eigen::MatrixXd::Zero(params.head.w2.rows(), params.head.w2.cols());
  g.head.b2 = Eigen::VectorXd::Zero(params.head.b2.size());
  g.head.w3 = Eigen::MatrixXd::Zero(params.head.w3.rows(), params.head.w3.cols());
  g.head.b3 = Eigen::VectorXd::Zero(params.head.b3.size());
  return g;
}

void accumulate_gradients(GradientSet& into, const GradientSet& g,
                          bool include_conv) {
  auto a = tensor_views(into, include_conv);
  auto b = tensor_views(const_cast<GradientSet&>(g), include_conv);
  if (a.size() != b.size()) {
    throw ValidationError("gradient sets have different tensor counts");
  }
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].size != b[i].size) {
      throw ValidationError("gradient shape mismatch at " + a[i].name);
    }
    for (size_t j = 0; j < a[i].size; ++j) a[i].data[j] += b[i].data[j];
  }
}

void scale_gradients(GradientSet& g, double s, bool include_conv) {
  for (auto& view : tensor_views(g, include_conv)) {
    for (size_t j = 0; j < view.size; ++j) view.data[j] *= s;
  }
}

void TrainingLog::to_csv(const std::string& path,
                         const std::string& provenance) const {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot create training log: " + path);
  if (!provenance.empty()) os << provenance << "\n";
  os << "epoch,mean_loss,wall_ms,grad_norm\n";
  os.precision(17);
  for (size_t e = 0; e < mean_loss.size(); ++e) {
    os << e + 1 << ',' << mean_loss[e] << ',' << wall_ms[e] << ','
       << grad_norm[e] << "\n";
  }
}

namespace {

struct SampleResult {
  GradientSet grads;
  double loss = 0.0;
  std::string trace;  // augmentation record JSON, possibly empty
};

// Forward/backward for one sample; features may come from the frozen-conv
// cache instead of the waveform.
void process_sample(const LoadedSample& sample, const FeatureMap* cached,
                    const ModelParams& params, const ModelConfig& mconfig,
                    const AugmentationConfig& aug, const NoiseCorpus& noise,
                    Rng aug_rng, bool include_conv, bool trace,
                    GradientSet& acc, double& loss_acc, std::string* trace_out) {
  Prediction pred;
  ModelCache cache;
  if (cached) {
    Eigen::VectorXd hidden = gru_forward(*cached, params.gru, &cache.gru);
    pred = head_forward(hidden, params.head, &cache.head);
  } else {
    std::vector<double> wave = sample.wave;
    if (!aug.all_disabled()) {
      auto [clip, record] = apply_pipeline(
          AudioClip::make_mono(std::move(wave), sample.sample_rate), aug,
          noise, aug_rng);
      wave = std::move(clip.channels[0]);
      if (trace && trace_out) *trace_out = record.to_json();
    }
    pred = model_forward(wave, params, mconfig, sample.sample_rate, &cache);
  }

  auto [loss, dlogits] = cross_entropy_loss(pred.logits, sample.label);
  loss_acc += loss;

  if (cached) {
    auto [dhidden, head_g] = head_backward(dlogits, cache.head, params.head);
    auto [dfeat, gru_g] = gru_backward(dhidden, cache.gru, params.gru);
    (void)dfeat;
    GradientSet g;
    g.gru = std::move(gru_g);
    g.head = std::move(head_g);
    accumulate_gradients(acc, g, /*include_conv=*/false);
  } else {
    GradientSet g = model_backward(dlogits, cache, params, mconfig);
    accumulate_gradients(acc, g, include_conv);
  }
}

}  // namespace

TrainingLog train(const LoadedDataset& data, ModelParams& params,
                  const ModelConfig& mconfig, const TrainConfig& tconfig,
                  const NoiseCorpus& noise, const TrainHooks& hooks) {
  tconfig.validate();
  mconfig.validate();
  if (data.samples.empty()) throw ValidationError("empty training dataset");

  const bool include_conv = tconfig.configuration != TrainSetup::kFrozenConv;
  params.conv.frozen = !include_conv;

  // With a frozen stack and augmentation off, the conv features of every
  // sample are constant across epochs; compute them once.
  const bool cache_features =
      !include_conv && tconfig.augmentation.all_disabled();
  std::vector<FeatureMap> feature_cache;
  if (cache_features) {
    feature_cache.resize(data.samples.size());
    for (size_t i = 0; i < data.samples.size(); ++i) {
      feature_cache[i] = conv_forward(data.samples[i].wave, params.conv,
                                      mconfig.conv, data.samples[i].sample_rate);
    }
  }

  AdamState adam = init_adam_state(params, include_conv);
  const Rng master(tconfig.seed);
  const size_t n = data.samples.size();
  const int n_threads =
      std::max(1, std::min<int>(tconfig.threads, static_cast<int>(n)));

  TrainingLog log;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < tconfig.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng shuffle_rng =
        master.derive({kShuffleStream, static_cast<uint64_t>(epoch)});
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    double epoch_grad_norm = 0.0;
    size_t batches = 0;

    for (size_t start = 0; start < n; start += tconfig.batch_size) {
      const size_t end = std::min(n, start + tconfig.batch_size);
      const size_t count = end - start;

      std::vector<GradientSet> partial;
      std::vector<double> partial_loss;
      std::vector<std::string> traces(count);

      const int workers =
          static_cast<int>(std::min<size_t>(n_threads, count));
      partial.reserve(workers);
      for (int w = 0; w < workers; ++w) {
        partial.push_back(zero_gradients(params, include_conv));
      }
      partial_loss.assign(workers, 0.0);

      auto run_chunk = [&](int w) {
        const size_t chunk = (count + workers - 1) / workers;
        const size_t lo = start + w * chunk;
        const size_t hi = std::min(end, lo + chunk);
        for (size_t pos = lo; pos < hi; ++pos) {
          const size_t idx = order[pos];
          const LoadedSample& sample = data.samples[idx];
          Rng aug_rng = master.derive({kAugmentStream,
                                       static_cast<uint64_t>(epoch),
                                       static_cast<uint64_t>(idx)});
          process_sample(sample,
                         cache_features ? &feature_cache[idx] : nullptr,
                         params, mconfig, tconfig.augmentation, noise,
                         aug_rng, include_conv,
                         hooks.augment_trace != nullptr, partial[w],
                         partial_loss[w], &traces[pos - start]);
        }
      };

      if (workers == 1) {
        run_chunk(0);
      } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_chunk, w);
        for (auto& t : pool) t.join();
      }

      GradientSet batch_grads = std::move(partial[0]);
      for (int w = 1; w < workers; ++w) {
        accumulate_gradients(batch_grads, partial[w], include_conv);
      }
      scale_gradients(batch_grads, 1.0 / static_cast<double>(count),
                      include_conv);
      double batch_loss = 0.0;
      for (double l : partial_loss) batch_loss += l;
      epoch_loss += batch_loss;

      double norm_sq = 0.0;
      visit_trainable(batch_grads, include_conv,
                      [&](const std::string&, double* d, long sz) {
                        for (long j = 0; j < sz; ++j) norm_sq += d[j] * d[j];
                      });
      epoch_grad_norm += std::sqrt(norm_sq);
      ++batches;

      if (hooks.augment_trace) {
        for (size_t pos = 0; pos < count; ++pos) {
          if (traces[pos].empty()) continue;
          (*hooks.augment_trace)
              << "{\"epoch\":" << epoch + 1 << ",\"sample\":"
              << order[start + pos] << ",\"aug\":" << traces[pos] << "}\n";
        }
      }

      adam_step(params, batch_grads, adam, tconfig);
    }

    const auto t1 = std::chrono::steady_clock::now();
    const double mean_loss = epoch_loss / static_cast<double>(n);
    if (!std::isfinite(mean_loss)) {
      throw std::runtime_error("non-finite training loss at epoch " +
                               std::to_string(epoch + 1) + "; aborting");
    }
    log.mean_loss.push_back(mean_loss);
    log.wall_ms.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());
    log.grad_norm.push_back(epoch_grad_norm /
                            static_cast<double>(std::max<size_t>(1, batches)));

    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch + 1, params, log);
  }
  return log;
}

}  // namespace voicepd
