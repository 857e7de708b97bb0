// voicepd/train.hpp

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

#ifndef VOICEPD_TRAIN_HPP_
#define VOICEPD_TRAIN_HPP_

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "voicepd/augment.hpp"
#include "voicepd/data.hpp"
#include "voicepd/model.hpp"

namespace voicepd {

enum class TrainSetup { kFrozenConv, kFullPretrained, kFullScratch };

const char* train_setup_name(TrainSetup s);
TrainSetup parse_train_setup(const std::string& s);

struct TrainConfig {
  int epochs = 400;
  int batch_size = 32;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  TrainSetup configuration = TrainSetup::kFrozenConv;
  uint64_t seed = 0;
  AugmentationConfig augmentation;
  int threads = 1;

  void validate() const;
};

// First/second moment accumulators mirroring the trainable tensors, plus
// the step counter.
struct AdamState {
  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> m;
  std::vector<Eigen::VectorXd> v;
  long t = 0;
};

AdamState init_adam_state(ModelParams& params, bool include_conv);

// loss = -log softmax(logits)[target], log-sum-exp stabilized.
// gradient = softmax(logits) - one_hot(target).
std::pair<double, Eigen::Vector2d> cross_entropy_loss(
    const Eigen::Vector2d& logits, Group target);

// One bias-corrected Adam update over the trainable set. The gradient's
// conv section must be present exactly when the stack is trainable; a
// gradient for a frozen stack is rejected.
void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state,
               const TrainConfig& config);

struct TrainingLog {
  std::vector<double> mean_loss;
  std::vector<double> wall_ms;
  std::vector<double> grad_norm;

  void to_csv(const std::string& path, const std::string& provenance) const;
};

struct TrainHooks {
  std::function<void(int epoch, const ModelParams&, const TrainingLog&)>
      on_epoch_end;
  std::ostream* augment_trace = nullptr;  // one JSON line per augmented sample
};

// Gradient accumulation helpers shared with the evaluation harness.
GradientSet zero_gradients(const ModelParams& params, bool include_conv);
void accumulate_gradients(GradientSet& into, const GradientSet& g,
                          bool include_conv);
void scale_gradients(GradientSet& g, double s, bool include_conv);

// epochs x ceil(N / batch) Adam steps over per-epoch reshuffled batches,
// each sample freshly augmented every epoch. Deterministic given the seed
// when threads == 1; with threads > 1 the reduction order is fixed per
// thread count. The frozen flag on params.conv is driven by the configured
// training setup.
TrainingLog train(const LoadedDataset& data, ModelParams& params,
                  const ModelConfig& mconfig, const TrainConfig& tconfig,
                  const NoiseCorpus& noise, const TrainHooks& hooks = {});

}  // namespace voicepd

#endif  // VOICEPD_TRAIN_HPP_
