// voicepd/model.hpp

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

#ifndef VOICEPD_MODEL_HPP_
#define VOICEPD_MODEL_HPP_

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "voicepd/features.hpp"
#include "voicepd/rng.hpp"

namespace voicepd {

enum class Group : int { kHP = 0, kPD = 1 };

inline const char* group_name(Group g) {
  return g == Group::kPD ? "PD" : "HP";
}
Group parse_group(const std::string& s);

// Sequence-to-one classifier: conv feature map -> single-layer
// bidirectional GRU -> final hidden states -> MLP head -> 2 logits.
struct ModelConfig {
  ConvStackConfig conv = wav2vec_base_encoder_config();
  int gru_hidden = 256;
  int head_hidden = 128;

  int feature_dim() const { return conv.output_channels(); }
  void validate() const;
  std::string to_json() const;
  static ModelConfig from_json(const std::string& json);
};

struct GruDirectionParams {
  // Gate rows stacked [update; reset; candidate].
  Eigen::MatrixXd w_input;  // 3H x D
  Eigen::MatrixXd w_recur;  // 3H x H
  Eigen::VectorXd bias;     // 3H
};

struct GruParams {
  GruDirectionParams forward;
  GruDirectionParams backward;
  int hidden() const { return static_cast<int>(forward.w_recur.cols()); }
};

struct HeadParams {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
  Eigen::MatrixXd w3;  // 2 x head_hidden
  Eigen::VectorXd b3;
};

struct ModelParams {
  ConvStackParams conv;
  GruParams gru;
  HeadParams head;
};

// Gradients share the parameter layout; conv is absent when the stack is
// frozen.
struct GradientSet {
  std::optional<ConvStackParams> conv;
  GruParams gru;
  HeadParams head;
};

// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for GRU and head weights.
GruParams init_gru_params(int input_dim, int hidden, Rng& rng);
HeadParams init_head_params(int input_dim, int hidden, Rng& rng);
ModelParams init_model_params(const ModelConfig& config, Rng& rng);

struct Prediction {
  Eigen::Vector2d logits;
  double probability_pd = 0.0;  // softmax(logits)[PD]
  Group label = Group::kHP;     // argmax, ties toward PD
};

Prediction prediction_from_logits(const Eigen::Vector2d& logits);

// One column per processing step; columns are contiguous for the BPTT loop.
struct GruDirectionCache {
  Eigen::MatrixXd h_prev;     // H x T, hidden entering each step
  Eigen::MatrixXd update_z;   // H x T
  Eigen::MatrixXd reset_r;    // H x T
  Eigen::MatrixXd cand;       // H x T, tanh candidate
  Eigen::MatrixXd reset_h;    // H x T, r (.) h_prev
};

struct GruCache {
  Eigen::MatrixXd input;  // T x D
  GruDirectionCache fwd;
  GruDirectionCache bwd;  // indexed by processing order (reversed time)
};

// Runs the recurrence in both directions and concatenates the two final
// hidden states into a 2H vector.
Eigen::VectorXd gru_forward(const FeatureMap& features, const GruParams& params,
                            GruCache* cache = nullptr);

// Exact BPTT. grad_hidden is the 2H-vector gradient of the concatenated
// output.
std::pair<Eigen::MatrixXd, GruParams> gru_backward(
    const Eigen::VectorXd& grad_hidden, const GruCache& cache,
    const GruParams& params);

struct HeadCache {
  Eigen::VectorXd input;
  Eigen::VectorXd pre1, act1;
  Eigen::VectorXd pre2, act2;
};

// affine -> ReLU -> affine -> ReLU -> affine -> logits
Prediction head_forward(const Eigen::VectorXd& hidden, const HeadParams& params,
                        HeadCache* cache = nullptr);

std::pair<Eigen::VectorXd, HeadParams> head_backward(
    const Eigen::Vector2d& grad_logits, const HeadCache& cache,
    const HeadParams& params);

struct ModelCache {
  ConvCache conv;
  FeatureMap features;
  GruCache gru;
  HeadCache head;
};

Prediction model_forward(std::span<const double> waveform,
                         const ModelParams& params, const ModelConfig& config,
                         int sample_rate, ModelCache* cache = nullptr);

// Full backward from the logits gradient. Parameter gradients for the conv
// stack are computed only when it is not frozen.
GradientSet model_backward(const Eigen::Vector2d& grad_logits,
                           const ModelCache& cache, const ModelParams& params,
                           const ModelConfig& config);

// Flat enumeration of tensors, in a fixed order, for the optimizer,
// serialization and gradient checks. The visitor receives
// (name, data pointer, element count).
template <typename P, typename F>
void visit_gru_tensors(P& g, F&& f) {
  f("gru.fwd.w_input", g.forward.w_input.data(), g.forward.w_input.size());
  f("gru.fwd.w_recur", g.forward.w_recur.data(), g.forward.w_recur.size());
  f("gru.fwd.bias", g.forward.bias.data(), g.forward.bias.size());
  f("gru.bwd.w_input", g.backward.w_input.data(), g.backward.w_input.size());
  f("gru.bwd.w_recur", g.backward.w_recur.data(), g.backward.w_recur.size());
  f("gru.bwd.bias", g.backward.bias.data(), g.backward.bias.size());
}

template <typename P, typename F>
void visit_head_tensors(P& h, F&& f) {
  f("head.w1", h.w1.data(), h.w1.size());
  f("head.b1", h.b1.data(), h.b1.size());
  f("head.w2", h.w2.data(), h.w2.size());
  f("head.b2", h.b2.data(), h.b2.size());
  f("head.w3", h.w3.data(), h.w3.size());
  f("head.b3", h.b3.data(), h.b3.size());
}

template <typename P, typename F>
void visit_conv_tensors(P& c, F&& f) {
  for (size_t i = 0; i < c.layers.size(); ++i) {
    auto& l = c.layers[i];
    const std::string p = "conv.l" + std::to_string(i);
    f(p + ".weight", l.weight.data(), l.weight.size());
    f(p + ".bias", l.bias.data(), l.bias.size());
    if (l.gamma.size() > 0) {
      f(p + ".gamma", l.gamma.data(), l.gamma.size());
      f(p + ".beta", l.beta.data(), l.beta.size());
    }
  }
}

// Visits the trainable set: conv tensors first (unless excluded), then GRU,
// then head.
template <typename F>
void visit_trainable(ModelParams& p, bool include_conv, F&& f) {
  if (include_conv) visit_conv_tensors(p.conv, f);
  visit_gru_tensors(p.gru, f);
  visit_head_tensors(p.head, f);
}

template <typename F>
void visit_trainable(GradientSet& g, bool include_conv, F&& f) {
  if (include_conv) {
    if (!g.conv) throw std::logic_error("gradient set has no conv section");
    visit_conv_tensors(*g.conv, f);
  }
  visit_gru_tensors(g.gru, f);
  visit_head_tensors(g.head, f);
}

// Model checkpoint: "VPCK" magic, version, the ModelConfig as a JSON header
// chunk, then CONV/GRU/HEAD sections in the conv-weight-file layout.
void save_checkpoint(const ModelParams& params, const ModelConfig& config,
                     const std::string& path);
std::pair<ModelParams, ModelConfig> load_checkpoint(const std::string& path);

}  // namespace voicepd

#endif  // VOICEPD_MODEL_HPP_
