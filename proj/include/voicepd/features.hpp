// voicepd/features.hpp

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

#ifndef VOICEPD_FEATURES_HPP_
#define VOICEPD_FEATURES_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "voicepd/rng.hpp"

namespace voicepd {

enum class Activation { kGelu, kRelu };
enum class NormScheme { kNone, kGroupNormFirst };

struct ConvLayerSpec {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int stride = 0;
};

// Strided temporal convolution stack mapping a raw waveform to a frame-rate
// latent representation. The default is the 7-layer, 512-channel encoder
// used by wav2vec 2.0 Base (kernels 10,3,3,3,3,2,2, strides 5,2,2,2,2,2,2,
// GELU, per-channel group norm on the first layer).
struct ConvStackConfig {
  std::vector<ConvLayerSpec> layers;
  Activation activation = Activation::kGelu;
  NormScheme normalization = NormScheme::kGroupNormFirst;

  void validate() const;
  bool layer_has_norm(size_t i) const {
    return normalization == NormScheme::kGroupNormFirst && i == 0;
  }
  int output_channels() const { return layers.back().out_channels; }
  int total_stride() const;
  // Composed stride arithmetic: per layer floor((L - kernel)/stride) + 1.
  long output_frames(long input_length) const;
  // Smallest input that yields one output frame (the receptive field).
  long min_input_length() const;
};

ConvStackConfig wav2vec_base_encoder_config();

struct ConvStackParams {
  struct Layer {
    Eigen::MatrixXd weight;  // out x (in * kernel), taps fastest
    Eigen::VectorXd bias;    // out
    Eigen::VectorXd gamma;   // per-channel norm scale; empty if no norm
    Eigen::VectorXd beta;    // per-channel norm shift; empty if no norm
  };
  std::vector<Layer> layers;
  bool frozen = false;
};

// Kaiming-uniform weights, zero biases, identity norm affine.
ConvStackParams init_conv_params(const ConvStackConfig& config, Rng& rng);

// Time-major matrix of learned features (frames x channels).
struct FeatureMap {
  Eigen::MatrixXd features;
  double frame_rate = 0.0;  // Hz
  long frames() const { return features.rows(); }
};

// Per-layer activations retained for the backward pass.
struct ConvCache {
  struct Layer {
    Eigen::MatrixXd input;    // C_in x L_in
    Eigen::MatrixXd pre_norm;  // C_out x L_out, conv output before norm
    Eigen::MatrixXd pre_act;   // C_out x L_out, after norm, before activation
    Eigen::VectorXd mean;      // per channel (empty if no norm)
    Eigen::VectorXd inv_std;   // per channel (empty if no norm)
  };
  std::vector<Layer> layers;
};

// Valid (no-padding) strided convolutions with per-layer normalization and
// activation. Pass a cache to enable conv_backward.
FeatureMap conv_forward(std::span<const double> waveform,
                        const ConvStackParams& params,
                        const ConvStackConfig& config, int sample_rate,
                        ConvCache* cache = nullptr);

// Exact gradients of conv_forward. grad_out is frames x channels, matching
// FeatureMap. Returns the waveform gradient and a ConvStackParams-shaped
// gradient structure.
std::pair<std::vector<double>, ConvStackParams> conv_backward(
    const Eigen::MatrixXd& grad_out, const ConvCache& cache,
    const ConvStackParams& params, const ConvStackConfig& config);

// Weight file: magic "W2VC", version, layer count, then per layer a shape
// header and little-endian 64-bit floats. Lossless round-trip.
void save_conv_weights(const ConvStackParams& params,
                       const ConvStackConfig& config, const std::string& path);
ConvStackParams load_conv_weights(const std::string& path,
                                  const ConvStackConfig& config);

// Streamed variants used by the model checkpoint container.
void write_conv_section(std::ostream& os, const ConvStackParams& params,
                        const ConvStackConfig& config);
ConvStackParams read_conv_section(std::istream& is,
                                  const ConvStackConfig& config);

struct SpectrogramConfig {
  int fft_length = 1024;
  int hop = 896;  // overlap of fft_length / 8
  void validate() const;
};

// Hann-windowed magnitude STFT, time x frequency. The Nyquist bin is
// dropped so a 1024-point FFT yields 512 frequency bins, matching the
// feature-map width.
Eigen::MatrixXd stft_spectrogram(std::span<const double> waveform,
                                 const SpectrogramConfig& config);

inline double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2));
}

inline double gelu_grad(double x) {
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)) + x * phi;
}

inline double activation_apply(Activation a, double x) {
  return a == Activation::kGelu ? gelu(x) : (x > 0.0 ? x : 0.0);
}

inline double activation_grad(Activation a, double x) {
  return a == Activation::kGelu ? gelu_grad(x) : (x > 0.0 ? 1.0 : 0.0);
}

}  // namespace voicepd

#endif  // VOICEPD_FEATURES_HPP_
