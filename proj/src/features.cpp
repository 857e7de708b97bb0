// src/features.cpp

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

#include "voicepd/features.hpp"

#include <complex>
#include <fstream>

#include <unsupported/Eigen/FFT>

#include "voicepd/error.hpp"
#include "voicepd/util.hpp"

namespace voicepd {

namespace {
constexpr double kNormEps = 1e-5;
}

void ConvStackConfig::validate() const {
  if (layers.empty()) throw ValidationError("conv stack needs >= 1 layer");
  if (layers.front().in_channels != 1) {
    throw ValidationError("first conv layer must take 1 input channel");
  }
  for (size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.stride < 1 || l.kernel < l.stride) {
      throw ValidationError("conv layer " + std::to_string(i) +
                            ": need kernel >= stride >= 1");
    }
    if (l.out_channels < 1) {
      throw ValidationError("conv layer " + std::to_string(i) +
                            ": out_channels must be positive");
    }
    if (i > 0 && layers[i - 1].out_channels != l.in_channels) {
      throw ValidationError("conv layer " + std::to_string(i) +
                            ": in_channels does not chain from previous "
                            "layer");
    }
  }
}

int ConvStackConfig::total_stride() const {
  int s = 1;
  for (const auto& l : layers) s *= l.stride;
  return s;
}

long ConvStackConfig::output_frames(long input_length) const {
  long n = input_length;
  for (const auto& l : layers) {
    if (n < l.kernel) return 0;
    n = (n - l.kernel) / l.stride + 1;
  }
  return n;
}

long ConvStackConfig::min_input_length() const {
  long n = 1;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    n = (n - 1) * it->stride + it->kernel;
  }
  return n;
}

ConvStackConfig wav2vec_base_encoder_config() {
  ConvStackConfig c;
  c.layers = {{1, 512, 10, 5},  {512, 512, 3, 2}, {512, 512, 3, 2},
              {512, 512, 3, 2}, {512, 512, 3, 2}, {512, 512, 2, 2},
              {512, 512, 2, 2}};
  c.activation = Activation::kGelu;
  c.normalization = NormScheme::kGroupNormFirst;
  return c;
}

ConvStackParams init_conv_params(const ConvStackConfig& config, Rng& rng) {
  config.validate();
  ConvStackParams params;
  params.layers.resize(config.layers.size());
  for (size_t i = 0; i < config.layers.size(); ++i) {
    const auto& spec = config.layers[i];
    auto& layer = params.layers[i];
    const int fan_in = spec.in_channels * spec.kernel;
    const double bound = std::sqrt(6.0 / fan_in);
    layer.weight.resize(spec.out_channels, fan_in);
    for (int r = 0; r < layer.weight.rows(); ++r) {
      for (int c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = rng.uniform(-bound, bound);
      }
    }
    layer.bias = Eigen::VectorXd::Zero(spec.out_channels);
    if (config.layer_has_norm(i)) {
      layer.gamma = Eigen::VectorXd::Ones(spec.out_channels);
      layer.beta = Eigen::VectorXd::Zero(spec.out_channels);
    }
  }
  return params;
}

namespace {

// Unfold (C x L) into (C*K x L_out) so the convolution is one GEMM.
Eigen::MatrixXd im2col(const Eigen::MatrixXd& x, int kernel, int stride,
                       long l_out) {
  const long c_in = x.rows();
  Eigen::MatrixXd col(c_in * kernel, l_out);
  for (long t = 0; t < l_out; ++t) {
    for (long c = 0; c < c_in; ++c) {
      for (int j = 0; j < kernel; ++j) {
        col(c * kernel + j, t) = x(c, t * stride + j);
      }
    }
  }
  return col;
}

void col2im_accumulate(const Eigen::MatrixXd& dcol, int kernel, int stride,
                       Eigen::MatrixXd& dx) {
  const long c_in = dx.rows();
  const long l_out = dcol.cols();
  for (long t = 0; t < l_out; ++t) {
    for (long c = 0; c < c_in; ++c) {
      for (int j = 0; j < kernel; ++j) {
        dx(c, t * stride + j) += dcol(c * kernel + j, t);
      }
    }
  }
}

}  // namespace

FeatureMap conv_forward(std::span<const double> waveform,
                        const ConvStackParams& params,
                        const ConvStackConfig& config, int sample_rate,
                        ConvCache* cache) {
  config.validate();
  if (params.layers.size() != config.layers.size()) {
    throw ValidationError("conv params do not match config layer count");
  }
  const long min_len = config.min_input_length();
  if (static_cast<long>(waveform.size()) < min_len) {
    throw ValidationError("input of " + std::to_string(waveform.size()) +
                          " samples is shorter than the receptive field (" +
                          std::to_string(min_len) + ")");
  }
  for (double v : waveform) {
    if (!std::isfinite(v)) throw ValidationError("non-finite input sample");
  }

  if (cache) {
    cache->layers.clear();
    cache->layers.resize(config.layers.size());
  }

  Eigen::MatrixXd x(1, static_cast<long>(waveform.size()));
  for (size_t i = 0; i < waveform.size(); ++i) x(0, static_cast<long>(i)) = waveform[i];

  for (size_t i = 0; i < config.layers.size(); ++i) {
    const auto& spec = config.layers[i];
    const auto& layer = params.layers[i];
    const long l_out = (x.cols() - spec.kernel) / spec.stride + 1;

    if (cache) cache->layers[i].input = x;

    Eigen::MatrixXd col = im2col(x, spec.kernel, spec.stride, l_out);
    Eigen::MatrixXd z = layer.weight * col;
    z.colwise() += layer.bias;

    if (cache) cache->layers[i].pre_norm = z;

    if (config.layer_has_norm(i)) {
      // 512-group group norm over 512 channels reduces to per-channel
      // normalization along time.
      Eigen::VectorXd mean = z.rowwise().mean();
      Eigen::MatrixXd centered = z.colwise() - mean;
      Eigen::VectorXd var = centered.array().square().rowwise().mean();
      Eigen::VectorXd inv_std =
          (var.array() + kNormEps).sqrt().inverse().matrix();
      z = (centered.array().colwise() * inv_std.array()).matrix();
      z = (z.array().colwise() * layer.gamma.array()).matrix();
      z.colwise() += layer.beta;
      if (cache) {
        cache->layers[i].mean = mean;
        cache->layers[i].inv_std = inv_std;
      }
    }

    if (cache) cache->layers[i].pre_act = z;

    for (long r = 0; r < z.rows(); ++r) {
      for (long c = 0; c < z.cols(); ++c) {
        z(r, c) = activation_apply(config.activation, z(r, c));
      }
    }
    x = std::move(z);
  }

  FeatureMap fm;
  fm.features = x.transpose();  // frames x channels
  fm.frame_rate =
      sample_rate > 0
          ? static_cast<double>(sample_rate) / config.total_stride()
          : 0.0;
  return fm;
}

std::pair<std::vector<double>, ConvStackParams> conv_backward(
    const Eigen::MatrixXd& grad_out, const ConvCache& cache,
    const ConvStackParams& params, const ConvStackConfig& config) {
  if (cache.layers.size() != config.layers.size()) {
    throw ValidationError("conv_backward: missing or mismatched cache");
  }

  ConvStackParams grads;
  grads.layers.resize(params.layers.size());

  Eigen::MatrixXd dy = grad_out.transpose();  // channels x frames

  for (long i = static_cast<long>(config.layers.size()) - 1; i >= 0; --i) {
    const auto& spec = config.layers[i];
    const auto& layer = params.layers[i];
    const auto& c = cache.layers[i];
    auto& g = grads.layers[i];

    // activation
    Eigen::MatrixXd dz = dy;
    for (long r = 0; r < dz.rows(); ++r) {
      for (long col = 0; col < dz.cols(); ++col) {
        dz(r, col) *= activation_grad(config.activation, c.pre_act(r, col));
      }
    }

    // normalization
    if (config.layer_has_norm(i)) {
      const long L = dz.cols();
      Eigen::MatrixXd xhat =
          ((c.pre_norm.colwise() - c.mean).array().colwise() *
           c.inv_std.array())
              .matrix();
      g.gamma = (dz.array() * xhat.array()).rowwise().sum();
      g.beta = dz.rowwise().sum();
      Eigen::MatrixXd dxhat =
          (dz.array().colwise() * layer.gamma.array()).matrix();
      Eigen::VectorXd mean_dxhat = dxhat.rowwise().mean();
      Eigen::VectorXd mean_dxhat_xhat =
          (dxhat.array() * xhat.array()).rowwise().mean();
      dz = ((dxhat.colwise() - mean_dxhat).array() -
            (xhat.array().colwise() * mean_dxhat_xhat.array()))
               .matrix();
      dz = (dz.array().colwise() * c.inv_std.array()).matrix();
      (void)L;
    }

    // convolution
    const long l_out = dz.cols();
    Eigen::MatrixXd col = im2col(c.input, spec.kernel, spec.stride, l_out);
    g.weight.noalias() = dz * col.transpose();
    g.bias = dz.rowwise().sum();

    Eigen::MatrixXd dcol = layer.weight.transpose() * dz;
    Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(c.input.rows(), c.input.cols());
    col2im_accumulate(dcol, spec.kernel, spec.stride, dx);
    dy = std::move(dx);
  }

  std::vector<double> dwave(dy.cols());
  for (long i = 0; i < dy.cols(); ++i) dwave[static_cast<size_t>(i)] = dy(0, i);
  return {std::move(dwave), std::move(grads)};
}

namespace {

void write_conv_layer(std::ostream& os, const ConvStackParams::Layer& l,
                      int in_channels, int kernel) {
  write_u32(os, static_cast<uint32_t>(l.weight.rows()));
  write_u32(os, static_cast<uint32_t>(in_channels));
  write_u32(os, static_cast<uint32_t>(kernel));
  write_u8(os, l.gamma.size() > 0 ? 1 : 0);
  // row-major (out, in, tap) on disk
  for (long r = 0; r < l.weight.rows(); ++r) {
    for (long c = 0; c < l.weight.cols(); ++c) {
      const double v = l.weight(r, c);
      write_f64s(os, &v, 1);
    }
  }
  write_f64s(os, l.bias.data(), static_cast<size_t>(l.bias.size()));
  if (l.gamma.size() > 0) {
    write_f64s(os, l.gamma.data(), static_cast<size_t>(l.gamma.size()));
    write_f64s(os, l.beta.data(), static_cast<size_t>(l.beta.size()));
  }
}

ConvStackParams::Layer read_conv_layer(std::istream& is,
                                       const ConvLayerSpec& spec,
                                       bool expect_norm, size_t index) {
  const uint32_t out = read_u32(is, "conv layer header");
  const uint32_t in = read_u32(is, "conv layer header");
  const uint32_t kernel = read_u32(is, "conv layer header");
  const uint8_t has_norm = read_u8(is, "conv layer header");
  if (out != static_cast<uint32_t>(spec.out_channels) ||
      in != static_cast<uint32_t>(spec.in_channels) ||
      kernel != static_cast<uint32_t>(spec.kernel)) {
    throw ValidationError(
        "shape mismatch at conv layer " + std::to_string(index) +
        ": file has (out=" + std::to_string(out) + ", in=" +
        std::to_string(in) + ", kernel=" + std::to_string(kernel) +
        "), config wants (out=" + std::to_string(spec.out_channels) +
        ", in=" + std::to_string(spec.in_channels) + ", kernel=" +
        std::to_string(spec.kernel) + ")");
  }
  if ((has_norm != 0) != expect_norm) {
    throw ValidationError("normalization mismatch at conv layer " +
                          std::to_string(index));
  }
  ConvStackParams::Layer l;
  l.weight.resize(out, in * kernel);
  for (long r = 0; r < l.weight.rows(); ++r) {
    for (long c = 0; c < l.weight.cols(); ++c) {
      read_f64s(is, &l.weight(r, c), 1, "conv weights");
    }
  }
  l.bias.resize(out);
  read_f64s(is, l.bias.data(), out, "conv bias");
  if (has_norm) {
    l.gamma.resize(out);
    l.beta.resize(out);
    read_f64s(is, l.gamma.data(), out, "conv norm gamma");
    read_f64s(is, l.beta.data(), out, "conv norm beta");
  }
  return l;
}

}  // namespace

void write_conv_section(std::ostream& os, const ConvStackParams& params,
                        const ConvStackConfig& config) {
  if (params.layers.size() != config.layers.size()) {
    throw ValidationError("params/config layer count mismatch");
  }
  write_u32(os, static_cast<uint32_t>(params.layers.size()));
  for (size_t i = 0; i < params.layers.size(); ++i) {
    write_conv_layer(os, params.layers[i], config.layers[i].in_channels,
                     config.layers[i].kernel);
  }
}

ConvStackParams read_conv_section(std::istream& is,
                                  const ConvStackConfig& config) {
  const uint32_t n = read_u32(is, "conv section");
  if (n != config.layers.size()) {
    throw ValidationError("weight data has " + std::to_string(n) +
                          " conv layers, config wants " +
                          std::to_string(config.layers.size()));
  }
  ConvStackParams params;
  params.layers.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    params.layers.push_back(read_conv_layer(is, config.layers[i],
                                            config.layer_has_norm(i), i));
  }
  return params;
}

void save_conv_weights(const ConvStackParams& params,
                       const ConvStackConfig& config,
                       const std::string& path) {
  config.validate();
  if (params.layers.size() != config.layers.size()) {
    throw ValidationError("params/config layer count mismatch");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot create weight file: " + path);
  os.write("W2VC", 4);
  write_u32(os, 1);  // format version
  write_conv_section(os, params, config);
  if (!os) throw std::runtime_error("I/O failure writing " + path);
}

ConvStackParams load_conv_weights(const std::string& path,
                                  const ConvStackConfig& config) {
  config.validate();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open weight file: " + path);
  char magic[4];
  read_bytes(is, magic, 4, "magic");
  if (std::string_view(magic, 4) != "W2VC") {
    throw ValidationError("bad magic in weight file: " + path);
  }
  const uint32_t version = read_u32(is, "version");
  if (version != 1) {
    throw ValidationError("unsupported weight file version " +
                          std::to_string(version));
  }
  return read_conv_section(is, config);
}

void SpectrogramConfig::validate() const {
  if (fft_length <= 0 || (fft_length & (fft_length - 1)) != 0) {
    throw ValidationError("fft_length must be a power of two");
  }
  if (hop <= 0 || hop > fft_length) {
    throw ValidationError("need 0 < hop <= fft_length");
  }
}

Eigen::MatrixXd stft_spectrogram(std::span<const double> waveform,
                                 const SpectrogramConfig& config) {
  config.validate();
  const long n = static_cast<long>(waveform.size());
  const int w = config.fft_length;
  if (n < w) {
    throw ValidationError("waveform shorter than one analysis window");
  }
  const long frames = (n - w) / config.hop + 1;
  const int bins = w / 2;  // Nyquist bin dropped, DC kept

  std::vector<double> window(w);
  for (int i = 0; i < w; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / w);
  }

  Eigen::FFT<double> fft;
  Eigen::MatrixXd out(frames, bins);
  std::vector<double> frame(w);
  std::vector<std::complex<double>> spec(w);
  for (long f = 0; f < frames; ++f) {
    const long start = f * config.hop;
    for (int i = 0; i < w; ++i) {
      frame[i] = waveform[static_cast<size_t>(start + i)] * window[i];
    }
    fft.fwd(spec, frame);
    for (int b = 0; b < bins; ++b) out(f, b) = std::abs(spec[b]);
  }
  return out;
}

}  // namespace voicepd
