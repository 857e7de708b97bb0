// src/audio.cpp

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

#include "voicepd/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "voicepd/error.hpp"
#include "voicepd/util.hpp"

namespace voicepd {

std::vector<double>& AudioClip::mono() {
  if (channels.size() != 1) {
    throw ValidationError("expected a mono clip, got " +
                          std::to_string(channels.size()) + " channels");
  }
  return channels[0];
}

const std::vector<double>& AudioClip::mono() const {
  return const_cast<AudioClip*>(this)->mono();
}

AudioClip AudioClip::make_mono(std::vector<double> samples, int sample_rate) {
  AudioClip clip;
  clip.channels.push_back(std::move(samples));
  clip.sample_rate = sample_rate;
  return clip;
}

namespace {

constexpr uint16_t kFormatPcm = 0x0001;

struct FmtChunk {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits_per_sample = 0;
  bool seen = false;
};

struct WavData {
  FmtChunk fmt;
  std::vector<int16_t> interleaved;  // empty when header_only
  uint64_t data_bytes = 0;
};

WavData parse_wav(const std::string& path, bool header_only) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open WAV file: " + path);

  char riff[4], wave[4];
  uint32_t riff_size;
  in.read(riff, 4);
  in.read(reinterpret_cast<char*>(&riff_size), 4);
  in.read(wave, 4);
  if (!in || std::memcmp(riff, "RIFF", 4) != 0 ||
      std::memcmp(wave, "WAVE", 4) != 0) {
    throw ValidationError("malformed WAV header (not a RIFF/WAVE file): " +
                          path);
  }

  WavData out;
  bool data_seen = false;
  while (true) {
    char id[4];
    uint32_t size;
    in.read(id, 4);
    in.read(reinterpret_cast<char*>(&size), 4);
    if (!in) break;

    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw ValidationError("malformed fmt chunk: " + path);
      char buf[16];
      in.read(buf, 16);
      if (!in) throw ValidationError("truncated fmt chunk: " + path);
      std::memcpy(&out.fmt.format, buf + 0, 2);
      std::memcpy(&out.fmt.channels, buf + 2, 2);
      std::memcpy(&out.fmt.sample_rate, buf + 4, 4);
      std::memcpy(&out.fmt.bits_per_sample, buf + 14, 2);
      out.fmt.seen = true;
      in.seekg(size - 16 + (size & 1), std::ios::cur);
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!out.fmt.seen) {
        throw ValidationError("data chunk precedes fmt chunk: " + path);
      }
      out.data_bytes = size;
      data_seen = true;
      if (header_only) break;
      out.interleaved.resize(size / 2);
      in.read(reinterpret_cast<char*>(out.interleaved.data()),
              static_cast<std::streamsize>(out.interleaved.size() * 2));
      if (static_cast<uint64_t>(in.gcount()) != out.interleaved.size() * 2) {
        throw ValidationError("truncated data chunk: " + path);
      }
      break;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);  // RIFF chunks are padded
    }
  }

  if (!out.fmt.seen || !data_seen) {
    throw ValidationError("missing fmt or data chunk: " + path);
  }
  if (out.fmt.format != kFormatPcm) {
    throw ValidationError("unsupported encoding (expected 16-bit integer "
                          "PCM, got format tag " +
                          std::to_string(out.fmt.format) + "): " + path);
  }
  if (out.fmt.bits_per_sample != 16) {
    throw ValidationError("unsupported bit depth " +
                          std::to_string(out.fmt.bits_per_sample) +
                          " (only 16-bit PCM): " + path);
  }
  if (out.fmt.channels != 1 && out.fmt.channels != 2) {
    throw ValidationError("unsupported channel count " +
                          std::to_string(out.fmt.channels) + ": " + path);
  }
  if (out.fmt.sample_rate == 0) {
    throw ValidationError("zero sample rate: " + path);
  }
  if (out.data_bytes == 0) {
    throw ValidationError("zero-length data chunk: " + path);
  }
  return out;
}

}  // namespace

AudioClip read_wav(const std::string& path) {
  WavData w = parse_wav(path, /*header_only=*/false);
  const int nch = w.fmt.channels;
  const size_t frames = w.interleaved.size() / nch;

  AudioClip clip;
  clip.sample_rate = static_cast<int>(w.fmt.sample_rate);
  clip.channels.assign(nch, std::vector<double>(frames));
  for (size_t i = 0; i < frames; ++i) {
    for (int c = 0; c < nch; ++c) {
      clip.channels[c][i] = w.interleaved[i * nch + c] / 32768.0;
    }
  }
  return clip;
}

WavInfo read_wav_info(const std::string& path) {
  WavData w = parse_wav(path, /*header_only=*/true);
  WavInfo info;
  info.sample_rate = static_cast<int>(w.fmt.sample_rate);
  info.channels = w.fmt.channels;
  info.frames = w.data_bytes / (2 * w.fmt.channels);
  return info;
}

void write_wav(const AudioClip& clip, const std::string& path) {
  const int nch = clip.num_channels();
  const size_t frames = clip.num_frames();
  if (nch < 1 || nch > 2) {
    throw ValidationError("write_wav supports 1 or 2 channels, got " +
                          std::to_string(nch));
  }
  if (frames == 0) throw ValidationError("refusing to write an empty clip");
  if (clip.sample_rate <= 0) throw ValidationError("invalid sample rate");
  for (const auto& ch : clip.channels) {
    if (ch.size() != frames) {
      throw ValidationError("channels have unequal lengths");
    }
    for (double x : ch) {
      if (!(x >= -1.0 && x <= 1.0)) {
        throw ValidationError("sample outside [-1, 1]; peak-normalize "
                              "before writing");
      }
    }
  }

  std::vector<int16_t> pcm(frames * nch);
  for (size_t i = 0; i < frames; ++i) {
    for (int c = 0; c < nch; ++c) {
      long q = std::lround(clip.channels[c][i] * 32768.0);
      q = std::clamp(q, -32768L, 32767L);
      pcm[i * nch + c] = static_cast<int16_t>(q);
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot create WAV file: " + path);

  const uint32_t data_bytes = static_cast<uint32_t>(pcm.size() * 2);
  const uint32_t byte_rate = clip.sample_rate * nch * 2;
  const uint16_t block_align = static_cast<uint16_t>(nch * 2);
  const uint16_t bits = 16;
  const uint16_t channels16 = static_cast<uint16_t>(nch);
  const uint32_t rate32 = static_cast<uint32_t>(clip.sample_rate);

  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_bytes(out, &kFormatPcm, 2);
  write_bytes(out, &channels16, 2);
  write_bytes(out, &rate32, 4);
  write_bytes(out, &byte_rate, 4);
  write_bytes(out, &block_align, 2);
  write_bytes(out, &bits, 2);
  out.write("data", 4);
  write_u32(out, data_bytes);
  write_bytes(out, pcm.data(), data_bytes);
  if (!out) throw std::runtime_error("I/O failure writing " + path);
}

AudioClip channel_subtract(const AudioClip& clip) {
  if (clip.num_channels() != 2) {
    throw ValidationError("channel_subtract requires exactly 2 channels");
  }
  const auto& left = clip.channels[0];
  const auto& right = clip.channels[1];
  if (left.size() != right.size()) {
    throw ValidationError("channels have unequal lengths");
  }
  std::vector<double> diff(left.size());
  for (size_t i = 0; i < left.size(); ++i) diff[i] = left[i] - right[i];
  return AudioClip::make_mono(std::move(diff), clip.sample_rate);
}

AudioClip peak_normalize(const AudioClip& clip) {
  if (clip.num_frames() == 0) {
    throw ValidationError("peak_normalize on an empty clip");
  }
  double peak = 0.0;
  for (const auto& ch : clip.channels) {
    for (double x : ch) peak = std::max(peak, std::fabs(x));
  }
  AudioClip out = clip;
  if (peak == 0.0) {
    out.silence = true;
    return out;
  }
  for (auto& ch : out.channels) {
    for (double& x : ch) x /= peak;
  }
  return out;
}

size_t resample_output_length(size_t in_len, int in_rate, int out_rate) {
  // round-half-up in exact integer arithmetic
  const unsigned __int128 num =
      static_cast<unsigned __int128>(in_len) * static_cast<uint64_t>(out_rate) *
          2 +
      static_cast<uint64_t>(in_rate);
  return static_cast<size_t>(num / (2 * static_cast<uint64_t>(in_rate)));
}

namespace {

double bessel_i0(double x) {
  // power series; converges fast for the beta range used here
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

}  // namespace

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) throw ValidationError("target_rate must be positive");
  const auto& x = clip.mono();
  if (x.empty()) throw ValidationError("resample on an empty clip");
  const int in_rate = clip.sample_rate;
  if (in_rate <= 0) throw ValidationError("invalid input sample rate");

  const size_t out_len =
      resample_output_length(x.size(), in_rate, target_rate);
  std::vector<double> y(out_len, 0.0);

  const double ratio = static_cast<double>(target_rate) / in_rate;
  // Cutoff at the lower of the two Nyquist rates. The kernel spans 64 taps
  // at the output-rate spacing when downsampling, so the transition band
  // stays inside [0.45, 0.55] of the lower rate.
  const double cutoff = std::min(1.0, ratio);     // x pi rad/sample (input)
  const double half_width = 32.0 / cutoff;        // input samples
  constexpr double kBeta = 8.6;
  const double i0_beta = bessel_i0(kBeta);
  const long n_in = static_cast<long>(x.size());

  for (size_t n = 0; n < out_len; ++n) {
    // exact rational sample position: t = n * in_rate / target_rate
    const uint64_t num = static_cast<uint64_t>(n) * in_rate;
    const long t_int = static_cast<long>(num / target_rate);
    const double t_frac =
        static_cast<double>(num % target_rate) / target_rate;

    const long k0 = t_int - static_cast<long>(half_width) - 1;
    const long k1 = t_int + static_cast<long>(half_width) + 1;
    double acc = 0.0;
    for (long k = k0; k <= k1; ++k) {
      const double u = (static_cast<double>(k - t_int) - t_frac);
      const double v = u / half_width;
      if (v <= -1.0 || v >= 1.0) continue;
      const double arg = M_PI * cutoff * u;
      const double sinc = (std::fabs(arg) < 1e-12)
                              ? 1.0
                              : std::sin(arg) / arg;
      const double window = bessel_i0(kBeta * std::sqrt(1.0 - v * v)) / i0_beta;
      // edge handling: replicate first/last sample so DC survives at the ends
      const long ks = std::clamp(k, 0L, n_in - 1);
      acc += x[static_cast<size_t>(ks)] * cutoff * sinc * window;
    }
    y[n] = acc;
  }

  AudioClip out = AudioClip::make_mono(std::move(y), target_rate);
  out.silence = clip.silence;
  return out;
}

}  // namespace voicepd
