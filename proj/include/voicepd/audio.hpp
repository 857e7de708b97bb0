// voicepd/audio.hpp

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

#ifndef VOICEPD_AUDIO_HPP_
#define VOICEPD_AUDIO_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace voicepd {

// Sampled waveform. Samples are 64-bit reals in [-1, 1] once normalized;
// DSP runs at full double precision and quantizes to 16-bit PCM only at
// file boundaries.
struct AudioClip {
  std::vector<std::vector<double>> channels;  // equal-length channels
  int sample_rate = 0;                        // Hz, > 0
  bool silence = false;  // set by peak_normalize on an all-zero clip

  int num_channels() const { return static_cast<int>(channels.size()); }
  size_t num_frames() const {
    return channels.empty() ? 0 : channels[0].size();
  }
  double duration_s() const {
    return sample_rate > 0
               ? static_cast<double>(num_frames()) / sample_rate
               : 0.0;
  }

  std::vector<double>& mono();
  const std::vector<double>& mono() const;

  static AudioClip make_mono(std::vector<double> samples, int sample_rate);
};

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  uint64_t frames = 0;
};

// RIFF/WAVE, 16-bit integer PCM, 1 or 2 channels. Unknown chunks are
// skipped. Samples map to reals via division by 32768.
AudioClip read_wav(const std::string& path);

// Header-only parse; does not load sample data.
WavInfo read_wav_info(const std::string& path);

// 16-bit PCM output. Requires all samples in [-1, 1] and a non-empty clip;
// a read-back differs from the input by at most one quantization step
// (1/32768).
void write_wav(const AudioClip& clip, const std::string& path);

// Left minus right, for two-channel recordings where the second channel
// carries correlated noise. The result may exceed [-1, 1]; callers are
// expected to peak-normalize before quantizing.
AudioClip channel_subtract(const AudioClip& clip);

// Scales so the peak magnitude is exactly 1.0. An all-zero clip is returned
// unchanged with the silence flag set instead of erroring, so corrupt
// dataset entries stay reportable.
AudioClip peak_normalize(const AudioClip& clip);

// Band-limited sample-rate conversion of a mono clip: Kaiser-windowed sinc
// (beta = 8.6, 64 taps per output-rate phase). Output length is exactly
// round(n * target_rate / sample_rate).
AudioClip resample(const AudioClip& clip, int target_rate);

size_t resample_output_length(size_t in_len, int in_rate, int out_rate);

}  // namespace voicepd

#endif  // VOICEPD_AUDIO_HPP_
