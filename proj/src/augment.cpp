// src/augment.cpp

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

#include "voicepd/augment.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "voicepd/error.hpp"

namespace voicepd {

namespace {

double mean_power(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : acc / x.size();
}

}  // namespace

void AugmentationConfig::validate() const {
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob_ok(p_background) || !prob_ok(p_colored) || !prob_ok(p_shift) ||
      !prob_ok(p_polarity)) {
    throw ValidationError("augmentation probabilities must be in [0, 1]");
  }
  if (snr_db_range[0] > snr_db_range[1] ||
      f_decay_range[0] > f_decay_range[1] ||
      shift_fraction_range[0] > shift_fraction_range[1]) {
    throw ValidationError("augmentation ranges must satisfy low <= high");
  }
  if (snr_db_range[0] < 0.0 || snr_db_range[1] > 60.0) {
    throw ValidationError("SNR range outside the [0, 60] dB sanity bound");
  }
  if (std::fabs(shift_fraction_range[0]) > 0.5 ||
      std::fabs(shift_fraction_range[1]) > 0.5) {
    throw ValidationError("shift fractions must be within [-0.5, 0.5]");
  }
}

std::string AppliedAugmentations::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"background\":" << (background ? "true" : "false");
  if (background) {
    os << ",\"noise_index\":" << *noise_index
       << ",\"noise_offset\":" << *noise_offset
       << ",\"background_snr_db\":" << *background_snr_db
       << ",\"background_skipped_silent\":"
       << (background_skipped_silent ? "true" : "false");
  }
  os << ",\"colored\":" << (colored ? "true" : "false");
  if (colored) {
    os << ",\"colored_snr_db\":" << *colored_snr_db
       << ",\"f_decay\":" << *f_decay << ",\"colored_skipped_silent\":"
       << (colored_skipped_silent ? "true" : "false");
  }
  os << ",\"shift\":" << (shift ? "true" : "false");
  if (shift) os << ",\"shift_fraction\":" << *shift_fraction;
  os << ",\"polarity\":" << (polarity ? "true" : "false") << "}";
  return os.str();
}

AudioClip add_background_noise(const AudioClip& clip, const AudioClip& noise,
                               double snr_db, Rng& rng,
                               AppliedAugmentations* record) {
  if (!std::isfinite(snr_db)) throw ValidationError("snr_db must be finite");
  const auto& x = clip.mono();
  const auto& n = noise.mono();
  if (n.empty()) throw ValidationError("empty noise clip");

  const double p_signal = mean_power(x);
  if (p_signal == 0.0) {
    if (record) record->background_skipped_silent = true;
    return clip;
  }

  // Tile cyclically if the noise is shorter than the clip, then pick a
  // uniformly random fragment offset.
  std::vector<double> tiled;
  const std::vector<double>* src = &n;
  if (n.size() < x.size()) {
    tiled.resize(x.size());
    for (size_t i = 0; i < x.size(); ++i) tiled[i] = n[i % n.size()];
    src = &tiled;
  }
  const size_t max_offset = src->size() - x.size();
  const size_t offset = static_cast<size_t>(rng.uniform_int(max_offset + 1));

  double p_frag = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double v = (*src)[offset + i];
    p_frag += v * v;
  }
  p_frag /= x.size();
  if (p_frag == 0.0) {
    if (record) record->background_skipped_silent = true;
    return clip;
  }

  const double scale = std::sqrt(p_signal / (p_frag * std::pow(10.0, snr_db / 10.0)));
  AudioClip out = clip;
  auto& y = out.mono();
  for (size_t i = 0; i < y.size(); ++i) y[i] += scale * (*src)[offset + i];

  if (record) {
    record->background = true;
    record->noise_offset = offset;
    record->background_snr_db = snr_db;
  }
  return out;
}

AudioClip add_colored_noise(const AudioClip& clip, double snr_db,
                            double f_decay, Rng& rng,
                            AppliedAugmentations* record) {
  if (!std::isfinite(f_decay)) throw ValidationError("f_decay must be finite");
  const auto& x = clip.mono();
  if (x.empty()) throw ValidationError("empty clip");

  const double p_signal = mean_power(x);
  if (p_signal == 0.0) {
    if (record) record->colored_skipped_silent = true;
    return clip;
  }

  const size_t n = x.size();
  // Shape a white Gaussian spectrum: amplitude factor f^(-f_decay/2) per
  // bin, DC zeroed. Half-spectrum is drawn in ascending bin order so the
  // draw sequence is reproducible.
  std::vector<std::complex<double>> spectrum(n, {0.0, 0.0});
  const size_t half = n / 2;
  for (size_t k = 1; k <= half; ++k) {
    const double amp = std::pow(static_cast<double>(k), -f_decay / 2.0);
    const double re = rng.gaussian();
    if (n % 2 == 0 && k == half) {
      spectrum[k] = {amp * re, 0.0};  // Nyquist bin is real
      continue;
    }
    const double im = rng.gaussian();
    spectrum[k] = {amp * re, amp * im};
    spectrum[n - k] = std::conj(spectrum[k]);
  }

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> time(n);
  fft.inv(time, spectrum);

  std::vector<double> noise(n);
  for (size_t i = 0; i < n; ++i) noise[i] = time[i].real();

  const double p_noise = mean_power(noise);
  if (p_noise == 0.0) {
    if (record) record->colored_skipped_silent = true;
    return clip;
  }
  const double scale =
      std::sqrt(p_signal / (p_noise * std::pow(10.0, snr_db / 10.0)));

  AudioClip out = clip;
  auto& y = out.mono();
  for (size_t i = 0; i < n; ++i) y[i] += scale * noise[i];

  if (record) {
    record->colored = true;
    record->colored_snr_db = snr_db;
    record->f_decay = f_decay;
  }
  return out;
}

AudioClip time_shift(const AudioClip& clip, double fraction) {
  if (std::fabs(fraction) > 0.5) {
    throw ValidationError("|shift fraction| must be <= 0.5");
  }
  const auto& x = clip.mono();
  const long n = static_cast<long>(x.size());
  const long k = std::lround(fraction * n);

  AudioClip out = clip;
  auto& y = out.mono();
  std::fill(y.begin(), y.end(), 0.0);
  for (long i = 0; i < n; ++i) {
    const long j = i + k;
    if (j >= 0 && j < n) y[j] = x[i];
  }
  return out;
}

AudioClip invert_polarity(const AudioClip& clip) {
  AudioClip out = clip;
  for (auto& ch : out.channels) {
    for (double& v : ch) v = -v;
  }
  return out;
}

std::pair<AudioClip, AppliedAugmentations> apply_pipeline(
    const AudioClip& clip, const AugmentationConfig& config,
    const NoiseCorpus& noise, Rng& rng) {
  config.validate();
  AppliedAugmentations record;
  AudioClip cur = clip;

  if (rng.uniform() < config.p_background) {
    if (noise.empty()) {
      throw ValidationError("background noise enabled but the noise corpus "
                            "is empty");
    }
    const size_t idx = static_cast<size_t>(rng.uniform_int(noise.size()));
    const double snr =
        rng.uniform(config.snr_db_range[0], config.snr_db_range[1]);
    AudioClip nclip = AudioClip::make_mono(noise[idx], cur.sample_rate);
    cur = add_background_noise(cur, nclip, snr, rng, &record);
    if (record.background) record.noise_index = idx;
  }

  if (rng.uniform() < config.p_colored) {
    const double snr =
        rng.uniform(config.snr_db_range[0], config.snr_db_range[1]);
    const double decay =
        rng.uniform(config.f_decay_range[0], config.f_decay_range[1]);
    cur = add_colored_noise(cur, snr, decay, rng, &record);
  }

  if (rng.uniform() < config.p_shift) {
    const double frac = rng.uniform(config.shift_fraction_range[0],
                                    config.shift_fraction_range[1]);
    cur = time_shift(cur, frac);
    record.shift = true;
    record.shift_fraction = frac;
  }

  if (rng.uniform() < config.p_polarity) {
    cur = invert_polarity(cur);
    record.polarity = true;
  }

  for (auto& ch : cur.channels) {
    for (double& v : ch) v = std::clamp(v, -1.0, 1.0);
  }
  return {std::move(cur), record};
}

}  // namespace voicepd
