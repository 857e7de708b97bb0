// voicepd/augment.hpp

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

#ifndef VOICEPD_AUGMENT_HPP_
#define VOICEPD_AUGMENT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "voicepd/audio.hpp"
#include "voicepd/rng.hpp"

namespace voicepd {

// Training-time augmentation setup. Each augmentation is applied
// independently with its probability, with parameters drawn uniformly from
// the configured ranges at every iteration.
struct AugmentationConfig {
  double p_background = 0.5;
  double p_colored = 0.5;
  double p_shift = 0.5;
  double p_polarity = 0.5;
  double snr_db_range[2] = {3.0, 30.0};
  double f_decay_range[2] = {-2.0, 2.0};
  double shift_fraction_range[2] = {-0.1, 0.1};
  std::vector<std::string> noise_corpus;  // WAV paths, lexicographic order

  bool all_disabled() const {
    return p_background == 0.0 && p_colored == 0.0 && p_shift == 0.0 &&
           p_polarity == 0.0;
  }
  void validate() const;
};

// Reproducibility record of one pipeline application: which augmentations
// fired and with which drawn parameters.
struct AppliedAugmentations {
  bool background = false;
  std::optional<size_t> noise_index;
  std::optional<size_t> noise_offset;
  std::optional<double> background_snr_db;
  bool background_skipped_silent = false;

  bool colored = false;
  std::optional<double> colored_snr_db;
  std::optional<double> f_decay;
  bool colored_skipped_silent = false;

  bool shift = false;
  std::optional<double> shift_fraction;

  bool polarity = false;

  std::string to_json() const;
};

// Adds a uniformly random fragment of `noise` scaled so that
// 10*log10(P_signal / P_noise) equals snr_db (P = mean squared amplitude).
// Noise shorter than the clip is cyclically tiled first. A silent clip or a
// zero-power fragment skips the augmentation and flags the record.
AudioClip add_background_noise(const AudioClip& clip, const AudioClip& noise,
                               double snr_db, Rng& rng,
                               AppliedAugmentations* record = nullptr);

// Synthesizes noise with power spectral density proportional to
// f^(-f_decay) (0 white, 1 pink, 2 brown; negative tilts toward high
// frequencies), scales it to the requested SNR and adds it. The DC bin is
// zeroed.
AudioClip add_colored_noise(const AudioClip& clip, double snr_db,
                            double f_decay, Rng& rng,
                            AppliedAugmentations* record = nullptr);

// Shifts by round(fraction * length) samples without rollover; the vacated
// region is zero-filled and the length is unchanged.
AudioClip time_shift(const AudioClip& clip, double fraction);

AudioClip invert_polarity(const AudioClip& clip);

// Noise clips for add_background_noise, preloaded by the caller in the same
// order as config.noise_corpus.
using NoiseCorpus = std::vector<std::vector<double>>;

// Fixed order: background -> colored -> shift -> polarity, each applied
// with its probability. Output is hard-clamped to [-1, 1] at the end.
std::pair<AudioClip, AppliedAugmentations> apply_pipeline(
    const AudioClip& clip, const AugmentationConfig& config,
    const NoiseCorpus& noise, Rng& rng);

}  // namespace voicepd

#endif  // VOICEPD_AUGMENT_HPP_
