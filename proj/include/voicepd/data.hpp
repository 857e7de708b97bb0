// voicepd/data.hpp

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

#ifndef VOICEPD_DATA_HPP_
#define VOICEPD_DATA_HPP_

#include <optional>
#include <string>
#include <vector>

#include "voicepd/model.hpp"

namespace voicepd {

enum class UtteranceType { kVowel, kSustainedVowel, kWord, kSentence };

const char* utterance_type_name(UtteranceType t);
UtteranceType parse_utterance_type(const std::string& s);

struct SampleEntry {
  std::string file;  // relative to the manifest directory
  UtteranceType utterance_type = UtteranceType::kVowel;
  double duration_s = 0.0;
};

struct PatientRecord {
  std::string patient_id;
  Group group = Group::kHP;
  std::optional<int> hy_grade;  // present exactly for PD, 1..5
  std::vector<SampleEntry> samples;
};

// CSV schema: patient_id, group, hy_grade, file, utterance_type.
// File paths are resolved relative to the manifest location and must exist;
// durations are read from the WAV headers.
std::vector<PatientRecord> load_manifest(const std::string& path);

void write_manifest(const std::vector<PatientRecord>& records,
                    const std::string& path,
                    const std::string& provenance = "");

std::string manifest_to_json(const std::vector<PatientRecord>& records);

struct CatalogEntry {
  UtteranceType type;
  std::string text;
  int repetitions;
};

// The fixed utterance inventory of the phonetic test: 4 plain vowels (x3),
// 4 sustained vowels (x3), 5 words (x3), 5 sentences (first x3).
const std::vector<CatalogEntry>& phonetic_catalog();

// Total utterances per subject when every repetition is recorded.
int phonetic_catalog_total_utterances();

// Synthetic voice-pathology corpus. A deliberately simple fixture
// generator: a harmonic source with formant-like band emphasis, where
// "PD-like" voices add 4-7 Hz amplitude/frequency tremor, elevated jitter
// and shimmer, and a raised breath-noise floor. Not a clinical simulator.
struct SynthConfig {
  int n_pd = 2;
  int n_hp = 2;
  int samples_per_patient = 43;
  double duration_range[2] = {1.0, 2.0};  // seconds
  double tremor_freq_range[2] = {4.0, 7.0};  // Hz
  double tremor_depth_max = 0.5;   // peak AM depth at maximum severity
  double jitter_max = 0.02;        // fractional f0 deviation, PD at s = 1
  double shimmer_max = 0.2;        // fractional amplitude deviation
  double noise_floor_max = 0.04;   // breath noise relative to signal peak
  double hp_jitter = 0.003;        // stable-voice jitter ceiling
  int sample_rate = 16000;
  uint64_t seed = 0;

  void validate() const;
};

// Writes WAVs plus a manifest into out_dir; returns the manifest path.
// Identical configs produce bit-identical corpora.
std::string synth_generate(const SynthConfig& config,
                           const std::string& out_dir);

// HY grade for a severity in (0, 1]: quantile bins sized to mirror the
// 2/11/13/11/1 grade distribution.
int synth_grade_from_severity(double severity);

// In-memory dataset for training and evaluation.
struct LoadedSample {
  size_t patient_index = 0;
  Group label = Group::kHP;
  std::vector<double> wave;
  int sample_rate = 0;
  std::string path;
};

struct LoadedDataset {
  std::vector<PatientRecord> patients;
  std::vector<LoadedSample> samples;
};

LoadedDataset load_dataset(const std::string& manifest_path);

}  // namespace voicepd

#endif  // VOICEPD_DATA_HPP_
