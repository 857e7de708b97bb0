// src/data.cpp

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

#include "voicepd/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "voicepd/audio.hpp"
#include "voicepd/error.hpp"
#include "voicepd/rng.hpp"
#include "voicepd/util.hpp"

namespace fs = std::filesystem;

namespace voicepd {

const char* utterance_type_name(UtteranceType t) {
  switch (t) {
    case UtteranceType::kVowel: return "vowel";
    case UtteranceType::kSustainedVowel: return "sustained_vowel";
    case UtteranceType::kWord: return "word";
    case UtteranceType::kSentence: return "sentence";
  }
  return "vowel";
}

UtteranceType parse_utterance_type(const std::string& s) {
  if (s == "vowel") return UtteranceType::kVowel;
  if (s == "sustained_vowel") return UtteranceType::kSustainedVowel;
  if (s == "word") return UtteranceType::kWord;
  if (s == "sentence") return UtteranceType::kSentence;
  throw ValidationError("unknown utterance_type '" + s + "'");
}

std::vector<PatientRecord> load_manifest(const std::string& path) {
  const auto lines = read_csv_lines(path);
  if (lines.empty()) throw ValidationError("empty manifest: " + path);

  const auto header = csv_split(lines[0]);
  const std::vector<std::string> required = {"patient_id", "group", "hy_grade",
                                             "file", "utterance_type"};
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const auto& name : required) {
    if (!col.count(name)) {
      throw ValidationError("manifest missing column '" + name + "': " + path);
    }
  }

  const fs::path base = fs::path(path).parent_path();
  std::vector<PatientRecord> records;
  std::map<std::string, size_t> patient_index;
  std::set<std::pair<std::string, std::string>> seen_files;

  for (size_t row = 1; row < lines.size(); ++row) {
    const auto f = csv_split(lines[row]);
    if (f.size() < header.size()) {
      throw ValidationError("manifest row " + std::to_string(row + 1) +
                            " has too few fields");
    }
    const std::string& pid = f[col["patient_id"]];
    const std::string& group_s = f[col["group"]];
    const std::string& hy_s = f[col["hy_grade"]];
    const std::string& file = f[col["file"]];
    const std::string& utt_s = f[col["utterance_type"]];
    if (pid.empty()) {
      throw ValidationError("manifest row " + std::to_string(row + 1) +
                            ": empty patient_id");
    }

    const Group group = parse_group(group_s);
    std::optional<int> hy;
    if (!hy_s.empty()) {
      int g = 0;
      try {
        g = std::stoi(hy_s);
      } catch (...) {
        throw ValidationError("manifest row " + std::to_string(row + 1) +
                              ": bad hy_grade '" + hy_s + "'");
      }
      if (g < 1 || g > 5) {
        throw ValidationError("manifest row " + std::to_string(row + 1) +
                              ": hy_grade out of range 1..5");
      }
      hy = g;
    }
    if (group == Group::kPD && !hy) {
      throw ValidationError("manifest row " + std::to_string(row + 1) +
                            ": PD patient '" + pid + "' lacks hy_grade");
    }
    if (group == Group::kHP && hy) {
      throw ValidationError("manifest row " + std::to_string(row + 1) +
                            ": HP patient '" + pid + "' has hy_grade");
    }
    if (!seen_files.insert({pid, file}).second) {
      throw ValidationError("manifest row " + std::to_string(row + 1) +
                            ": duplicate (patient, file) pair: " + pid +
                            ", " + file);
    }

    const fs::path full = file.empty() || fs::path(file).is_absolute()
                              ? fs::path(file)
                              : base / file;
    if (!fs::exists(full)) {
      throw ValidationError("manifest row " + std::to_string(row + 1) +
                            ": file does not exist: " + full.string());
    }
    const WavInfo info = read_wav_info(full.string());

    auto it = patient_index.find(pid);
    if (it == patient_index.end()) {
      patient_index[pid] = records.size();
      PatientRecord rec;
      rec.patient_id = pid;
      rec.group = group;
      rec.hy_grade = hy;
      records.push_back(std::move(rec));
      it = patient_index.find(pid);
    } else {
      const auto& rec = records[it->second];
      if (rec.group != group || rec.hy_grade != hy) {
        throw ValidationError("manifest row " + std::to_string(row + 1) +
                              ": patient '" + pid +
                              "' has inconsistent group or hy_grade");
      }
    }

    SampleEntry entry;
    entry.file = file;
    entry.utterance_type = parse_utterance_type(utt_s);
    entry.duration_s =
        static_cast<double>(info.frames) / std::max(1, info.sample_rate);
    records[it->second].samples.push_back(std::move(entry));
  }

  for (const auto& rec : records) {
    if (rec.samples.empty()) {
      throw ValidationError("patient '" + rec.patient_id + "' has no samples");
    }
  }
  return records;
}

void write_manifest(const std::vector<PatientRecord>& records,
                    const std::string& path, const std::string& provenance) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot create manifest: " + path);
  if (!provenance.empty()) os << provenance << "\n";
  os << "patient_id,group,hy_grade,file,utterance_type\n";
  for (const auto& rec : records) {
    for (const auto& s : rec.samples) {
      os << csv_escape(rec.patient_id) << ',' << group_name(rec.group) << ','
         << (rec.hy_grade ? std::to_string(*rec.hy_grade) : std::string())
         << ',' << csv_escape(s.file) << ','
         << utterance_type_name(s.utterance_type) << "\n";
    }
  }
  if (!os) throw std::runtime_error("I/O failure writing " + path);
}

std::string manifest_to_json(const std::vector<PatientRecord>& records) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& rec : records) {
    nlohmann::json p;
    p["patient_id"] = rec.patient_id;
    p["group"] = group_name(rec.group);
    if (rec.hy_grade) p["hy_grade"] = *rec.hy_grade;
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : rec.samples) {
      samples.push_back({{"file", s.file},
                         {"utterance_type", utterance_type_name(s.utterance_type)},
                         {"duration_s", s.duration_s}});
    }
    p["samples"] = samples;
    j.push_back(p);
  }
  return j.dump(2);
}

const std::vector<CatalogEntry>& phonetic_catalog() {
  static const std::vector<CatalogEntry> catalog = {
      {UtteranceType::kVowel, "a", 3},
      {UtteranceType::kVowel, "e", 3},
      {UtteranceType::kVowel, "i", 3},
      {UtteranceType::kVowel, "u", 3},
      {UtteranceType::kSustainedVowel, "a", 3},
      {UtteranceType::kSustainedVowel, "e", 3},
      {UtteranceType::kSustainedVowel, "i", 3},
      {UtteranceType::kSustainedVowel, "u", 3},
      {UtteranceType::kWord, "ala", 3},
      {UtteranceType::kWord, "as", 3},
      {UtteranceType::kWord, "ula", 3},
      {UtteranceType::kWord, "ela", 3},
      {UtteranceType::kWord, "igła", 3},
      {UtteranceType::kSentence, "Dziś jest ładna pogoda.", 3},
      {UtteranceType::kSentence, "Jacek mył kota.", 1},
      {UtteranceType::kSentence, "Lola lubi bal.", 1},
      {UtteranceType::kSentence, "Rysiek narysował bar.", 1},
      {UtteranceType::kSentence, "Marysia namalowała dym.", 1},
  };
  return catalog;
}

int phonetic_catalog_total_utterances() {
  int total = 0;
  for (const auto& e : phonetic_catalog()) total += e.repetitions;
  return total;
}

void SynthConfig::validate() const {
  if (n_pd < 1 || n_hp < 1) throw ValidationError("patient counts must be >= 1");
  if (samples_per_patient < 1) {
    throw ValidationError("samples_per_patient must be >= 1");
  }
  if (duration_range[0] <= 0 || duration_range[0] > duration_range[1]) {
    throw ValidationError("bad duration range");
  }
  if (tremor_freq_range[0] < 3.0 || tremor_freq_range[1] > 12.0 ||
      tremor_freq_range[0] > tremor_freq_range[1]) {
    throw ValidationError("tremor frequency range must lie within [3, 12] Hz");
  }
  for (double v : {tremor_depth_max, jitter_max, shimmer_max, noise_floor_max,
                   hp_jitter}) {
    if (v < 0.0 || v > 1.0) {
      throw ValidationError("pathology depths/percentages must be in [0, 1]");
    }
  }
  if (sample_rate < 8000) throw ValidationError("sample_rate too low");
}

int synth_grade_from_severity(double severity) {
  // quantile bins mirroring the 2/11/13/11/1 grade histogram
  if (severity <= 2.0 / 38.0) return 1;
  if (severity <= 13.0 / 38.0) return 2;
  if (severity <= 26.0 / 38.0) return 3;
  if (severity <= 37.0 / 38.0) return 4;
  return 5;
}

namespace {

struct VoiceParams {
  double f0 = 150.0;
  double jitter = 0.0;        // fractional f0 modulation (RMS)
  double shimmer = 0.0;       // fractional amplitude modulation (RMS)
  double tremor_freq = 0.0;   // Hz; 0 disables tremor
  double tremor_depth = 0.0;  // peak-to-trough AM fraction
  double noise_floor = 0.0;   // white noise level relative to unit peak
};

// Crude two-formant templates per vowel; enough band emphasis to make the
// utterance types spectrally distinct.
struct Formants {
  double f1, f2;
};

Formants vowel_formants(char v) {
  switch (v) {
    case 'a': return {700.0, 1100.0};
    case 'e': return {440.0, 1900.0};
    case 'i': return {300.0, 2300.0};
    case 'u': return {330.0, 800.0};
    default: return {500.0, 1500.0};
  }
}

// First-order lowpassed Gaussian noise, normalized to unit RMS.
std::vector<double> slow_noise(size_t n, double cutoff_hz, int sample_rate,
                               Rng& rng) {
  std::vector<double> out(n);
  const double a = std::exp(-2.0 * M_PI * cutoff_hz / sample_rate);
  double state = 0.0;
  for (size_t i = 0; i < n; ++i) {
    state = a * state + (1.0 - a) * rng.gaussian();
    out[i] = state;
  }
  double rms = 0.0;
  for (double v : out) rms += v * v;
  rms = std::sqrt(rms / std::max<size_t>(1, n));
  if (rms > 0) {
    for (double& v : out) v /= rms;
  }
  return out;
}

// Additive harmonic source with formant envelope, tremor AM/FM, jitter,
// shimmer and a breath-noise floor.
std::vector<double> render_voiced_segment(size_t n, const VoiceParams& vp,
                                          Formants fm, int sample_rate,
                                          Rng& rng) {
  const double dt = 1.0 / sample_rate;
  const double nyq_limit = 0.4 * sample_rate;
  const int harmonics =
      std::max(1, static_cast<int>(std::floor(nyq_limit / vp.f0)));

  std::vector<double> amp(harmonics);
  for (int h = 0; h < harmonics; ++h) {
    const double f = (h + 1) * vp.f0;
    const double g1 = std::exp(-0.5 * std::pow((f - fm.f1) / 170.0, 2));
    const double g2 = 0.7 * std::exp(-0.5 * std::pow((f - fm.f2) / 220.0, 2));
    amp[h] = (g1 + g2 + 0.04) / (1.0 + 0.35 * h);
  }

  const std::vector<double> jitter_n =
      slow_noise(n, 40.0, sample_rate, rng);
  const std::vector<double> shimmer_n =
      slow_noise(n, 25.0, sample_rate, rng);
  const double tremor_phase = rng.uniform(0.0, 2.0 * M_PI);

  std::vector<double> out(n);
  double phase = rng.uniform(0.0, 2.0 * M_PI);
  for (size_t i = 0; i < n; ++i) {
    const double t = i * dt;
    double fm_mod = 1.0 + vp.jitter * jitter_n[i];
    double am_mod = 1.0 + vp.shimmer * shimmer_n[i];
    if (vp.tremor_depth > 0.0 && vp.tremor_freq > 0.0) {
      const double osc = std::sin(2.0 * M_PI * vp.tremor_freq * t + tremor_phase);
      am_mod *= 1.0 - 0.5 * vp.tremor_depth + 0.5 * vp.tremor_depth * osc;
      fm_mod *= 1.0 + 0.3 * vp.tremor_depth * 0.05 * osc;
    }
    phase += 2.0 * M_PI * vp.f0 * fm_mod * dt;

    double s = 0.0;
    for (int h = 0; h < harmonics; ++h) {
      s += amp[h] * std::sin((h + 1) * phase);
    }
    out[i] = am_mod * s + vp.noise_floor * rng.gaussian();
  }
  return out;
}

// Fade-in/out plus inter-syllable dips for words and sentences.
void apply_utterance_envelope(std::vector<double>& x, UtteranceType type,
                              int sample_rate, Rng& rng) {
  const size_t n = x.size();
  const size_t ramp = std::min<size_t>(n / 8, sample_rate / 100);  // 10 ms
  for (size_t i = 0; i < ramp; ++i) {
    const double g = static_cast<double>(i) / ramp;
    x[i] *= g;
    x[n - 1 - i] *= g;
  }
  int dips = 0;
  if (type == UtteranceType::kWord) dips = 1;
  if (type == UtteranceType::kSentence) dips = 3;
  for (int d = 0; d < dips; ++d) {
    const double center = rng.uniform(0.2, 0.8);
    const size_t c = static_cast<size_t>(center * n);
    const size_t half = sample_rate / 50;  // 20 ms dip
    for (size_t i = c > half ? c - half : 0; i < std::min(n, c + half); ++i) {
      const double u = (static_cast<double>(i) - static_cast<double>(c)) / half;
      x[i] *= 0.25 + 0.75 * std::min(1.0, u * u);
    }
  }
}

}  // namespace

std::string synth_generate(const SynthConfig& config,
                           const std::string& out_dir) {
  config.validate();
  fs::create_directories(out_dir);

  const Rng master(config.seed);
  const auto& catalog = phonetic_catalog();
  std::vector<std::pair<UtteranceType, char>> utterances;
  for (const auto& e : catalog) {
    const char v = e.text.empty() ? 'a' : e.text[0];
    for (int r = 0; r < e.repetitions; ++r) {
      utterances.push_back({e.type, v});
    }
  }

  std::vector<PatientRecord> records;
  const int total_patients = config.n_pd + config.n_hp;
  for (int p = 0; p < total_patients; ++p) {
    const bool is_pd = p < config.n_pd;
    PatientRecord rec;
    {
      std::ostringstream id;
      id << (is_pd ? "pd" : "hp")
         << std::setw(2) << std::setfill('0')
         << (is_pd ? p + 1 : p - config.n_pd + 1);
      rec.patient_id = id.str();
    }
    rec.group = is_pd ? Group::kPD : Group::kHP;

    Rng prng = master.derive({1, static_cast<uint64_t>(p)});
    VoiceParams vp;
    vp.f0 = prng.uniform(120.0, 220.0);
    double severity = 0.0;
    if (is_pd) {
      severity = (p + 1.0) / config.n_pd;
      rec.hy_grade = synth_grade_from_severity(severity);
      vp.jitter = 0.006 + (config.jitter_max - 0.006) * severity;
      vp.shimmer = 0.04 + (config.shimmer_max - 0.04) * severity;
      vp.tremor_freq =
          prng.uniform(config.tremor_freq_range[0], config.tremor_freq_range[1]);
      vp.tremor_depth = 0.15 + (config.tremor_depth_max - 0.15) * severity;
      vp.noise_floor = 0.008 + (config.noise_floor_max - 0.008) * severity;
    } else {
      vp.jitter = prng.uniform(0.3, 1.0) * config.hp_jitter;
      vp.shimmer = 0.02;
      vp.noise_floor = 0.003;
    }

    for (int s = 0; s < config.samples_per_patient; ++s) {
      Rng crng = master.derive(
          {2, static_cast<uint64_t>(p), static_cast<uint64_t>(s)});
      const auto& [utt_type, vowel] = utterances[s % utterances.size()];
      double dur =
          crng.uniform(config.duration_range[0], config.duration_range[1]);
      if (utt_type == UtteranceType::kSustainedVowel) {
        dur = std::min(dur * 1.5, config.duration_range[1] * 1.5);
      }
      const size_t n = static_cast<size_t>(dur * config.sample_rate);

      std::vector<double> x = render_voiced_segment(
          n, vp, vowel_formants(vowel), config.sample_rate, crng);
      apply_utterance_envelope(x, utt_type, config.sample_rate, crng);

      double peak = 0.0;
      for (double v : x) peak = std::max(peak, std::fabs(v));
      if (peak > 0) {
        for (double& v : x) v *= 0.8 / peak;
      }

      std::ostringstream name;
      name << rec.patient_id << "_s" << std::setw(3) << std::setfill('0')
           << s + 1 << ".wav";
      const fs::path wav_path = fs::path(out_dir) / name.str();
      write_wav(AudioClip::make_mono(std::move(x), config.sample_rate),
                wav_path.string());

      SampleEntry entry;
      entry.file = name.str();
      entry.utterance_type = utt_type;
      entry.duration_s = dur;
      rec.samples.push_back(std::move(entry));
    }
    records.push_back(std::move(rec));
  }

  const fs::path manifest = fs::path(out_dir) / "manifest.csv";
  write_manifest(records, manifest.string(),
                 provenance_line(config.seed, fnv1a64("synth")));
  return manifest.string();
}

LoadedDataset load_dataset(const std::string& manifest_path) {
  LoadedDataset ds;
  ds.patients = load_manifest(manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  for (size_t p = 0; p < ds.patients.size(); ++p) {
    for (const auto& entry : ds.patients[p].samples) {
      const fs::path full = fs::path(entry.file).is_absolute()
                                ? fs::path(entry.file)
                                : base / entry.file;
      AudioClip clip = read_wav(full.string());
      LoadedSample s;
      s.patient_index = p;
      s.label = ds.patients[p].group;
      s.wave = clip.channels.at(0);
      if (clip.num_channels() == 2) {
        // two-channel input is expected to be preprocessed first; fall back
        // to the first channel but keep going
        s.wave = clip.channels[0];
      }
      s.sample_rate = clip.sample_rate;
      s.path = full.string();
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

}  // namespace voicepd
