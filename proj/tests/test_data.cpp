// tests/test_data.cpp

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "voicepd/audio.hpp"
#include "voicepd/data.hpp"
#include "voicepd/error.hpp"

using namespace voicepd;
using test::TempDir;

namespace fs = std::filesystem;

namespace {

void write_tone(const std::string& path, double freq = 220.0,
                size_t n = 1600) {
  write_wav(AudioClip::make_mono(test::sine(freq, 16000, n, 0.5), 16000),
            path);
}

std::string write_manifest_text(const TempDir& tmp, const std::string& body) {
  const std::string path = tmp.path("manifest.csv");
  std::ofstream os(path);
  os << "patient_id,group,hy_grade,file,utterance_type\n" << body;
  os.close();
  return path;
}

}  // namespace

TEST_CASE("load_manifest on a valid mini corpus") {
  TempDir tmp("manifest_ok");
  write_tone(tmp.path("a1.wav"));
  write_tone(tmp.path("a2.wav"));
  write_tone(tmp.path("b1.wav"));
  const std::string path = write_manifest_text(
      tmp,
      "p1,PD,3,a1.wav,vowel\n"
      "p1,PD,3,a2.wav,sentence\n"
      "h1,HP,,b1.wav,sustained_vowel\n");

  auto records = load_manifest(path);
  REQUIRE(records.size() == 2);
  CHECK(records[0].patient_id == "p1");
  CHECK(records[0].group == Group::kPD);
  CHECK(records[0].hy_grade == 3);
  CHECK(records[0].samples.size() == 2);
  CHECK(records[0].samples[0].duration_s == doctest::Approx(0.1));
  CHECK(records[1].group == Group::kHP);
  CHECK_FALSE(records[1].hy_grade.has_value());
}

TEST_CASE("load_manifest error cases") {
  TempDir tmp("manifest_bad");
  write_tone(tmp.path("a.wav"));

  SUBCASE("PD without hy_grade names the row") {
    const std::string path =
        write_manifest_text(tmp, "p1,PD,,a.wav,vowel\n");
    try {
      load_manifest(path);
      FAIL("expected validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
  }
  SUBCASE("HP with hy_grade") {
    const std::string path = write_manifest_text(tmp, "h1,HP,2,a.wav,vowel\n");
    CHECK_THROWS_AS(load_manifest(path), ValidationError);
  }
  SUBCASE("duplicate (patient, file)") {
    const std::string path = write_manifest_text(
        tmp, "p1,PD,1,a.wav,vowel\np1,PD,1,a.wav,vowel\n");
    CHECK_THROWS_AS(load_manifest(path), ValidationError);
  }
  SUBCASE("dangling file path") {
    const std::string path =
        write_manifest_text(tmp, "p1,PD,1,missing.wav,vowel\n");
    CHECK_THROWS_AS(load_manifest(path), ValidationError);
  }
  SUBCASE("missing column") {
    const std::string path = tmp.path("short.csv");
    std::ofstream os(path);
    os << "patient_id,group,file\np1,PD,a.wav\n";
    os.close();
    CHECK_THROWS_AS(load_manifest(path), ValidationError);
  }
  SUBCASE("inconsistent patient metadata") {
    write_tone(tmp.path("b.wav"));
    const std::string path = write_manifest_text(
        tmp, "p1,PD,1,a.wav,vowel\np1,PD,2,b.wav,vowel\n");
    CHECK_THROWS_AS(load_manifest(path), ValidationError);
  }
  SUBCASE("bad utterance type") {
    const std::string path =
        write_manifest_text(tmp, "p1,PD,1,a.wav,scream\n");
    CHECK_THROWS_AS(load_manifest(path), ValidationError);
  }
}

TEST_CASE("manifest write/load round-trip preserves records") {
  TempDir tmp("manifest_rt");
  write_tone(tmp.path("x.wav"));
  write_tone(tmp.path("y.wav"));
  const std::string path = write_manifest_text(
      tmp,
      "p1,PD,4,x.wav,word\n"
      "h1,HP,,y.wav,vowel\n");
  auto records = load_manifest(path);

  const std::string path2 = tmp.path("again.csv");
  write_manifest(records, path2, "# test provenance");
  auto records2 = load_manifest(path2);

  REQUIRE(records2.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(records2[i].patient_id == records[i].patient_id);
    CHECK(records2[i].group == records[i].group);
    CHECK(records2[i].hy_grade == records[i].hy_grade);
    REQUIRE(records2[i].samples.size() == records[i].samples.size());
    for (size_t j = 0; j < records[i].samples.size(); ++j) {
      CHECK(records2[i].samples[j].file == records[i].samples[j].file);
      CHECK(records2[i].samples[j].utterance_type ==
            records[i].samples[j].utterance_type);
    }
  }

  const std::string json = manifest_to_json(records);
  CHECK(json.find("\"patient_id\": \"p1\"") != std::string::npos);
}

TEST_CASE("phonetic catalog inventory") {
  const auto& catalog = phonetic_catalog();
  int vowels = 0, sustained = 0, words = 0, sentences = 0;
  for (const auto& e : catalog) {
    switch (e.type) {
      case UtteranceType::kVowel: ++vowels; CHECK(e.repetitions == 3); break;
      case UtteranceType::kSustainedVowel: ++sustained; break;
      case UtteranceType::kWord: ++words; CHECK(e.repetitions == 3); break;
      case UtteranceType::kSentence: ++sentences; break;
    }
  }
  CHECK(vowels == 4);
  CHECK(sustained == 4);
  CHECK(words == 5);
  CHECK(sentences == 5);
  // (4 + 4 + 5) * 3 + 1 * 3 + 4 = 46 recordings per complete session
  CHECK(phonetic_catalog_total_utterances() == 46);
  // constant across calls
  CHECK(&phonetic_catalog() == &catalog);
}

TEST_CASE("synth_generate structural checks") {
  TempDir tmp("synth");
  SynthConfig config;
  config.n_pd = 2;
  config.n_hp = 2;
  config.samples_per_patient = 4;
  config.duration_range[0] = 0.3;
  config.duration_range[1] = 0.5;
  config.seed = 7;

  const std::string manifest = synth_generate(config, tmp.path("corpus"));
  int wavs = 0;
  for (const auto& entry : fs::directory_iterator(tmp.path("corpus"))) {
    if (entry.path().extension() == ".wav") ++wavs;
  }
  CHECK(wavs == 16);

  auto records = load_manifest(manifest);
  REQUIRE(records.size() == 4);
  int pd = 0, hp = 0;
  for (const auto& r : records) {
    (r.group == Group::kPD ? pd : hp)++;
    CHECK(r.samples.size() == 4);
    if (r.group == Group::kPD) {
      REQUIRE(r.hy_grade.has_value());
      CHECK(*r.hy_grade >= 1);
      CHECK(*r.hy_grade <= 5);
    }
  }
  CHECK(pd == 2);
  CHECK(hp == 2);
}

TEST_CASE("synth corpora are bit-identical for the same seed") {
  TempDir tmp("synth_det");
  SynthConfig config;
  config.n_pd = 1;
  config.n_hp = 1;
  config.samples_per_patient = 2;
  config.duration_range[0] = 0.3;
  config.duration_range[1] = 0.4;
  config.seed = 99;

  synth_generate(config, tmp.path("a"));
  synth_generate(config, tmp.path("b"));
  for (const auto& entry : fs::directory_iterator(tmp.path("a"))) {
    const auto other = fs::path(tmp.path("b")) / entry.path().filename();
    std::ifstream fa(entry.path(), std::ios::binary);
    std::ifstream fb(other, std::ios::binary);
    std::string ba((std::istreambuf_iterator<char>(fa)),
                   std::istreambuf_iterator<char>());
    std::string bb((std::istreambuf_iterator<char>(fb)),
                   std::istreambuf_iterator<char>());
    CHECK(ba == bb);
  }
}

TEST_CASE("synth severity maps monotonically to HY grade") {
  int prev = 1;
  for (double s = 0.01; s <= 1.0; s += 0.01) {
    const int g = synth_grade_from_severity(s);
    CHECK(g >= prev);
    CHECK(g >= 1);
    CHECK(g <= 5);
    prev = g;
  }
  CHECK(synth_grade_from_severity(0.01) == 1);
  CHECK(synth_grade_from_severity(1.0) == 5);
}

TEST_CASE("synth clips survive the preprocessing pipeline") {
  TempDir tmp("synth_prep");
  SynthConfig config;
  config.n_pd = 1;
  config.n_hp = 1;
  config.samples_per_patient = 3;
  config.duration_range[0] = 0.3;
  config.duration_range[1] = 0.5;
  config.seed = 3;
  const std::string manifest = synth_generate(config, tmp.path("c"));
  auto ds = load_dataset(manifest);
  CHECK(ds.samples.size() == 6);
  for (const auto& s : ds.samples) {
    AudioClip clip = AudioClip::make_mono(s.wave, s.sample_rate);
    AudioClip normed = peak_normalize(clip);
    CHECK_FALSE(normed.silence);
    AudioClip resampled = resample(normed, 16000);
    CHECK(resampled.num_frames() == normed.num_frames());
  }
}

TEST_CASE("PD-like clips carry tremor sidebands that HP-like clips lack") {
  // oracle: FFT magnitude at f0 +/- tremor offsets against the carrier
  TempDir tmp("synth_sidebands");
  SynthConfig config;
  config.n_pd = 1;
  config.n_hp = 1;
  config.samples_per_patient = 5;  // index 4 is a sustained vowel
  config.duration_range[0] = 2.0;
  config.duration_range[1] = 2.0;
  config.tremor_freq_range[0] = 5.0;
  config.tremor_freq_range[1] = 5.0;
  config.tremor_depth_max = 0.5;
  config.jitter_max = 0.002;  // keep the carrier narrow for the test
  config.noise_floor_max = 0.01;
  config.seed = 17;

  const std::string manifest = synth_generate(config, tmp.path("c"));
  auto ds = load_dataset(manifest);

  auto sideband_ratio = [](const std::vector<double>& wave, int rate) {
    const size_t n = wave.size();
    std::vector<double> w(n);
    for (size_t i = 0; i < n; ++i) {
      w[i] = wave[i] * (0.5 - 0.5 * std::cos(2.0 * M_PI * i / n));
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, w);
    const double hz_per_bin = static_cast<double>(rate) / n;
    // carrier: strongest bin in the voice range
    size_t carrier = 0;
    double best = 0.0;
    for (size_t k = static_cast<size_t>(80 / hz_per_bin);
         k < static_cast<size_t>(400 / hz_per_bin); ++k) {
      if (std::abs(spec[k]) > best) {
        best = std::abs(spec[k]);
        carrier = k;
      }
    }
    // strongest bin within +/-[4.0, 6.0] Hz of the carrier
    double side = 0.0;
    const long lo = std::lround(4.0 / hz_per_bin);
    const long hi = std::lround(6.0 / hz_per_bin);
    for (long off = lo; off <= hi; ++off) {
      side = std::max(side, std::abs(spec[carrier + off]));
      side = std::max(side, std::abs(spec[carrier - off]));
    }
    return side / best;
  };

  // sample 1 of each patient is a plain vowel held for the full duration
  double pd_ratio = 0.0, hp_ratio = 0.0;
  const LoadedSample* pd = nullptr;
  const LoadedSample* hp = nullptr;
  for (const auto& s : ds.samples) {
    const auto& rec = ds.patients[s.patient_index];
    if (s.path.find("_s001") == std::string::npos) continue;
    if (rec.group == Group::kPD) pd = &s;
    else hp = &s;
  }
  REQUIRE(pd != nullptr);
  REQUIRE(hp != nullptr);
  pd_ratio = sideband_ratio(pd->wave, pd->sample_rate);
  hp_ratio = sideband_ratio(hp->wave, hp->sample_rate);

  CHECK(pd_ratio > 0.08);   // visible tremor sidebands
  CHECK(hp_ratio < 0.04);   // only the shimmer-noise skirt for stable voices
  CHECK(pd_ratio > 3.0 * hp_ratio);
}

TEST_CASE("synth config validation") {
  SynthConfig config;
  SUBCASE("counts") {
    config.n_pd = 0;
    CHECK_THROWS_AS(config.validate(), ValidationError);
  }
  SUBCASE("tremor range") {
    config.tremor_freq_range[1] = 20.0;
    CHECK_THROWS_AS(config.validate(), ValidationError);
  }
  SUBCASE("depth bounds") {
    config.tremor_depth_max = 1.5;
    CHECK_THROWS_AS(config.validate(), ValidationError);
  }
}

TEST_CASE("load_dataset indexes patients consistently") {
  TempDir tmp("load_ds");
  write_tone(tmp.path("a.wav"));
  write_tone(tmp.path("b.wav"));
  const std::string path = write_manifest_text(
      tmp,
      "p1,PD,2,a.wav,vowel\n"
      "h1,HP,,b.wav,vowel\n");
  auto ds = load_dataset(path);
  REQUIRE(ds.samples.size() == 2);
  CHECK(ds.patients[ds.samples[0].patient_index].patient_id == "p1");
  CHECK(ds.samples[0].label == Group::kPD);
  CHECK(ds.samples[1].label == Group::kHP);
  CHECK(ds.samples[0].wave.size() == 1600);
}
