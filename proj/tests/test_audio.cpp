// tests/test_audio.cpp

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

#include <cstdint>
#include <fstream>

#include "test_util.hpp"
#include "voicepd/audio.hpp"
#include "voicepd/error.hpp"
#include "voicepd/rng.hpp"

using namespace voicepd;
using test::TempDir;

namespace {

// Raw 16-bit PCM writer independent of write_wav, for read_wav fixtures.
void write_raw_wav(const std::string& path, const std::vector<int16_t>& pcm,
                   int channels, int rate, uint16_t format_tag = 1,
                   uint16_t bits = 16) {
  std::ofstream os(path, std::ios::binary);
  auto u32 = [&](uint32_t v) { os.write(reinterpret_cast<char*>(&v), 4); };
  auto u16 = [&](uint16_t v) { os.write(reinterpret_cast<char*>(&v), 2); };
  const uint32_t data_bytes = static_cast<uint32_t>(pcm.size() * 2);
  os.write("RIFF", 4);
  u32(36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  u32(16);
  u16(format_tag);
  u16(static_cast<uint16_t>(channels));
  u32(static_cast<uint32_t>(rate));
  u32(static_cast<uint32_t>(rate * channels * 2));
  u16(static_cast<uint16_t>(channels * 2));
  u16(bits);
  os.write("data", 4);
  u32(data_bytes);
  os.write(reinterpret_cast<const char*>(pcm.data()), data_bytes);
}

}  // namespace

TEST_CASE("read_wav fixed-point scaling") {
  TempDir tmp("read_wav");
  write_raw_wav(tmp.path("a.wav"), {0, 16384, -16384, 32767}, 1, 16000);
  AudioClip clip = read_wav(tmp.path("a.wav"));
  REQUIRE(clip.num_channels() == 1);
  CHECK(clip.sample_rate == 16000);
  REQUIRE(clip.num_frames() == 4);
  CHECK(clip.channels[0][0] == 0.0);
  CHECK(clip.channels[0][1] == 0.5);
  CHECK(clip.channels[0][2] == -0.5);
  CHECK(clip.channels[0][3] == 32767.0 / 32768.0);  // exactly representable
}

TEST_CASE("read_wav stereo with identical channels") {
  TempDir tmp("read_wav_stereo");
  std::vector<int16_t> pcm;
  for (int16_t v : {100, -200, 300}) {
    pcm.push_back(v);
    pcm.push_back(v);
  }
  write_raw_wav(tmp.path("s.wav"), pcm, 2, 44100);
  AudioClip clip = read_wav(tmp.path("s.wav"));
  REQUIRE(clip.num_channels() == 2);
  CHECK(clip.channels[0] == clip.channels[1]);
}

TEST_CASE("read_wav rejects bad inputs") {
  TempDir tmp("read_wav_bad");
  SUBCASE("float32 encoding") {
    write_raw_wav(tmp.path("f.wav"), {0, 0}, 1, 16000, /*format_tag=*/3,
                  /*bits=*/32);
    CHECK_THROWS_AS(read_wav(tmp.path("f.wav")), ValidationError);
  }
  SUBCASE("zero-length data chunk") {
    write_raw_wav(tmp.path("z.wav"), {}, 1, 16000);
    CHECK_THROWS_AS(read_wav(tmp.path("z.wav")), ValidationError);
  }
  SUBCASE("not a RIFF file") {
    std::ofstream(tmp.path("x.wav")) << "definitely not audio";
    CHECK_THROWS_AS(read_wav(tmp.path("x.wav")), ValidationError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_wav(tmp.path("nope.wav")), ValidationError);
  }
}

TEST_CASE("wav round-trip error bounded by one quantization step") {
  TempDir tmp("roundtrip");
  Rng rng(7);
  std::vector<double> x(1000);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  x[0] = 1.0;
  x[1] = -1.0;
  AudioClip clip = AudioClip::make_mono(x, 16000);
  write_wav(clip, tmp.path("r.wav"));
  AudioClip back = read_wav(tmp.path("r.wav"));
  REQUIRE(back.num_frames() == clip.num_frames());
  double max_err = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    max_err = std::max(max_err, std::fabs(back.channels[0][i] - x[i]));
  }
  CHECK(max_err <= 1.0 / 32768.0);
}

TEST_CASE("write_wav rejects out-of-range and empty clips") {
  TempDir tmp("write_bad");
  CHECK_THROWS_AS(
      write_wav(AudioClip::make_mono({0.1, 1.5}, 16000), tmp.path("b.wav")),
      ValidationError);
  CHECK_THROWS_AS(write_wav(AudioClip::make_mono({}, 16000), tmp.path("e.wav")),
                  ValidationError);
}

TEST_CASE("channel_subtract") {
  AudioClip stereo;
  stereo.sample_rate = 16000;
  stereo.channels = {{0.5, 0.9, 0.1}, {0.2, -0.9, 0.1}};

  AudioClip diff = channel_subtract(stereo);
  REQUIRE(diff.num_channels() == 1);
  CHECK(diff.channels[0][0] == doctest::Approx(0.3));
  CHECK(diff.channels[0][1] == doctest::Approx(1.8));  // valid intermediate
  CHECK(diff.channels[0][2] == 0.0);

  SUBCASE("identical channels cancel") {
    stereo.channels[1] = stereo.channels[0];
    AudioClip zero = channel_subtract(stereo);
    for (double v : zero.channels[0]) CHECK(v == 0.0);
  }
  SUBCASE("mono input is an error") {
    CHECK_THROWS_AS(channel_subtract(AudioClip::make_mono({0.1}, 16000)),
                    ValidationError);
  }
  SUBCASE("antisymmetry") {
    AudioClip swapped;
    swapped.sample_rate = 16000;
    swapped.channels = {stereo.channels[1], stereo.channels[0]};
    AudioClip a = channel_subtract(stereo);
    AudioClip b = channel_subtract(swapped);
    for (size_t i = 0; i < a.channels[0].size(); ++i) {
      CHECK(a.channels[0][i] == -b.channels[0][i]);
    }
  }
}

TEST_CASE("peak_normalize") {
  CHECK_THROWS_AS(peak_normalize(AudioClip::make_mono({}, 16000)),
                  ValidationError);

  AudioClip clip = AudioClip::make_mono({0.25, -0.5}, 16000);
  AudioClip normed = peak_normalize(clip);
  CHECK(normed.channels[0][0] == 0.5);
  CHECK(normed.channels[0][1] == -1.0);
  CHECK_FALSE(normed.silence);

  SUBCASE("all zeros pass through with the silence flag") {
    AudioClip zeros = AudioClip::make_mono({0.0, 0.0, 0.0}, 16000);
    AudioClip out = peak_normalize(zeros);
    CHECK(out.silence);
    for (double v : out.channels[0]) CHECK(v == 0.0);
  }
  SUBCASE("idempotence, bit-exact") {
    AudioClip twice = peak_normalize(normed);
    CHECK(twice.channels[0] == normed.channels[0]);
  }
  SUBCASE("scale invariance") {
    Rng rng(3);
    std::vector<double> x(257);
    for (auto& v : x) v = rng.uniform(-0.9, 0.9);
    for (double c : {0.1, 2.0, 1e6}) {
      std::vector<double> scaled = x;
      for (auto& v : scaled) v *= c;
      AudioClip a = peak_normalize(AudioClip::make_mono(x, 16000));
      AudioClip b = peak_normalize(AudioClip::make_mono(scaled, 16000));
      for (size_t i = 0; i < x.size(); ++i) {
        CHECK(a.channels[0][i] == doctest::Approx(b.channels[0][i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("resample 44.1k sine lands on the right FFT bin") {
  // oracle: FFT peak location of the resampled output
  auto x = test::sine(440.0, 44100, 44100);
  AudioClip out = resample(AudioClip::make_mono(x, 44100), 16000);
  REQUIRE(out.num_frames() == 16000);
  CHECK(out.sample_rate == 16000);
  const double peak = test::fft_peak_hz(out.channels[0], 16000);
  CHECK(std::fabs(peak - 440.0) <= 1.0);  // within one 1 Hz bin
}

TEST_CASE("resample preserves DC") {
  std::vector<double> x(4410, 0.3);
  AudioClip out = resample(AudioClip::make_mono(x, 44100), 16000);
  for (double v : out.channels[0]) {
    CHECK(std::fabs(v - 0.3) < 1e-3);
  }
}

TEST_CASE("identity resample returns the input") {
  auto x = test::sine(313.0, 16000, 2048);
  AudioClip out = resample(AudioClip::make_mono(x, 16000), 16000);
  REQUIRE(out.num_frames() == x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    CHECK(std::fabs(out.channels[0][i] - x[i]) < 1e-6);
  }
}

TEST_CASE("resample output length formula") {
  CHECK(resample_output_length(44100, 44100, 16000) == 16000);
  CHECK(resample_output_length(1, 44100, 16000) == 0);
  CHECK(resample_output_length(1000000, 44100, 16000) == 362812);
  CHECK(resample_output_length(3, 16000, 48000) == 9);

  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t len = 1 + rng.uniform_int(1000000);
    const int in_rate = 8000 + static_cast<int>(rng.uniform_int(92000));
    const int out_rate = 8000 + static_cast<int>(rng.uniform_int(92000));
    const double exact =
        static_cast<double>(len) * out_rate / static_cast<double>(in_rate);
    CHECK(resample_output_length(len, in_rate, out_rate) ==
          static_cast<size_t>(std::llround(exact)));
  }

  // the resampler honors the formula end to end
  Rng rng2(12);
  for (int trial = 0; trial < 10; ++trial) {
    const size_t len = 64 + rng2.uniform_int(5000);
    std::vector<double> x(len, 0.1);
    AudioClip out = resample(AudioClip::make_mono(x, 44100), 16000);
    CHECK(out.num_frames() == resample_output_length(len, 44100, 16000));
  }
}

TEST_CASE("resample keeps sine RMS within 1 percent away from the edges") {
  for (double freq : {200.0, 1000.0, 3000.0, 7000.0}) {
    auto x = test::sine(freq, 44100, 44100, 0.4);
    AudioClip out = resample(AudioClip::make_mono(x, 44100), 16000);
    const size_t guard = 160;  // 10 ms at 16 kHz
    const double rms_in = test::rms(x, 441, x.size() - 441);
    const double rms_out =
        test::rms(out.channels[0], guard, out.num_frames() - guard);
    CHECK(std::fabs(rms_out / rms_in - 1.0) < 0.01);
  }
}

TEST_CASE("resample validates arguments") {
  CHECK_THROWS_AS(resample(AudioClip::make_mono({0.1}, 16000), 0),
                  ValidationError);
  CHECK_THROWS_AS(resample(AudioClip::make_mono({}, 16000), 8000),
                  ValidationError);
  AudioClip stereo;
  stereo.sample_rate = 16000;
  stereo.channels = {{0.1}, {0.1}};
  CHECK_THROWS_AS(resample(stereo, 8000), ValidationError);
}
