// tests/test_util.hpp

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

#ifndef VOICEPD_TESTS_TEST_UTIL_HPP_
#define VOICEPD_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace voicepd::test {

// Scratch directory unique to a test case, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    dir_ = std::filesystem::temp_directory_path() /
           ("voicepd_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name = "") const {
    return name.empty() ? dir_.string() : (dir_ / name).string();
  }

 private:
  std::filesystem::path dir_;
};

inline std::vector<double> sine(double freq_hz, int sample_rate, size_t n,
                                double amplitude = 0.5, double phase = 0.0) {
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i) {
    x[i] = amplitude *
           std::sin(2.0 * M_PI * freq_hz * static_cast<double>(i) / sample_rate +
                    phase);
  }
  return x;
}

inline double rms(const std::vector<double>& x, size_t begin = 0,
                  size_t end = SIZE_MAX) {
  end = std::min(end, x.size());
  double acc = 0.0;
  for (size_t i = begin; i < end; ++i) acc += x[i] * x[i];
  return std::sqrt(acc / std::max<size_t>(1, end - begin));
}

// Oracle: Hann-windowed FFT magnitude peak frequency of a signal.
inline double fft_peak_hz(const std::vector<double>& x, int sample_rate) {
  const size_t n = x.size();
  std::vector<double> windowed(n);
  for (size_t i = 0; i < n; ++i) {
    windowed[i] = x[i] * (0.5 - 0.5 * std::cos(2.0 * M_PI * i / n));
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, windowed);
  size_t best = 1;
  for (size_t k = 1; k < n / 2; ++k) {
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  }
  return static_cast<double>(best) * sample_rate / static_cast<double>(n);
}

// Oracle: measured SNR in dB of (augmented - clean) against clean, both as
// mean squared amplitude.
inline double measured_snr_db(const std::vector<double>& clean,
                              const std::vector<double>& augmented) {
  double p_signal = 0.0, p_noise = 0.0;
  for (size_t i = 0; i < clean.size(); ++i) {
    p_signal += clean[i] * clean[i];
    const double d = augmented[i] - clean[i];
    p_noise += d * d;
  }
  return 10.0 * std::log10(p_signal / p_noise);
}

// Oracle: log-log slope of the Welch-averaged power spectral density.
// Returns the fitted slope of log10(P) against log10(f).
inline double psd_loglog_slope(const std::vector<double>& x, int segment = 4096) {
  const int n_seg = static_cast<int>(x.size()) / segment;
  std::vector<double> psd(segment / 2, 0.0);
  Eigen::FFT<double> fft;
  std::vector<double> frame(segment);
  std::vector<std::complex<double>> spec;
  for (int s = 0; s < n_seg; ++s) {
    for (int i = 0; i < segment; ++i) {
      frame[i] = x[s * segment + i] *
                 (0.5 - 0.5 * std::cos(2.0 * M_PI * i / segment));
    }
    fft.fwd(spec, frame);
    for (int k = 0; k < segment / 2; ++k) {
      psd[k] += std::norm(spec[k]);
    }
  }
  // least-squares fit over bins [4, 80%]; DC and the lowest bins are skipped
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int k = 4; k < segment / 2 * 8 / 10; ++k) {
    const double lx = std::log10(static_cast<double>(k));
    const double ly = std::log10(psd[k] / n_seg + 1e-300);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

}  // namespace voicepd::test

#endif  // VOICEPD_TESTS_TEST_UTIL_HPP_
