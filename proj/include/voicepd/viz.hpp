// voicepd/viz.hpp

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

#ifndef VOICEPD_VIZ_HPP_
#define VOICEPD_VIZ_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "voicepd/model.hpp"

namespace voicepd {

struct VotingPoint {
  std::string patient_id;
  int hy_grade = 0;  // 0 = HP column
  double certainty = 0.0;
};

// Certainty vs Hoehn-Yahr group scatter with a dotted 0.5 decision line.
// SVG output is deterministic byte-for-byte.
void render_voting_scatter(const std::vector<VotingPoint>& points,
                           const std::string& path,
                           const std::string& provenance);

// Side-by-side heatmaps (left: time x frequency spectrogram, right: time x
// feature map); both panels share the same pixel width so equal durations
// align.
void render_heatmap_pair(const Eigen::MatrixXd& left,
                         const Eigen::MatrixXd& right,
                         const std::string& left_title,
                         const std::string& right_title,
                         const std::string& path,
                         const std::string& provenance);

// Before/after waveform traces stacked vertically.
void render_waveform_pair(const std::vector<double>& before,
                          const std::vector<double>& after, int sample_rate,
                          const std::string& path,
                          const std::string& provenance);

}  // namespace voicepd

#endif  // VOICEPD_VIZ_HPP_
