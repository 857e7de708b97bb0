// src/viz.cpp

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

#include "voicepd/viz.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "voicepd/error.hpp"

namespace voicepd {

namespace {

std::string color_for(double v) {
  // 0..1 -> dark blue to yellow, viridis-like three-stop ramp
  v = std::clamp(v, 0.0, 1.0);
  int r, g, b;
  if (v < 0.5) {
    const double u = v / 0.5;
    r = static_cast<int>(68 + u * (33 - 68));
    g = static_cast<int>(1 + u * (144 - 1));
    b = static_cast<int>(84 + u * (140 - 84));
  } else {
    const double u = (v - 0.5) / 0.5;
    r = static_cast<int>(33 + u * (253 - 33));
    g = static_cast<int>(144 + u * (231 - 144));
    b = static_cast<int>(140 + u * (37 - 140));
  }
  std::ostringstream os;
  os << "rgb(" << r << ',' << g << ',' << b << ')';
  return os.str();
}

void write_svg(const std::string& path, const std::string& provenance,
               int width, int height, const std::string& body) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot create SVG: " + path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
     << height << "\">\n";
  if (!provenance.empty()) os << "<!-- " << provenance << " -->\n";
  os << body << "</svg>\n";
  if (!os) throw std::runtime_error("I/O failure writing " + path);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void heatmap_body(std::ostringstream& os, const Eigen::MatrixXd& m, double x0,
                  double y0, double w, double h) {
  // downsample to a bounded cell grid; value axis is column index upward
  const int max_cols = 160, max_rows = 128;
  const long rows_in = m.rows(), cols_in = m.cols();
  const int cols = static_cast<int>(std::min<long>(max_rows, cols_in));
  const int rows = static_cast<int>(std::min<long>(max_cols, rows_in));

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  Eigen::MatrixXd cells(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const long r0 = i * rows_in / rows, r1 = std::max(r0 + 1, (i + 1) * rows_in / rows);
      const long c0 = j * cols_in / cols, c1 = std::max(c0 + 1, (j + 1) * cols_in / cols);
      double acc = 0.0;
      for (long r = r0; r < r1; ++r) {
        for (long c = c0; c < c1; ++c) acc += m(r, c);
      }
      const double v = acc / static_cast<double>((r1 - r0) * (c1 - c0));
      cells(i, j) = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double span = hi > lo ? hi - lo : 1.0;
  const double cw = w / rows, ch = h / cols;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double v = (cells(i, j) - lo) / span;
      os << "<rect x=\"" << fmt(x0 + i * cw) << "\" y=\""
         << fmt(y0 + h - (j + 1) * ch) << "\" width=\"" << fmt(cw + 0.5)
         << "\" height=\"" << fmt(ch + 0.5) << "\" fill=\"" << color_for(v)
         << "\"/>\n";
    }
  }
}

}  // namespace

void render_voting_scatter(const std::vector<VotingPoint>& points,
                           const std::string& path,
                           const std::string& provenance) {
  if (points.empty()) {
    throw ValidationError("no voting points to plot");
  }
  const int width = 640, height = 420;
  const double left = 60, right = 20, top = 30, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  // columns: HP, HY 1..5
  auto col_x = [&](int hy) { return left + pw * (hy + 0.5) / 6.0; };
  auto cert_y = [&](double c) { return top + ph * (1.0 - c); };

  std::ostringstream b;
  b << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw
    << "\" height=\"" << ph << "\" fill=\"white\" stroke=\"black\"/>\n";
  // dotted 0.5 votes threshold
  b << "<line x1=\"" << left << "\" y1=\"" << fmt(cert_y(0.5)) << "\" x2=\""
    << left + pw << "\" y2=\"" << fmt(cert_y(0.5))
    << "\" stroke=\"black\" stroke-dasharray=\"4,4\"/>\n";
  const char* names[6] = {"HP", "HY 1", "HY 2", "HY 3", "HY 4", "HY 5"};
  for (int c = 0; c < 6; ++c) {
    b << "<text x=\"" << fmt(col_x(c)) << "\" y=\"" << height - bottom + 18
      << "\" text-anchor=\"middle\" font-size=\"12\">" << names[c]
      << "</text>\n";
  }
  for (double g : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    b << "<text x=\"" << left - 8 << "\" y=\"" << fmt(cert_y(g) + 4)
      << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(g) << "</text>\n";
  }
  b << "<text x=\"" << 16 << "\" y=\"" << fmt(top + ph / 2)
    << "\" transform=\"rotate(-90 16 " << fmt(top + ph / 2)
    << ")\" text-anchor=\"middle\" font-size=\"12\">voting certainty"
    << "</text>\n";

  for (const auto& p : points) {
    const bool pd = p.hy_grade > 0;
    b << "<circle cx=\"" << fmt(col_x(p.hy_grade)) << "\" cy=\""
      << fmt(cert_y(p.certainty)) << "\" r=\"4\" fill=\""
      << (pd ? "#c0392b" : "#2471a3") << "\" fill-opacity=\"0.8\"><title>"
      << p.patient_id << "</title></circle>\n";
  }
  write_svg(path, provenance, width, height, b.str());
}

void render_heatmap_pair(const Eigen::MatrixXd& left,
                         const Eigen::MatrixXd& right,
                         const std::string& left_title,
                         const std::string& right_title,
                         const std::string& path,
                         const std::string& provenance) {
  if (left.size() == 0 || right.size() == 0) {
    throw ValidationError("empty matrix for heatmap");
  }
  const int width = 900, height = 420;
  const double panel_w = 400, panel_h = 330, top = 50;
  std::ostringstream b;
  b << "<text x=\"" << 30 + panel_w / 2 << "\" y=\"30\" text-anchor=\"middle\""
    << " font-size=\"14\">" << left_title << "</text>\n";
  b << "<text x=\"" << 470 + panel_w / 2 << "\" y=\"30\" text-anchor=\"middle\""
    << " font-size=\"14\">" << right_title << "</text>\n";
  heatmap_body(b, left, 30, top, panel_w, panel_h);
  heatmap_body(b, right, 470, top, panel_w, panel_h);
  b << "<text x=\"" << 30 + panel_w / 2 << "\" y=\"" << height - 12
    << "\" text-anchor=\"middle\" font-size=\"12\">time</text>\n";
  b << "<text x=\"" << 470 + panel_w / 2 << "\" y=\"" << height - 12
    << "\" text-anchor=\"middle\" font-size=\"12\">time</text>\n";
  write_svg(path, provenance, width, height, b.str());
}

void render_waveform_pair(const std::vector<double>& before,
                          const std::vector<double>& after, int sample_rate,
                          const std::string& path,
                          const std::string& provenance) {
  if (before.empty() || after.empty()) {
    throw ValidationError("empty waveform for plot");
  }
  const int width = 800, height = 360;
  const double pw = 740, ph = 140;

  auto polyline = [&](const std::vector<double>& x, double y0) {
    std::ostringstream os;
    os << "<polyline fill=\"none\" stroke=\"#1a5276\" stroke-width=\"1\" "
       << "points=\"";
    const size_t step = std::max<size_t>(1, x.size() / 2000);
    for (size_t i = 0; i < x.size(); i += step) {
      const double px = 40 + pw * static_cast<double>(i) / x.size();
      const double py = y0 + ph / 2 - std::clamp(x[i], -1.0, 1.0) * ph / 2;
      os << fmt(px) << ',' << fmt(py) << ' ';
    }
    os << "\"/>\n";
    return os.str();
  };

  std::ostringstream b;
  b << "<text x=\"40\" y=\"22\" font-size=\"12\">before ("
    << before.size() << " samples @ " << sample_rate << " Hz)</text>\n";
  b << polyline(before, 30);
  b << "<text x=\"40\" y=\"202\" font-size=\"12\">after augmentation</text>\n";
  b << polyline(after, 210);
  write_svg(path, provenance, width, height, b.str());
}

}  // namespace voicepd
