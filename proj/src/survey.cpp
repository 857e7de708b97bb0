// src/survey.cpp

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

#include "voicepd/survey.hpp"

#include <array>
#include <map>
#include <set>

#include "voicepd/error.hpp"
#include "voicepd/util.hpp"

namespace voicepd {

SubjectSummary summarize(const std::vector<ExpertAnswer>& answers) {
  if (answers.empty()) {
    throw ValidationError("summarize over an empty answer set");
  }
  std::array<int, 5> counts{};  // index 1..4
  double sum = 0.0;
  std::set<std::string> experts;
  for (const auto& a : answers) {
    if (a.rating < 1 || a.rating > 4) {
      throw ValidationError("rating out of range for subject '" +
                            a.subject_id + "'");
    }
    if (!experts.insert(a.expert_id).second) {
      throw ValidationError("duplicate (subject, expert) pair: " +
                            a.subject_id + ", " + a.expert_id);
    }
    counts[a.rating]++;
    sum += a.rating;
  }
  SubjectSummary s;
  s.subject_id = answers.front().subject_id;
  const int best = *std::max_element(counts.begin() + 1, counts.end());
  for (int r = 1; r <= 4; ++r) {
    if (counts[r] == best) s.modes.insert(r);
  }
  s.average = sum / answers.size();
  return s;
}

std::set<int> truth_rating_set(const SubjectTruth& truth, int advanced_cutoff) {
  if (truth.group == Group::kHP) return {1};
  const int hy = truth.hy_grade.value_or(1);
  return hy >= advanced_cutoff ? std::set<int>{4} : std::set<int>{3};
}

bool hit(const std::vector<ExpertAnswer>& answers,
         const std::set<int>& truth_set) {
  for (const auto& a : answers) {
    if (truth_set.count(a.rating)) return true;
  }
  return false;
}

const char* tie_rule_name(TieRule r) {
  switch (r) {
    case TieRule::kStrict: return "strict";
    case TieRule::kCountHalf: return "count_half";
    case TieRule::kFavorPd: return "favor_pd";
    case TieRule::kDrop: return "drop";
  }
  return "strict";
}

ModeClass classify_modes(const std::set<int>& modes) {
  bool any_pd = false, any_non = false;
  for (int m : modes) {
    (rating_binary_class(m) == Group::kPD ? any_pd : any_non) = true;
  }
  if (any_pd && any_non) return ModeClass::kMixed;
  return any_pd ? ModeClass::kPd : ModeClass::kNonPd;
}

double binary_mode_accuracy(
    const std::vector<std::pair<SubjectSummary, SubjectTruth>>& subjects,
    TieRule rule) {
  if (subjects.empty()) {
    throw ValidationError("binary_mode_accuracy over an empty set");
  }
  double score = 0.0;
  double denom = 0.0;
  for (const auto& [summary, truth] : subjects) {
    const ModeClass mc = classify_modes(summary.modes);
    const Group truth_bin = truth.group;
    if (mc == ModeClass::kMixed) {
      switch (rule) {
        case TieRule::kStrict:
          denom += 1.0;  // ties never score
          break;
        case TieRule::kCountHalf:
          denom += 1.0;
          score += 0.5;
          break;
        case TieRule::kFavorPd:
          denom += 1.0;
          if (truth_bin == Group::kPD) score += 1.0;
          break;
        case TieRule::kDrop:
          break;  // excluded from the denominator
      }
      continue;
    }
    denom += 1.0;
    const Group predicted =
        mc == ModeClass::kPd ? Group::kPD : Group::kHP;
    if (predicted == truth_bin) score += 1.0;
  }
  if (denom == 0.0) {
    throw ValidationError("binary_mode_accuracy: no scorable subjects");
  }
  return score / denom;
}

std::vector<ExpertAnswer> load_answers(const std::string& path) {
  const auto lines = read_csv_lines(path);
  if (lines.empty()) throw ValidationError("empty answers file: " + path);
  const auto header = csv_split(lines[0]);
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* name : {"subject_id", "expert_id", "rating", "set_id"}) {
    if (!col.count(name)) {
      throw ValidationError(std::string("answers file missing column '") +
                            name + "': " + path);
    }
  }
  std::vector<ExpertAnswer> out;
  for (size_t row = 1; row < lines.size(); ++row) {
    const auto f = csv_split(lines[row]);
    ExpertAnswer a;
    a.subject_id = f.at(col["subject_id"]);
    a.expert_id = f.at(col["expert_id"]);
    a.set_id = f.at(col["set_id"]);
    try {
      a.rating = std::stoi(f.at(col["rating"]));
    } catch (...) {
      throw ValidationError("bad rating at row " + std::to_string(row + 1));
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<SubjectTruth> load_truths(const std::string& path) {
  const auto lines = read_csv_lines(path);
  if (lines.empty()) throw ValidationError("empty truth file: " + path);
  const auto header = csv_split(lines[0]);
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* name : {"subject_id", "group", "hy_grade"}) {
    if (!col.count(name)) {
      throw ValidationError(std::string("truth file missing column '") +
                            name + "': " + path);
    }
  }
  std::vector<SubjectTruth> out;
  for (size_t row = 1; row < lines.size(); ++row) {
    const auto f = csv_split(lines[row]);
    SubjectTruth t;
    t.subject_id = f.at(col["subject_id"]);
    t.group = parse_group(f.at(col["group"]));
    const std::string& hy = f.at(col["hy_grade"]);
    if (!hy.empty()) t.hy_grade = std::stoi(hy);
    if (t.group == Group::kPD && !t.hy_grade) {
      throw ValidationError("PD subject without hy_grade at row " +
                            std::to_string(row + 1));
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace voicepd
