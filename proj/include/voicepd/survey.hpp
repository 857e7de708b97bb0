// voicepd/survey.hpp

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

#ifndef VOICEPD_SURVEY_HPP_
#define VOICEPD_SURVEY_HPP_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "voicepd/model.hpp"

namespace voicepd {

// One expert's rating of one subject: 1 no symptoms, 2 symptoms other than
// PD, 3 early-stage PD, 4 advanced-stage PD.
struct ExpertAnswer {
  std::string subject_id;
  std::string expert_id;
  int rating = 0;
  std::string set_id;
};

struct SubjectTruth {
  std::string subject_id;
  Group group = Group::kHP;
  std::optional<int> hy_grade;
};

struct SubjectSummary {
  std::string subject_id;
  std::set<int> modes;   // all most-frequent ratings; plural on ties
  double average = 0.0;  // full precision; display rounds to 1 decimal
  bool hit = false;
  Group true_group = Group::kHP;
  std::optional<int> true_hy;
};

// Mode set and mean of the ratings for one subject.
SubjectSummary summarize(const std::vector<ExpertAnswer>& answers);

// The set of ratings counted as correct for a subject: HP maps to {1}; PD
// maps to {3} below the advanced cutoff and {4} at or above it. The cutoff
// defaults to HY 3, and is configurable because the staging boundary for
// "advanced" is a judgment call.
std::set<int> truth_rating_set(const SubjectTruth& truth,
                               int advanced_cutoff = 3);

// True iff at least one expert's rating falls into the truth set.
bool hit(const std::vector<ExpertAnswer>& answers,
         const std::set<int>& truth_set);

// Tie handling for subjects whose mode set maps to both binary classes
// ({1,2} non-PD vs {3,4} PD):
//   kStrict    - cross-class ties score zero
//   kCountHalf - cross-class ties score one half
//   kFavorPd   - cross-class ties resolve to a PD prediction
//   kDrop      - cross-class ties leave the denominator entirely
enum class TieRule { kStrict, kCountHalf, kFavorPd, kDrop };

const char* tie_rule_name(TieRule r);

double binary_mode_accuracy(
    const std::vector<std::pair<SubjectSummary, SubjectTruth>>& subjects,
    TieRule rule);

// Binary class of a rating: {1,2} -> non-PD (HP), {3,4} -> PD.
inline Group rating_binary_class(int rating) {
  return rating >= 3 ? Group::kPD : Group::kHP;
}

// Mode-set classification used by the accuracy rules: PD when every mode
// maps to PD, non-PD when every mode maps to non-PD, unresolved otherwise.
enum class ModeClass { kNonPd, kPd, kMixed };
ModeClass classify_modes(const std::set<int>& modes);

// answers.csv: subject_id, expert_id, rating, set_id
std::vector<ExpertAnswer> load_answers(const std::string& path);
// truth.csv: subject_id, group, hy_grade
std::vector<SubjectTruth> load_truths(const std::string& path);

}  // namespace voicepd

#endif  // VOICEPD_SURVEY_HPP_
