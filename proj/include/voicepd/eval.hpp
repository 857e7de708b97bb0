// voicepd/eval.hpp

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

#ifndef VOICEPD_EVAL_HPP_
#define VOICEPD_EVAL_HPP_

#include <map>
#include <string>
#include <vector>

#include "voicepd/data.hpp"
#include "voicepd/model.hpp"
#include "voicepd/train.hpp"

namespace voicepd {

struct PatientStratum {
  std::string patient_id;
  Group group = Group::kHP;
  int hy_grade = 0;  // 0 for HP
};

// Patient-level fold assignment; all samples of a patient share its fold.
struct FoldAssignment {
  std::map<std::string, int> fold_of;
  int k = 0;
};

// Strata are HP plus HY grades 1-5. Within each stratum patients are
// shuffled (seeded) and dealt round-robin, with the dealing position
// carried across strata so overall fold sizes stay balanced.
FoldAssignment stratified_group_kfold(const std::vector<PatientStratum>& patients,
                                      int k, uint64_t seed);

// Aggregated per-patient prediction: certainty is the fraction of
// PD-positive single-sample predictions; ties at 0.5 label PD.
struct VotingResult {
  std::string patient_id;
  int votes_pd = 0;
  int votes_total = 0;
  double certainty = 0.0;
  Group label = Group::kHP;
};

VotingResult vote(const std::vector<Prediction>& predictions);

// Mann-Whitney statistic: P(score_pos > score_neg) + 0.5 P(equal) over all
// positive-negative pairs. Requires both classes present.
double roc_auc(const std::vector<double>& scores,
               const std::vector<Group>& labels);

struct ConfusionMetrics {
  double sensitivity = 0.0;  // TP / (TP + FN)
  double specificity = 0.0;  // TN / (TN + FP)
  double accuracy = 0.0;     // (TP + TN) / total
};

ConfusionMetrics confusion_metrics(
    const std::vector<std::pair<Group, Group>>& truth_and_predicted);

struct FoldMetrics {
  double single_sample_accuracy = 0.0;
  double voting_accuracy = 0.0;
  double voting_roc_auc = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
};

struct MetricsReport {
  std::vector<FoldMetrics> folds;
  FoldMetrics mean;
};

FoldMetrics fold_metrics_mean(const std::vector<FoldMetrics>& folds);

struct PatientVoteRow {
  std::string patient_id;
  int hy_grade = 0;  // 0 for HP
  Group truth = Group::kHP;
  int fold = 0;
  VotingResult result;
};

struct CrossValidationResult {
  MetricsReport report;
  std::vector<PatientVoteRow> votes;
  FoldAssignment folds;
};

// Patient-level stratified k-fold: train on k-1 folds with augmentation,
// evaluate the held-out fold with augmentation off. Folds may run in
// parallel (tconfig.threads); each fold trains single-threaded so the
// metrics do not depend on the thread budget.
CrossValidationResult cross_validate(const LoadedDataset& data,
                                     const ModelConfig& mconfig,
                                     const ConvStackParams* pretrained_conv,
                                     const TrainConfig& tconfig, int k,
                                     const NoiseCorpus& noise);

// CSV with one row per fold plus the across-fold mean.
std::string metrics_report_to_csv(const MetricsReport& report,
                                  const std::string& model_name,
                                  const std::string& provenance);
std::string metrics_report_to_json(const MetricsReport& report,
                                   const std::string& model_name);
std::string votes_to_csv(const std::vector<PatientVoteRow>& votes,
                         const std::string& provenance);

}  // namespace voicepd

#endif  // VOICEPD_EVAL_HPP_
