// src/eval.cpp

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

#include "voicepd/eval.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "voicepd/error.hpp"
#include "voicepd/rng.hpp"
#include "voicepd/util.hpp"

namespace voicepd {

namespace {
constexpr uint64_t kStratumShuffleStream = 201;
constexpr uint64_t kFoldInitStream = 202;
constexpr uint64_t kFoldTrainStream = 203;
}  // namespace

FoldAssignment stratified_group_kfold(
    const std::vector<PatientStratum>& patients, int k, uint64_t seed) {
  if (k < 2) throw ValidationError("k must be >= 2");
  if (static_cast<size_t>(k) > patients.size()) {
    throw ValidationError("k exceeds the number of patients (" +
                          std::to_string(patients.size()) + ")");
  }
  {
    std::map<std::string, int> dup;
    for (const auto& p : patients) {
      if (++dup[p.patient_id] > 1) {
        throw ValidationError("duplicate patient id '" + p.patient_id + "'");
      }
    }
  }

  // Stratum order: HP, then HY 1..5.
  const Rng master(seed);
  FoldAssignment assignment;
  assignment.k = k;
  int next_fold = 0;
  for (int stratum = 0; stratum <= 5; ++stratum) {
    std::vector<std::string> ids;
    for (const auto& p : patients) {
      const int s = p.group == Group::kHP ? 0 : p.hy_grade;
      if (s == stratum) ids.push_back(p.patient_id);
    }
    if (ids.empty()) continue;
    std::sort(ids.begin(), ids.end());
    Rng rng = master.derive(
        {kStratumShuffleStream, static_cast<uint64_t>(stratum)});
    rng.shuffle(ids);
    for (const auto& id : ids) {
      assignment.fold_of[id] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }
  return assignment;
}

VotingResult vote(const std::vector<Prediction>& predictions) {
  if (predictions.empty()) {
    throw ValidationError("vote over an empty prediction list");
  }
  VotingResult r;
  r.votes_total = static_cast<int>(predictions.size());
  for (const auto& p : predictions) {
    if (p.label == Group::kPD) ++r.votes_pd;
  }
  r.certainty = static_cast<double>(r.votes_pd) / r.votes_total;
  r.label = r.certainty >= 0.5 ? Group::kPD : Group::kHP;
  return r;
}

double roc_auc(const std::vector<double>& scores,
               const std::vector<Group>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw ValidationError("roc_auc: scores and labels must match and be "
                          "non-empty");
  }
  size_t n_pos = 0, n_neg = 0;
  for (Group g : labels) (g == Group::kPD ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) {
    throw ValidationError("roc_auc needs at least one positive and one "
                          "negative");
  }

  // average ranks with tie handling
  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + j) / 2.0;
    for (size_t t = i; t < j; ++t) {
      if (labels[idx[t]] == Group::kPD) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

ConfusionMetrics confusion_metrics(
    const std::vector<std::pair<Group, Group>>& truth_and_predicted) {
  if (truth_and_predicted.empty()) {
    throw ValidationError("confusion_metrics over an empty set");
  }
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (const auto& [truth, pred] : truth_and_predicted) {
    if (truth == Group::kPD) {
      (pred == Group::kPD ? tp : fn)++;
    } else {
      (pred == Group::kHP ? tn : fp)++;
    }
  }
  ConfusionMetrics m;
  m.sensitivity = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  m.specificity = tn + fp > 0 ? tn / (tn + fp) : 0.0;
  m.accuracy = (tp + tn) / truth_and_predicted.size();
  return m;
}

FoldMetrics fold_metrics_mean(const std::vector<FoldMetrics>& folds) {
  FoldMetrics mean;
  if (folds.empty()) return mean;
  for (const auto& f : folds) {
    mean.single_sample_accuracy += f.single_sample_accuracy;
    mean.voting_accuracy += f.voting_accuracy;
    mean.voting_roc_auc += f.voting_roc_auc;
    mean.sensitivity += f.sensitivity;
    mean.specificity += f.specificity;
  }
  const double n = static_cast<double>(folds.size());
  mean.single_sample_accuracy /= n;
  mean.voting_accuracy /= n;
  mean.voting_roc_auc /= n;
  mean.sensitivity /= n;
  mean.specificity /= n;
  return mean;
}

namespace {

struct FoldOutcome {
  FoldMetrics metrics;
  std::vector<PatientVoteRow> votes;
};

FoldOutcome run_fold(const LoadedDataset& data, const FoldAssignment& folds,
                     int fold, const ModelConfig& mconfig,
                     const ConvStackParams* pretrained_conv,
                     const TrainConfig& tconfig, const NoiseCorpus& noise) {
  LoadedDataset train_set;
  train_set.patients = data.patients;
  std::vector<size_t> test_indices;
  for (size_t i = 0; i < data.samples.size(); ++i) {
    const auto& s = data.samples[i];
    const int f = folds.fold_of.at(data.patients[s.patient_index].patient_id);
    if (f == fold) {
      test_indices.push_back(i);
    } else {
      train_set.samples.push_back(s);
    }
  }
  if (train_set.samples.empty() || test_indices.empty()) {
    throw ValidationError("fold " + std::to_string(fold) +
                          " has an empty train or test partition");
  }

  const Rng master(tconfig.seed);
  Rng init_rng = master.derive({kFoldInitStream, static_cast<uint64_t>(fold)});
  ModelParams params = init_model_params(mconfig, init_rng);
  if (pretrained_conv) params.conv = *pretrained_conv;

  TrainConfig fold_cfg = tconfig;
  fold_cfg.seed = master.derive({kFoldTrainStream,
                                 static_cast<uint64_t>(fold)}).seed();
  fold_cfg.threads = 1;
  train(train_set, params, mconfig, fold_cfg, noise);

  // Held-out evaluation, augmentation off by contract.
  std::map<std::string, std::vector<Prediction>> per_patient;
  size_t correct_samples = 0;
  for (size_t i : test_indices) {
    const auto& s = data.samples[i];
    const Prediction pred =
        model_forward(s.wave, params, mconfig, s.sample_rate);
    if (pred.label == s.label) ++correct_samples;
    per_patient[data.patients[s.patient_index].patient_id].push_back(pred);
  }

  FoldOutcome out;
  out.metrics.single_sample_accuracy =
      static_cast<double>(correct_samples) / test_indices.size();

  std::vector<double> scores;
  std::vector<Group> truths;
  std::vector<std::pair<Group, Group>> confusion_pairs;
  for (const auto& [pid, preds] : per_patient) {
    VotingResult v = vote(preds);
    v.patient_id = pid;
    const auto& patient =
        *std::find_if(data.patients.begin(), data.patients.end(),
                      [&](const auto& p) { return p.patient_id == pid; });
    PatientVoteRow row;
    row.patient_id = pid;
    row.hy_grade = patient.hy_grade.value_or(0);
    row.truth = patient.group;
    row.fold = fold;
    row.result = v;
    out.votes.push_back(row);

    scores.push_back(v.certainty);
    truths.push_back(patient.group);
    confusion_pairs.push_back({patient.group, v.label});
  }

  const ConfusionMetrics cm = confusion_metrics(confusion_pairs);
  out.metrics.voting_accuracy = cm.accuracy;
  out.metrics.sensitivity = cm.sensitivity;
  out.metrics.specificity = cm.specificity;
  out.metrics.voting_roc_auc = roc_auc(scores, truths);
  return out;
}

}  // namespace

CrossValidationResult cross_validate(const LoadedDataset& data,
                                     const ModelConfig& mconfig,
                                     const ConvStackParams* pretrained_conv,
                                     const TrainConfig& tconfig, int k,
                                     const NoiseCorpus& noise) {
  tconfig.validate();
  mconfig.validate();
  if (data.patients.empty()) throw ValidationError("empty dataset");

  std::vector<PatientStratum> strata;
  for (const auto& p : data.patients) {
    strata.push_back({p.patient_id, p.group, p.hy_grade.value_or(0)});
  }
  CrossValidationResult result;
  result.folds = stratified_group_kfold(strata, k, tconfig.seed);

  std::vector<FoldOutcome> outcomes(k);
  const int fold_workers = std::max(1, std::min(tconfig.threads, k));
  std::exception_ptr error;
  std::mutex error_mu;

  auto run_range = [&](int w) {
    for (int f = w; f < k; f += fold_workers) {
      try {
        outcomes[f] = run_fold(data, result.folds, f, mconfig,
                               pretrained_conv, tconfig, noise);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  if (fold_workers == 1) {
    run_range(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < fold_workers; ++w) pool.emplace_back(run_range, w);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  for (int f = 0; f < k; ++f) {
    result.report.folds.push_back(outcomes[f].metrics);
    for (auto& row : outcomes[f].votes) result.votes.push_back(row);
  }
  result.report.mean = fold_metrics_mean(result.report.folds);
  std::sort(result.votes.begin(), result.votes.end(),
            [](const auto& a, const auto& b) {
              return a.patient_id < b.patient_id;
            });
  return result;
}

namespace {

void append_metrics_row(std::ostringstream& os, const std::string& name,
                        const FoldMetrics& m) {
  os << name << ',' << m.single_sample_accuracy << ',' << m.voting_accuracy
     << ',' << m.voting_roc_auc << ',' << m.sensitivity << ','
     << m.specificity << "\n";
}

}  // namespace

std::string metrics_report_to_csv(const MetricsReport& report,
                                  const std::string& model_name,
                                  const std::string& provenance) {
  std::ostringstream os;
  os.precision(17);
  if (!provenance.empty()) os << provenance << "\n";
  os << "Model,Single-sample accuracy,Inferred voting accuracy,"
        "Inferred voting ROC AUC,"
        "Inferred voting sensitivity (true positive rate),"
        "Inferred voting specificity (true negative rate)\n";
  for (size_t f = 0; f < report.folds.size(); ++f) {
    append_metrics_row(os, model_name + " fold " + std::to_string(f),
                       report.folds[f]);
  }
  append_metrics_row(os, model_name + " mean", report.mean);
  return os.str();
}

std::string metrics_report_to_json(const MetricsReport& report,
                                   const std::string& model_name) {
  nlohmann::json j;
  j["model"] = model_name;
  auto fold_json = [](const FoldMetrics& m) {
    return nlohmann::json{{"single_sample_accuracy", m.single_sample_accuracy},
                          {"voting_accuracy", m.voting_accuracy},
                          {"voting_roc_auc", m.voting_roc_auc},
                          {"sensitivity", m.sensitivity},
                          {"specificity", m.specificity}};
  };
  j["folds"] = nlohmann::json::array();
  for (const auto& f : report.folds) j["folds"].push_back(fold_json(f));
  j["mean"] = fold_json(report.mean);
  return j.dump(2);
}

std::string votes_to_csv(const std::vector<PatientVoteRow>& votes,
                         const std::string& provenance) {
  std::ostringstream os;
  os.precision(17);
  if (!provenance.empty()) os << provenance << "\n";
  os << "patient_id,hy_grade,certainty,label\n";
  for (const auto& v : votes) {
    os << csv_escape(v.patient_id) << ','
       << (v.hy_grade > 0 ? std::to_string(v.hy_grade) : std::string()) << ','
       << v.result.certainty << ',' << group_name(v.result.label) << "\n";
  }
  return os.str();
}

}  // namespace voicepd
