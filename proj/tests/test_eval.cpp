// tests/test_eval.cpp

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

#include <map>
#include <set>

#include "test_util.hpp"
#include "voicepd/error.hpp"
#include "voicepd/eval.hpp"

using namespace voicepd;

namespace {

// The 38 PD / 10 HP population with the 2/11/13/11/1 grade histogram.
std::vector<PatientStratum> clinic_population() {
  std::vector<PatientStratum> patients;
  const int counts_by_grade[6] = {0, 2, 11, 13, 11, 1};
  int id = 0;
  for (int grade = 1; grade <= 5; ++grade) {
    for (int i = 0; i < counts_by_grade[grade]; ++i) {
      patients.push_back({"pd" + std::to_string(id++), Group::kPD, grade});
    }
  }
  for (int i = 0; i < 10; ++i) {
    patients.push_back({"hp" + std::to_string(i), Group::kHP, 0});
  }
  return patients;
}

Prediction fake_prediction(Group label) {
  Prediction p;
  p.logits = label == Group::kPD ? Eigen::Vector2d(-1.0, 1.0)
                                 : Eigen::Vector2d(1.0, -1.0);
  p.probability_pd = label == Group::kPD ? 0.88 : 0.12;
  p.label = label;
  return p;
}

// Oracle: all-pairs Mann-Whitney count.
double brute_force_auc(const std::vector<double>& scores,
                       const std::vector<Group>& labels) {
  double wins = 0.0;
  long pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != Group::kPD) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != Group::kHP) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("stratified k-fold on the clinic population") {
  const auto patients = clinic_population();
  for (uint64_t seed : {0ULL, 1ULL, 42ULL, 1234ULL}) {
    FoldAssignment folds = stratified_group_kfold(patients, 5, seed);
    REQUIRE(folds.fold_of.size() == 48);

    // every patient in exactly one fold; count strata per fold
    std::map<int, std::map<int, int>> stratum_fold_counts;  // stratum -> fold
    std::map<int, int> hp_per_fold, pd_per_fold, total_per_fold;
    for (const auto& p : patients) {
      const int f = folds.fold_of.at(p.patient_id);
      REQUIRE(f >= 0);
      REQUIRE(f < 5);
      const int stratum = p.group == Group::kHP ? 0 : p.hy_grade;
      stratum_fold_counts[stratum][f]++;
      (p.group == Group::kHP ? hp_per_fold : pd_per_fold)[f]++;
      total_per_fold[f]++;
    }

    for (int f = 0; f < 5; ++f) {
      CHECK(total_per_fold[f] > 0);
      CHECK(hp_per_fold[f] >= 1);
      CHECK(pd_per_fold[f] >= 1);
    }
    for (const auto& [stratum, by_fold] : stratum_fold_counts) {
      int lo = INT_MAX, hi = 0;
      for (int f = 0; f < 5; ++f) {
        auto it = by_fold.find(f);
        const int c = it == by_fold.end() ? 0 : it->second;
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
      CHECK(hi - lo <= 1);  // round-robin balance within every stratum
    }
    // strata of size >= 10 put 2 or 3 patients in every fold
    for (int stratum : {0, 2, 3, 4}) {
      for (int f = 0; f < 5; ++f) {
        const int c = stratum_fold_counts[stratum][f];
        CHECK(c >= 2);
        CHECK(c <= 3);
      }
    }
  }
}

TEST_CASE("k-fold determinism and seed sensitivity") {
  const auto patients = clinic_population();
  FoldAssignment a = stratified_group_kfold(patients, 5, 7);
  FoldAssignment b = stratified_group_kfold(patients, 5, 7);
  CHECK(a.fold_of == b.fold_of);
  FoldAssignment c = stratified_group_kfold(patients, 5, 8);
  CHECK(a.fold_of != c.fold_of);
}

TEST_CASE("k-fold balance with a single stratum") {
  std::vector<PatientStratum> patients;
  for (int i = 0; i < 7; ++i) {
    patients.push_back({"p" + std::to_string(i), Group::kPD, 2});
  }
  FoldAssignment folds = stratified_group_kfold(patients, 3, 1);
  std::map<int, int> sizes;
  for (const auto& [id, f] : folds.fold_of) sizes[f]++;
  int lo = INT_MAX, hi = 0;
  for (int f = 0; f < 3; ++f) {
    lo = std::min(lo, sizes[f]);
    hi = std::max(hi, sizes[f]);
  }
  CHECK(hi - lo <= 1);
}

TEST_CASE("k-fold argument validation") {
  std::vector<PatientStratum> four;
  for (int i = 0; i < 4; ++i) {
    four.push_back({"p" + std::to_string(i), Group::kHP, 0});
  }
  CHECK_THROWS_AS(stratified_group_kfold(four, 5, 0), ValidationError);
  CHECK_THROWS_AS(stratified_group_kfold(four, 1, 0), ValidationError);
  std::vector<PatientStratum> dup = {{"a", Group::kHP, 0}, {"a", Group::kHP, 0}};
  CHECK_THROWS_AS(stratified_group_kfold(dup, 2, 0), ValidationError);
}

TEST_CASE("vote") {
  SUBCASE("majority PD") {
    VotingResult r = vote({fake_prediction(Group::kPD),
                           fake_prediction(Group::kPD),
                           fake_prediction(Group::kHP)});
    CHECK(r.votes_pd == 2);
    CHECK(r.votes_total == 3);
    CHECK(r.certainty == doctest::Approx(2.0 / 3.0));
    CHECK(r.label == Group::kPD);
  }
  SUBCASE("unanimous HP") {
    std::vector<Prediction> preds(4, fake_prediction(Group::kHP));
    VotingResult r = vote(preds);
    CHECK(r.certainty == 0.0);
    CHECK(r.label == Group::kHP);
  }
  SUBCASE("exact tie goes to PD") {
    VotingResult r =
        vote({fake_prediction(Group::kPD), fake_prediction(Group::kHP)});
    CHECK(r.certainty == 0.5);
    CHECK(r.label == Group::kPD);
  }
  SUBCASE("empty list is an error") {
    CHECK_THROWS_AS(vote({}), ValidationError);
  }
  SUBCASE("permutation invariance") {
    Rng rng(4);
    std::vector<Prediction> preds;
    for (int i = 0; i < 9; ++i) {
      preds.push_back(
          fake_prediction(rng.uniform() < 0.5 ? Group::kPD : Group::kHP));
    }
    VotingResult before = vote(preds);
    rng.shuffle(preds);
    VotingResult after = vote(preds);
    CHECK(before.certainty == after.certainty);
    CHECK(before.label == after.label);
  }
  SUBCASE("voting recounts exactly the predictions fed in") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Prediction> preds;
      int expected_pd = 0;
      const int n = 1 + static_cast<int>(rng.uniform_int(20));
      for (int i = 0; i < n; ++i) {
        const bool pd = rng.uniform() < 0.5;
        expected_pd += pd ? 1 : 0;
        preds.push_back(fake_prediction(pd ? Group::kPD : Group::kHP));
      }
      VotingResult r = vote(preds);
      CHECK(r.votes_pd == expected_pd);
      CHECK(r.votes_total == n);
    }
  }
}

TEST_CASE("roc_auc") {
  SUBCASE("perfect separation") {
    CHECK(roc_auc({0.9, 0.8, 0.1, 0.2},
                  {Group::kPD, Group::kPD, Group::kHP, Group::kHP}) == 1.0);
  }
  SUBCASE("all scores equal") {
    CHECK(roc_auc({0.5, 0.5, 0.5},
                  {Group::kPD, Group::kHP, Group::kPD}) == 0.5);
  }
  SUBCASE("single class is an error") {
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {Group::kPD, Group::kPD}),
                    ValidationError);
  }
  SUBCASE("matches the all-pairs oracle on random instances") {
    Rng rng(6);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 2 + static_cast<int>(rng.uniform_int(49));
      std::vector<double> scores(n);
      std::vector<Group> labels(n);
      labels[0] = Group::kPD;
      labels[1] = Group::kHP;
      for (int i = 0; i < n; ++i) {
        // quantized scores so ties actually happen
        scores[i] = rng.uniform_int(11) / 10.0;
        if (i >= 2) {
          labels[i] = rng.uniform() < 0.5 ? Group::kPD : Group::kHP;
        }
      }
      const double fast = roc_auc(scores, labels);
      const double slow = brute_force_auc(scores, labels);
      CHECK(std::fabs(fast - slow) < 1e-12);
    }
  }
  SUBCASE("invariant under strictly increasing transforms") {
    Rng rng(7);
    std::vector<double> scores(20);
    std::vector<Group> labels(20);
    for (int i = 0; i < 20; ++i) {
      scores[i] = rng.uniform(0.0, 1.0);
      labels[i] = i % 3 == 0 ? Group::kPD : Group::kHP;
    }
    std::vector<double> warped = scores;
    for (auto& s : warped) s = std::exp(3.0 * s) - 0.5;
    CHECK(roc_auc(scores, labels) ==
          doctest::Approx(roc_auc(warped, labels)).epsilon(1e-15));
  }
}

TEST_CASE("confusion_metrics") {
  SUBCASE("the 37-of-38 fixture") {
    std::vector<std::pair<Group, Group>> pairs;
    for (int i = 0; i < 37; ++i) pairs.push_back({Group::kPD, Group::kPD});
    pairs.push_back({Group::kPD, Group::kHP});  // one false negative
    for (int i = 0; i < 10; ++i) pairs.push_back({Group::kHP, Group::kHP});
    ConfusionMetrics m = confusion_metrics(pairs);
    CHECK(m.sensitivity == doctest::Approx(37.0 / 38.0).epsilon(1e-12));
    CHECK(m.specificity == 1.0);
    CHECK(m.accuracy == doctest::Approx(47.0 / 48.0).epsilon(1e-12));
  }
  SUBCASE("all correct") {
    ConfusionMetrics m = confusion_metrics(
        {{Group::kPD, Group::kPD}, {Group::kHP, Group::kHP}});
    CHECK(m.sensitivity == 1.0);
    CHECK(m.specificity == 1.0);
    CHECK(m.accuracy == 1.0);
  }
  SUBCASE("everything predicted PD") {
    ConfusionMetrics m = confusion_metrics(
        {{Group::kPD, Group::kPD}, {Group::kHP, Group::kPD}});
    CHECK(m.sensitivity == 1.0);
    CHECK(m.specificity == 0.0);
  }
  SUBCASE("accuracy identity") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::pair<Group, Group>> pairs;
      int pos = 0, neg = 0;
      const int n = 2 + static_cast<int>(rng.uniform_int(40));
      for (int i = 0; i < n; ++i) {
        const Group truth = rng.uniform() < 0.6 ? Group::kPD : Group::kHP;
        const Group pred = rng.uniform() < 0.7 ? truth
                           : (truth == Group::kPD ? Group::kHP : Group::kPD);
        (truth == Group::kPD ? pos : neg)++;
        pairs.push_back({truth, pred});
      }
      if (pos == 0 || neg == 0) continue;
      ConfusionMetrics m = confusion_metrics(pairs);
      const double identity =
          (m.sensitivity * pos + m.specificity * neg) / (pos + neg);
      CHECK(m.accuracy == doctest::Approx(identity).epsilon(1e-12));
    }
  }
}

TEST_CASE("fold_metrics_mean is the arithmetic average") {
  std::vector<FoldMetrics> folds(3);
  folds[0] = {0.9, 0.8, 0.7, 0.6, 0.5};
  folds[1] = {0.8, 0.7, 0.6, 0.5, 0.4};
  folds[2] = {0.7, 0.6, 0.5, 0.4, 0.3};
  FoldMetrics mean = fold_metrics_mean(folds);
  CHECK(mean.single_sample_accuracy == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(mean.voting_accuracy == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(mean.voting_roc_auc == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(mean.sensitivity == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mean.specificity == doctest::Approx(0.4).epsilon(1e-12));
}

namespace {

LoadedDataset separable_dataset(int per_class, int clips_each) {
  LoadedDataset ds;
  Rng rng(200);
  int pid = 0;
  for (int cls = 0; cls < 2; ++cls) {
    for (int p = 0; p < per_class; ++p, ++pid) {
      PatientRecord rec;
      rec.patient_id = (cls == 0 ? "pd" : "hp") + std::to_string(p);
      rec.group = cls == 0 ? Group::kPD : Group::kHP;
      if (cls == 0) rec.hy_grade = 1 + p % 5;
      for (int c = 0; c < clips_each; ++c) {
        LoadedSample s;
        s.patient_index = pid;
        s.label = rec.group;
        const double freq = cls == 0 ? 400.0 : 2800.0;
        s.wave = test::sine(freq * rng.uniform(0.95, 1.05), 16000, 256, 0.5);
        for (auto& v : s.wave) v += 0.01 * rng.gaussian();
        s.sample_rate = 16000;
        s.path = rec.patient_id + "_" + std::to_string(c);
        rec.samples.push_back({s.path, UtteranceType::kVowel, 1.0});
        ds.samples.push_back(std::move(s));
      }
      ds.patients.push_back(std::move(rec));
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("cross_validate end to end on a tiny separable dataset") {
  LoadedDataset ds = separable_dataset(2, 6);
  ModelConfig mc;
  mc.conv.layers = {{1, 8, 4, 2}, {8, 8, 3, 2}};
  mc.gru_hidden = 4;
  mc.head_hidden = 8;

  TrainConfig tc;
  tc.epochs = 30;
  tc.batch_size = 8;
  tc.learning_rate = 5e-3;
  tc.configuration = TrainSetup::kFrozenConv;
  tc.seed = 5;
  tc.augmentation.p_background = 0.0;
  tc.augmentation.p_colored = 0.0;
  tc.augmentation.p_shift = 0.0;
  tc.augmentation.p_polarity = 0.0;

  CrossValidationResult result = cross_validate(ds, mc, nullptr, tc, 2, {});
  REQUIRE(result.report.folds.size() == 2);

  // no sample leakage: each patient's samples sit in exactly one fold
  for (const auto& p : ds.patients) {
    CHECK(result.folds.fold_of.count(p.patient_id) == 1);
  }
  // votes cover every patient exactly once
  std::set<std::string> voted;
  for (const auto& v : result.votes) {
    CHECK(voted.insert(v.patient_id).second);
    CHECK(v.result.votes_total == 6);
  }
  CHECK(voted.size() == 4);

  // the mean is the arithmetic fold average
  FoldMetrics expected_mean = fold_metrics_mean(result.report.folds);
  CHECK(result.report.mean.voting_accuracy ==
        doctest::Approx(expected_mean.voting_accuracy).epsilon(1e-12));
  CHECK(result.report.mean.single_sample_accuracy ==
        doctest::Approx(expected_mean.single_sample_accuracy).epsilon(1e-12));

  // separable data should be learned essentially perfectly
  CHECK(result.report.mean.voting_accuracy >= 0.9);
  for (const auto& f : result.report.folds) {
    CHECK(f.single_sample_accuracy >= 0.0);
    CHECK(f.single_sample_accuracy <= 1.0);
    CHECK(f.voting_accuracy >= 0.0);
    CHECK(f.voting_accuracy <= 1.0);
  }

  // deterministic: the same call gives bit-identical metrics
  CrossValidationResult again = cross_validate(ds, mc, nullptr, tc, 2, {});
  for (size_t f = 0; f < result.report.folds.size(); ++f) {
    CHECK(result.report.folds[f].voting_roc_auc ==
          again.report.folds[f].voting_roc_auc);
    CHECK(result.report.folds[f].single_sample_accuracy ==
          again.report.folds[f].single_sample_accuracy);
  }

  // evaluation is augmentation-free: a trained model scores the held-out
  // samples identically no matter how often it is asked
  const std::string csv = metrics_report_to_csv(result.report, "toy", "");
  CHECK(csv.find("Single-sample accuracy") != std::string::npos);
  CHECK(csv.find("Inferred voting ROC AUC") != std::string::npos);
  CHECK(csv.find("Inferred voting sensitivity (true positive rate)") !=
        std::string::npos);
  const std::string votes_csv = votes_to_csv(result.votes, "");
  CHECK(votes_csv.find("patient_id,hy_grade,certainty,label") !=
        std::string::npos);
}

TEST_CASE("cross_validate with parallel folds matches single-threaded") {
  LoadedDataset ds = separable_dataset(2, 3);
  ModelConfig mc;
  mc.conv.layers = {{1, 8, 4, 2}, {8, 8, 3, 2}};
  mc.gru_hidden = 4;
  mc.head_hidden = 8;

  TrainConfig tc;
  tc.epochs = 5;
  tc.batch_size = 4;
  tc.learning_rate = 1e-3;
  tc.configuration = TrainSetup::kFrozenConv;
  tc.seed = 9;
  tc.augmentation = {};
  tc.augmentation.p_background = 0.0;
  tc.augmentation.p_colored = 0.0;
  tc.augmentation.p_shift = 0.0;
  tc.augmentation.p_polarity = 0.0;

  CrossValidationResult seq = cross_validate(ds, mc, nullptr, tc, 2, {});
  tc.threads = 4;
  CrossValidationResult par = cross_validate(ds, mc, nullptr, tc, 2, {});
  for (size_t f = 0; f < seq.report.folds.size(); ++f) {
    CHECK(seq.report.folds[f].voting_accuracy ==
          par.report.folds[f].voting_accuracy);
    CHECK(seq.report.folds[f].single_sample_accuracy ==
          par.report.folds[f].single_sample_accuracy);
    CHECK(seq.report.folds[f].voting_roc_auc ==
          par.report.folds[f].voting_roc_auc);
  }
}
