// tools/voicepd.cpp

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

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "voicepd/audio.hpp"
#include "voicepd/augment.hpp"
#include "voicepd/data.hpp"
#include "voicepd/error.hpp"
#include "voicepd/eval.hpp"
#include "voicepd/features.hpp"
#include "voicepd/model.hpp"
#include "voicepd/survey.hpp"
#include "voicepd/train.hpp"
#include "voicepd/util.hpp"
#include "voicepd/viz.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace voicepd;

namespace {

struct RunConfig {
  uint64_t seed = 0;
  int threads = 1;
  int epochs = 400;
  int batch_size = 32;
  double learning_rate = 1e-4;
  std::string configuration = "frozen_conv";
  int k = 5;
  AugmentationConfig augmentation;
  std::string noise_dir;
  ModelConfig model;
  bool trace_augment = false;

  TrainConfig train_config() const {
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch_size;
    tc.learning_rate = learning_rate;
    tc.configuration = parse_train_setup(configuration);
    tc.seed = seed;
    tc.augmentation = augmentation;
    tc.threads = threads;
    return tc;
  }

  uint64_t hash() const {
    json j;
    j["seed"] = seed;
    j["threads"] = threads;
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["learning_rate"] = learning_rate;
    j["configuration"] = configuration;
    j["k"] = k;
    j["augmentation"] = {augmentation.p_background, augmentation.p_colored,
                         augmentation.p_shift, augmentation.p_polarity,
                         augmentation.snr_db_range[0],
                         augmentation.snr_db_range[1],
                         augmentation.f_decay_range[0],
                         augmentation.f_decay_range[1],
                         augmentation.shift_fraction_range[0],
                         augmentation.shift_fraction_range[1]};
    j["noise_dir"] = noise_dir;
    j["model"] = json::parse(model.to_json());
    return fnv1a64(j.dump());
  }

  std::string provenance() const { return provenance_line(seed, hash()); }
};

// JSON config file values act as defaults; explicitly passed flags win.
void apply_config_file(RunConfig& rc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config JSON: ") + e.what());
  }
  if (j.contains("seed")) rc.seed = j["seed"].get<uint64_t>();
  if (j.contains("threads")) rc.threads = j["threads"].get<int>();
  if (j.contains("epochs")) rc.epochs = j["epochs"].get<int>();
  if (j.contains("batch_size")) rc.batch_size = j["batch_size"].get<int>();
  if (j.contains("learning_rate")) {
    rc.learning_rate = j["learning_rate"].get<double>();
  }
  if (j.contains("configuration")) {
    rc.configuration = j["configuration"].get<std::string>();
  }
  if (j.contains("k")) rc.k = j["k"].get<int>();
  if (j.contains("noise_dir")) rc.noise_dir = j["noise_dir"].get<std::string>();
  if (j.contains("trace_augment")) {
    rc.trace_augment = j["trace_augment"].get<bool>();
  }
  if (j.contains("augmentation")) {
    const auto& a = j["augmentation"];
    auto& cfg = rc.augmentation;
    if (a.contains("p_background")) cfg.p_background = a["p_background"];
    if (a.contains("p_colored")) cfg.p_colored = a["p_colored"];
    if (a.contains("p_shift")) cfg.p_shift = a["p_shift"];
    if (a.contains("p_polarity")) cfg.p_polarity = a["p_polarity"];
    if (a.contains("snr_db_range")) {
      cfg.snr_db_range[0] = a["snr_db_range"][0];
      cfg.snr_db_range[1] = a["snr_db_range"][1];
    }
    if (a.contains("f_decay_range")) {
      cfg.f_decay_range[0] = a["f_decay_range"][0];
      cfg.f_decay_range[1] = a["f_decay_range"][1];
    }
    if (a.contains("shift_fraction_range")) {
      cfg.shift_fraction_range[0] = a["shift_fraction_range"][0];
      cfg.shift_fraction_range[1] = a["shift_fraction_range"][1];
    }
  }
  if (j.contains("model")) {
    rc.model = ModelConfig::from_json(j["model"].dump());
  }
}

NoiseCorpus load_noise_corpus(RunConfig& rc) {
  if (rc.noise_dir.empty()) return {};
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(rc.noise_dir)) {
    if (entry.path().extension() == ".wav") {
      paths.push_back(entry.path().string());
    }
  }
  std::sort(paths.begin(), paths.end());  // deterministic indexing
  if (paths.empty()) {
    throw ValidationError("no WAV files in noise dir: " + rc.noise_dir);
  }
  rc.augmentation.noise_corpus = paths;
  NoiseCorpus corpus;
  for (const auto& p : paths) {
    AudioClip clip = read_wav(p);
    corpus.push_back(clip.channels[0]);
  }
  return corpus;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot create " + path);
  os << text;
  if (!os) throw std::runtime_error("I/O failure writing " + path);
}

ConvStackParams load_pretrained_or_die(const RunConfig& rc,
                                       const std::string& weights) {
  const TrainSetup setup = parse_train_setup(rc.configuration);
  if (weights.empty()) {
    if (setup == TrainSetup::kFullScratch) return {};
    throw ValidationError(
        "configuration '" + rc.configuration +
        "' needs pretrained conv weights; pass --conv-weights FILE, or "
        "--random-conv to start from a random stack");
  }
  return load_conv_weights(weights, rc.model.conv);
}

// ---- subcommands ----

int cmd_preprocess(const RunConfig& rc, const std::string& manifest_path,
                   const std::string& out_dir, int target_rate) {
  auto records = load_manifest(manifest_path);
  fs::create_directories(out_dir);
  const fs::path base = fs::path(manifest_path).parent_path();

  std::vector<std::string> failures;
  std::vector<PatientRecord> out_records;
  for (const auto& rec : records) {
    PatientRecord out_rec = rec;
    out_rec.samples.clear();
    for (const auto& entry : rec.samples) {
      const fs::path src = fs::path(entry.file).is_absolute()
                               ? fs::path(entry.file)
                               : base / entry.file;
      try {
        AudioClip clip = read_wav(src.string());
        if (clip.num_channels() == 2) {
          clip = channel_subtract(clip);
        } else {
          std::cerr << "warning: " << entry.file
                    << " is mono; channel subtraction skipped\n";
        }
        clip = peak_normalize(clip);
        if (clip.silence) {
          std::cerr << "warning: " << entry.file << " is silent\n";
        }
        clip = resample(clip, target_rate);
        const std::string name = fs::path(entry.file).filename().string();
        write_wav(clip, (fs::path(out_dir) / name).string());
        SampleEntry out_entry = entry;
        out_entry.file = name;
        out_entry.duration_s = clip.duration_s();
        out_rec.samples.push_back(out_entry);
      } catch (const std::exception& e) {
        failures.push_back(entry.file + ": " + e.what());
      }
    }
    if (!out_rec.samples.empty()) out_records.push_back(std::move(out_rec));
  }

  write_manifest(out_records, (fs::path(out_dir) / "manifest.csv").string(),
                 rc.provenance());
  if (!failures.empty()) {
    std::ostringstream report;
    for (const auto& f : failures) report << f << "\n";
    write_text((fs::path(out_dir) / "failures.txt").string(), report.str());
    std::cerr << failures.size() << " file(s) failed; see failures.txt\n";
    return 1;
  }
  std::cout << "preprocessed " << out_records.size() << " patients into "
            << out_dir << "\n";
  return 0;
}

int cmd_synth(const RunConfig& rc, SynthConfig config,
              const std::string& out_dir) {
  config.seed = rc.seed;
  const std::string manifest = synth_generate(config, out_dir);
  std::cout << "wrote " << manifest << "\n";
  return 0;
}

int cmd_train(RunConfig& rc, const std::string& manifest_path,
              const std::string& out_dir, const std::string& weights,
              bool random_conv, int checkpoint_every) {
  LoadedDataset data = load_dataset(manifest_path);
  NoiseCorpus noise = load_noise_corpus(rc);
  fs::create_directories(out_dir);

  Rng rng(rc.seed);
  ModelParams params = init_model_params(rc.model, rng);
  if (!random_conv) {
    ConvStackParams pretrained = load_pretrained_or_die(rc, weights);
    if (!pretrained.layers.empty()) params.conv = pretrained;
  }

  TrainConfig tc = rc.train_config();
  TrainHooks hooks;
  std::ofstream trace;
  if (rc.trace_augment) {
    trace.open((fs::path(out_dir) / "augment_trace.jsonl").string());
    hooks.augment_trace = &trace;
  }
  if (checkpoint_every > 0) {
    hooks.on_epoch_end = [&](int epoch, const ModelParams& p,
                             const TrainingLog&) {
      if (epoch % checkpoint_every == 0) {
        std::ostringstream name;
        name << "checkpoint_epoch" << std::setw(4) << std::setfill('0')
             << epoch << ".ckpt";
        save_checkpoint(p, rc.model,
                        (fs::path(out_dir) / name.str()).string());
      }
    };
  }

  TrainingLog log = train(data, params, rc.model, tc, noise, hooks);
  save_checkpoint(params, rc.model,
                  (fs::path(out_dir) / "model.ckpt").string());
  log.to_csv((fs::path(out_dir) / "training_log.csv").string(),
             rc.provenance());
  std::cout << "final mean loss " << log.mean_loss.back() << " after "
            << log.mean_loss.size() << " epochs\n";
  return 0;
}

int cmd_evaluate(RunConfig& rc, const std::string& manifest_path,
                 const std::string& out_dir, const std::string& weights,
                 bool random_conv) {
  LoadedDataset data = load_dataset(manifest_path);
  NoiseCorpus noise = load_noise_corpus(rc);
  fs::create_directories(out_dir);

  const ConvStackParams* pretrained_ptr = nullptr;
  ConvStackParams pretrained;
  if (!random_conv) {
    pretrained = load_pretrained_or_die(rc, weights);
    if (!pretrained.layers.empty()) pretrained_ptr = &pretrained;
  }

  TrainConfig tc = rc.train_config();
  CrossValidationResult result =
      cross_validate(data, rc.model, pretrained_ptr, tc, rc.k, noise);

  write_text((fs::path(out_dir) / "metrics.csv").string(),
             metrics_report_to_csv(result.report, rc.configuration,
                                   rc.provenance()));
  write_text((fs::path(out_dir) / "metrics.json").string(),
             metrics_report_to_json(result.report, rc.configuration));
  write_text((fs::path(out_dir) / "votes.csv").string(),
             votes_to_csv(result.votes, rc.provenance()));

  std::cout << "mean voting accuracy " << result.report.mean.voting_accuracy
            << ", ROC AUC " << result.report.mean.voting_roc_auc << "\n";
  return 0;
}

int cmd_infer(const RunConfig& rc, const std::string& checkpoint,
              const std::string& manifest_path, const std::string& out_dir) {
  auto [params, mconfig] = load_checkpoint(checkpoint);
  LoadedDataset data = load_dataset(manifest_path);
  fs::create_directories(out_dir);

  std::map<std::string, std::vector<Prediction>> per_patient;
  for (const auto& s : data.samples) {
    per_patient[data.patients[s.patient_index].patient_id].push_back(
        model_forward(s.wave, params, mconfig, s.sample_rate));
  }
  std::vector<PatientVoteRow> rows;
  for (const auto& p : data.patients) {
    PatientVoteRow row;
    row.patient_id = p.patient_id;
    row.hy_grade = p.hy_grade.value_or(0);
    row.truth = p.group;
    row.result = vote(per_patient.at(p.patient_id));
    row.result.patient_id = p.patient_id;
    rows.push_back(std::move(row));
  }
  write_text((fs::path(out_dir) / "votes.csv").string(),
             votes_to_csv(rows, rc.provenance()));
  for (const auto& r : rows) {
    std::cout << r.patient_id << " certainty " << r.result.certainty
              << " label " << group_name(r.result.label) << "\n";
  }
  return 0;
}

int cmd_viz_voting(const RunConfig& rc, const std::string& votes_csv,
                   const std::string& out_path) {
  const auto lines = read_csv_lines(votes_csv);
  if (lines.size() <= 1) {
    throw ValidationError("votes CSV has no data rows: " + votes_csv);
  }
  std::vector<VotingPoint> points;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = csv_split(lines[i]);
    VotingPoint p;
    p.patient_id = f.at(0);
    p.hy_grade = f.at(1).empty() ? 0 : std::stoi(f.at(1));
    p.certainty = std::stod(f.at(2));
    points.push_back(std::move(p));
  }
  render_voting_scatter(points, out_path, rc.provenance());
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_viz_featuremap(const RunConfig& rc, const std::string& wav_path,
                       const std::string& checkpoint,
                       const std::string& out_path) {
  AudioClip clip = read_wav(wav_path);
  const auto& wave = clip.mono();

  ModelConfig mconfig = rc.model;
  ConvStackParams conv;
  if (!checkpoint.empty()) {
    auto [params, loaded_config] = load_checkpoint(checkpoint);
    conv = std::move(params.conv);
    mconfig = std::move(loaded_config);
  } else {
    Rng rng(rc.seed);
    conv = init_conv_params(mconfig.conv, rng);
  }

  SpectrogramConfig spec_config;
  Eigen::MatrixXd spec = stft_spectrogram(wave, spec_config);
  Eigen::MatrixXd spec_db = (spec.array() + 1e-6).log10().matrix();

  FeatureMap fm = conv_forward(wave, conv, mconfig.conv, clip.sample_rate);

  render_heatmap_pair(spec_db, fm.features, "spectrogram", "feature map",
                      out_path, rc.provenance());
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_augment_preview(RunConfig& rc, const std::string& wav_path,
                        const std::string& out_dir) {
  AudioClip clip = read_wav(wav_path);
  NoiseCorpus noise = load_noise_corpus(rc);
  if (noise.empty() && rc.augmentation.p_background > 0.0) {
    std::cerr << "warning: no noise dir given; background noise disabled\n";
    rc.augmentation.p_background = 0.0;
  }
  fs::create_directories(out_dir);

  Rng rng(rc.seed);
  auto [augmented, record] = apply_pipeline(clip, rc.augmentation, noise, rng);

  render_waveform_pair(clip.mono(), augmented.mono(), clip.sample_rate,
                       (fs::path(out_dir) / "preview.svg").string(),
                       rc.provenance());
  json j;
  j["provenance"] = rc.provenance();
  j["applied"] = json::parse(record.to_json());
  write_text((fs::path(out_dir) / "applied.json").string(), j.dump(2) + "\n");
  std::cout << "wrote " << out_dir << "/preview.svg and applied.json\n";
  return 0;
}

int cmd_survey(const RunConfig& rc, const std::string& answers_path,
               const std::string& truth_path, const std::string& out_dir,
               int advanced_cutoff) {
  const auto answers = load_answers(answers_path);
  const auto truths = load_truths(truth_path);
  fs::create_directories(out_dir);

  std::map<std::string, SubjectTruth> truth_by_id;
  for (const auto& t : truths) truth_by_id[t.subject_id] = t;

  // group answers by subject, keeping first-appearance order
  std::vector<std::string> order;
  std::map<std::string, std::vector<ExpertAnswer>> by_subject;
  for (const auto& a : answers) {
    if (!by_subject.count(a.subject_id)) order.push_back(a.subject_id);
    by_subject[a.subject_id].push_back(a);
  }

  std::ostringstream table;
  table << rc.provenance() << "\n";
  table << "subject_id,set_id,group,hy_grade,modes,average,hit\n";
  std::vector<std::pair<SubjectSummary, SubjectTruth>> scored;
  for (const auto& id : order) {
    const auto it = truth_by_id.find(id);
    if (it == truth_by_id.end()) {
      throw ValidationError("no truth row for subject '" + id + "'");
    }
    SubjectSummary s = summarize(by_subject[id]);
    s.true_group = it->second.group;
    s.true_hy = it->second.hy_grade;
    s.hit = hit(by_subject[id], truth_rating_set(it->second, advanced_cutoff));

    std::string modes;
    for (int m : s.modes) {
      if (!modes.empty()) modes += ";";
      modes += std::to_string(m);
    }
    std::ostringstream avg;
    avg.setf(std::ios::fixed);
    avg.precision(1);
    avg << s.average;
    table << id << ',' << by_subject[id].front().set_id << ','
          << group_name(s.true_group) << ','
          << (s.true_hy ? std::to_string(*s.true_hy) : std::string()) << ','
          << modes << ',' << avg.str() << ',' << (s.hit ? "YES" : "NO")
          << "\n";
    scored.push_back({std::move(s), it->second});
  }
  write_text((fs::path(out_dir) / "summary.csv").string(), table.str());

  std::ostringstream acc;
  acc << rc.provenance() << "\n";
  acc << "tie_rule,binary_mode_accuracy\n";
  acc.precision(17);
  for (TieRule rule : {TieRule::kStrict, TieRule::kCountHalf,
                       TieRule::kFavorPd, TieRule::kDrop}) {
    const double a = binary_mode_accuracy(scored, rule);
    acc << tie_rule_name(rule) << ',' << a << "\n";
    std::cout << "binary mode accuracy (" << tie_rule_name(rule)
              << "): " << a * 100.0 << "%\n";
  }
  write_text((fs::path(out_dir) / "accuracy.csv").string(), acc.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speech-based Parkinson's screening pipeline"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string config_path;
  std::string manifest, out, weights, checkpoint, wav, votes_csv;
  std::string answers_path, truth_path;
  bool random_conv = false;
  int checkpoint_every = 0;
  int target_rate = 16000;
  int advanced_cutoff = 3;
  SynthConfig synth_config;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", rc.seed, "run seed")->envname("VOICEPD_SEED");
    cmd->add_option("--threads", rc.threads, "parallelism budget");
    cmd->add_option("--config", config_path, "JSON config file");
  };
  auto add_train_opts = [&](CLI::App* cmd) {
    cmd->add_option("--epochs", rc.epochs, "training epochs");
    cmd->add_option("--batch", rc.batch_size, "batch size");
    cmd->add_option("--lr", rc.learning_rate, "Adam learning rate");
    cmd->add_option("--configuration", rc.configuration,
                    "frozen | full-pretrained | full-scratch");
    cmd->add_option("--conv-weights", weights, "pretrained conv weight file");
    cmd->add_flag("--random-conv", random_conv,
                  "use a randomly initialized conv stack instead of weights");
    cmd->add_option("--noise-dir", rc.noise_dir,
                    "directory of background-noise WAVs");
    cmd->add_flag("--trace-augment", rc.trace_augment,
                  "log applied augmentations as JSON lines");
  };

  auto* preprocess = app.add_subcommand(
      "preprocess", "channel-subtract, peak-normalize and resample a corpus");
  add_common(preprocess);
  preprocess->add_option("--manifest", manifest, "input manifest")->required();
  preprocess->add_option("--out", out, "output directory")->required();
  preprocess->add_option("--rate", target_rate, "target sample rate");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_common(synth);
  synth->add_option("--out", out, "output directory")->required();
  synth->add_option("--pd", synth_config.n_pd, "PD-like patient count");
  synth->add_option("--hp", synth_config.n_hp, "HP-like patient count");
  synth->add_option("--clips", synth_config.samples_per_patient,
                    "clips per patient");
  synth->add_option("--duration-min", synth_config.duration_range[0],
                    "seconds");
  synth->add_option("--duration-max", synth_config.duration_range[1],
                    "seconds");
  synth->add_option("--rate", synth_config.sample_rate, "sample rate");

  auto* train_cmd =
      app.add_subcommand("train", "train one configuration on a manifest");
  add_common(train_cmd);
  add_train_opts(train_cmd);
  train_cmd->add_option("--manifest", manifest, "training manifest")
      ->required();
  train_cmd->add_option("--out", out, "output directory")->required();
  train_cmd->add_option("--checkpoint-every", checkpoint_every,
                        "write a checkpoint every K epochs");

  auto* evaluate =
      app.add_subcommand("evaluate", "stratified k-fold cross-validation");
  add_common(evaluate);
  add_train_opts(evaluate);
  evaluate->add_option("--manifest", manifest, "dataset manifest")->required();
  evaluate->add_option("--out", out, "output directory")->required();
  evaluate->add_option("--k", rc.k, "number of folds");

  auto* infer =
      app.add_subcommand("infer", "voting inference from a checkpoint");
  add_common(infer);
  infer->add_option("--checkpoint", checkpoint, "model checkpoint")
      ->required();
  infer->add_option("--manifest", manifest, "manifest of new patients")
      ->required();
  infer->add_option("--out", out, "output directory")->required();

  auto* viz = app.add_subcommand("viz", "figures as SVG");
  auto* viz_voting = viz->add_subcommand(
      "voting", "certainty vs Hoehn-Yahr scatter from a votes CSV");
  add_common(viz_voting);
  viz_voting->add_option("--votes", votes_csv, "votes.csv")->required();
  viz_voting->add_option("--out", out, "output SVG path")->required();
  auto* viz_fm = viz->add_subcommand(
      "featuremap", "spectrogram vs conv feature map for one clip");
  add_common(viz_fm);
  viz_fm->add_option("--wav", wav, "input WAV")->required();
  viz_fm->add_option("--checkpoint", checkpoint,
                     "checkpoint for the conv stack (random if omitted)");
  viz_fm->add_option("--out", out, "output SVG path")->required();
  viz->require_subcommand(1);

  auto* survey_cmd =
      app.add_subcommand("survey", "score the expert questionnaire");
  add_common(survey_cmd);
  survey_cmd->add_option("--answers", answers_path, "answers CSV")->required();
  survey_cmd->add_option("--truth", truth_path, "truth CSV")->required();
  survey_cmd->add_option("--out", out, "output directory")->required();
  survey_cmd->add_option("--advanced-cutoff", advanced_cutoff,
                         "lowest HY grade scored as advanced-stage");

  auto* preview = app.add_subcommand(
      "augment-preview", "before/after waveforms for one augmentation draw");
  add_common(preview);
  preview->add_option("--wav", wav, "input WAV")->required();
  preview->add_option("--out", out, "output directory")->required();
  preview->add_option("--noise-dir", rc.noise_dir,
                      "directory of background-noise WAVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (!config_path.empty()) {
      RunConfig file_rc;
      apply_config_file(file_rc, config_path);
      CLI::App* sub = app.get_subcommands().front();
      while (!sub->get_subcommands().empty()) {
        sub = sub->get_subcommands().front();
      }
      auto passed = [&](const std::string& name) {
        const CLI::Option* opt = sub->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
      };
      if (!passed("--seed")) rc.seed = file_rc.seed;
      if (!passed("--threads")) rc.threads = file_rc.threads;
      if (!passed("--epochs")) rc.epochs = file_rc.epochs;
      if (!passed("--batch")) rc.batch_size = file_rc.batch_size;
      if (!passed("--lr")) rc.learning_rate = file_rc.learning_rate;
      if (!passed("--configuration")) rc.configuration = file_rc.configuration;
      if (!passed("--k")) rc.k = file_rc.k;
      if (!passed("--noise-dir")) rc.noise_dir = file_rc.noise_dir;
      if (!passed("--trace-augment")) rc.trace_augment = file_rc.trace_augment;
      rc.augmentation = file_rc.augmentation;
      rc.model = file_rc.model;
    }

    if (preprocess->parsed()) {
      return cmd_preprocess(rc, manifest, out, target_rate);
    }
    if (synth->parsed()) return cmd_synth(rc, synth_config, out);
    if (train_cmd->parsed()) {
      return cmd_train(rc, manifest, out, weights, random_conv,
                       checkpoint_every);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(rc, manifest, out, weights, random_conv);
    }
    if (infer->parsed()) return cmd_infer(rc, checkpoint, manifest, out);
    if (viz->parsed()) {
      if (viz_voting->parsed()) return cmd_viz_voting(rc, votes_csv, out);
      if (viz_fm->parsed()) {
        return cmd_viz_featuremap(rc, wav, checkpoint, out);
      }
    }
    if (survey_cmd->parsed()) {
      return cmd_survey(rc, answers_path, truth_path, out, advanced_cutoff);
    }
    if (preview->parsed()) return cmd_augment_preview(rc, wav, out);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}
