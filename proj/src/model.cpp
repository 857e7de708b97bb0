// src/model.cpp

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

#include "voicepd/model.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "voicepd/error.hpp"
#include "voicepd/util.hpp"

namespace voicepd {

using json = nlohmann::json;

Group parse_group(const std::string& s) {
  if (s == "PD") return Group::kPD;
  if (s == "HP") return Group::kHP;
  throw ValidationError("unknown group '" + s + "' (expected PD or HP)");
}

void ModelConfig::validate() const {
  conv.validate();
  if (gru_hidden < 1) throw ValidationError("gru_hidden must be >= 1");
  if (head_hidden < 1) throw ValidationError("head_hidden must be >= 1");
}

std::string ModelConfig::to_json() const {
  json j;
  json layers = json::array();
  for (const auto& l : conv.layers) {
    layers.push_back({l.in_channels, l.out_channels, l.kernel, l.stride});
  }
  j["conv"]["layers"] = layers;
  j["conv"]["activation"] =
      conv.activation == Activation::kGelu ? "gelu" : "relu";
  j["conv"]["normalization"] =
      conv.normalization == NormScheme::kGroupNormFirst ? "group_norm_first"
                                                        : "none";
  j["gru_hidden"] = gru_hidden;
  j["head_hidden"] = head_hidden;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad model config JSON: ") + e.what());
  }
  ModelConfig c;
  c.conv.layers.clear();
  for (const auto& l : j.at("conv").at("layers")) {
    c.conv.layers.push_back({l.at(0).get<int>(), l.at(1).get<int>(),
                             l.at(2).get<int>(), l.at(3).get<int>()});
  }
  const std::string act = j.at("conv").at("activation").get<std::string>();
  c.conv.activation = act == "gelu" ? Activation::kGelu : Activation::kRelu;
  const std::string norm =
      j.at("conv").at("normalization").get<std::string>();
  c.conv.normalization = norm == "group_norm_first"
                             ? NormScheme::kGroupNormFirst
                             : NormScheme::kNone;
  c.gru_hidden = j.at("gru_hidden").get<int>();
  c.head_hidden = j.at("head_hidden").get<int>();
  c.validate();
  return c;
}

namespace {

void fill_uniform(Eigen::MatrixXd& m, double bound, Rng& rng) {
  for (long c = 0; c < m.cols(); ++c) {
    for (long r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-bound, bound);
  }
}

void fill_uniform(Eigen::VectorXd& v, double bound, Rng& rng) {
  for (long i = 0; i < v.size(); ++i) v(i) = rng.uniform(-bound, bound);
}

GruDirectionParams init_gru_direction(int input_dim, int hidden, Rng& rng) {
  GruDirectionParams p;
  const double in_bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double rec_bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  p.w_input.resize(3 * hidden, input_dim);
  p.w_recur.resize(3 * hidden, hidden);
  p.bias.resize(3 * hidden);
  fill_uniform(p.w_input, in_bound, rng);
  fill_uniform(p.w_recur, rec_bound, rng);
  fill_uniform(p.bias, rec_bound, rng);
  return p;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

GruParams init_gru_params(int input_dim, int hidden, Rng& rng) {
  GruParams p;
  p.forward = init_gru_direction(input_dim, hidden, rng);
  p.backward = init_gru_direction(input_dim, hidden, rng);
  return p;
}

HeadParams init_head_params(int input_dim, int hidden, Rng& rng) {
  HeadParams p;
  const double b1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double b2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  p.w1.resize(hidden, input_dim);
  p.b1.resize(hidden);
  p.w2.resize(hidden, hidden);
  p.b2.resize(hidden);
  p.w3.resize(2, hidden);
  p.b3.resize(2);
  fill_uniform(p.w1, b1, rng);
  fill_uniform(p.b1, b1, rng);
  fill_uniform(p.w2, b2, rng);
  fill_uniform(p.b2, b2, rng);
  fill_uniform(p.w3, b2, rng);
  fill_uniform(p.b3, b2, rng);
  return p;
}

ModelParams init_model_params(const ModelConfig& config, Rng& rng) {
  config.validate();
  ModelParams p;
  p.conv = init_conv_params(config.conv, rng);
  p.gru = init_gru_params(config.feature_dim(), config.gru_hidden, rng);
  p.head = init_head_params(2 * config.gru_hidden, config.head_hidden, rng);
  return p;
}

Prediction prediction_from_logits(const Eigen::Vector2d& logits) {
  Prediction pred;
  pred.logits = logits;
  const double m = logits.maxCoeff();
  const double e_hp = std::exp(logits(0) - m);
  const double e_pd = std::exp(logits(1) - m);
  pred.probability_pd = e_pd / (e_hp + e_pd);
  // equal logits predict PD: a false negative costs more than a false alarm
  pred.label = logits(1) >= logits(0) ? Group::kPD : Group::kHP;
  return pred;
}

namespace {

// One direction of the recurrence over rows of x taken in processing order
// (row_of(s) maps step s to a time index).
template <typename RowOf>
Eigen::VectorXd gru_run_direction(const Eigen::MatrixXd& x,
                                  const GruDirectionParams& p, RowOf row_of,
                                  GruDirectionCache* cache) {
  const long T = x.rows();
  const int H = static_cast<int>(p.w_recur.cols());

  Eigen::MatrixXd gates_in = x * p.w_input.transpose();  // T x 3H (time order)

  if (cache) {
    cache->h_prev.resize(T, H);
    cache->update_z.resize(T, H);
    cache->reset_r.resize(T, H);
    cache->cand.resize(T, H);
    cache->reset_h.resize(T, H);
  }

  Eigen::VectorXd h = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd a(3 * H), rh(H), uzr(2 * H), uc(H);
  for (long s = 0; s < T; ++s) {
    const long t = row_of(s);
    a = gates_in.row(t).transpose() + p.bias;
    uzr.noalias() = p.w_recur.topRows(2 * H) * h;
    a.head(2 * H) += uzr;

    if (cache) cache->h_prev.row(s) = h;

    for (int i = 0; i < H; ++i) a(i) = sigmoid(a(i));            // z
    for (int i = H; i < 2 * H; ++i) a(i) = sigmoid(a(i));        // r
    rh = a.segment(H, H).cwiseProduct(h);
    uc.noalias() = p.w_recur.bottomRows(H) * rh;
    a.tail(H) += uc;
    for (int i = 2 * H; i < 3 * H; ++i) a(i) = std::tanh(a(i));  // candidate

    if (cache) {
      cache->update_z.row(s) = a.head(H);
      cache->reset_r.row(s) = a.segment(H, H);
      cache->cand.row(s) = a.tail(H);
      cache->reset_h.row(s) = rh;
    }

    h = (Eigen::VectorXd::Ones(H) - a.head(H)).cwiseProduct(h) +
        a.head(H).cwiseProduct(a.tail(H));
  }
  return h;
}

// BPTT for one direction; returns dX contribution in processing order.
template <typename RowOf>
Eigen::MatrixXd gru_backprop_direction(const Eigen::VectorXd& dh_final,
                                       const Eigen::MatrixXd& x,
                                       const GruDirectionParams& p,
                                       const GruDirectionCache& cache,
                                       RowOf row_of, GruDirectionParams* grad) {
  const long T = x.rows();
  const int H = static_cast<int>(p.w_recur.cols());

  Eigen::MatrixXd da(T, 3 * H);  // gate pre-activation grads, processing order
  Eigen::VectorXd dh = dh_final;
  for (long s = T - 1; s >= 0; --s) {
    const auto z = cache.update_z.row(s).transpose();
    const auto r = cache.reset_r.row(s).transpose();
    const auto c = cache.cand.row(s).transpose();
    const auto hp = cache.h_prev.row(s).transpose();

    Eigen::VectorXd dz = dh.cwiseProduct(c - hp);
    Eigen::VectorXd dc = dh.cwiseProduct(z);
    Eigen::VectorXd dhp =
        dh.cwiseProduct(Eigen::VectorXd::Ones(H) - z);

    Eigen::VectorXd da_c =
        dc.cwiseProduct(Eigen::VectorXd::Ones(H) - c.cwiseProduct(c));
    Eigen::VectorXd da_z = dz.cwiseProduct(z).cwiseProduct(
        Eigen::VectorXd::Ones(H) - z);

    Eigen::VectorXd ucT_dac = p.w_recur.bottomRows(H).transpose() * da_c;
    Eigen::VectorXd dr = ucT_dac.cwiseProduct(hp);
    dhp += ucT_dac.cwiseProduct(r);
    Eigen::VectorXd da_r =
        dr.cwiseProduct(r).cwiseProduct(Eigen::VectorXd::Ones(H) - r);

    da.row(s).head(H) = da_z;
    da.row(s).segment(H, H) = da_r;
    da.row(s).tail(H) = da_c;

    Eigen::VectorXd dzr(2 * H);
    dzr << da_z, da_r;
    dhp.noalias() += p.w_recur.topRows(2 * H).transpose() * dzr;
    dh = dhp;
  }

  // Parameter gradients batched over time.
  Eigen::MatrixXd x_proc(T, x.cols());
  for (long s = 0; s < T; ++s) x_proc.row(s) = x.row(row_of(s));
  grad->w_input.noalias() = da.transpose() * x_proc;
  grad->w_recur.resize(3 * H, H);
  grad->w_recur.topRows(2 * H).noalias() =
      da.leftCols(2 * H).transpose() * cache.h_prev;
  grad->w_recur.bottomRows(H).noalias() =
      da.rightCols(H).transpose() * cache.reset_h;
  grad->bias = da.colwise().sum().transpose();

  Eigen::MatrixXd dx_proc = da * p.w_input;  // T x D, processing order
  return dx_proc;
}

}  // namespace

Eigen::VectorXd gru_forward(const FeatureMap& features, const GruParams& params,
                            GruCache* cache) {
  const Eigen::MatrixXd& x = features.features;
  if (x.rows() < 1) throw ValidationError("gru_forward on zero frames");
  if (x.cols() != params.forward.w_input.cols()) {
    throw ValidationError("feature dimension does not match GRU input dim");
  }
  const long T = x.rows();

  if (cache) cache->input = x;

  Eigen::VectorXd h_fwd = gru_run_direction(
      x, params.forward, [](long s) { return s; }, cache ? &cache->fwd : nullptr);
  Eigen::VectorXd h_bwd = gru_run_direction(
      x, params.backward, [T](long s) { return T - 1 - s; },
      cache ? &cache->bwd : nullptr);

  Eigen::VectorXd out(h_fwd.size() + h_bwd.size());
  out << h_fwd, h_bwd;
  return out;
}

std::pair<Eigen::MatrixXd, GruParams> gru_backward(
    const Eigen::VectorXd& grad_hidden, const GruCache& cache,
    const GruParams& params) {
  if (cache.input.size() == 0) {
    throw ValidationError("gru_backward without a forward cache");
  }
  const long T = cache.input.rows();
  const int H = params.hidden();
  if (grad_hidden.size() != 2 * H) {
    throw ValidationError("grad_hidden size does not match 2 * hidden");
  }

  GruParams grads;
  Eigen::MatrixXd dx_fwd = gru_backprop_direction(
      grad_hidden.head(H).eval(), cache.input, params.forward, cache.fwd,
      [](long s) { return s; }, &grads.forward);
  Eigen::MatrixXd dx_bwd = gru_backprop_direction(
      grad_hidden.tail(H).eval(), cache.input, params.backward, cache.bwd,
      [T](long s) { return T - 1 - s; }, &grads.backward);

  Eigen::MatrixXd dx = dx_fwd;
  for (long s = 0; s < T; ++s) dx.row(T - 1 - s) += dx_bwd.row(s);
  return {std::move(dx), std::move(grads)};
}

Prediction head_forward(const Eigen::VectorXd& hidden, const HeadParams& params,
                        HeadCache* cache) {
  if (hidden.size() != params.w1.cols()) {
    throw ValidationError("head input size mismatch");
  }
  Eigen::VectorXd pre1 = params.w1 * hidden + params.b1;
  Eigen::VectorXd act1 = pre1.cwiseMax(0.0);
  Eigen::VectorXd pre2 = params.w2 * act1 + params.b2;
  Eigen::VectorXd act2 = pre2.cwiseMax(0.0);
  Eigen::Vector2d logits = params.w3 * act2 + params.b3;
  if (cache) {
    cache->input = hidden;
    cache->pre1 = std::move(pre1);
    cache->act1 = std::move(act1);
    cache->pre2 = std::move(pre2);
    cache->act2 = std::move(act2);
  }
  return prediction_from_logits(logits);
}

std::pair<Eigen::VectorXd, HeadParams> head_backward(
    const Eigen::Vector2d& grad_logits, const HeadCache& cache,
    const HeadParams& params) {
  if (cache.input.size() == 0) {
    throw ValidationError("head_backward without a forward cache");
  }
  HeadParams g;
  g.w3.noalias() = grad_logits * cache.act2.transpose();
  g.b3 = grad_logits;

  Eigen::VectorXd dact2 = params.w3.transpose() * grad_logits;
  Eigen::VectorXd dpre2 =
      (cache.pre2.array() > 0.0).select(dact2, 0.0);
  g.w2.noalias() = dpre2 * cache.act1.transpose();
  g.b2 = dpre2;

  Eigen::VectorXd dact1 = params.w2.transpose() * dpre2;
  Eigen::VectorXd dpre1 =
      (cache.pre1.array() > 0.0).select(dact1, 0.0);
  g.w1.noalias() = dpre1 * cache.input.transpose();
  g.b1 = dpre1;

  Eigen::VectorXd dinput = params.w1.transpose() * dpre1;
  return {std::move(dinput), std::move(g)};
}

Prediction model_forward(std::span<const double> waveform,
                         const ModelParams& params, const ModelConfig& config,
                         int sample_rate, ModelCache* cache) {
  FeatureMap fm = conv_forward(waveform, params.conv, config.conv, sample_rate,
                               cache ? &cache->conv : nullptr);
  Eigen::VectorXd hidden =
      gru_forward(fm, params.gru, cache ? &cache->gru : nullptr);
  Prediction pred =
      head_forward(hidden, params.head, cache ? &cache->head : nullptr);
  if (cache) cache->features = std::move(fm);
  return pred;
}

GradientSet model_backward(const Eigen::Vector2d& grad_logits,
                           const ModelCache& cache, const ModelParams& params,
                           const ModelConfig& config) {
  GradientSet g;
  auto [dhidden, head_g] = head_backward(grad_logits, cache.head, params.head);
  g.head = std::move(head_g);
  auto [dfeatures, gru_g] = gru_backward(dhidden, cache.gru, params.gru);
  g.gru = std::move(gru_g);
  if (!params.conv.frozen) {
    auto [dwave, conv_g] =
        conv_backward(dfeatures, cache.conv, params.conv, config.conv);
    (void)dwave;
    g.conv = std::move(conv_g);
  }
  return g;
}

// ---- checkpoint I/O ----

namespace {

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  for (long r = 0; r < m.rows(); ++r) {
    for (long c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      write_f64s(os, &v, 1);
    }
  }
}

void read_matrix(std::istream& is, Eigen::MatrixXd& m, const char* what) {
  for (long r = 0; r < m.rows(); ++r) {
    for (long c = 0; c < m.cols(); ++c) {
      read_f64s(is, &m(r, c), 1, what);
    }
  }
}

void write_tag(std::ostream& os, const char* tag) { os.write(tag, 4); }

void expect_tag(std::istream& is, const char* tag) {
  char buf[4];
  read_bytes(is, buf, 4, "section tag");
  if (std::string_view(buf, 4) != tag) {
    throw ValidationError(std::string("expected section '") + tag +
                          "' in checkpoint");
  }
}

void write_gru_direction(std::ostream& os, const GruDirectionParams& p) {
  write_matrix(os, p.w_input);
  write_matrix(os, p.w_recur);
  write_f64s(os, p.bias.data(), static_cast<size_t>(p.bias.size()));
}

void read_gru_direction(std::istream& is, GruDirectionParams& p, int hidden,
                        int input_dim) {
  p.w_input.resize(3 * hidden, input_dim);
  p.w_recur.resize(3 * hidden, hidden);
  p.bias.resize(3 * hidden);
  read_matrix(is, p.w_input, "gru w_input");
  read_matrix(is, p.w_recur, "gru w_recur");
  read_f64s(is, p.bias.data(), static_cast<size_t>(p.bias.size()), "gru bias");
}

}  // namespace

void save_checkpoint(const ModelParams& params, const ModelConfig& config,
                     const std::string& path) {
  config.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot create checkpoint: " + path);
  os.write("VPCK", 4);
  write_u32(os, 1);
  const std::string cfg = config.to_json();
  write_u32(os, static_cast<uint32_t>(cfg.size()));
  os.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));

  write_tag(os, "CONV");
  write_conv_section(os, params.conv, config.conv);
  write_u8(os, params.conv.frozen ? 1 : 0);

  write_tag(os, "GRU ");
  write_u32(os, static_cast<uint32_t>(config.feature_dim()));
  write_u32(os, static_cast<uint32_t>(config.gru_hidden));
  write_gru_direction(os, params.gru.forward);
  write_gru_direction(os, params.gru.backward);

  write_tag(os, "HEAD");
  write_u32(os, static_cast<uint32_t>(2 * config.gru_hidden));
  write_u32(os, static_cast<uint32_t>(config.head_hidden));
  write_u32(os, 2);
  write_matrix(os, params.head.w1);
  write_f64s(os, params.head.b1.data(), params.head.b1.size());
  write_matrix(os, params.head.w2);
  write_f64s(os, params.head.b2.data(), params.head.b2.size());
  write_matrix(os, params.head.w3);
  write_f64s(os, params.head.b3.data(), params.head.b3.size());
  if (!os) throw std::runtime_error("I/O failure writing " + path);
}

std::pair<ModelParams, ModelConfig> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open checkpoint: " + path);
  char magic[4];
  read_bytes(is, magic, 4, "magic");
  if (std::string_view(magic, 4) != "VPCK") {
    throw ValidationError("bad magic in checkpoint: " + path);
  }
  const uint32_t version = read_u32(is, "version");
  if (version != 1) {
    throw ValidationError("unsupported checkpoint version " +
                          std::to_string(version));
  }
  const uint32_t cfg_len = read_u32(is, "config length");
  std::string cfg(cfg_len, '\0');
  read_bytes(is, cfg.data(), cfg_len, "config json");
  ModelConfig config = ModelConfig::from_json(cfg);

  ModelParams params;
  expect_tag(is, "CONV");
  params.conv = read_conv_section(is, config.conv);
  params.conv.frozen = read_u8(is, "frozen flag") != 0;

  expect_tag(is, "GRU ");
  const uint32_t input_dim = read_u32(is, "gru input dim");
  const uint32_t hidden = read_u32(is, "gru hidden");
  if (input_dim != static_cast<uint32_t>(config.feature_dim()) ||
      hidden != static_cast<uint32_t>(config.gru_hidden)) {
    throw ValidationError("GRU shape mismatch in checkpoint");
  }
  read_gru_direction(is, params.gru.forward, config.gru_hidden,
                     config.feature_dim());
  read_gru_direction(is, params.gru.backward, config.gru_hidden,
                     config.feature_dim());

  expect_tag(is, "HEAD");
  const uint32_t head_in = read_u32(is, "head input dim");
  const uint32_t head_hidden = read_u32(is, "head hidden");
  const uint32_t classes = read_u32(is, "head classes");
  if (head_in != static_cast<uint32_t>(2 * config.gru_hidden) ||
      head_hidden != static_cast<uint32_t>(config.head_hidden) ||
      classes != 2) {
    throw ValidationError("head shape mismatch in checkpoint");
  }
  params.head.w1.resize(head_hidden, head_in);
  params.head.b1.resize(head_hidden);
  params.head.w2.resize(head_hidden, head_hidden);
  params.head.b2.resize(head_hidden);
  params.head.w3.resize(2, head_hidden);
  params.head.b3.resize(2);
  read_matrix(is, params.head.w1, "head w1");
  read_f64s(is, params.head.b1.data(), head_hidden, "head b1");
  read_matrix(is, params.head.w2, "head w2");
  read_f64s(is, params.head.b2.data(), head_hidden, "head b2");
  read_matrix(is, params.head.w3, "head w3");
  read_f64s(is, params.head.b3.data(), 2, "head b3");
  return {std::move(params), std::move(config)};
}

}  // namespace voicepd
