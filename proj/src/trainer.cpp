// Copyright (c) 2026 UPN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "upn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "upn/rng.hpp"

namespace upn {

namespace {

// FNV-1a; stable across platforms, unlike std::hash.
uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct Adam {
  NetParams m, v;
  int step = 0;

  explicit Adam(const NetParams& like)
      : m(zeros_like(like)), v(zeros_like(like)) {}

  void update(NetParams& params, const NetParams& grads,
              const TrainConfig& cfg) {
    ++step;
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double bc1 = 1.0 - std::pow(b1, step);
    const double bc2 = 1.0 - std::pow(b2, step);
    auto pv = params.tensor_views();
    auto gv = const_cast<NetParams&>(grads).tensor_views();
    auto mv = m.tensor_views();
    auto vv = v.tensor_views();
    for (size_t t = 0; t < pv.size(); ++t) {
      auto& p = *pv[t];
      const auto& g = *gv[t];
      auto& mt = *mv[t];
      auto& vt = *vv[t];
      for (size_t i = 0; i < p.size(); ++i) {
        mt[i] = b1 * mt[i] + (1.0 - b1) * g[i];
        vt[i] = b2 * vt[i] + (1.0 - b2) * g[i] * g[i];
        const double mhat = mt[i] / bc1;
        const double vhat = vt[i] / bc2;
        p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + 1e-8);
      }
    }
  }
};

void accumulate(NetParams& acc, const NetParams& grads, double scale) {
  auto av = acc.tensor_views();
  auto gv = const_cast<NetParams&>(grads).tensor_views();
  for (size_t t = 0; t < av.size(); ++t) {
    auto& a = *av[t];
    const auto& g = *gv[t];
    for (size_t i = 0; i < a.size(); ++i) a[i] += scale * g[i];
  }
}

double global_norm(const NetParams& grads) {
  double n2 = 0.0;
  for (const auto* t : grads.tensor_views())
    for (double v : *t) n2 += v * v;
  return std::sqrt(n2);
}

void scale_params(NetParams& grads, double s) {
  for (auto* t : grads.tensor_views())
    for (double& v : *t) v *= s;
}

// Aligned forward/backward for one example: the causal network runs over
// the sequence plus two flush steps; targets pair with the shifted outputs.
struct ExampleResult {
  WeightedLoss loss;
  NetParams grads;
  double q1_fraction = 0.0;
};

ExampleResult example_step(const NetParams& params, const TrainingExample& ex,
                           const LossConfig& loss_cfg, bool want_grads) {
  const size_t T = ex.features.size();
  FeatureSeq feats = ex.features;
  feats.resize(T + 2);  // zero flush frames
  std::vector<ConditionVector> conds = ex.cond;
  conds.push_back(conds.back());
  conds.push_back(conds.back());

  ExampleResult res{{}, zeros_like(params), 0.0};
  if (want_grads) {
    auto traced = forward_traced(params, feats, conds);
    const std::vector<EnhancerOutput> pred(traced.outputs.begin() + 2,
                                           traced.outputs.end());
    auto seq = sequence_loss(pred, ex.targets, loss_cfg);
    std::vector<OutputGrads> grads_out(T + 2);
    for (size_t t = 0; t < T; ++t) grads_out[t + 2] = seq.grads[t];
    res.grads = backward(params, traced, grads_out);
    res.loss = seq.loss;
  } else {
    auto out = forward_aligned(params, ex.features, ex.cond);
    res.loss = sequence_loss(out, ex.targets, loss_cfg).loss;
  }
  size_t q1 = 0;
  for (const auto& c : ex.cond) q1 += c.values.back() == 1.0 ? 1 : 0;
  res.q1_fraction = T > 0 ? static_cast<double>(q1) / T : 0.0;
  return res;
}

TrainingExample assemble_from_data(const SegmentData& data,
                                   const SpeakerEmbedding& embedding,
                                   const FlagSchedule& schedule) {
  if (schedule.n_frames() != data.n_frames())
    throw std::invalid_argument("assemble: schedule/segment length mismatch");
  TrainingExample ex;
  ex.manifest_id = data.id;
  ex.features = data.features;
  ex.targets = select_targets(data.personalized_targets,
                              data.non_personalized_targets, schedule);
  ex.cond.resize(schedule.n_frames());
  const ConditionVector on = make_condition(embedding, 1);
  const ConditionVector off = make_condition(embedding, 0);
  for (int t = 0; t < schedule.n_frames(); ++t)
    ex.cond[t] = schedule.q[t] ? on : off;
  return ex;
}

constexpr uint64_t kValidationSalt = 0x76616c99;

// Deterministic per-(salt, segment) schedule + embedding pick.
TrainingExample draw_example(const SegmentData& data, const TrainConfig& cfg,
                             uint64_t salt) {
  const uint64_t key = Rng::mix(Rng::mix(cfg.seed, salt), fnv1a(data.id));
  Rng rng(key);
  const auto schedule =
      sample_schedule(data.n_frames(), cfg.min_run_frames, rng.next_u64());
  size_t emb_index = 0;
  if (cfg.embedding_augment && data.embeddings.size() > 1)
    emb_index = static_cast<size_t>(
        rng.uniform_int(1, static_cast<int64_t>(data.embeddings.size()) - 1));
  return assemble_from_data(data, data.embeddings[emb_index], schedule);
}

}  // namespace

SegmentData prepare_segment(const std::string& id, const MixtureTriple& triple,
                            std::vector<SpeakerEmbedding> embeddings,
                            const AnalysisConfig& config, int seq_frames) {
  if (embeddings.empty())
    throw std::invalid_argument("prepare_segment: need an embedding");
  SegmentData data;
  data.id = id;
  data.features = to_feature_seq(extract_features(triple.mixture, config));
  data.personalized_targets =
      compute_targets(triple.personalized_ref, triple.mixture, config);
  data.non_personalized_targets =
      compute_targets(triple.non_personalized_ref, triple.mixture, config);
  data.embeddings = std::move(embeddings);
  const int n = std::min<int>(seq_frames, data.n_frames());
  data.features.resize(n);
  data.personalized_targets.resize(n);
  data.non_personalized_targets.resize(n);
  return data;
}

TrainingExample assemble_example(const MixtureTriple& triple,
                                 const SpeakerEmbedding& embedding,
                                 const FlagSchedule& schedule,
                                 const AnalysisConfig& config) {
  SegmentData data = prepare_segment("inline", triple, {embedding}, config,
                                     schedule.n_frames());
  if (data.n_frames() != schedule.n_frames())
    throw std::invalid_argument(
        "assemble_example: schedule length must match the frame count");
  return assemble_from_data(data, embedding, schedule);
}

std::string train_log_json(const TrainLogRecord& rec) {
  nlohmann::json j{{"epoch", rec.epoch},         {"split", rec.split},
                   {"L_G", rec.loss_gain},       {"L_R", rec.loss_strength},
                   {"L_V", rec.loss_vad},        {"total", rec.loss_total},
                   {"wall_time_s", rec.wall_time_s},
                   {"q1_frac", rec.q1_fraction}};
  return j.dump();
}

WeightedLoss evaluate_loss(const NetParams& params,
                           const std::vector<SegmentData>& dataset,
                           const TrainConfig& config, uint64_t schedule_salt) {
  LossConfig loss_cfg{config.mu, config.gamma};
  WeightedLoss total;
  for (const auto& data : dataset) {
    const auto ex = draw_example(data, config, schedule_salt);
    const auto res = example_step(params, ex, loss_cfg, false);
    total.gain += res.loss.gain;
    total.strength += res.loss.strength;
    total.vad += res.loss.vad;
  }
  const double inv = dataset.empty() ? 0.0 : 1.0 / dataset.size();
  total.gain *= inv;
  total.strength *= inv;
  total.vad *= inv;
  total.total = total.gain + total.strength + total.vad;
  return total;
}

TrainResult train(const std::vector<SegmentData>& dataset,
                  const TrainConfig& config, const NetConfig& net_config) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  for (const auto& d : dataset) {
    if (d.n_frames() < config.min_run_frames)
      throw std::invalid_argument("train: segment " + d.id +
                                  " shorter than one schedule run");
    if (d.embeddings[0].dim() + 1 != net_config.cond_dim)
      throw std::invalid_argument(
          "train: embedding dimension does not match net cond_dim");
  }

  // Validation split by stable id hash.
  std::vector<const SegmentData*> train_set, val_set;
  const uint64_t val_buckets =
      std::max<uint64_t>(1, static_cast<uint64_t>(
                                std::llround(1.0 / std::max(
                                                        config.validation_fraction,
                                                        1e-6))));
  for (const auto& d : dataset) {
    if (fnv1a(d.id) % val_buckets == 0)
      val_set.push_back(&d);
    else
      train_set.push_back(&d);
  }
  if (train_set.empty()) train_set.push_back(&dataset[0]);
  if (val_set.empty()) val_set.push_back(&dataset.back());

  NetParams params = init_params(net_config, config.seed);
  Adam adam(params);
  LossConfig loss_cfg{config.mu, config.gamma};

  const std::string ckpt_dir =
      config.checkpoint_dir.empty() ? "." : config.checkpoint_dir;
  std::filesystem::create_directories(ckpt_dir);
  const std::string best_path = ckpt_dir + "/best.ckpt";

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  Rng shuffle_rng = Rng(config.seed).fork(0x73687566);
  const auto t_start = std::chrono::steady_clock::now();

  std::vector<size_t> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(0, i - 1)]);

    WeightedLoss epoch_loss;
    double q1_sum = 0.0;
    size_t examples = 0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(order.size(),
                                  start + static_cast<size_t>(config.batch_size));
      NetParams batch_grads = zeros_like(params);
      double batch_total = 0.0;
      std::string batch_ids;
      const double inv = 1.0 / static_cast<double>(end - start);
      for (size_t i = start; i < end; ++i) {
        const SegmentData& data = *train_set[order[i]];
        const auto ex = draw_example(data, config,
                                     static_cast<uint64_t>(epoch));
        const auto res = example_step(params, ex, loss_cfg, true);
        accumulate(batch_grads, res.grads, inv);
        batch_total += inv * res.loss.total;
        epoch_loss.gain += res.loss.gain;
        epoch_loss.strength += res.loss.strength;
        epoch_loss.vad += res.loss.vad;
        q1_sum += res.q1_fraction;
        ++examples;
        batch_ids += (batch_ids.empty() ? "" : ",") + data.id;
      }
      if (!std::isfinite(batch_total))
        throw std::runtime_error("train: non-finite loss in batch [" +
                                 batch_ids + "]");
      if (config.grad_clip_norm > 0.0) {
        const double norm = global_norm(batch_grads);
        if (norm > config.grad_clip_norm)
          scale_params(batch_grads, config.grad_clip_norm / norm);
      }
      if (config.learning_rate != 0.0)
        adam.update(params, batch_grads, config);
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    TrainLogRecord train_rec;
    train_rec.epoch = epoch;
    train_rec.split = "train";
    const double inv_n = examples > 0 ? 1.0 / examples : 0.0;
    train_rec.loss_gain = epoch_loss.gain * inv_n;
    train_rec.loss_strength = epoch_loss.strength * inv_n;
    train_rec.loss_vad = epoch_loss.vad * inv_n;
    train_rec.loss_total =
        train_rec.loss_gain + train_rec.loss_strength + train_rec.loss_vad;
    train_rec.wall_time_s = wall;
    train_rec.q1_fraction = q1_sum * inv_n;
    result.log.push_back(train_rec);

    // Validation under an epoch-independent schedule salt, on quantized
    // parameters, so the stored best checkpoint reproduces this loss
    // exactly when reloaded.
    NetParams snap = params;
    for (auto* t : snap.tensor_views()) quantize_to_f32(*t);
    WeightedLoss val_loss;
    {
      LossConfig vcfg{config.mu, config.gamma};
      for (const auto* d : val_set) {
        const auto ex = draw_example(*d, config, kValidationSalt);
        const auto res = example_step(snap, ex, vcfg, false);
        val_loss.gain += res.loss.gain;
        val_loss.strength += res.loss.strength;
        val_loss.vad += res.loss.vad;
      }
      const double inv = 1.0 / val_set.size();
      val_loss.gain *= inv;
      val_loss.strength *= inv;
      val_loss.vad *= inv;
      val_loss.total = val_loss.gain + val_loss.strength + val_loss.vad;
    }
    TrainLogRecord val_rec;
    val_rec.epoch = epoch;
    val_rec.split = "val";
    val_rec.loss_gain = val_loss.gain;
    val_rec.loss_strength = val_loss.strength;
    val_rec.loss_vad = val_loss.vad;
    val_rec.loss_total = val_loss.total;
    val_rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    result.log.push_back(val_rec);

    if (val_loss.total < best_val) {
      best_val = val_loss.total;
      save_params(snap, best_path);
    }
  }

  result.params = load_params(best_path);
  result.checkpoint_path = best_path;
  result.best_val_loss = best_val;
  return result;
}

}  // namespace upn
