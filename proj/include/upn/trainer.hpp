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

#ifndef UPN_TRAINER_HPP
#define UPN_TRAINER_HPP

#include <string>
#include <vector>

#include "upn/conditioning.hpp"
#include "upn/datagen.hpp"
#include "upn/net.hpp"
#include "upn/objectives.hpp"
#include "upn/pipeline.hpp"

namespace upn {

struct TrainConfig {
  int batch_size = 8;
  int seq_frames = 500;  // 5 s at the 10 ms hop
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double grad_clip_norm = 5.0;
  int epochs = 10;
  double mu = 0.9;
  double gamma = 0.5;
  uint64_t seed = 1;
  std::string checkpoint_dir;
  double validation_fraction = 0.1;
  bool embedding_augment = true;
  int embedding_variants = 10;
  int min_run_frames = kMinRunFrames;
};

/// Schedule-independent material for one segment: features of the mixture
/// plus both target streams and the enrollment embedding variants. The
/// flag schedule is drawn fresh each time the segment is used.
struct SegmentData {
  std::string id;
  FeatureSeq features;
  std::vector<FrameTargets> personalized_targets;
  std::vector<FrameTargets> non_personalized_targets;
  std::vector<SpeakerEmbedding> embeddings;  // [0] = clean enrollment

  int n_frames() const { return static_cast<int>(features.size()); }
};

/// Fig.-2-style example: features, per-frame conditions, schedule-selected
/// targets.
struct TrainingExample {
  FeatureSeq features;
  std::vector<ConditionVector> cond;
  std::vector<FrameTargets> targets;
  std::string manifest_id;
};

/// Precomputes SegmentData from a triple and its enrollment embeddings.
SegmentData prepare_segment(const std::string& id, const MixtureTriple& triple,
                            std::vector<SpeakerEmbedding> embeddings,
                            const AnalysisConfig& config, int seq_frames);

/// Assembles one example per the dual-target construction: targets come
/// from the schedule-selected reference stream and conditions follow the
/// flag (embedding with flag 1, zero vector otherwise).
TrainingExample assemble_example(const MixtureTriple& triple,
                                 const SpeakerEmbedding& embedding,
                                 const FlagSchedule& schedule,
                                 const AnalysisConfig& config);

struct TrainLogRecord {
  int epoch = 0;
  std::string split;  // train | val
  double loss_gain = 0.0;
  double loss_strength = 0.0;
  double loss_vad = 0.0;
  double loss_total = 0.0;
  double wall_time_s = 0.0;
  double q1_fraction = 0.0;  // fraction of personalized frames (train split)
};

std::string train_log_json(const TrainLogRecord& rec);

struct TrainResult {
  NetParams params;  // best-validation checkpoint, reloaded from disk
  std::vector<TrainLogRecord> log;
  std::string checkpoint_path;
  double best_val_loss = 0.0;
};

/// Adam on the VAD-weighted objective with gradient clipping; schedules and
/// embedding variants are drawn per (epoch, segment) from the config seed,
/// so runs are bit-reproducible. Aborts with the offending manifest ids if
/// a batch loss turns non-finite.
TrainResult train(const std::vector<SegmentData>& dataset,
                  const TrainConfig& config, const NetConfig& net_config);

/// Loss of the whole dataset split under fixed (seeded) schedules; used for
/// validation inside train() and exposed for tests.
WeightedLoss evaluate_loss(const NetParams& params,
                           const std::vector<SegmentData>& dataset,
                           const TrainConfig& config, uint64_t schedule_salt);

}  // namespace upn

#endif  // UPN_TRAINER_HPP
