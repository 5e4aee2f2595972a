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

#include "upn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "upn/rng.hpp"

namespace upn {

EnhanceMode enhance_mode_from_name(const std::string& name) {
  if (name == "pse") return EnhanceMode::kPersonalized;
  if (name == "nse") return EnhanceMode::kNonPersonalized;
  if (name == "schedule") return EnhanceMode::kScheduled;
  throw std::invalid_argument("unknown mode (want pse|nse|schedule): " + name);
}

std::string enhance_mode_name(EnhanceMode mode) {
  switch (mode) {
    case EnhanceMode::kPersonalized:
      return "personalized";
    case EnhanceMode::kNonPersonalized:
      return "non-personalized";
    case EnhanceMode::kScheduled:
      return "scheduled";
  }
  return "unknown";
}

std::vector<ConditionVector> make_conditions(
    int n_frames, int cond_dim, EnhanceMode mode,
    const std::optional<SpeakerEmbedding>& embedding,
    const std::optional<FlagSchedule>& schedule) {
  std::vector<ConditionVector> conds(n_frames);
  if (mode == EnhanceMode::kNonPersonalized) {
    for (auto& c : conds) c.values.assign(cond_dim, 0.0);
    return conds;
  }
  if (!embedding)
    throw std::invalid_argument(
        "personalized/scheduled mode requires an enrollment embedding");
  if (embedding->dim() + 1 != cond_dim)
    throw std::invalid_argument("embedding dimension does not match model");
  if (mode == EnhanceMode::kPersonalized) {
    const ConditionVector on = make_condition(*embedding, 1);
    for (auto& c : conds) c = on;
    return conds;
  }
  if (!schedule)
    throw std::invalid_argument("scheduled mode requires a schedule");
  if (schedule->n_frames() < n_frames)
    throw std::invalid_argument("schedule shorter than the audio");
  const ConditionVector on = make_condition(*embedding, 1);
  const ConditionVector off = make_condition(*embedding, 0);
  for (int t = 0; t < n_frames; ++t) conds[t] = schedule->q[t] ? on : off;
  return conds;
}

FeatureSeq to_feature_seq(const std::vector<FrameFeatures>& features) {
  FeatureSeq seq(features.size());
  for (size_t t = 0; t < features.size(); ++t) seq[t] = features[t].flatten();
  return seq;
}

EnhanceResult enhance(const AudioBuffer& input, const NetParams& params,
                      const std::vector<ConditionVector>& conds,
                      const AnalysisConfig& config) {
  const auto analysis = analyze(input, config);
  if (analysis.features.size() != conds.size())
    throw std::invalid_argument("enhance: condition count mismatch");
  EnhanceResult res;
  res.outputs =
      forward_aligned(params, to_feature_seq(analysis.features), conds);
  res.audio = synthesize(analysis.spectra, res.outputs,
                         analysis.pitch_periods, config);
  return res;
}

std::pair<AudioBuffer, AudioBuffer> delay_compensate(
    const AudioBuffer& enhanced, const AudioBuffer& reference,
    const AnalysisConfig& config) {
  const size_t delay =
      static_cast<size_t>(config.lookahead_frames) * config.frame_hop;
  if (enhanced.samples.size() <= delay)
    throw std::invalid_argument("delay_compensate: output too short");
  AudioBuffer est;
  est.sample_rate = enhanced.sample_rate;
  est.samples.assign(enhanced.samples.begin() + delay,
                     enhanced.samples.end());
  const size_t n = std::min(est.samples.size(), reference.samples.size());
  est.samples.resize(n);
  AudioBuffer ref;
  ref.sample_rate = reference.sample_rate;
  ref.samples.assign(reference.samples.begin(),
                     reference.samples.begin() + n);
  return {std::move(est), std::move(ref)};
}

double measure_rtf(const NetParams& params, double duration_s, int runs) {
  if (runs < 1) runs = 1;
  // Tone plus noise exercises the pitch tracker and the comb filter.
  Rng rng(0xbe8c);
  AudioBuffer audio;
  audio.sample_rate = kSampleRate;
  const size_t n = static_cast<size_t>(duration_s * kSampleRate);
  audio.samples.resize(n);
  double phase = 0.0;
  for (size_t i = 0; i < n; ++i) {
    phase += 150.0 / kSampleRate;
    audio.samples[i] =
        0.2 * std::sin(6.283185307179586 * phase) + 0.05 * rng.normal();
  }
  const AnalysisConfig cfg;
  const int n_frames = frame_count(n, cfg);
  const auto conds = make_conditions(n_frames, params.config.cond_dim,
                                     EnhanceMode::kNonPersonalized,
                                     std::nullopt, std::nullopt);
  std::vector<double> rtfs;
  for (int r = 0; r < runs; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = enhance(audio, params, conds, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    (void)res;
    const double wall =
        std::chrono::duration<double>(t1 - t0).count();
    rtfs.push_back(wall / duration_s);
  }
  std::sort(rtfs.begin(), rtfs.end());
  return rtfs[rtfs.size() / 2];
}

}  // namespace upn
