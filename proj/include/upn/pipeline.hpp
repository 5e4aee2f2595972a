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

#ifndef UPN_PIPELINE_HPP
#define UPN_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "upn/conditioning.hpp"
#include "upn/net.hpp"
#include "upn/postproc.hpp"

namespace upn {

enum class EnhanceMode { kPersonalized, kNonPersonalized, kScheduled };

EnhanceMode enhance_mode_from_name(const std::string& name);  // pse|nse|schedule
std::string enhance_mode_name(EnhanceMode mode);

/// Builds per-frame condition vectors for a run. Personalized and scheduled
/// modes need the embedding; non-personalized runs use the exact zero
/// vector everywhere.
std::vector<ConditionVector> make_conditions(
    int n_frames, int cond_dim, EnhanceMode mode,
    const std::optional<SpeakerEmbedding>& embedding,
    const std::optional<FlagSchedule>& schedule);

FeatureSeq to_feature_seq(const std::vector<FrameFeatures>& features);

struct EnhanceResult {
  AudioBuffer audio;  // delayed by lookahead_frames * frame_hop
  std::vector<EnhancerOutput> outputs;
};

/// Full path: features -> conditions -> network -> synthesis.
EnhanceResult enhance(const AudioBuffer& input, const NetParams& params,
                      const std::vector<ConditionVector>& conds,
                      const AnalysisConfig& config);

/// Convenience: trims the pipeline delay from both signals so they align.
/// Returns (estimate', reference') of equal length.
std::pair<AudioBuffer, AudioBuffer> delay_compensate(
    const AudioBuffer& enhanced, const AudioBuffer& reference,
    const AnalysisConfig& config);

/// Wall-clock real-time factor of the full single-threaded pipeline over
/// synthetic audio of the given duration; median of `runs` runs.
double measure_rtf(const NetParams& params, double duration_s, int runs = 5);

}  // namespace upn

#endif  // UPN_PIPELINE_HPP
