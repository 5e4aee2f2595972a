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

#ifndef UPN_OBJECTIVES_HPP
#define UPN_OBJECTIVES_HPP

#include <array>
#include <vector>

#include "upn/dsp.hpp"
#include "upn/net.hpp"
#include "upn/postproc.hpp"

namespace upn {

/// Relative frame-energy threshold for the ground-truth VAD label.
constexpr double kVadThresholdDb = 35.0;

/// Ground-truth per-frame targets.
struct FrameTargets {
  std::array<double, kNumBands> gains{};      // ratio mask, in [0, 1]
  std::array<double, kNumBands> strengths{};  // reference pitch coherence
  int vad = 0;                                // binary
};

struct LossConfig {
  double mu = 0.9;     // voiced-frame weight
  double gamma = 0.5;  // power compression exponent
};

/// Targets from an aligned (reference, mixture) pair:
///   g_b = clamp(sqrt(E_ref / max(E_mix, eps)), 0, 1)   (0 if both silent)
///   r_b = pitch coherence of the reference frame
///   y   = 1 iff the reference frame is within 35 dB of the clip's loudest
///         frame.
std::vector<FrameTargets> compute_targets(const AudioBuffer& reference,
                                          const AudioBuffer& mixture,
                                          const AnalysisConfig& config);

/// Per-band/per-frame base losses and their gradients w.r.t. the
/// prediction:
///   L_g(b) = (g^gamma - ghat^gamma)^2
///   L_r(b) = ((1-r)^gamma - (1-rhat)^gamma)^2
///   L_v    = binary cross-entropy with the prediction clamped to
///            [1e-7, 1 - 1e-7].
struct BaseLosses {
  std::array<double, kNumBands> gain_loss{};
  std::array<double, kNumBands> strength_loss{};
  double vad_loss = 0.0;
  OutputGrads grads;  // d loss / d prediction, per band / scalar
};

BaseLosses base_losses(const EnhancerOutput& pred, const FrameTargets& target,
                       const LossConfig& cfg);

/// VAD-weighted aggregation: per frame weight mu if voiced else 1-mu;
/// L_G and L_R average over bands and frames, L_V over frames; the total is
/// their sum.
struct WeightedLoss {
  double gain = 0.0;      // L_G
  double strength = 0.0;  // L_R
  double vad = 0.0;       // L_V
  double total = 0.0;
  std::vector<double> frame_weights;
};

WeightedLoss vad_weighted_loss(const std::vector<BaseLosses>& per_frame,
                               const std::vector<int>& labels, double mu);

/// Full per-sequence objective with gradients ready for the network
/// backward pass (the frame weights and averaging folded in).
struct SequenceLoss {
  WeightedLoss loss;
  std::vector<OutputGrads> grads;
};

SequenceLoss sequence_loss(const std::vector<EnhancerOutput>& pred,
                           const std::vector<FrameTargets>& targets,
                           const LossConfig& cfg);

}  // namespace upn

#endif  // UPN_OBJECTIVES_HPP
