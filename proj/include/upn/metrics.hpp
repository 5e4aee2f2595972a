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

#ifndef UPN_METRICS_HPP
#define UPN_METRICS_HPP

#include <string>

#include "upn/audio.hpp"
#include "upn/dsp.hpp"

namespace upn {

/// Scale-invariant SDR in dB: the estimate is projected onto the reference;
/// the ratio of projection to residual energy is capped at +80 dB.
/// Both signals must be equal length and already delay-compensated.
double si_sdr(const AudioBuffer& estimate, const AudioBuffer& reference);

/// Mean per-frame SNR in dB over frames where the reference is active,
/// each frame's ratio clamped to [-10, 35] dB.
double seg_snr(const AudioBuffer& estimate, const AudioBuffer& reference,
               const AnalysisConfig& config);

/// Fraction of reference-active frames whose estimate energy sits more than
/// 10 dB below the reference frame energy.
double oversuppression_rate(const AudioBuffer& estimate,
                            const AudioBuffer& reference,
                            const AnalysisConfig& config);

struct EvalReport {
  std::string file;
  std::string mode;  // personalized | non-personalized | scheduled
  double si_sdr_db = 0.0;
  double seg_snr_db = 0.0;
  double oversuppression = 0.0;
  double rtf = 0.0;  // 0 when not measured
};

std::string eval_report_json(const EvalReport& report);

}  // namespace upn

#endif  // UPN_METRICS_HPP
