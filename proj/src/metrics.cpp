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

#include "upn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "upn/objectives.hpp"

namespace upn {

namespace {

// Per-frame mean powers at the analysis hop.
std::vector<double> frame_powers(const AudioBuffer& buf, int hop) {
  const size_t n = buf.samples.size();
  const size_t frames = (n + hop - 1) / hop;
  std::vector<double> p(frames, 0.0);
  for (size_t f = 0; f < frames; ++f) {
    const size_t lo = f * hop, hi = std::min(n, lo + static_cast<size_t>(hop));
    double e = 0.0;
    for (size_t i = lo; i < hi; ++i) e += buf.samples[i] * buf.samples[i];
    p[f] = e / std::max<size_t>(1, hi - lo);
  }
  return p;
}

}  // namespace

double si_sdr(const AudioBuffer& estimate, const AudioBuffer& reference) {
  if (estimate.samples.size() != reference.samples.size())
    throw std::invalid_argument("si_sdr: length mismatch");
  double ref_e = 0.0, dot = 0.0;
  for (size_t i = 0; i < reference.samples.size(); ++i) {
    ref_e += reference.samples[i] * reference.samples[i];
    dot += estimate.samples[i] * reference.samples[i];
  }
  if (ref_e <= 0.0) throw std::invalid_argument("si_sdr: zero reference");
  const double alpha = dot / ref_e;
  double target_e = 0.0, resid_e = 0.0;
  for (size_t i = 0; i < reference.samples.size(); ++i) {
    const double t = alpha * reference.samples[i];
    const double r = estimate.samples[i] - t;
    target_e += t * t;
    resid_e += r * r;
  }
  if (resid_e <= 0.0 || target_e / resid_e >= 1e8) return 80.0;
  return std::min(80.0, 10.0 * std::log10(target_e / resid_e));
}

double seg_snr(const AudioBuffer& estimate, const AudioBuffer& reference,
               const AnalysisConfig& config) {
  if (estimate.samples.size() != reference.samples.size())
    throw std::invalid_argument("seg_snr: length mismatch");
  const auto ref_p = frame_powers(reference, config.frame_hop);
  const double peak = *std::max_element(ref_p.begin(), ref_p.end());
  if (peak <= 0.0) throw std::invalid_argument("seg_snr: silent reference");
  const double thresh = peak * std::pow(10.0, -kVadThresholdDb / 10.0);

  double acc = 0.0;
  int frames = 0;
  const int hop = config.frame_hop;
  for (size_t f = 0; f < ref_p.size(); ++f) {
    if (ref_p[f] <= thresh) continue;
    const size_t lo = f * hop,
                 hi = std::min(reference.samples.size(),
                               lo + static_cast<size_t>(hop));
    double err = 0.0, sig = 0.0;
    for (size_t i = lo; i < hi; ++i) {
      const double d = reference.samples[i] - estimate.samples[i];
      err += d * d;
      sig += reference.samples[i] * reference.samples[i];
    }
    const double snr =
        err > 0.0 ? 10.0 * std::log10(sig / err) : 35.0;
    acc += std::clamp(snr, -10.0, 35.0);
    ++frames;
  }
  return frames > 0 ? acc / frames : 0.0;
}

double oversuppression_rate(const AudioBuffer& estimate,
                            const AudioBuffer& reference,
                            const AnalysisConfig& config) {
  if (estimate.samples.size() != reference.samples.size())
    throw std::invalid_argument("oversuppression_rate: length mismatch");
  const auto ref_p = frame_powers(reference, config.frame_hop);
  const auto est_p = frame_powers(estimate, config.frame_hop);
  const double peak = *std::max_element(ref_p.begin(), ref_p.end());
  if (peak <= 0.0) return 0.0;
  const double thresh = peak * std::pow(10.0, -kVadThresholdDb / 10.0);

  int voiced = 0, suppressed = 0;
  for (size_t f = 0; f < ref_p.size(); ++f) {
    if (ref_p[f] <= thresh) continue;
    ++voiced;
    // More than 10 dB below the reference frame counts as oversuppressed.
    if (est_p[f] < ref_p[f] * 0.1) ++suppressed;
  }
  return voiced > 0 ? static_cast<double>(suppressed) / voiced : 0.0;
}

std::string eval_report_json(const EvalReport& report) {
  nlohmann::json j{{"file", report.file},
                   {"mode", report.mode},
                   {"si_sdr_db", report.si_sdr_db},
                   {"seg_snr_db", report.seg_snr_db},
                   {"oversuppression_rate", report.oversuppression},
                   {"rtf", report.rtf}};
  return j.dump();
}

}  // namespace upn
