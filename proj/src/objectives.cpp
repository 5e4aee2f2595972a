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

#include "upn/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace upn {

namespace {
constexpr double kEps = 1e-10;
constexpr double kBceClamp = 1e-7;
}  // namespace

std::vector<FrameTargets> compute_targets(const AudioBuffer& reference,
                                          const AudioBuffer& mixture,
                                          const AnalysisConfig& config) {
  if (reference.samples.size() != mixture.samples.size())
    throw std::invalid_argument("compute_targets: length mismatch");
  config.validate();
  if (reference.samples.empty()) return {};

  const auto fb = build_erb_filterbank(config);
  const int n_frames = frame_count(reference.samples.size(), config);
  const auto ref_analysis = analyze(reference, config);
  std::vector<FrameTargets> out(n_frames);

  // Reference frame energies drive the VAD labels, relative to the clip's
  // loudest frame.
  std::vector<double> ref_log_energy(n_frames);
  double max_log_energy = -1e30;
  std::vector<std::vector<double>> ref_band(n_frames);
  for (int t = 0; t < n_frames; ++t) {
    ref_band[t] = band_energies(ref_analysis.spectra[t], fb);
    double total = 0.0;
    for (double e : ref_band[t]) total += e;
    ref_log_energy[t] = 10.0 * std::log10(total + kEps);
    max_log_energy = std::max(max_log_energy, ref_log_energy[t]);
  }

  for (int t = 0; t < n_frames; ++t) {
    const auto mix_spec = analyze_frame(mixture, t, config);
    const auto mix_band = band_energies(mix_spec, fb);
    FrameTargets& tg = out[t];
    for (int b = 0; b < config.n_bands; ++b) {
      const double er = ref_band[t][b], em = mix_band[b];
      tg.gains[b] = (er < kEps && em < kEps)
                        ? 0.0
                        : std::clamp(std::sqrt(er / std::max(em, kEps)), 0.0,
                                     1.0);
      tg.strengths[b] =
          std::clamp(ref_analysis.features[t].band_pitch_coh[b], 0.0, 1.0);
    }
    // Relative to the loudest frame, with an absolute floor so silent
    // clips never label as voiced.
    tg.vad = ref_log_energy[t] > std::max(max_log_energy - kVadThresholdDb,
                                          -60.0)
                 ? 1
                 : 0;
  }
  return out;
}

BaseLosses base_losses(const EnhancerOutput& pred, const FrameTargets& target,
                       const LossConfig& cfg) {
  if (cfg.gamma <= 0.0 || cfg.gamma > 1.0)
    throw std::invalid_argument("base_losses: gamma must be in (0, 1]");
  BaseLosses out;
  const double gamma = cfg.gamma;
  for (int b = 0; b < kNumBands; ++b) {
    const double g = target.gains[b];
    const double gh = pred.gains[b];
    const double dg = std::pow(g, gamma) - std::pow(gh, gamma);
    out.gain_loss[b] = dg * dg;
    // d/d gh of (g^y - gh^y)^2 = -2 (g^y - gh^y) y gh^{y-1}
    out.grads.d_gains[b] =
        -2.0 * dg * gamma * std::pow(std::max(gh, kBceClamp), gamma - 1.0);

    const double r = target.strengths[b];
    const double rh = pred.strengths[b];
    const double dr = std::pow(1.0 - r, gamma) - std::pow(1.0 - rh, gamma);
    out.strength_loss[b] = dr * dr;
    out.grads.d_strengths[b] =
        2.0 * dr * gamma *
        std::pow(std::max(1.0 - rh, kBceClamp), gamma - 1.0);
  }
  const double y = static_cast<double>(target.vad);
  const double yh = std::clamp(pred.vad, kBceClamp, 1.0 - kBceClamp);
  out.vad_loss = -(y * std::log(yh) + (1.0 - y) * std::log(1.0 - yh));
  out.grads.d_vad = (yh - y) / (yh * (1.0 - yh));
  return out;
}

WeightedLoss vad_weighted_loss(const std::vector<BaseLosses>& per_frame,
                               const std::vector<int>& labels, double mu) {
  if (per_frame.size() != labels.size())
    throw std::invalid_argument("vad_weighted_loss: length mismatch");
  if (mu < 0.0 || mu > 1.0)
    throw std::invalid_argument("vad_weighted_loss: mu must be in [0, 1]");
  WeightedLoss out;
  const size_t T = per_frame.size();
  if (T == 0) return out;
  out.frame_weights.resize(T);
  for (size_t t = 0; t < T; ++t) {
    const double w = labels[t] == 1 ? mu : 1.0 - mu;
    out.frame_weights[t] = w;
    double gsum = 0.0, rsum = 0.0;
    for (int b = 0; b < kNumBands; ++b) {
      gsum += per_frame[t].gain_loss[b];
      rsum += per_frame[t].strength_loss[b];
    }
    out.gain += w * gsum;
    out.strength += w * rsum;
    out.vad += w * per_frame[t].vad_loss;
  }
  out.gain /= static_cast<double>(kNumBands) * T;
  out.strength /= static_cast<double>(kNumBands) * T;
  out.vad /= static_cast<double>(T);
  out.total = out.gain + out.strength + out.vad;
  return out;
}

SequenceLoss sequence_loss(const std::vector<EnhancerOutput>& pred,
                           const std::vector<FrameTargets>& targets,
                           const LossConfig& cfg) {
  if (pred.size() != targets.size())
    throw std::invalid_argument("sequence_loss: length mismatch");
  const size_t T = pred.size();
  std::vector<BaseLosses> base(T);
  std::vector<int> labels(T);
  for (size_t t = 0; t < T; ++t) {
    base[t] = base_losses(pred[t], targets[t], cfg);
    labels[t] = targets[t].vad;
  }
  SequenceLoss out;
  out.loss = vad_weighted_loss(base, labels, cfg.mu);
  out.grads.resize(T);
  const double band_norm = 1.0 / (static_cast<double>(kNumBands) * T);
  const double frame_norm = 1.0 / static_cast<double>(T);
  for (size_t t = 0; t < T; ++t) {
    const double w = out.loss.frame_weights[t];
    for (int b = 0; b < kNumBands; ++b) {
      out.grads[t].d_gains[b] = w * band_norm * base[t].grads.d_gains[b];
      out.grads[t].d_strengths[b] =
          w * band_norm * base[t].grads.d_strengths[b];
    }
    out.grads[t].d_vad = w * frame_norm * base[t].grads.d_vad;
  }
  return out;
}

}  // namespace upn
