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

#include "upn/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace upn {

std::vector<double> interpolate_gains(std::span<const double> gains,
                                      const ErbFilterbank& fb) {
  if (static_cast<int>(gains.size()) != fb.n_bands)
    throw std::invalid_argument("interpolate_gains: band count mismatch");
  std::vector<double> g(fb.n_bins, 0.0);
  for (int b = 0; b < fb.n_bands; ++b) {
    const double* w = fb.weights.data() + static_cast<size_t>(b) * fb.n_bins;
    const double gb = gains[b];
    if (gb == 0.0) continue;
    for (int k = 0; k < fb.n_bins; ++k) g[k] += w[k] * gb;
  }
  return g;
}

std::vector<double> comb_filter(std::span<const double> frame,
                                std::span<const double> history,
                                std::span<const double> future,
                                int period_samples,
                                std::span<const double> strengths,
                                const ErbFilterbank& fb) {
  const int len = static_cast<int>(frame.size());
  if (len % 2 != 0) throw std::invalid_argument("comb_filter: odd frame");
  if (static_cast<int>(strengths.size()) != fb.n_bands)
    throw std::invalid_argument("comb_filter: band count mismatch");
  if (period_samples < 1)
    throw std::invalid_argument("comb_filter: period must be >= 1");

  std::vector<double> out(frame.begin(), frame.end());
  bool any = false;
  for (double s : strengths) any = any || s != 0.0;
  if (!any) return out;  // exact identity at zero strength

  // ctx(i) for i in [-T, len+T), zero-padded where context is missing.
  const auto ctx = [&](int i) -> double {
    if (i < 0) {
      const int h = static_cast<int>(history.size()) + i;
      return h >= 0 ? history[h] : 0.0;
    }
    if (i < len) return frame[i];
    const int f = i - len;
    return f < static_cast<int>(future.size()) ? future[f] : 0.0;
  };

  const int T = period_samples;
  std::vector<double> diff(len);
  for (int i = 0; i < len; ++i)
    diff[i] = 0.5 * (ctx(i - T) + ctx(i + T)) - frame[i];

  std::vector<double> alpha(fb.n_bands);
  for (int b = 0; b < fb.n_bands; ++b)
    alpha[b] = 0.5 * std::clamp(strengths[b], 0.0, 1.0);
  const auto alpha_bins = interpolate_gains(alpha, fb);

  Fft fft(len);
  std::vector<Complex> bins(len / 2 + 1);
  fft.forward_real(diff, bins);
  for (size_t k = 0; k < bins.size(); ++k) bins[k] *= alpha_bins[k];
  std::vector<double> corr(len);
  fft.inverse_real(bins, corr);

  double e_in = 0.0, e_out = 0.0;
  for (int i = 0; i < len; ++i) {
    out[i] = frame[i] + corr[i];
    e_in += frame[i] * frame[i];
    e_out += out[i] * out[i];
  }
  if (e_out > 2.0 * e_in) {
    const double s = e_out > 0.0 ? std::sqrt(2.0 * e_in / e_out) : 0.0;
    for (double& v : out) v *= s;
  }
  return out;
}

AudioBuffer synthesize(const std::vector<Spectrum>& mixture_spectra,
                       const std::vector<EnhancerOutput>& outputs,
                       const std::vector<int>& pitch_track,
                       const AnalysisConfig& config) {
  config.validate();
  const size_t n_frames = mixture_spectra.size();
  if (outputs.size() != n_frames || pitch_track.size() != n_frames)
    throw std::invalid_argument("synthesize: sequence length mismatch");

  const int hop = config.frame_hop;
  const int len = config.window_len;
  const auto win = sine_window(len);
  const auto fb = build_erb_filterbank(config);
  Fft fft(config.fft_len);

  // Stage 1: apply interpolated gains, inverse transform, overlap-add the
  // sine-windowed frames into the gained stream u. Frame t occupies
  // [(t-1)*hop, (t-1)*hop + len); the negative head is dropped and the tail
  // half-window (incomplete overlap) lands beyond the emitted region, where
  // the pipeline delay discards it.
  const int64_t total = static_cast<int64_t>(n_frames) * hop;
  std::vector<double> u(total + len, 0.0);
  std::vector<double> frame_time(len);
  std::vector<Complex> bins(config.n_bins());
  for (size_t t = 0; t < n_frames; ++t) {
    if (static_cast<int>(mixture_spectra[t].size()) != config.n_bins())
      throw std::invalid_argument("synthesize: bad spectrum size");
    const auto g = interpolate_gains(
        std::span<const double>(outputs[t].gains.data(), kNumBands), fb);
    for (int k = 0; k < config.n_bins(); ++k)
      bins[k] = mixture_spectra[t][k] * g[k];
    fft.inverse_real(bins, frame_time);
    const int64_t s0 = static_cast<int64_t>(t) * hop - hop;
    for (int i = 0; i < len; ++i) {
      const int64_t idx = s0 + i;
      if (idx >= 0 && idx < static_cast<int64_t>(u.size()))
        u[idx] += frame_time[i] * win[i];
    }
  }

  // Stage 2: per-frame comb filtering of the gained stream, re-windowed with
  // the squared sine window for a second unity overlap-add.
  std::vector<double> c(total, 0.0);
  std::vector<double> raw(len);
  for (size_t t = 0; t < n_frames; ++t) {
    const int64_t s0 = static_cast<int64_t>(t) * hop - hop;
    for (int i = 0; i < len; ++i) {
      const int64_t idx = s0 + i;
      raw[i] = (idx >= 0 && idx < static_cast<int64_t>(u.size())) ? u[idx]
                                                                  : 0.0;
    }
    const int64_t h_lo = std::max<int64_t>(0, s0 - kPitchMaxLag);
    std::span<const double> hist(u.data() + h_lo,
                                 static_cast<size_t>(std::max<int64_t>(0, s0) - h_lo));
    const int64_t f_lo = s0 + len;
    const int64_t f_hi =
        std::min<int64_t>(static_cast<int64_t>(u.size()), f_lo + kPitchMaxLag);
    std::span<const double> fut(
        u.data() + std::min<int64_t>(f_lo, static_cast<int64_t>(u.size())),
        static_cast<size_t>(std::max<int64_t>(0, f_hi - f_lo)));
    const auto filtered = comb_filter(
        raw, hist, fut, std::max(1, pitch_track[t]),
        std::span<const double>(outputs[t].strengths.data(), kNumBands), fb);
    for (int i = 0; i < len; ++i) {
      const int64_t idx = s0 + i;
      if (idx >= 0 && idx < total) c[idx] += filtered[i] * win[i] * win[i];
    }
  }

  // Stage 3: constant pipeline delay.
  const int64_t delay =
      static_cast<int64_t>(config.lookahead_frames) * hop;
  AudioBuffer out;
  out.sample_rate = config.sample_rate;
  out.samples.assign(total, 0.0);
  for (int64_t i = delay; i < total; ++i) out.samples[i] = c[i - delay];
  return out;
}

}  // namespace upn
