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

#ifndef UPN_POSTPROC_HPP
#define UPN_POSTPROC_HPP

#include <array>
#include <span>
#include <vector>

#include "upn/audio.hpp"
#include "upn/dsp.hpp"

namespace upn {

/// Per-frame network output: band gains, comb-filter strengths, VAD score.
struct EnhancerOutput {
  std::array<double, kNumBands> gains{};
  std::array<double, kNumBands> strengths{};
  double vad = 0.0;
};

/// Interpolates per-band gains to per-bin gains through the filterbank.
/// A convex combination of values in [0,1], so the result stays in [0,1].
std::vector<double> interpolate_gains(std::span<const double> gains,
                                      const ErbFilterbank& fb);

/// Two-tap pitch comb filter with per-band blend depth strengths[b] * 0.5.
///
/// The comb taps come from `history` / `future`, which continue the frame's
/// sample stream immediately before/after it (short or missing context is
/// zero-padded). The band-dependent blend is applied spectrally:
///   y = frame + ifft(A . fft(0.5 (x_{-T} + x_{+T}) - frame)),
/// with A the bin-interpolated blend depths. Strengths of zero return the
/// frame unchanged, exactly; so does a frame that is exactly T-periodic
/// together with its context. Output energy is capped at twice the frame
/// energy.
std::vector<double> comb_filter(std::span<const double> frame,
                                std::span<const double> history,
                                std::span<const double> future,
                                int period_samples,
                                std::span<const double> strengths,
                                const ErbFilterbank& fb);

/// Rebuilds the waveform: per frame, scale bins by interpolated gains,
/// inverse transform, comb-filter, window, overlap-add. The output has
/// exactly n_frames * frame_hop samples and lags the analyzed input by
/// lookahead_frames * frame_hop samples.
AudioBuffer synthesize(const std::vector<Spectrum>& mixture_spectra,
                       const std::vector<EnhancerOutput>& outputs,
                       const std::vector<int>& pitch_track,
                       const AnalysisConfig& config);

}  // namespace upn

#endif  // UPN_POSTPROC_HPP
