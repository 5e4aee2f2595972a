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

#ifndef UPN_DSP_HPP
#define UPN_DSP_HPP

#include <array>
#include <span>
#include <string>
#include <vector>

#include "upn/audio.hpp"
#include "upn/fft.hpp"

namespace upn {

constexpr int kNumBands = 32;
constexpr int kFeatureDim = 68;  // 32 band mags + 32 coherences + 4 general

/// Frame/window geometry of the analysis front end.
///
/// Frame t covers samples [(t-1)*frame_hop, (t-1)*frame_hop + window_len),
/// zero-padded outside the buffer. With the default 10 ms hop and 20 ms sine
/// window this places every sample under exactly two windows, which is what
/// the overlap-add reconstruction in the post-processor relies on.
struct AnalysisConfig {
  int sample_rate = kSampleRate;
  int frame_hop = 480;       // 10 ms at 48 kHz
  int window_len = 960;      // 20 ms, must equal 2 * frame_hop
  int lookahead_frames = 3;  // 30 ms end-to-end pipeline delay
  int n_bands = kNumBands;
  int fft_len = 960;

  int n_bins() const { return fft_len / 2 + 1; }
  void validate() const;
};

/// Pitch tracker search range: 60..480 Hz at 48 kHz.
constexpr int kPitchMinLag = 100;
constexpr int kPitchMaxLag = 800;

/// Triangular filterbank on the ERB-rate axis.
///
/// Adjacent bands overlap 50% and every FFT bin's weights sum to exactly 1,
/// so interpolating per-band values back to bins is a convex combination.
struct ErbFilterbank {
  int n_bands = 0;
  int n_bins = 0;
  std::vector<double> weights;       // [n_bands][n_bins], row-major
  std::vector<double> band_centers;  // Hz, strictly increasing

  double weight(int band, int bin) const {
    return weights[static_cast<size_t>(band) * n_bins + bin];
  }
};

/// ERB-rate scale: 21.4 * log10(1 + 0.00437 f).
double erb_rate(double freq_hz);

ErbFilterbank build_erb_filterbank(const AnalysisConfig& config);

using Spectrum = std::vector<Complex>;  // n_bins complex values, one frame

/// 68-dimensional per-frame input: band magnitudes, per-band pitch
/// coherence, and four general features.
struct FrameFeatures {
  std::array<double, kNumBands> band_mag{};
  std::array<double, kNumBands> band_pitch_coh{};
  double pitch_period = 0.0;  // lag / kPitchMaxLag, in [0, 1]
  double pitch_corr = 0.0;
  double log_energy = 0.0;  // dB
  double delta_log_energy = 0.0;

  std::array<double, kFeatureDim> flatten() const;
};

struct PitchEstimate {
  int period = kPitchMinLag;  // samples
  double corr = 0.0;          // in [0, 1]
};

/// Sine (square-root Hann) analysis/synthesis window of length n.
std::vector<double> sine_window(int n);

/// Windowed forward transform of frame `frame_index` (see AnalysisConfig for
/// the frame convention). Samples outside the buffer are taken as zero.
Spectrum analyze_frame(const AudioBuffer& audio, int frame_index,
                       const AnalysisConfig& config);

/// Per-band energies E_b = sum_k w_b[k] |X[k]|^2.
std::vector<double> band_energies(const Spectrum& spec,
                                  const ErbFilterbank& fb);

/// Normalized autocorrelation peak of the windowed frame against its lagged
/// history over lags [kPitchMinLag, kPitchMaxLag]. Ties (within numerical
/// tolerance) resolve to the smallest lag so harmonics of the fundamental do
/// not win.
PitchEstimate estimate_pitch(const AudioBuffer& audio, int frame_index,
                             const AnalysisConfig& config);

/// Per-band normalized cross-spectrum between a frame and its pitch-delayed
/// version, clamped to [0, 1]; 0/0 is defined as 0.
std::vector<double> pitch_coherence(const Spectrum& spec_now,
                                    const Spectrum& spec_delayed,
                                    const ErbFilterbank& fb);

std::vector<FrameFeatures> extract_features(const AudioBuffer& audio,
                                            const AnalysisConfig& config);

/// Everything the full pipeline needs per frame, computed in one pass so the
/// mixture is analyzed only once.
struct FrameAnalysis {
  std::vector<FrameFeatures> features;
  std::vector<Spectrum> spectra;
  std::vector<int> pitch_periods;  // samples
};

FrameAnalysis analyze(const AudioBuffer& audio, const AnalysisConfig& config);

int frame_count(size_t n_samples, const AnalysisConfig& config);

/// Feature dump: "UPNFEAT1", u32 LE frame count, then 68 LE f32 per frame.
void write_feature_dump(const std::string& path,
                        const std::vector<FrameFeatures>& frames);
std::vector<std::array<float, kFeatureDim>> read_feature_dump(
    const std::string& path);

}  // namespace upn

#endif  // UPN_DSP_HPP
