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

#include "upn/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace upn {

namespace {

constexpr double kEnergyEps = 1e-10;

inline double sample_at(const AudioBuffer& audio, int64_t idx) {
  return (idx >= 0 && idx < static_cast<int64_t>(audio.samples.size()))
             ? audio.samples[idx]
             : 0.0;
}

inline int64_t frame_start(int frame_index, const AnalysisConfig& cfg) {
  return static_cast<int64_t>(frame_index - 1) * cfg.frame_hop;
}

// Copies the window at `start`, multiplied by `win`, into `out`.
void windowed_slice(const AudioBuffer& audio, int64_t start,
                    std::span<const double> win, std::span<double> out) {
  const int64_t n = static_cast<int64_t>(audio.samples.size());
  const int len = static_cast<int>(win.size());
  if (start >= 0 && start + len <= n) {
    const double* x = audio.samples.data() + start;
    for (int i = 0; i < len; ++i) out[i] = x[i] * win[i];
  } else {
    for (int i = 0; i < len; ++i) out[i] = sample_at(audio, start + i) * win[i];
  }
}

}  // namespace

void AnalysisConfig::validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("sample_rate must be > 0");
  if (frame_hop <= 0) throw std::invalid_argument("frame_hop must be > 0");
  if (window_len != 2 * frame_hop)
    throw std::invalid_argument("window_len must equal 2 * frame_hop");
  if (fft_len != window_len)
    throw std::invalid_argument("fft_len must equal window_len");
  if (fft_len % 2 != 0) throw std::invalid_argument("fft_len must be even");
  if (n_bands < 2) throw std::invalid_argument("n_bands must be >= 2");
  if (lookahead_frames < 0)
    throw std::invalid_argument("lookahead_frames must be >= 0");
}

double erb_rate(double freq_hz) {
  return 21.4 * std::log10(1.0 + 0.00437 * freq_hz);
}

ErbFilterbank build_erb_filterbank(const AnalysisConfig& config) {
  config.validate();
  const int n_bands = config.n_bands;
  const int n_bins = config.n_bins();
  const double nyquist = config.sample_rate / 2.0;
  const double erb_max = erb_rate(nyquist);
  const double erb_step = erb_max / (n_bands - 1);

  ErbFilterbank fb;
  fb.n_bands = n_bands;
  fb.n_bins = n_bins;
  fb.weights.assign(static_cast<size_t>(n_bands) * n_bins, 0.0);
  fb.band_centers.resize(n_bands);
  for (int b = 0; b < n_bands; ++b) {
    const double e = b * erb_step;
    fb.band_centers[b] = (std::pow(10.0, e / 21.4) - 1.0) / 0.00437;
  }

  for (int k = 0; k < n_bins; ++k) {
    const double f = static_cast<double>(k) * config.sample_rate /
                     config.fft_len;
    const double pos = std::min(erb_rate(f) / erb_step,
                                static_cast<double>(n_bands - 1));
    const int lo = std::min(static_cast<int>(pos), n_bands - 2);
    const double frac = pos - lo;
    fb.weights[static_cast<size_t>(lo) * n_bins + k] = 1.0 - frac;
    fb.weights[static_cast<size_t>(lo + 1) * n_bins + k] = frac;
  }
  return fb;
}

std::array<double, kFeatureDim> FrameFeatures::flatten() const {
  std::array<double, kFeatureDim> v;
  std::copy(band_mag.begin(), band_mag.end(), v.begin());
  std::copy(band_pitch_coh.begin(), band_pitch_coh.end(),
            v.begin() + kNumBands);
  v[64] = pitch_period;
  v[65] = pitch_corr;
  v[66] = log_energy;
  v[67] = delta_log_energy;
  return v;
}

std::vector<double> sine_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = std::sin(3.141592653589793 * (i + 0.5) / n);
  return w;
}

int frame_count(size_t n_samples, const AnalysisConfig& config) {
  return static_cast<int>((n_samples + config.frame_hop - 1) /
                          config.frame_hop);
}

Spectrum analyze_frame(const AudioBuffer& audio, int frame_index,
                       const AnalysisConfig& config) {
  if (frame_index < 0) throw std::out_of_range("frame_index must be >= 0");
  const auto win = sine_window(config.window_len);
  std::vector<double> frame(config.window_len);
  windowed_slice(audio, frame_start(frame_index, config), win, frame);
  Fft fft(config.fft_len);
  Spectrum spec(config.n_bins());
  fft.forward_real(frame, spec);
  return spec;
}

std::vector<double> band_energies(const Spectrum& spec,
                                  const ErbFilterbank& fb) {
  if (static_cast<int>(spec.size()) != fb.n_bins)
    throw std::invalid_argument("band_energies: spectrum/filterbank mismatch");
  std::vector<double> e(fb.n_bands, 0.0);
  for (int b = 0; b < fb.n_bands; ++b) {
    const double* w = fb.weights.data() + static_cast<size_t>(b) * fb.n_bins;
    double acc = 0.0;
    for (int k = 0; k < fb.n_bins; ++k) acc += w[k] * std::norm(spec[k]);
    e[b] = acc;
  }
  return e;
}

PitchEstimate estimate_pitch(const AudioBuffer& audio, int frame_index,
                             const AnalysisConfig& config) {
  const auto win = sine_window(config.window_len);
  const int64_t start = frame_start(frame_index, config);
  const int len = config.window_len;

  std::vector<double> frame(len);
  windowed_slice(audio, start, win, frame);
  double frame_energy = 0.0;
  for (double v : frame) frame_energy += v * v;

  PitchEstimate best;
  if (frame_energy <= 0.0) return best;  // silence: corr 0, lower bound

  // History buffer covering [start - kPitchMaxLag, start + len).
  std::vector<double> hist(kPitchMaxLag + len);
  for (int i = 0; i < kPitchMaxLag + len; ++i)
    hist[i] = sample_at(audio, start - kPitchMaxLag + i);

  double best_r = -2.0;
  int best_lag = kPitchMinLag;
  std::vector<double> rs(kPitchMaxLag + 1, -2.0);
  for (int lag = kPitchMinLag; lag <= kPitchMaxLag; ++lag) {
    const double* d = hist.data() + (kPitchMaxLag - lag);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < len; ++i) {
      const double dv = d[i] * win[i];
      num += frame[i] * dv;
      den += dv * dv;
    }
    const double denom = std::sqrt(frame_energy * den);
    const double r = denom > 0.0 ? num / denom : 0.0;
    rs[lag] = r;
    if (r > best_r) {
      best_r = r;
      best_lag = lag;
    }
  }
  // Octave disambiguation: a non-integer fundamental period can align a
  // fraction of a sample worse than one of its multiples, so the raw argmax
  // may land an octave (or more) high. Prefer the smallest sub-multiple lag
  // whose correlation is within 1% of the peak.
  if (best_r > 0.0) {
    const int argmax_lag = best_lag;
    for (int k = 2; k <= 8; ++k) {
      const int cand = (argmax_lag + k / 2) / k;
      if (cand < kPitchMinLag) break;
      int local_lag = cand;
      double local_r = -2.0;
      for (int lag = std::max(kPitchMinLag, cand - 2);
           lag <= std::min(kPitchMaxLag, cand + 2); ++lag) {
        if (rs[lag] > local_r) {
          local_r = rs[lag];
          local_lag = lag;
        }
      }
      if (local_r >= 0.99 * best_r && local_lag < best_lag)
        best_lag = local_lag;
    }
  }
  best.period = best_lag;
  best.corr = std::clamp(best_r, 0.0, 1.0);
  return best;
}

std::vector<double> pitch_coherence(const Spectrum& spec_now,
                                    const Spectrum& spec_delayed,
                                    const ErbFilterbank& fb) {
  if (static_cast<int>(spec_now.size()) != fb.n_bins ||
      static_cast<int>(spec_delayed.size()) != fb.n_bins)
    throw std::invalid_argument("pitch_coherence: size mismatch");
  std::vector<double> c(fb.n_bands, 0.0);
  for (int b = 0; b < fb.n_bands; ++b) {
    const double* w = fb.weights.data() + static_cast<size_t>(b) * fb.n_bins;
    double cross = 0.0, e_now = 0.0, e_del = 0.0;
    for (int k = 0; k < fb.n_bins; ++k) {
      cross += w[k] * (spec_now[k] * std::conj(spec_delayed[k])).real();
      e_now += w[k] * std::norm(spec_now[k]);
      e_del += w[k] * std::norm(spec_delayed[k]);
    }
    const double denom = std::sqrt(e_now * e_del);
    c[b] = denom > 0.0 ? std::clamp(cross / denom, 0.0, 1.0) : 0.0;
  }
  return c;
}

FrameAnalysis analyze(const AudioBuffer& audio, const AnalysisConfig& config) {
  config.validate();
  FrameAnalysis out;
  if (audio.samples.empty()) return out;

  const int n_frames = frame_count(audio.samples.size(), config);
  const auto fb = build_erb_filterbank(config);
  const auto win = sine_window(config.window_len);
  Fft fft(config.fft_len);

  out.features.resize(n_frames);
  out.spectra.resize(n_frames);
  out.pitch_periods.resize(n_frames);

  std::vector<double> frame(config.window_len);
  double prev_log_energy = 0.0;
  for (int t = 0; t < n_frames; ++t) {
    const int64_t start = frame_start(t, config);
    windowed_slice(audio, start, win, frame);
    Spectrum spec(config.n_bins());
    fft.forward_real(frame, spec);

    const PitchEstimate pitch = estimate_pitch(audio, t, config);
    windowed_slice(audio, start - pitch.period, win, frame);
    Spectrum delayed(config.n_bins());
    fft.forward_real(frame, delayed);

    const auto energies = band_energies(spec, fb);
    const auto coh = pitch_coherence(spec, delayed, fb);

    FrameFeatures& f = out.features[t];
    double total = 0.0;
    for (int b = 0; b < config.n_bands; ++b) {
      f.band_mag[b] = std::sqrt(energies[b]);
      f.band_pitch_coh[b] = coh[b];
      total += energies[b];
    }
    f.pitch_period = static_cast<double>(pitch.period) / kPitchMaxLag;
    f.pitch_corr = pitch.corr;
    f.log_energy = 10.0 * std::log10(total + kEnergyEps);
    f.delta_log_energy = t == 0 ? 0.0 : f.log_energy - prev_log_energy;
    prev_log_energy = f.log_energy;

    out.spectra[t] = std::move(spec);
    out.pitch_periods[t] = pitch.period;
  }
  return out;
}

std::vector<FrameFeatures> extract_features(const AudioBuffer& audio,
                                            const AnalysisConfig& config) {
  return analyze(audio, config).features;
}

void write_feature_dump(const std::string& path,
                        const std::vector<FrameFeatures>& frames) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot create feature dump: " + path);
  f.write("UPNFEAT1", 8);
  const uint32_t n = static_cast<uint32_t>(frames.size());
  unsigned char nb[4] = {static_cast<unsigned char>(n & 0xff),
                         static_cast<unsigned char>((n >> 8) & 0xff),
                         static_cast<unsigned char>((n >> 16) & 0xff),
                         static_cast<unsigned char>((n >> 24) & 0xff)};
  f.write(reinterpret_cast<char*>(nb), 4);
  for (const auto& frame : frames) {
    const auto v = frame.flatten();
    for (double d : v) {
      const float fv = static_cast<float>(d);
      uint32_t u;
      std::memcpy(&u, &fv, 4);
      unsigned char b[4] = {static_cast<unsigned char>(u & 0xff),
                            static_cast<unsigned char>((u >> 8) & 0xff),
                            static_cast<unsigned char>((u >> 16) & 0xff),
                            static_cast<unsigned char>((u >> 24) & 0xff)};
      f.write(reinterpret_cast<char*>(b), 4);
    }
  }
  if (!f) throw std::runtime_error("short write to feature dump: " + path);
}

std::vector<std::array<float, kFeatureDim>> read_feature_dump(
    const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open feature dump: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, "UPNFEAT1", 8) != 0)
    throw std::runtime_error("bad feature dump magic: " + path);
  unsigned char nb[4];
  f.read(reinterpret_cast<char*>(nb), 4);
  const uint32_t n = static_cast<uint32_t>(nb[0]) | (nb[1] << 8) |
                     (nb[2] << 16) |
                     (static_cast<uint32_t>(nb[3]) << 24);
  std::vector<std::array<float, kFeatureDim>> out(n);
  for (uint32_t i = 0; i < n; ++i) {
    for (int j = 0; j < kFeatureDim; ++j) {
      unsigned char b[4];
      f.read(reinterpret_cast<char*>(b), 4);
      uint32_t u = static_cast<uint32_t>(b[0]) | (b[1] << 8) | (b[2] << 16) |
                   (static_cast<uint32_t>(b[3]) << 24);
      float fv;
      std::memcpy(&fv, &u, 4);
      out[i][j] = fv;
    }
    if (!f) throw std::runtime_error("truncated feature dump: " + path);
  }
  return out;
}

}  // namespace upn
