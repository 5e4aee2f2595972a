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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "upn/postproc.hpp"
#include "upn/rng.hpp"

using namespace upn;

namespace {

constexpr double kPi = 3.141592653589793;

AudioBuffer noise_buffer(size_t n, uint64_t seed, double amp = 0.3) {
  Rng rng(seed);
  AudioBuffer b;
  b.samples.resize(n);
  for (auto& v : b.samples) v = amp * rng.normal();
  return b;
}

// Runs the gains/strengths pipeline over the audio and returns the output.
AudioBuffer run_pipeline(const AudioBuffer& audio, double gain,
                         double strength, const AnalysisConfig& cfg) {
  const int n_frames = frame_count(audio.samples.size(), cfg);
  std::vector<Spectrum> spectra(n_frames);
  std::vector<EnhancerOutput> outs(n_frames);
  std::vector<int> pitch(n_frames, 240);
  for (int t = 0; t < n_frames; ++t) {
    spectra[t] = analyze_frame(audio, t, cfg);
    outs[t].gains.fill(gain);
    outs[t].strengths.fill(strength);
  }
  return synthesize(spectra, outs, pitch, cfg);
}

double reconstruction_snr(const AudioBuffer& out, const AudioBuffer& in,
                          const AnalysisConfig& cfg) {
  const size_t delay =
      static_cast<size_t>(cfg.lookahead_frames) * cfg.frame_hop;
  double sig = 0.0, err = 0.0;
  for (size_t i = delay; i < out.samples.size(); ++i) {
    const double want = in.samples[i - delay];
    const double d = out.samples[i] - want;
    sig += want * want;
    err += d * d;
  }
  return 10.0 * std::log10(sig / std::max(err, 1e-300));
}

}  // namespace

TEST_CASE("gain interpolation respects the partition of unity") {
  AnalysisConfig cfg;
  const auto fb = build_erb_filterbank(cfg);
  std::vector<double> ones(32, 1.0), zeros(32, 0.0), onehot(32, 0.0);
  onehot[7] = 1.0;
  for (double g : interpolate_gains(ones, fb))
    CHECK(g == doctest::Approx(1.0).epsilon(1e-12));
  for (double g : interpolate_gains(zeros, fb)) CHECK(g == 0.0);
  const auto hot = interpolate_gains(onehot, fb);
  for (int k = 0; k < fb.n_bins; ++k)
    CHECK(hot[k] == doctest::Approx(fb.weight(7, k)).epsilon(1e-12));
}

TEST_CASE("comb filter is the exact identity at zero strength") {
  AnalysisConfig cfg;
  const auto fb = build_erb_filterbank(cfg);
  const auto frame = noise_buffer(960, 1).samples;
  const auto hist = noise_buffer(800, 2).samples;
  const auto fut = noise_buffer(800, 3).samples;
  std::vector<double> zero_strengths(32, 0.0);
  const auto out = comb_filter(frame, hist, fut, 240, zero_strengths, fb);
  CHECK(out == frame);
}

TEST_CASE("comb filter is exact on periodic input at full strength") {
  AnalysisConfig cfg;
  const auto fb = build_erb_filterbank(cfg);
  const int T = 229;  // deliberately not a divisor of the window length
  Rng rng(4);
  std::vector<double> one_period(T);
  for (auto& v : one_period) v = rng.normal();
  auto periodic = [&](int64_t i) { return one_period[((i % T) + T) % T]; };
  std::vector<double> frame(960), hist(kPitchMaxLag), fut(kPitchMaxLag);
  for (int i = 0; i < 960; ++i) frame[i] = periodic(i);
  for (int i = 0; i < kPitchMaxLag; ++i) {
    hist[i] = periodic(i - kPitchMaxLag);
    fut[i] = periodic(960 + i);
  }
  std::vector<double> full(32, 1.0);
  const auto out = comb_filter(frame, hist, fut, T, full, fb);
  for (int i = 0; i < 960; ++i)
    CHECK(out[i] == doctest::Approx(frame[i]).epsilon(1e-12));
}

TEST_CASE("comb filter attenuates noise between harmonics") {
  AnalysisConfig cfg;
  const auto fb = build_erb_filterbank(cfg);
  const int T = 160;  // 300 Hz; anti-harmonics at odd multiples of 150 Hz
  std::vector<double> full(32, 1.0);
  Fft fft(960);
  int wins = 0;
  const int trials = 100;
  for (int s = 0; s < trials; ++s) {
    const auto ctx = noise_buffer(960 + 2 * kPitchMaxLag, 1000 + s).samples;
    const std::vector<double> frame(ctx.begin() + kPitchMaxLag,
                                    ctx.begin() + kPitchMaxLag + 960);
    const std::vector<double> hist(ctx.begin(), ctx.begin() + kPitchMaxLag);
    const std::vector<double> fut(ctx.begin() + kPitchMaxLag + 960,
                                  ctx.end());
    const auto out = comb_filter(frame, hist, fut, T, full, fb);

    // Energy at anti-harmonic bins (odd multiples of 1/(2T)): with the
    // window length 960 and T=160, bin k sits between harmonics when
    // k*T/960 is half-integral, i.e. k = 3, 9, 15, ...
    std::vector<Complex> fin(481), fout(481);
    fft.forward_real(frame, fin);
    fft.forward_real(out, fout);
    double ein = 0.0, eout = 0.0;
    for (int k = 3; k < 481; k += 6) {
      ein += std::norm(fin[k]);
      eout += std::norm(fout[k]);
    }
    if (eout < ein) ++wins;
  }
  CHECK(wins == trials);
}

TEST_CASE("unit gains reconstruct the input above 60 dB") {
  AnalysisConfig cfg;
  Rng rng(9);
  AudioBuffer audio;
  audio.samples.resize(48000 * 2);
  for (size_t i = 0; i < audio.samples.size(); ++i)
    audio.samples[i] = 0.4 * std::sin(2.0 * kPi * 220.0 * i / 48000.0) +
                       0.1 * rng.normal();
  const auto out = run_pipeline(audio, 1.0, 0.0, cfg);
  CHECK(out.samples.size() == audio.samples.size());
  CHECK(reconstruction_snr(out, audio, cfg) >= 60.0);
}

TEST_CASE("zero gains produce digital silence") {
  AnalysisConfig cfg;
  const auto audio = noise_buffer(48000, 12);
  const auto out = run_pipeline(audio, 0.0, 0.0, cfg);
  for (double v : out.samples) CHECK(v == 0.0);
}

TEST_CASE("masking is local in time") {
  AnalysisConfig cfg;
  const auto audio = noise_buffer(48000, 13);
  const int n_frames = frame_count(audio.samples.size(), cfg);
  std::vector<Spectrum> spectra(n_frames);
  std::vector<EnhancerOutput> outs(n_frames);
  std::vector<int> pitch(n_frames, 240);
  for (int t = 0; t < n_frames; ++t) {
    spectra[t] = analyze_frame(audio, t, cfg);
    outs[t].gains.fill(t < n_frames / 2 ? 1.0 : 0.0);
  }
  const auto out = synthesize(spectra, outs, pitch, cfg);
  // The gated boundary lands at half plus the pipeline delay plus one
  // window of overlap-add smear; past that the output must be silent.
  const size_t half = out.samples.size() / 2;
  const size_t guard = half +
                       static_cast<size_t>(cfg.lookahead_frames) * cfg.frame_hop +
                       cfg.window_len;
  double first = 0.0, tail = 0.0;
  for (size_t i = 0; i < out.samples.size(); ++i) {
    if (i < half)
      first += out.samples[i] * out.samples[i];
    else if (i >= guard)
      tail += out.samples[i] * out.samples[i];
  }
  CHECK(first > 1000.0);
  CHECK(tail < 1e-12);
}

TEST_CASE("pointwise larger gains never lose band energy") {
  AnalysisConfig cfg;
  const auto fb = build_erb_filterbank(cfg);
  const auto audio = noise_buffer(48000, 14);
  Rng rng(15);
  std::array<double, kNumBands> lo{}, hi{};
  for (int b = 0; b < kNumBands; ++b) {
    lo[b] = rng.uniform(0.1, 0.7);
    hi[b] = std::min(1.0, lo[b] + rng.uniform(0.0, 0.3));
  }
  const int n_frames = frame_count(audio.samples.size(), cfg);
  std::vector<Spectrum> spectra(n_frames);
  std::vector<EnhancerOutput> lo_out(n_frames), hi_out(n_frames);
  std::vector<int> pitch(n_frames, 240);
  for (int t = 0; t < n_frames; ++t) {
    spectra[t] = analyze_frame(audio, t, cfg);
    lo_out[t].gains = lo;
    hi_out[t].gains = hi;
  }
  const auto out_lo = synthesize(spectra, lo_out, pitch, cfg);
  const auto out_hi = synthesize(spectra, hi_out, pitch, cfg);
  std::vector<double> e_lo(kNumBands, 0.0), e_hi(kNumBands, 0.0);
  for (int t = 2 * cfg.lookahead_frames; t < n_frames - 2; ++t) {
    const auto bl = band_energies(analyze_frame(out_lo, t, cfg), fb);
    const auto bh = band_energies(analyze_frame(out_hi, t, cfg), fb);
    for (int b = 0; b < kNumBands; ++b) {
      e_lo[b] += bl[b];
      e_hi[b] += bh[b];
    }
  }
  for (int b = 0; b < kNumBands; ++b) CHECK(e_hi[b] >= e_lo[b] * (1.0 - 1e-6));
}

TEST_CASE("pipeline output stays finite on harsh input") {
  AnalysisConfig cfg;
  AudioBuffer audio;
  audio.samples.assign(24000, 0.0);
  for (size_t i = 0; i < audio.samples.size(); i += 997)
    audio.samples[i] = i % 2 ? 1.0 : -1.0;  // impulse train
  const auto out = run_pipeline(audio, 0.9, 1.0, cfg);
  for (double v : out.samples) CHECK(std::isfinite(v));
}

TEST_CASE("length mismatch is rejected") {
  AnalysisConfig cfg;
  std::vector<Spectrum> spectra(3, Spectrum(cfg.n_bins()));
  std::vector<EnhancerOutput> outs(2);
  std::vector<int> pitch(3, 240);
  CHECK_THROWS_AS(synthesize(spectra, outs, pitch, cfg),
                  std::invalid_argument);
}
