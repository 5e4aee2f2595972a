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

#include "upn/objectives.hpp"
#include "upn/rng.hpp"

using namespace upn;

namespace {

AudioBuffer tone(double freq, double seconds, double amp) {
  AudioBuffer b;
  const size_t n = static_cast<size_t>(seconds * kSampleRate);
  b.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    b.samples[i] =
        amp * std::sin(2.0 * 3.141592653589793 * freq * i / kSampleRate);
  return b;
}

}  // namespace

TEST_CASE("reference equal to mixture gives unit gains on energetic bands") {
  AnalysisConfig cfg;
  const auto audio = tone(440.0, 0.5, 0.4);
  const auto targets = compute_targets(audio, audio, cfg);
  const auto fb = build_erb_filterbank(cfg);
  for (size_t t = 2; t + 2 < targets.size(); ++t) {
    const auto e = band_energies(analyze_frame(audio, static_cast<int>(t), cfg), fb);
    for (int b = 0; b < kNumBands; ++b)
      if (e[b] > 1e-6) CHECK(targets[t].gains[b] == doctest::Approx(1.0));
  }
}

TEST_CASE("silent reference gives zero gains and zero vad") {
  AnalysisConfig cfg;
  AudioBuffer ref;
  ref.samples.assign(24000, 0.0);
  auto mix = tone(300.0, 0.5, 0.3);
  const auto targets = compute_targets(ref, mix, cfg);
  for (const auto& t : targets) {
    CHECK(t.vad == 0);
    for (double g : t.gains) CHECK(g == 0.0);
  }
}

TEST_CASE("equal-power in-band noise halves the band energy ratio") {
  // Band SNR of 0 dB: reference = tone, mixture = tone + orthogonal tone of
  // equal power in the same band; g = sqrt(E_ref/E_mix) = sqrt(0.5).
  AnalysisConfig cfg;
  const auto fb = build_erb_filterbank(cfg);
  const auto ref = tone(1000.0, 0.5, 0.4);
  auto noise = tone(1030.0, 0.5, 0.4);  // same ERB band at this resolution
  AudioBuffer mix;
  mix.samples.resize(ref.samples.size());
  for (size_t i = 0; i < mix.samples.size(); ++i)
    mix.samples[i] = ref.samples[i] + noise.samples[i];
  const auto targets = compute_targets(ref, mix, cfg);

  // Find the band holding 1 kHz.
  int band = 0;
  double best = 1e9;
  for (int b = 0; b < fb.n_bands; ++b) {
    const double d = std::abs(fb.band_centers[b] - 1000.0);
    if (d < best) {
      best = d;
      band = b;
    }
  }
  double mean = 0.0;
  int count = 0;
  for (size_t t = 5; t + 5 < targets.size(); ++t) {
    mean += targets[t].gains[band];
    ++count;
  }
  mean /= count;
  CHECK(mean == doctest::Approx(std::sqrt(0.5)).epsilon(0.07));
}

TEST_CASE("vad labels follow the 35 dB relative threshold") {
  AnalysisConfig cfg;
  AudioBuffer ref;
  ref.samples.assign(48000, 0.0);
  // Loud first half, near-silence second half (60 dB down).
  for (size_t i = 0; i < 24000; ++i)
    ref.samples[i] = 0.5 * std::sin(2.0 * 3.141592653589793 * 220.0 * i / 48000.0);
  for (size_t i = 24000; i < 48000; ++i)
    ref.samples[i] = 0.0005 * std::sin(2.0 * 3.141592653589793 * 220.0 * i / 48000.0);
  const auto targets = compute_targets(ref, ref, cfg);
  int on = 0, off = 0;
  for (size_t t = 5; t < 45; ++t) on += targets[t].vad;
  for (size_t t = 55; t < 95; ++t) off += targets[t].vad;
  CHECK(on == 40);
  CHECK(off == 0);
}

TEST_CASE("length mismatch is rejected") {
  AnalysisConfig cfg;
  AudioBuffer a, b;
  a.samples.assign(4800, 0.1);
  b.samples.assign(4801, 0.1);
  CHECK_THROWS_AS(compute_targets(a, b, cfg), std::invalid_argument);
}

TEST_CASE("base losses vanish exactly at the target") {
  LossConfig cfg;
  FrameTargets tg;
  EnhancerOutput pred;
  for (int b = 0; b < kNumBands; ++b) {
    tg.gains[b] = 0.25 + 0.02 * b;
    tg.strengths[b] = 0.5;
    pred.gains[b] = tg.gains[b];
    pred.strengths[b] = tg.strengths[b];
  }
  tg.vad = 1;
  pred.vad = 1.0 - 1e-7;  // at the BCE clamp boundary
  const auto l = base_losses(pred, tg, cfg);
  for (int b = 0; b < kNumBands; ++b) {
    CHECK(l.gain_loss[b] == 0.0);
    CHECK(l.strength_loss[b] == 0.0);
  }
  CHECK(l.vad_loss == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("hand-computed gain loss at a quarter gain") {
  LossConfig cfg;  // gamma = 0.5
  FrameTargets tg;
  EnhancerOutput pred;
  tg.gains[0] = 1.0;
  pred.gains[0] = 0.25;
  const auto l = base_losses(pred, tg, cfg);
  CHECK(l.gain_loss[0] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("hand-computed vad loss at an uninformative prediction") {
  LossConfig cfg;
  FrameTargets tg;
  tg.vad = 1;
  EnhancerOutput pred;
  pred.vad = 0.5;
  const auto l = base_losses(pred, tg, cfg);
  CHECK(l.vad_loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("base loss gradients match central finite differences") {
  LossConfig cfg;
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    FrameTargets tg;
    EnhancerOutput pred;
    for (int b = 0; b < kNumBands; ++b) {
      tg.gains[b] = rng.uniform(0.05, 0.95);
      tg.strengths[b] = rng.uniform(0.05, 0.95);
      pred.gains[b] = rng.uniform(0.05, 0.95);
      pred.strengths[b] = rng.uniform(0.05, 0.95);
    }
    tg.vad = rng.coin() ? 1 : 0;
    pred.vad = rng.uniform(0.1, 0.9);
    const auto l = base_losses(pred, tg, cfg);
    const double h = 1e-6;
    auto total = [&](const EnhancerOutput& p) {
      const auto bl = base_losses(p, tg, cfg);
      double s = bl.vad_loss;
      for (int b = 0; b < kNumBands; ++b)
        s += bl.gain_loss[b] + bl.strength_loss[b];
      return s;
    };
    for (int b = 0; b < kNumBands; b += 7) {
      EnhancerOutput up = pred, dn = pred;
      up.gains[b] += h;
      dn.gains[b] -= h;
      const double fd = (total(up) - total(dn)) / (2.0 * h);
      CHECK(l.grads.d_gains[b] ==
            doctest::Approx(fd).epsilon(1e-5).scale(std::max(1.0, std::abs(fd))));
      up = pred;
      dn = pred;
      up.strengths[b] += h;
      dn.strengths[b] -= h;
      const double fs = (total(up) - total(dn)) / (2.0 * h);
      CHECK(l.grads.d_strengths[b] ==
            doctest::Approx(fs).epsilon(1e-5).scale(std::max(1.0, std::abs(fs))));
    }
    EnhancerOutput up = pred, dn = pred;
    up.vad += h;
    dn.vad -= h;
    const double fv = (total(up) - total(dn)) / (2.0 * h);
    CHECK(l.grads.d_vad == doctest::Approx(fv).epsilon(1e-5));
  }
}

TEST_CASE("mu of one half is exactly half the unweighted loss") {
  Rng rng(31);
  const int T = 50;
  std::vector<BaseLosses> frames(T);
  std::vector<int> labels(T);
  for (int t = 0; t < T; ++t) {
    for (int b = 0; b < kNumBands; ++b) {
      frames[t].gain_loss[b] = rng.uniform(0.0, 1.0);
      frames[t].strength_loss[b] = rng.uniform(0.0, 1.0);
    }
    frames[t].vad_loss = rng.uniform(0.0, 2.0);
    labels[t] = rng.coin() ? 1 : 0;
  }
  const auto half = vad_weighted_loss(frames, labels, 0.5);
  std::vector<int> all_ones(T, 1);
  const auto unweighted = vad_weighted_loss(frames, all_ones, 1.0);
  CHECK(std::abs(half.total - 0.5 * unweighted.total) <=
        1e-12 * std::abs(unweighted.total));
}

TEST_CASE("mu of one silences unvoiced frames exactly") {
  const int T = 10;
  std::vector<BaseLosses> frames(T);
  std::vector<int> labels(T, 0);
  for (int t = 0; t < T; ++t) {
    frames[t].vad_loss = 1.0;
    frames[t].gain_loss.fill(1.0);
    frames[t].strength_loss.fill(1.0);
  }
  labels[3] = 1;
  const auto l = vad_weighted_loss(frames, labels, 1.0);
  // Only frame 3 contributes.
  CHECK(l.vad == doctest::Approx(1.0 / T).epsilon(1e-12));
  CHECK(l.gain == doctest::Approx(kNumBands / (32.0 * T)).epsilon(1e-12));
}

TEST_CASE("two-frame worked example evaluates to 0.175") {
  std::vector<BaseLosses> frames(2);
  frames[0].vad_loss = 0.4;
  frames[1].vad_loss = 0.2;
  std::vector<int> labels{1, 0};
  const auto l = vad_weighted_loss(frames, labels, 0.75);
  CHECK(std::abs(l.vad - 0.175) <= 1e-12 * 0.175);
}

TEST_CASE("frame weights for the two labels always sum to one") {
  for (double mu : {0.0, 0.3, 0.5, 0.75, 0.9, 1.0}) {
    std::vector<BaseLosses> frames(2);
    std::vector<int> labels{1, 0};
    const auto l = vad_weighted_loss(frames, labels, mu);
    CHECK(l.frame_weights[0] + l.frame_weights[1] ==
          doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("all-voiced loss scales linearly in mu") {
  Rng rng(41);
  const int T = 20;
  std::vector<BaseLosses> frames(T);
  std::vector<int> labels(T, 1);
  for (int t = 0; t < T; ++t) frames[t].vad_loss = rng.uniform(0.1, 1.0);
  const auto l1 = vad_weighted_loss(frames, labels, 0.5);
  const auto l2 = vad_weighted_loss(frames, labels, 0.75);
  const auto l3 = vad_weighted_loss(frames, labels, 1.0);
  CHECK(l2.total == doctest::Approx(1.5 * l1.total).epsilon(1e-12));
  CHECK(l3.total == doctest::Approx(2.0 * l1.total).epsilon(1e-12));
}

TEST_CASE("sequence loss gradients match finite differences") {
  Rng rng(51);
  const int T = 6;
  LossConfig cfg;
  cfg.mu = 0.8;
  std::vector<FrameTargets> targets(T);
  std::vector<EnhancerOutput> pred(T);
  for (int t = 0; t < T; ++t) {
    for (int b = 0; b < kNumBands; ++b) {
      targets[t].gains[b] = rng.uniform(0.1, 0.9);
      targets[t].strengths[b] = rng.uniform(0.1, 0.9);
      pred[t].gains[b] = rng.uniform(0.1, 0.9);
      pred[t].strengths[b] = rng.uniform(0.1, 0.9);
    }
    targets[t].vad = rng.coin() ? 1 : 0;
    pred[t].vad = rng.uniform(0.2, 0.8);
  }
  const auto seq = sequence_loss(pred, targets, cfg);
  const double h = 1e-6;
  for (int t = 0; t < T; t += 2) {
    for (int b = 0; b < kNumBands; b += 11) {
      auto up = pred, dn = pred;
      up[t].gains[b] += h;
      dn[t].gains[b] -= h;
      const double fd = (sequence_loss(up, targets, cfg).loss.total -
                         sequence_loss(dn, targets, cfg).loss.total) /
                        (2.0 * h);
      CHECK(seq.grads[t].d_gains[b] == doctest::Approx(fd).epsilon(1e-4));
    }
    auto up = pred, dn = pred;
    up[t].vad += h;
    dn[t].vad -= h;
    const double fv = (sequence_loss(up, targets, cfg).loss.total -
                       sequence_loss(dn, targets, cfg).loss.total) /
                      (2.0 * h);
    CHECK(seq.grads[t].d_vad == doctest::Approx(fv).epsilon(1e-4));
  }
}
