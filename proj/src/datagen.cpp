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

#include "upn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "upn/fft.hpp"
#include "upn/rng.hpp"

namespace upn {

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kCrossfadeS = 0.5;
constexpr double kMinTurnS = 3.0;
constexpr double kActiveMaskDb = 35.0;  // rel-peak speech-activity window

struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
  double s1 = 0, s2 = 0;  // transposed direct form II state

  double process(double x) {
    const double y = b0 * x + s1;
    s1 = b1 * x - a1 * y + s2;
    s2 = b2 * x - a2 * y;
    return y;
  }
};

Biquad make_lowpass(double cutoff_hz, double q, int fs) {
  const double w0 = 2.0 * kPi * std::min(cutoff_hz, 0.495 * fs) / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  Biquad f;
  f.b0 = (1.0 - c) / 2.0 / a0;
  f.b1 = (1.0 - c) / a0;
  f.b2 = f.b0;
  f.a1 = -2.0 * c / a0;
  f.a2 = (1.0 - alpha) / a0;
  return f;
}

Biquad make_bandpass(double center_hz, double q, int fs) {
  const double w0 = 2.0 * kPi * std::min(center_hz, 0.495 * fs) / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  Biquad f;
  f.b0 = alpha / a0;  // constant-peak bandpass
  f.b1 = 0.0;
  f.b2 = -alpha / a0;
  f.a1 = -2.0 * c / a0;
  f.a2 = (1.0 - alpha) / a0;
  return f;
}

Biquad make_peaking(double center_hz, double gain_db, double q, int fs) {
  const double w0 = 2.0 * kPi * std::min(center_hz, 0.495 * fs) / fs;
  const double a = std::pow(10.0, gain_db / 40.0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha / a;
  Biquad f;
  f.b0 = (1.0 + alpha * a) / a0;
  f.b1 = -2.0 * c / a0;
  f.b2 = (1.0 - alpha * a) / a0;
  f.a1 = f.b1;
  f.a2 = (1.0 - alpha / a) / a0;
  return f;
}

// 4th-order Butterworth low-pass as two cascaded biquads.
void butterworth4_lowpass(std::vector<double>& x, double cutoff_hz, int fs) {
  Biquad s1 = make_lowpass(cutoff_hz, 0.5411961, fs);
  Biquad s2 = make_lowpass(cutoff_hz, 1.3065630, fs);
  for (double& v : x) v = s2.process(s1.process(v));
}

std::vector<double> synth_rir(double rt60_s, int fs, Rng& rng) {
  const int len = static_cast<int>(rt60_s * fs);
  std::vector<double> rir(len + 1);
  rir[0] = 1.0;
  const double decay = -3.0 * std::log(10.0) / (rt60_s * fs);
  for (int i = 1; i <= len; ++i)
    rir[i] = 0.25 * rng.normal() * std::exp(decay * i);
  double e = 0.0;
  for (double h : rir) e += h * h;
  for (double& h : rir) h /= std::sqrt(e);
  return rir;
}

// Concatenates clips (cycled in rng order) until `n_samples`, with raised-
// cosine crossfades between consecutive clips.
std::vector<double> fill_stream(std::span<const AudioBuffer> clips,
                                size_t n_samples, Rng& rng) {
  if (clips.empty())
    throw std::invalid_argument("fill_stream: empty clip pool");
  const int fs = clips[0].sample_rate;
  const size_t fade = static_cast<size_t>(kCrossfadeS * fs);
  std::vector<double> out;
  out.reserve(n_samples + fade);
  bool first = true;
  while (out.size() < n_samples) {
    const auto& clip = clips[rng.uniform_int(0, clips.size() - 1)].samples;
    if (clip.empty()) continue;
    if (first) {
      out.insert(out.end(), clip.begin(), clip.end());
      first = false;
      continue;
    }
    const size_t overlap = std::min({fade, out.size(), clip.size()});
    const size_t base = out.size() - overlap;
    for (size_t i = 0; i < overlap; ++i) {
      const double a = 0.5 * (1.0 + std::cos(kPi * (i + 1.0) / (overlap + 1)));
      out[base + i] = out[base + i] * a + clip[i] * (1.0 - a);
    }
    out.insert(out.end(), clip.begin() + overlap, clip.end());
  }
  out.resize(n_samples);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Toy voices
// ---------------------------------------------------------------------------

ToyVoice toy_voice(int speaker_index) {
  const int s = speaker_index;
  ToyVoice v;
  v.f0_lo_hz = 85.0 * std::pow(1.16, s % 8);
  v.f0_hi_hz = v.f0_lo_hz * 1.4;
  v.formant1_hz = 350.0 + 120.0 * ((3 * s + 1) % 8);
  v.formant2_hz = 1100.0 + 380.0 * ((5 * s + 3) % 8);
  v.tilt_cutoff_hz = std::min(10000.0, 2500.0 * std::pow(1.25, (7 * s + 2) % 8));
  return v;
}

AudioBuffer synth_utterance(int speaker_index, int utterance_index,
                            uint64_t corpus_seed, double duration_s) {
  const ToyVoice v = toy_voice(speaker_index);
  Rng rng = Rng(corpus_seed)
                .fork(0x766f6963)  // voice stream
                .fork(static_cast<uint64_t>(speaker_index))
                .fork(static_cast<uint64_t>(utterance_index));
  const int fs = kSampleRate;
  const size_t n = static_cast<size_t>(duration_s * fs);

  AudioBuffer out;
  out.sample_rate = fs;
  out.samples.assign(n, 0.0);

  // Syllable gate:速 roughly 3 Hz on/off with smooth 20 ms edges, plus
  // longer utterance pauses so the VAD targets have both labels.
  std::vector<double> gate(n, 0.0);
  {
    size_t pos = 0;
    const size_t ramp = fs / 50;
    bool pause_next = false;
    while (pos < n) {
      size_t seg;
      double value;
      if (pause_next) {
        seg = static_cast<size_t>(rng.uniform(0.35, 0.8) * fs);
        value = 0.0;
      } else {
        seg = static_cast<size_t>(rng.uniform(1.0, 2.2) * fs);
        value = 1.0;
      }
      const size_t end = std::min(n, pos + seg);
      if (value > 0.0) {
        // Syllabic amplitude modulation inside the speech span.
        double syl_phase = rng.uniform(0.0, 1.0);
        const double syl_rate = rng.uniform(2.5, 3.8);
        for (size_t i = pos; i < end; ++i) {
          syl_phase += syl_rate / fs;
          const double am = 0.62 + 0.38 * std::sin(2.0 * kPi * syl_phase);
          gate[i] = std::min(1.0, std::max(0.12, am));
        }
        for (size_t i = 0; i < ramp && pos + i < end; ++i)
          gate[pos + i] *= static_cast<double>(i) / ramp;
        for (size_t i = 0; i < ramp && end - 1 >= i && end - 1 - i >= pos; ++i)
          gate[end - 1 - i] *= static_cast<double>(i) / ramp;
      }
      pos = end;
      pause_next = !pause_next;
    }
  }

  // Sawtooth excitation with a wandering f0.
  double f0 = rng.uniform(v.f0_lo_hz, v.f0_hi_hz);
  double phase = rng.uniform(0.0, 1.0);
  double vib_phase = rng.uniform(0.0, 1.0);
  std::vector<double> raw(n);
  for (size_t i = 0; i < n; ++i) {
    if (i % 480 == 0) {
      f0 *= std::exp(rng.normal(0.0, 0.01));
      f0 = std::clamp(f0, v.f0_lo_hz, v.f0_hi_hz);
    }
    vib_phase += 5.0 / fs;
    const double f = f0 * (1.0 + 0.02 * std::sin(2.0 * kPi * vib_phase));
    phase += f / fs;
    if (phase >= 1.0) phase -= 1.0;
    const double saw = 2.0 * phase - 1.0;
    raw[i] = (saw + 0.08 * rng.normal()) * gate[i];
  }

  // Formant resonances plus direct path, then the speaker's spectral tilt.
  Biquad f1 = make_bandpass(v.formant1_hz, 6.0, fs);
  Biquad f2 = make_bandpass(v.formant2_hz, 6.0, fs);
  Biquad tilt = make_lowpass(v.tilt_cutoff_hz, 0.707, fs);
  for (size_t i = 0; i < n; ++i) {
    const double shaped =
        0.25 * raw[i] + 2.2 * f1.process(raw[i]) + 1.6 * f2.process(raw[i]);
    out.samples[i] = tilt.process(shaped);
  }

  // Normalize active level.
  double e = 0.0;
  size_t active = 0;
  for (size_t i = 0; i < n; ++i)
    if (gate[i] > 0.0) {
      e += out.samples[i] * out.samples[i];
      ++active;
    }
  const double target_rms = 0.1 * std::pow(10.0, rng.uniform(-3.0, 3.0) / 20.0);
  if (active > 0 && e > 0.0) {
    const double scale = target_rms / std::sqrt(e / active);
    for (double& s : out.samples) s *= scale;
  }
  return out;
}

AudioBuffer synth_noise_clip(int kind, uint64_t seed, double duration_s) {
  Rng rng = Rng(seed).fork(0x6e6f6973).fork(static_cast<uint64_t>(kind));
  const int fs = kSampleRate;
  const size_t n = static_cast<size_t>(duration_s * fs);
  AudioBuffer out;
  out.sample_rate = fs;
  out.samples.resize(n);
  switch (kind % 4) {
    case 0:  // white
      for (double& s : out.samples) s = rng.normal();
      break;
    case 1: {  // pink (Kellet three-pole)
      double b0 = 0, b1 = 0, b2 = 0;
      for (double& s : out.samples) {
        const double w = rng.normal();
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
        s = 0.25 * (b0 + b1 + b2 + w * 0.1848);
      }
      break;
    }
    case 2: {  // mains hum with harmonics over a noise floor
      double ph = rng.uniform(0.0, 1.0);
      for (size_t i = 0; i < n; ++i) {
        ph += 50.0 / fs;
        const double t = 2.0 * kPi * ph;
        out.samples[i] = 0.8 * std::sin(t) + 0.3 * std::sin(3.0 * t) +
                         0.15 * std::sin(5.0 * t) + 0.15 * rng.normal();
      }
      break;
    }
    default: {  // low rumble
      for (double& s : out.samples) s = rng.normal();
      butterworth4_lowpass(out.samples, 800.0, fs);
      break;
    }
  }
  // Normalize to a nominal RMS.
  const double r = rms(out);
  if (r > 0.0)
    for (double& s : out.samples) s *= 0.1 / r;
  return out;
}

// ---------------------------------------------------------------------------
// Augmentations
// ---------------------------------------------------------------------------

AugmentationPlan plan_augmentations(uint64_t seed) {
  Rng rng = Rng(seed).fork(0x6175676d);
  AugmentationPlan plan;
  if (rng.coin()) plan.reverb_rt60_s = rng.uniform(0.1, 0.6);
  if (rng.coin()) plan.lowpass_hz = rng.uniform(4000.0, 24000.0);
  if (rng.coin()) {
    plan.eq_center_hz =
        std::exp(rng.uniform(std::log(100.0), std::log(12000.0)));
    plan.eq_gain_db = rng.uniform(-6.0, 6.0);
  }
  if (rng.coin()) plan.level_db = rng.uniform(-10.0, 0.0);
  return plan;
}

AudioBuffer apply_augmentation_plan(const AudioBuffer& buf,
                                    const AugmentationPlan& plan,
                                    uint64_t seed) {
  if (buf.sample_rate != kSampleRate)
    throw std::invalid_argument("apply_augmentations: input must be 48 kHz");
  AudioBuffer out = buf;
  if (plan.reverb_rt60_s) {
    Rng rng = Rng(seed).fork(0x72697200);
    const auto rir = synth_rir(*plan.reverb_rt60_s, buf.sample_rate, rng);
    auto wet = fft_convolve(out.samples, rir);
    wet.resize(out.samples.size());
    out.samples = std::move(wet);
  }
  if (plan.lowpass_hz)
    butterworth4_lowpass(out.samples, *plan.lowpass_hz, out.sample_rate);
  if (plan.eq_center_hz) {
    Biquad eq = make_peaking(*plan.eq_center_hz, plan.eq_gain_db, 1.0,
                             out.sample_rate);
    for (double& s : out.samples) s = eq.process(s);
  }
  if (plan.level_db) {
    const double g = std::pow(10.0, *plan.level_db / 20.0);
    for (double& s : out.samples) s *= g;
  }
  return out;
}

AudioBuffer apply_augmentations(const AudioBuffer& buf, uint64_t seed) {
  return apply_augmentation_plan(buf, plan_augmentations(seed), seed);
}

// ---------------------------------------------------------------------------
// Mixtures
// ---------------------------------------------------------------------------

std::string segment_type_name(SegmentType t) {
  switch (t) {
    case SegmentType::kOverlapping:
      return "overlapping";
    case SegmentType::kAlternating:
      return "alternating";
    case SegmentType::kSingle:
      return "single";
  }
  return "unknown";
}

SegmentType segment_type_from_name(const std::string& name) {
  if (name == "overlapping") return SegmentType::kOverlapping;
  if (name == "alternating") return SegmentType::kAlternating;
  if (name == "single") return SegmentType::kSingle;
  throw std::invalid_argument("unknown segment type: " + name);
}

void MixtureSpec::validate() const {
  if (snr_db < -5.0 || snr_db > 35.0)
    throw std::invalid_argument("MixtureSpec: snr_db outside [-5, 35]");
  if (segment_type != SegmentType::kSingle &&
      (sir_db < -2.0 || sir_db > 10.0))
    throw std::invalid_argument("MixtureSpec: sir_db outside [-2, 10]");
  if (duration_s <= 0.0)
    throw std::invalid_argument("MixtureSpec: duration must be positive");
}

std::vector<uint8_t> active_mask(const AudioBuffer& buf) {
  const size_t n = buf.samples.size();
  std::vector<uint8_t> mask(n, 0);
  const size_t hop = static_cast<size_t>(buf.sample_rate / 100);
  if (hop == 0 || n == 0) return mask;
  const size_t n_frames = (n + hop - 1) / hop;
  std::vector<double> fe(n_frames, 0.0);
  double peak = 0.0;
  for (size_t f = 0; f < n_frames; ++f) {
    const size_t lo = f * hop, hi = std::min(n, lo + hop);
    double e = 0.0;
    for (size_t i = lo; i < hi; ++i) e += buf.samples[i] * buf.samples[i];
    fe[f] = e / std::max<size_t>(1, hi - lo);
    peak = std::max(peak, fe[f]);
  }
  if (peak <= 0.0) return mask;
  const double thresh = peak * std::pow(10.0, -kActiveMaskDb / 10.0);
  for (size_t f = 0; f < n_frames; ++f) {
    if (fe[f] > thresh) {
      const size_t lo = f * hop, hi = std::min(n, lo + hop);
      std::fill(mask.begin() + lo, mask.begin() + hi, uint8_t{1});
    }
  }
  return mask;
}

double mean_power(const AudioBuffer& buf, const std::vector<uint8_t>& mask) {
  if (buf.samples.size() != mask.size())
    throw std::invalid_argument("mean_power: mask length mismatch");
  double e = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) {
      e += buf.samples[i] * buf.samples[i];
      ++count;
    }
  return count > 0 ? e / count : 0.0;
}

double power_ratio_db(const AudioBuffer& a, const AudioBuffer& b,
                      const std::vector<uint8_t>& mask) {
  const double pa = mean_power(a, mask), pb = mean_power(b, mask);
  if (pa <= 0.0 || pb <= 0.0)
    throw std::invalid_argument("power_ratio_db: silent input");
  return 10.0 * std::log10(pa / pb);
}

MixtureTriple synthesize_mixture(std::span<const AudioBuffer> target_clips,
                                 std::span<const AudioBuffer> interference_clips,
                                 std::span<const AudioBuffer> noise_clips,
                                 const MixtureSpec& spec) {
  spec.validate();
  if (target_clips.empty() || noise_clips.empty())
    throw std::invalid_argument("synthesize_mixture: empty clip pool");
  const bool multi = spec.segment_type != SegmentType::kSingle;
  if (multi && interference_clips.empty())
    throw std::invalid_argument(
        "synthesize_mixture: multi-speaker segment needs interference clips");

  const int fs = kSampleRate;
  const size_t n = static_cast<size_t>(spec.duration_s * fs);
  Rng rng(spec.seed);
  Rng rng_target = rng.fork(1), rng_interf = rng.fork(2),
      rng_noise = rng.fork(3), rng_aug = rng.fork(4), rng_turns = rng.fork(5);

  std::vector<double> target = fill_stream(target_clips, n, rng_target);
  std::vector<double> interf(n, 0.0);
  if (multi) interf = fill_stream(interference_clips, n, rng_interf);

  if (spec.segment_type == SegmentType::kAlternating) {
    // Non-overlapping turns of at least kMinTurnS seconds; the target takes
    // every other turn, a hard gate keeps the streams disjoint.
    const size_t min_turn = static_cast<size_t>(kMinTurnS * fs);
    size_t pos = 0;
    bool target_turn = rng_turns.coin();
    while (pos < n) {
      size_t turn = static_cast<size_t>(rng_turns.uniform(kMinTurnS, 2.0 * kMinTurnS) * fs);
      // If the remainder would create a short tail turn, absorb it.
      if (n - pos < turn + min_turn) turn = n - pos;
      auto& muted = target_turn ? interf : target;
      std::fill(muted.begin() + pos, muted.begin() + std::min(n, pos + turn),
                0.0);
      pos += turn;
      target_turn = !target_turn;
    }
  }

  AudioBuffer target_buf{std::move(target), fs};
  AudioBuffer interf_buf{std::move(interf), fs};
  if (spec.augment_speech) {
    target_buf = apply_augmentations(target_buf, rng_aug.fork(1).seed());
    if (multi)
      interf_buf = apply_augmentations(interf_buf, rng_aug.fork(2).seed());
  }

  // Scale interference for the SIR (mean active powers).
  if (multi) {
    const double pt = mean_power(target_buf, active_mask(target_buf));
    const double pi = mean_power(interf_buf, active_mask(interf_buf));
    if (pt <= 0.0 || pi <= 0.0)
      throw std::runtime_error("synthesize_mixture: degenerate speech stream");
    const double scale = std::sqrt(pt / (pi * std::pow(10.0, spec.sir_db / 10.0)));
    for (double& s : interf_buf.samples) s *= scale;
  }

  AudioBuffer speech;
  speech.sample_rate = fs;
  speech.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    speech.samples[i] = target_buf.samples[i] + interf_buf.samples[i];

  // Scale noise for the SNR over speech-active samples.
  std::vector<double> noise = fill_stream(noise_clips, n, rng_noise);
  AudioBuffer noise_buf{std::move(noise), fs};
  const auto speech_mask = active_mask(speech);
  const double ps = mean_power(speech, speech_mask);
  const double pn = mean_power(noise_buf, speech_mask);
  if (ps <= 0.0 || pn <= 0.0)
    throw std::runtime_error("synthesize_mixture: degenerate noise stream");
  const double nscale = std::sqrt(ps / (pn * std::pow(10.0, spec.snr_db / 10.0)));
  for (double& s : noise_buf.samples) s *= nscale;

  MixtureTriple out;
  out.personalized_ref = target_buf;
  out.non_personalized_ref = speech;
  out.mixture.sample_rate = fs;
  out.mixture.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    out.mixture.samples[i] = speech.samples[i] + noise_buf.samples[i];
  return out;
}

// ---------------------------------------------------------------------------
// Cleanup
// ---------------------------------------------------------------------------

MultiSpeakerResult detect_multispeaker(const AudioBuffer& clip,
                                       const EmbedderModel& embedder) {
  constexpr double kChunkS = 30.0, kHopS = 15.0, kThreshold = 0.8;
  MultiSpeakerResult res;
  const size_t chunk = static_cast<size_t>(kChunkS * clip.sample_rate);
  const size_t hop = static_cast<size_t>(kHopS * clip.sample_rate);
  std::vector<SpeakerEmbedding> embeddings;
  for (size_t start = 0; start + chunk <= clip.samples.size(); start += hop) {
    AudioBuffer piece;
    piece.sample_rate = clip.sample_rate;
    piece.samples.assign(clip.samples.begin() + start,
                         clip.samples.begin() + start + chunk);
    embeddings.push_back(embed(embedder, piece));
  }
  res.n_chunks = static_cast<int>(embeddings.size());
  if (embeddings.size() < 2) return res;  // too short to judge; keep
  double sum = 0.0;
  int pairs = 0;
  for (size_t i = 0; i < embeddings.size(); ++i)
    for (size_t j = i + 1; j < embeddings.size(); ++j) {
      sum += cosine_similarity(embeddings[i], embeddings[j]);
      ++pairs;
    }
  res.avg_similarity = sum / pairs;
  res.is_multi = res.avg_similarity < kThreshold;
  return res;
}

std::vector<std::string> select_interference(
    const SpeakerEmbedding& target_embedding,
    const std::map<std::string, std::vector<SpeakerEmbedding>>& candidates) {
  constexpr double kThreshold = 0.5;
  std::vector<std::string> eligible;
  for (const auto& [speaker, clips] : candidates) {
    if (clips.empty()) continue;
    double sum = 0.0;
    for (const auto& e : clips) sum += cosine_similarity(target_embedding, e);
    if (sum / clips.size() < kThreshold) eligible.push_back(speaker);
  }
  return eligible;
}

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

std::vector<AudioBuffer> speaker_clips(int speaker_index,
                                       const CorpusConfig& config) {
  std::vector<AudioBuffer> clips;
  clips.reserve(config.utterances_per_speaker);
  for (int u = 0; u < config.utterances_per_speaker; ++u)
    clips.push_back(synth_utterance(speaker_index, u, config.seed,
                                    config.utterance_duration_s));
  return clips;
}

AudioBuffer enrollment_clip(int speaker_index, const CorpusConfig& config) {
  // Utterance index past the mixing pool, so enrollment is held out.
  return synth_utterance(speaker_index, config.utterances_per_speaker + 1000,
                         config.seed, config.utterance_duration_s);
}

std::vector<SegmentRecord> plan_corpus(const CorpusConfig& config) {
  if (config.n_speakers < 2)
    throw std::invalid_argument("plan_corpus: need at least 2 speakers");
  std::vector<SegmentRecord> records;
  Rng base = Rng(config.seed).fork(0x706c616e);
  for (int s = 0; s < config.n_speakers; ++s) {
    for (int i = 0; i < config.segments_per_speaker; ++i) {
      Rng rng = base.fork(static_cast<uint64_t>(s) * 1000003 + i);
      SegmentRecord rec;
      rec.id = "spk" + std::to_string(s) + "_seg" + std::to_string(i);
      // 2:1:1 proportion of overlapping / alternating / single.
      const int slot = i % 4;
      rec.type = slot <= 1 ? SegmentType::kOverlapping
                 : slot == 2 ? SegmentType::kAlternating
                             : SegmentType::kSingle;
      rec.seed = rng.next_u64();
      rec.snr_db = rng.uniform(config.snr_lo_db, config.snr_hi_db);
      rec.sir_db = rec.type == SegmentType::kSingle
                       ? 0.0
                       : rng.uniform(config.sir_lo_db, config.sir_hi_db);
      rec.duration_s = config.segment_duration_s;
      rec.target_speaker = s;
      rec.interference_speaker =
          rec.type == SegmentType::kSingle
              ? -1
              : static_cast<int>((s + 1 + rng.uniform_int(0, config.n_speakers - 2)) %
                                 config.n_speakers);
      rec.augment_speech = config.augment_speech;
      for (int u = 0; u < config.utterances_per_speaker; ++u)
        rec.source_clips.push_back("spk" + std::to_string(s) + "_utt" +
                                   std::to_string(u));
      records.push_back(std::move(rec));
    }
  }
  return records;
}

MixtureTriple render_segment(const SegmentRecord& record,
                             const CorpusConfig& config) {
  const auto target = speaker_clips(record.target_speaker, config);
  std::vector<AudioBuffer> interference;
  if (record.interference_speaker >= 0)
    interference = speaker_clips(record.interference_speaker, config);
  std::vector<AudioBuffer> noise;
  Rng nrng = Rng(record.seed).fork(0x6e636c70);
  for (int k = 0; k < 2; ++k)
    noise.push_back(synth_noise_clip(static_cast<int>(nrng.uniform_int(0, 3)),
                                     nrng.next_u64(),
                                     std::min(record.duration_s, 10.0) + 1.0));
  MixtureSpec spec;
  spec.segment_type = record.type;
  spec.snr_db = record.snr_db;
  spec.sir_db = record.sir_db;
  spec.duration_s = record.duration_s;
  spec.seed = record.seed;
  spec.augment_speech = record.augment_speech;
  return synthesize_mixture(target, interference, noise, spec);
}

void write_manifest(const std::string& path,
                    const std::vector<SegmentRecord>& records) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot create manifest: " + path);
  for (const auto& r : records) {
    nlohmann::json j{{"id", r.id},
                     {"type", segment_type_name(r.type)},
                     {"seed", r.seed},
                     {"snr_db", r.snr_db},
                     {"sir_db", r.sir_db},
                     {"duration_s", r.duration_s},
                     {"target_speaker", r.target_speaker},
                     {"interference_speaker", r.interference_speaker},
                     {"augment_speech", r.augment_speech},
                     {"source_clips", r.source_clips}};
    f << j.dump() << '\n';
  }
}

std::vector<SegmentRecord> read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open manifest: " + path);
  std::vector<SegmentRecord> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    SegmentRecord r;
    r.id = j.at("id").get<std::string>();
    r.type = segment_type_from_name(j.at("type").get<std::string>());
    r.seed = j.at("seed").get<uint64_t>();
    r.snr_db = j.at("snr_db").get<double>();
    r.sir_db = j.at("sir_db").get<double>();
    r.duration_s = j.at("duration_s").get<double>();
    r.target_speaker = j.at("target_speaker").get<int>();
    r.interference_speaker = j.at("interference_speaker").get<int>();
    r.augment_speech = j.at("augment_speech").get<bool>();
    r.source_clips = j.at("source_clips").get<std::vector<std::string>>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace upn
