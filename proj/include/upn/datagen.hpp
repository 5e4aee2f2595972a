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

#ifndef UPN_DATAGEN_HPP
#define UPN_DATAGEN_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "upn/audio.hpp"
#include "upn/embedder.hpp"

namespace upn {

// ---------------------------------------------------------------------------
// Synthetic voices and noises
// ---------------------------------------------------------------------------

/// Deterministic synthetic "speaker": a sawtooth voice with a fixed pitch
/// range, two formant resonances and a spectral tilt that together make
/// speakers separable, gated into syllables and utterance pauses.
struct ToyVoice {
  double f0_lo_hz, f0_hi_hz;
  double formant1_hz, formant2_hz;
  double tilt_cutoff_hz;
};

ToyVoice toy_voice(int speaker_index);

/// One utterance of the given speaker; reproducible from (seed, speaker,
/// utterance) alone.
AudioBuffer synth_utterance(int speaker_index, int utterance_index,
                            uint64_t corpus_seed, double duration_s);

/// Background noise clip; `kind` cycles through white, pink, mains hum and
/// low rumble.
AudioBuffer synth_noise_clip(int kind, uint64_t seed, double duration_s);

// ---------------------------------------------------------------------------
// Augmentations
// ---------------------------------------------------------------------------

/// The four independent speech augmentations, each applied with
/// probability 0.5: synthetic reverb, 4th-order low-pass, one peaking-EQ
/// biquad (Q = 1), and a level change.
struct AugmentationPlan {
  std::optional<double> reverb_rt60_s;   // U(0.1, 0.6)
  std::optional<double> lowpass_hz;      // U(4k, 24k)
  std::optional<double> eq_center_hz;    // log-U(100, 12k)
  double eq_gain_db = 0.0;               // U(-6, +6)
  std::optional<double> level_db;        // U(-10, 0)
};

AugmentationPlan plan_augmentations(uint64_t seed);
AudioBuffer apply_augmentation_plan(const AudioBuffer& buf,
                                    const AugmentationPlan& plan,
                                    uint64_t seed);
AudioBuffer apply_augmentations(const AudioBuffer& buf, uint64_t seed);

// ---------------------------------------------------------------------------
// Mixture synthesis
// ---------------------------------------------------------------------------

enum class SegmentType { kOverlapping, kAlternating, kSingle };

std::string segment_type_name(SegmentType t);
SegmentType segment_type_from_name(const std::string& name);

struct MixtureSpec {
  SegmentType segment_type = SegmentType::kOverlapping;
  double snr_db = 10.0;     // drawn from U(-5, 35) by the corpus generator
  double sir_db = 5.0;      // drawn from U(-2, 10), multi-speaker only
  double duration_s = 5.0;
  uint64_t seed = 0;
  bool augment_speech = false;  // reverb/low-pass/EQ/level on speech streams

  void validate() const;
};

/// The mixture and its two training references. By construction
/// mixture = personalized_ref + interference + noise, sample-exact; for
/// single-speaker segments the two references are identical.
struct MixtureTriple {
  AudioBuffer mixture;
  AudioBuffer personalized_ref;      // target speaker only
  AudioBuffer non_personalized_ref;  // all speakers
};

/// Places speech per segment type (overlapping speakers, alternating turns
/// of at least 3 s, or target only), scales interference to the requested
/// SIR and noise to the requested SNR. Ratios are mean-power ratios over
/// speech-active samples (frames within 35 dB of the stream's peak), so
/// re-measuring them reproduces the request to float precision. Clips that
/// are too short to fill the duration are looped with 0.5 s crossfades.
MixtureTriple synthesize_mixture(std::span<const AudioBuffer> target_clips,
                                 std::span<const AudioBuffer> interference_clips,
                                 std::span<const AudioBuffer> noise_clips,
                                 const MixtureSpec& spec);

/// Per-sample speech-activity mask from 10 ms frame energies within 35 dB
/// of the loudest frame.
std::vector<uint8_t> active_mask(const AudioBuffer& buf);
double mean_power(const AudioBuffer& buf, const std::vector<uint8_t>& mask);

/// SNR/SIR re-measurement used by tests: mean-power ratio in dB between the
/// two signals over the given mask.
double power_ratio_db(const AudioBuffer& a, const AudioBuffer& b,
                      const std::vector<uint8_t>& mask);

// ---------------------------------------------------------------------------
// Semi-supervised cleanup
// ---------------------------------------------------------------------------

struct MultiSpeakerResult {
  bool is_multi = false;
  double avg_similarity = 1.0;
  int n_chunks = 0;
};

/// Splits the clip into 30 s chunks with a 15 s hop, embeds each, and flags
/// the clip as multi-speaker when the average pairwise cosine similarity
/// falls below 0.8. Clips with fewer than two chunks are never flagged.
MultiSpeakerResult detect_multispeaker(const AudioBuffer& clip,
                                       const EmbedderModel& embedder);

/// Speakers whose clips average below 0.5 cosine similarity against the
/// target embedding; eligible as interference.
std::vector<std::string> select_interference(
    const SpeakerEmbedding& target_embedding,
    const std::map<std::string, std::vector<SpeakerEmbedding>>& candidates);

// ---------------------------------------------------------------------------
// Corpus generation
// ---------------------------------------------------------------------------

struct CorpusConfig {
  int n_speakers = 8;
  int utterances_per_speaker = 4;  // clip pool per speaker
  double utterance_duration_s = 6.0;
  int segments_per_speaker = 8;
  double segment_duration_s = 5.0;
  double snr_lo_db = -5.0, snr_hi_db = 35.0;
  double sir_lo_db = -2.0, sir_hi_db = 10.0;
  bool augment_speech = true;
  uint64_t seed = 1;
};

/// Everything needed to regenerate one segment bit-exactly.
struct SegmentRecord {
  std::string id;
  SegmentType type;
  uint64_t seed = 0;
  double snr_db = 0.0, sir_db = 0.0;
  double duration_s = 0.0;
  int target_speaker = -1;
  int interference_speaker = -1;  // -1 for single-speaker segments
  bool augment_speech = false;
  std::vector<std::string> source_clips;
};

/// Segment plan for a whole corpus: per speaker, segment types in the
/// 2:1:1 overlapping/alternating/single proportion with per-segment draws.
std::vector<SegmentRecord> plan_corpus(const CorpusConfig& config);

/// Regenerates the triple for a manifest record (bit-exact per seed).
MixtureTriple render_segment(const SegmentRecord& record,
                             const CorpusConfig& config);

/// Speaker utterance pool (shared by rendering, enrollment, cleanup).
std::vector<AudioBuffer> speaker_clips(int speaker_index,
                                       const CorpusConfig& config);
/// A held-out enrollment utterance (not part of the mixing pool).
AudioBuffer enrollment_clip(int speaker_index, const CorpusConfig& config);

/// JSON-lines manifest I/O.
void write_manifest(const std::string& path,
                    const std::vector<SegmentRecord>& records);
std::vector<SegmentRecord> read_manifest(const std::string& path);

}  // namespace upn

#endif  // UPN_DATAGEN_HPP
