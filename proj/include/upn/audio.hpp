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

#ifndef UPN_AUDIO_HPP
#define UPN_AUDIO_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace upn {

constexpr int kSampleRate = 48000;

/// Mono audio, 64-bit samples nominally in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
  size_t size() const { return samples.size(); }
};

double rms(const AudioBuffer& buf);
double energy(const AudioBuffer& buf);

/// Reads a mono WAV file (16/24-bit PCM or 32-bit float, any rate).
/// Multichannel input and other sample formats are rejected.
AudioBuffer read_wav(const std::string& path);

enum class WavFormat { kPcm16, kFloat32 };

/// Writes a mono WAV file at the buffer's sample rate. PCM output is
/// TPDF-dithered at 1 LSB before truncation.
void write_wav(const std::string& path, const AudioBuffer& buf,
               WavFormat format = WavFormat::kPcm16);

/// Sample-rate conversion with a 32-tap Kaiser (beta = 8) windowed sinc.
/// Identity when rates already match.
AudioBuffer resample(const AudioBuffer& in, int target_rate);

/// read_wav + resample to 48 kHz.
AudioBuffer load_wav_48k(const std::string& path);

}  // namespace upn

#endif  // UPN_AUDIO_HPP
