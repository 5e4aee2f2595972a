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
#include <cstdio>
#include <filesystem>

#include "upn/audio.hpp"
#include "upn/rng.hpp"

using namespace upn;

namespace {

AudioBuffer tone(double freq, double seconds, int rate, double amp = 0.5) {
  AudioBuffer b;
  b.sample_rate = rate;
  const size_t n = static_cast<size_t>(seconds * rate);
  b.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    b.samples[i] = amp * std::sin(2.0 * 3.141592653589793 * freq * i / rate);
  return b;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("wav float round trip is lossless at f32 precision") {
  const auto path = temp_path("upn_test_f32.wav");
  auto buf = tone(440.0, 0.25, 48000);
  write_wav(path, buf, WavFormat::kFloat32);
  const auto back = read_wav(path);
  REQUIRE(back.samples.size() == buf.samples.size());
  CHECK(back.sample_rate == 48000);
  for (size_t i = 0; i < buf.samples.size(); i += 37)
    CHECK(back.samples[i] ==
          doctest::Approx(buf.samples[i]).epsilon(1e-6));
  std::remove(path.c_str());
}

TEST_CASE("wav pcm16 round trip stays within dither noise") {
  const auto path = temp_path("upn_test_pcm.wav");
  auto buf = tone(440.0, 0.25, 48000);
  write_wav(path, buf, WavFormat::kPcm16);
  const auto back = read_wav(path);
  REQUIRE(back.samples.size() == buf.samples.size());
  double err = 0.0;
  for (size_t i = 0; i < buf.samples.size(); ++i)
    err = std::max(err, std::abs(back.samples[i] - buf.samples[i]));
  CHECK(err < 3.0 / 32768.0);
  std::remove(path.c_str());
}

TEST_CASE("multichannel wav is rejected") {
  const auto path = temp_path("upn_test_stereo.wav");
  // Hand-written stereo header with 4 samples.
  FILE* f = std::fopen(path.c_str(), "wb");
  REQUIRE(f != nullptr);
  const unsigned char hdr[] = {
      'R', 'I', 'F', 'F', 52, 0, 0, 0, 'W', 'A', 'V', 'E',
      'f', 'm', 't', ' ', 16, 0, 0, 0, 1, 0, 2, 0,
      0x80, 0xbb, 0, 0, 0, 0xee, 0x02, 0, 4, 0, 16, 0,
      'd', 'a', 't', 'a', 16, 0, 0, 0};
  std::fwrite(hdr, 1, sizeof(hdr), f);
  const unsigned char zeros[16] = {};
  std::fwrite(zeros, 1, 16, f);
  std::fclose(f);
  CHECK_THROWS_WITH_AS(read_wav(path), doctest::Contains("multichannel"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("resampler preserves a mid-band tone") {
  const auto in = tone(1000.0, 0.5, 44100);
  const auto out = resample(in, 48000);
  CHECK(out.sample_rate == 48000);
  CHECK(out.samples.size() ==
        static_cast<size_t>(std::llround(in.samples.size() * 48000.0 / 44100.0)));
  // Compare against the ideal tone away from the edges.
  double err = 0.0;
  for (size_t i = 1000; i + 1000 < out.samples.size(); ++i) {
    const double want =
        0.5 * std::sin(2.0 * 3.141592653589793 * 1000.0 * i / 48000.0);
    err = std::max(err, std::abs(out.samples[i] - want));
  }
  CHECK(err < 1e-3);
}

TEST_CASE("resampler is the identity at matching rates") {
  const auto in = tone(500.0, 0.1, 48000);
  const auto out = resample(in, 48000);
  CHECK(out.samples == in.samples);
}

TEST_CASE("downsampling suppresses content above the new Nyquist") {
  // 21 kHz tone sampled at 96 kHz must mostly vanish at 32 kHz output.
  const auto in = tone(21000.0, 0.25, 96000);
  const auto out = resample(in, 32000);
  CHECK(rms(out) < 0.02);  // input rms is 0.35
}
