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

#include "upn/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "upn/rng.hpp"

namespace upn {

namespace {

uint32_t read_u32(std::istream& s) {
  unsigned char b[4];
  s.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream& s) {
  unsigned char b[2];
  s.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& s, uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
  s.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16(std::ostream& s, uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff)};
  s.write(reinterpret_cast<const char*>(b), 2);
}

// Zeroth-order modified Bessel function, power series.
double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = 0.25 * x * x;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = 3.141592653589793 * x;
  return std::sin(px) / px;
}

}  // namespace

double energy(const AudioBuffer& buf) {
  double e = 0.0;
  for (double s : buf.samples) e += s * s;
  return e;
}

double rms(const AudioBuffer& buf) {
  if (buf.samples.empty()) return 0.0;
  return std::sqrt(energy(buf) / buf.samples.size());
}

AudioBuffer read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open WAV file: " + path);

  char tag[4];
  f.read(tag, 4);
  if (!f || std::memcmp(tag, "RIFF", 4) != 0)
    throw std::runtime_error("not a RIFF file: " + path);
  read_u32(f);  // riff size
  f.read(tag, 4);
  if (!f || std::memcmp(tag, "WAVE", 4) != 0)
    throw std::runtime_error("not a WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  AudioBuffer out;

  while (f.read(tag, 4)) {
    uint32_t chunk_size = read_u32(f);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format = read_u16(f);
      channels = read_u16(f);
      rate = read_u32(f);
      read_u32(f);  // byte rate
      read_u16(f);  // block align
      bits = read_u16(f);
      uint32_t consumed = 16;
      if (format == 0xFFFE && chunk_size >= 40) {
        read_u16(f);  // cbSize
        read_u16(f);  // valid bits
        read_u32(f);  // channel mask
        format = read_u16(f);  // first two bytes of the subformat GUID
        f.ignore(14);
        consumed = 40;
      }
      if (chunk_size > consumed) f.ignore(chunk_size - consumed);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw std::runtime_error("WAV data before fmt: " + path);
      if (channels != 1)
        throw std::runtime_error(
            "multichannel WAV not supported (got " +
            std::to_string(channels) + " channels): " + path);
      std::vector<char> raw(chunk_size);
      f.read(raw.data(), chunk_size);
      if (!f) throw std::runtime_error("truncated WAV data: " + path);
      const unsigned char* p = reinterpret_cast<unsigned char*>(raw.data());
      if (format == 1 && bits == 16) {
        const size_t n = chunk_size / 2;
        out.samples.resize(n);
        for (size_t i = 0; i < n; ++i) {
          int16_t v = static_cast<int16_t>(p[2 * i] | (p[2 * i + 1] << 8));
          out.samples[i] = v / 32768.0;
        }
      } else if (format == 1 && bits == 24) {
        const size_t n = chunk_size / 3;
        out.samples.resize(n);
        for (size_t i = 0; i < n; ++i) {
          int32_t v = p[3 * i] | (p[3 * i + 1] << 8) | (p[3 * i + 2] << 16);
          if (v & 0x800000) v |= ~0xFFFFFF;  // sign extend
          out.samples[i] = v / 8388608.0;
        }
      } else if (format == 3 && bits == 32) {
        const size_t n = chunk_size / 4;
        out.samples.resize(n);
        for (size_t i = 0; i < n; ++i) {
          uint32_t u = static_cast<uint32_t>(p[4 * i]) |
                       (static_cast<uint32_t>(p[4 * i + 1]) << 8) |
                       (static_cast<uint32_t>(p[4 * i + 2]) << 16) |
                       (static_cast<uint32_t>(p[4 * i + 3]) << 24);
          float v;
          std::memcpy(&v, &u, 4);
          out.samples[i] = v;
        }
      } else {
        throw std::runtime_error(
            "unsupported WAV format (want 16/24-bit PCM or 32-bit float): " +
            path);
      }
      out.sample_rate = static_cast<int>(rate);
      return out;
    } else {
      f.ignore(chunk_size + (chunk_size & 1));
    }
  }
  throw std::runtime_error("WAV file has no data chunk: " + path);
}

void write_wav(const std::string& path, const AudioBuffer& buf,
               WavFormat format) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot create WAV file: " + path);
  const uint32_t n = static_cast<uint32_t>(buf.samples.size());
  const uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const uint16_t fmt = format == WavFormat::kPcm16 ? 1 : 3;
  const uint32_t data_size = n * (bits / 8);

  f.write("RIFF", 4);
  write_u32(f, 36 + data_size);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  write_u32(f, 16);
  write_u16(f, fmt);
  write_u16(f, 1);
  write_u32(f, static_cast<uint32_t>(buf.sample_rate));
  write_u32(f, static_cast<uint32_t>(buf.sample_rate) * (bits / 8));
  write_u16(f, bits / 8);
  write_u16(f, bits);
  f.write("data", 4);
  write_u32(f, data_size);

  if (format == WavFormat::kPcm16) {
    Rng dither(0x64697468);  // fixed stream so writes are reproducible
    for (double s : buf.samples) {
      // TPDF dither of one LSB peak-to-peak before rounding.
      const double d = (dither.uniform() - dither.uniform());
      double v = s * 32767.0 + d;
      v = std::clamp(v, -32768.0, 32767.0);
      const int16_t q = static_cast<int16_t>(std::lrint(v));
      write_u16(f, static_cast<uint16_t>(q));
    }
  } else {
    for (double s : buf.samples) {
      float v = static_cast<float>(s);
      uint32_t u;
      std::memcpy(&u, &v, 4);
      write_u32(f, u);
    }
  }
  if (!f) throw std::runtime_error("short write to WAV file: " + path);
}

AudioBuffer resample(const AudioBuffer& in, int target_rate) {
  if (in.sample_rate <= 0) throw std::invalid_argument("invalid sample rate");
  if (in.sample_rate == target_rate) return in;

  constexpr int kHalfTaps = 16;  // 32-tap kernel
  constexpr double kBeta = 8.0;
  const double ratio = static_cast<double>(in.sample_rate) / target_rate;
  // When decimating, scale the sinc cutoff to the output Nyquist.
  const double cutoff = std::min(1.0, 1.0 / ratio);
  const double i0_beta = bessel_i0(kBeta);

  const size_t out_len = static_cast<size_t>(std::llround(
      static_cast<double>(in.samples.size()) * target_rate / in.sample_rate));
  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);

  const auto& x = in.samples;
  const int64_t ni = static_cast<int64_t>(x.size());
  for (size_t i = 0; i < out_len; ++i) {
    const double pos = i * ratio;
    const int64_t center = static_cast<int64_t>(std::floor(pos));
    double acc = 0.0, wsum = 0.0;
    for (int64_t m = center - kHalfTaps + 1; m <= center + kHalfTaps; ++m) {
      const double t = pos - static_cast<double>(m);
      const double u = t / kHalfTaps;
      if (u <= -1.0 || u >= 1.0) continue;
      const double w =
          cutoff * sinc(cutoff * t) * bessel_i0(kBeta * std::sqrt(1.0 - u * u)) / i0_beta;
      wsum += w;
      if (m >= 0 && m < ni) acc += w * x[m];
    }
    // Normalizing by the kernel sum flattens passband ripple.
    out.samples[i] = wsum > 0.0 ? acc / wsum : 0.0;
  }
  return out;
}

AudioBuffer load_wav_48k(const std::string& path) {
  return resample(read_wav(path), kSampleRate);
}

}  // namespace upn
