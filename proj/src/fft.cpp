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

#include "upn/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace upn {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

int smallest_factor(int n) {
  for (int p : {2, 3, 5}) {
    if (n % p == 0) return p;
  }
  return n;  // naive DFT handles the remaining prime
}

// Recursive decimation-in-time. `in` is strided; `out` receives the
// contiguous length-n transform. `scratch` must hold n elements; the
// callee may use `out` as its children's scratch (disjoint partitions).
void fft_rec(const Complex* in, int stride, Complex* out, Complex* scratch,
             int n, int root_n, const Complex* tw) {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const int p = smallest_factor(n);
  if (p == n) {
    // Prime size other than 2/3/5: naive DFT.
    const int step = root_n / n;
    for (int k = 0; k < n; ++k) {
      Complex acc = in[0];
      for (int j = 1; j < n; ++j) {
        acc += in[j * stride] * tw[static_cast<long long>(j) * k % n * step];
      }
      out[k] = acc;
    }
    return;
  }
  const int m = n / p;
  for (int j = 0; j < p; ++j) {
    fft_rec(in + j * stride, stride * p, scratch + j * m, out + j * m, m,
            root_n, tw);
  }
  const int step = root_n / n;
  for (int k1 = 0; k1 < m; ++k1) {
    for (int k2 = 0; k2 < p; ++k2) {
      const int k = k2 * m + k1;
      Complex acc = scratch[k1];
      for (int j = 1; j < p; ++j) {
        acc += scratch[j * m + k1] *
               tw[static_cast<long long>(j) * k % n * step];
      }
      out[k] = acc;
    }
  }
}

}  // namespace

Fft::Fft(int n) : n_(n) {
  if (n <= 0) throw std::invalid_argument("Fft: size must be positive");
  twiddle_.resize(n);
  twiddle_inv_.resize(n);
  for (int t = 0; t < n; ++t) {
    const double phase = -kTwoPi * t / n;
    twiddle_[t] = Complex(std::cos(phase), std::sin(phase));
    twiddle_inv_[t] = std::conj(twiddle_[t]);
  }
}

void Fft::transform(std::span<const Complex> in, std::span<Complex> out,
                    bool inv) const {
  if (static_cast<int>(in.size()) != n_ || static_cast<int>(out.size()) != n_)
    throw std::invalid_argument("Fft: buffer size mismatch");
  std::vector<Complex> scratch(n_);
  fft_rec(in.data(), 1, out.data(), scratch.data(), n_, n_,
          inv ? twiddle_inv_.data() : twiddle_.data());
  if (inv) {
    const double s = 1.0 / n_;
    for (auto& v : out) v *= s;
  }
}

void Fft::forward(std::span<const Complex> in, std::span<Complex> out) const {
  transform(in, out, false);
}

void Fft::inverse(std::span<const Complex> in, std::span<Complex> out) const {
  transform(in, out, true);
}

void Fft::forward_real(std::span<const double> in,
                       std::span<Complex> bins) const {
  if (n_ % 2 != 0) throw std::invalid_argument("forward_real: n must be even");
  if (static_cast<int>(in.size()) != n_ ||
      static_cast<int>(bins.size()) != n_ / 2 + 1)
    throw std::invalid_argument("forward_real: buffer size mismatch");
  std::vector<Complex> x(n_), y(n_);
  for (int i = 0; i < n_; ++i) x[i] = Complex(in[i], 0.0);
  transform(x, y, false);
  for (int k = 0; k <= n_ / 2; ++k) bins[k] = y[k];
}

void Fft::inverse_real(std::span<const Complex> bins,
                       std::span<double> out) const {
  if (n_ % 2 != 0) throw std::invalid_argument("inverse_real: n must be even");
  if (static_cast<int>(bins.size()) != n_ / 2 + 1 ||
      static_cast<int>(out.size()) != n_)
    throw std::invalid_argument("inverse_real: buffer size mismatch");
  std::vector<Complex> x(n_), y(n_);
  for (int k = 0; k <= n_ / 2; ++k) x[k] = bins[k];
  for (int k = n_ / 2 + 1; k < n_; ++k) x[k] = std::conj(bins[n_ - k]);
  transform(x, y, true);
  for (int i = 0; i < n_; ++i) out[i] = y[i].real();
}

std::vector<double> fft_convolve(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const size_t out_len = a.size() + b.size() - 1;
  // Next 5-smooth size >= out_len keeps the mixed-radix path fast.
  int n = 1;
  while (static_cast<size_t>(n) < out_len) n *= 2;
  for (int cand = static_cast<int>(out_len); cand < n; ++cand) {
    int m = cand;
    for (int p : {2, 3, 5})
      while (m % p == 0) m /= p;
    if (m == 1) {
      n = cand;
      break;
    }
  }
  if (n % 2 != 0) n *= 2;
  Fft fft(n);
  std::vector<Complex> fa(n / 2 + 1), fb(n / 2 + 1);
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  fft.forward_real(pa, fa);
  fft.forward_real(pb, fb);
  for (size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  std::vector<double> full(n);
  fft.inverse_real(fa, full);
  full.resize(out_len);
  return full;
}

}  // namespace upn
