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

#ifndef UPN_FFT_HPP
#define UPN_FFT_HPP

#include <complex>
#include <span>
#include <vector>

namespace upn {

using Complex = std::complex<double>;

/// Mixed-radix (2/3/5, with a naive fallback for other prime factors) FFT.
///
/// Self-contained so transforms are bit-reproducible across runs and safe to
/// run from several threads at once; a plan holds only twiddle tables and is
/// immutable after construction.
class Fft {
 public:
  explicit Fft(int n);

  int size() const { return n_; }

  /// Unnormalized forward DFT: out[k] = sum_n in[n] e^{-2pi i k n / N}.
  void forward(std::span<const Complex> in, std::span<Complex> out) const;

  /// Inverse DFT including the 1/N normalization.
  void inverse(std::span<const Complex> in, std::span<Complex> out) const;

  /// Forward DFT of a real signal; writes the n/2+1 nonnegative-frequency
  /// bins. Requires even n.
  void forward_real(std::span<const double> in, std::span<Complex> bins) const;

  /// Inverse of forward_real: reconstructs the real signal from n/2+1 bins
  /// assuming Hermitian symmetry. Includes the 1/N normalization.
  void inverse_real(std::span<const Complex> bins,
                    std::span<double> out) const;

 private:
  void transform(std::span<const Complex> in, std::span<Complex> out,
                 bool inv) const;

  int n_;
  std::vector<Complex> twiddle_;      // e^{-2pi i t / n}
  std::vector<Complex> twiddle_inv_;  // e^{+2pi i t / n}
};

/// Linear convolution of two real signals via FFT (length a+b-1).
std::vector<double> fft_convolve(std::span<const double> a,
                                 std::span<const double> b);

}  // namespace upn

#endif  // UPN_FFT_HPP
