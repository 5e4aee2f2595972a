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

#ifndef UPN_NET_HPP
#define UPN_NET_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "upn/conditioning.hpp"
#include "upn/dsp.hpp"
#include "upn/postproc.hpp"
#include "upn/tensor_io.hpp"

namespace upn {

/// Enhancer topology: two 1-D convolutions over time, the conditioning
/// vector appended ahead of a GRU stack, and three sigmoid heads.
struct NetConfig {
  int feat_dim = kFeatureDim;
  int cond_dim = 33;  // embedding dim + 1
  int conv_channels = 64;
  int gru_layers = 3;
  int gru_hidden = 128;
  int n_bands = kNumBands;

  void validate() const;
  int gru_input_dim(int layer) const {
    return layer == 0 ? conv_channels + cond_dim : gru_hidden;
  }
};

struct GruParams {
  std::vector<double> wz, uz, bz;  // update gate
  std::vector<double> wr, ur, br;  // reset gate
  std::vector<double> wc, uc, bc;  // candidate
};

/// All trainable tensors. Values live on the 32-bit float grid right after
/// init or load; training moves them off it until the next save.
struct NetParams {
  NetConfig config;
  std::vector<double> conv1_w, conv1_b;  // [C][3][feat], [C]
  std::vector<double> conv2_w, conv2_b;  // [C][3][C], [C]
  std::vector<GruParams> gru;
  std::vector<double> gain_w, gain_b;          // [n_bands][H]
  std::vector<double> strength_w, strength_b;  // [n_bands][H]
  std::vector<double> vad_w, vad_b;            // [1][H]

  /// Stable (name, dims, values) view over every tensor, in a fixed order.
  std::vector<NamedTensor> to_tensors() const;
  static NetParams from_tensors(const std::vector<NamedTensor>& tensors);

  /// In-place views over every tensor in to_tensors() order (optimizer use).
  std::vector<std::vector<double>*> tensor_views();
  std::vector<const std::vector<double>*> tensor_views() const;
};

NetParams init_params(const NetConfig& config, uint64_t seed);

/// Same shapes as NetParams; used for gradients and optimizer slots.
NetParams zeros_like(const NetParams& params);

/// Per-stream recurrent state: GRU hidden vectors plus the two-frame input
/// history each convolution needs. Zeroed at stream start.
struct NetState {
  std::vector<std::vector<double>> gru_h;       // [layers][H]
  std::array<std::vector<double>, 2> conv1_in;  // features at t-2, t-1
  std::array<std::vector<double>, 2> conv2_in;  // conv1 outputs at t-2, t-1
};

NetState make_state(const NetConfig& config);

using FeatureSeq = std::vector<std::array<double, kFeatureDim>>;

/// Streaming forward pass. The network is strictly causal in its step
/// index: output step i depends on inputs 0..i only, so chunked calls with
/// a carried state are bit-identical to one whole-sequence call. The
/// 30 ms pipeline look-ahead is realized by forward_aligned's two-step
/// output shift plus the analysis window.
std::vector<EnhancerOutput> forward(const NetParams& params,
                                    const FeatureSeq& features,
                                    const std::vector<ConditionVector>& conds,
                                    NetState& state);

/// Frame-aligned inference: runs the causal network over the sequence plus
/// two zero-feature flush steps (final condition held) and returns one
/// output per input frame, each having seen two frames of feature
/// look-ahead. Training and inference both use this alignment.
std::vector<EnhancerOutput> forward_aligned(
    const NetParams& params, const FeatureSeq& features,
    const std::vector<ConditionVector>& conds);

/// Forward pass that records every activation needed by backward().
struct ForwardTrace;
struct TracedForward {
  std::vector<EnhancerOutput> outputs;
  std::shared_ptr<ForwardTrace> trace;
};
TracedForward forward_traced(const NetParams& params,
                             const FeatureSeq& features,
                             const std::vector<ConditionVector>& conds);

/// Per-step loss gradients with respect to the three heads.
struct OutputGrads {
  std::array<double, kNumBands> d_gains{};
  std::array<double, kNumBands> d_strengths{};
  double d_vad = 0.0;
};

/// Exact reverse-mode gradients through heads, GRU stack (BPTT),
/// conditioning concat and both convolutions.
NetParams backward(const NetParams& params, const TracedForward& fwd,
                   const std::vector<OutputGrads>& grads_out);

/// Convenience wrapper: forward + backward in one call.
NetParams backward(const NetParams& params, const FeatureSeq& features,
                   const std::vector<ConditionVector>& conds,
                   const std::vector<OutputGrads>& grads_out);

/// Checkpoint I/O ("UPNCKPT1" container). Loading reconstructs the config
/// from tensor shapes and fails atomically on any mismatch.
void save_params(const NetParams& params, const std::string& path);
NetParams load_params(const std::string& path);

}  // namespace upn

#endif  // UPN_NET_HPP
