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

#include "upn/net.hpp"

#include <cmath>
#include <stdexcept>

#include "upn/rng.hpp"

namespace upn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Fixed input conditioning: compresses the unbounded feature dimensions
// into ranges the tanh convolutions can digest. Constants, not parameters.
inline void normalize_features(const std::array<double, kFeatureDim>& in,
                               std::array<double, kFeatureDim>& out) {
  for (int i = 0; i < kNumBands; ++i) out[i] = 0.5 * std::log1p(in[i]);
  for (int i = kNumBands; i < 2 * kNumBands; ++i) out[i] = in[i];
  out[64] = in[64];
  out[65] = in[65];
  out[66] = (in[66] + 100.0) / 50.0 - 1.0;
  out[67] = in[67] / 10.0;
}

// y += W x, W is [rows][cols] row-major.
inline void matvec_acc(const double* w, const double* x, double* y, int rows,
                       int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* wr = w + static_cast<size_t>(r) * cols;
    double acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] += acc;
  }
}

// x_grad += W^T d.
inline void matvec_t_acc(const double* w, const double* d, double* x_grad,
                         int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double dr = d[r];
    if (dr == 0.0) continue;
    const double* wr = w + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) x_grad[c] += wr[c] * dr;
  }
}

// gW += d (outer) x.
inline void outer_acc(const double* d, const double* x, double* gw, int rows,
                      int cols) {
  for (int r = 0; r < rows; ++r) {
    const double dr = d[r];
    if (dr == 0.0) continue;
    double* gr = gw + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) gr[c] += dr * x[c];
  }
}

}  // namespace

void NetConfig::validate() const {
  if (feat_dim != kFeatureDim)
    throw std::invalid_argument("NetConfig: feat_dim must be 68");
  if (cond_dim < 1 || conv_channels < 1 || gru_layers < 1 || gru_hidden < 1 ||
      n_bands < 1)
    throw std::invalid_argument("NetConfig: all sizes must be >= 1");
}

NetParams init_params(const NetConfig& config, uint64_t seed) {
  config.validate();
  NetParams p;
  p.config = config;
  Rng rng(seed);
  auto init = [&](std::vector<double>& w, size_t n, int fan_in) {
    w.resize(n);
    const double s = std::sqrt(1.0 / fan_in);
    for (double& v : w) v = rng.uniform(-s, s);
    quantize_to_f32(w);
  };
  const int C = config.conv_channels, F = config.feat_dim,
            H = config.gru_hidden, B = config.n_bands;
  init(p.conv1_w, static_cast<size_t>(C) * 3 * F, 3 * F);
  p.conv1_b.assign(C, 0.0);
  init(p.conv2_w, static_cast<size_t>(C) * 3 * C, 3 * C);
  p.conv2_b.assign(C, 0.0);
  p.gru.resize(config.gru_layers);
  for (int l = 0; l < config.gru_layers; ++l) {
    const int in = config.gru_input_dim(l);
    GruParams& g = p.gru[l];
    init(g.wz, static_cast<size_t>(H) * in, in);
    init(g.uz, static_cast<size_t>(H) * H, H);
    g.bz.assign(H, 0.0);
    init(g.wr, static_cast<size_t>(H) * in, in);
    init(g.ur, static_cast<size_t>(H) * H, H);
    g.br.assign(H, 0.0);
    init(g.wc, static_cast<size_t>(H) * in, in);
    init(g.uc, static_cast<size_t>(H) * H, H);
    g.bc.assign(H, 0.0);
  }
  init(p.gain_w, static_cast<size_t>(B) * H, H);
  p.gain_b.assign(B, 0.0);
  init(p.strength_w, static_cast<size_t>(B) * H, H);
  p.strength_b.assign(B, 0.0);
  init(p.vad_w, H, H);
  p.vad_b.assign(1, 0.0);
  return p;
}

NetParams zeros_like(const NetParams& params) {
  NetParams z = params;
  auto clear = [](std::vector<double>& v) {
    std::fill(v.begin(), v.end(), 0.0);
  };
  clear(z.conv1_w);
  clear(z.conv1_b);
  clear(z.conv2_w);
  clear(z.conv2_b);
  for (auto& g : z.gru) {
    clear(g.wz);
    clear(g.uz);
    clear(g.bz);
    clear(g.wr);
    clear(g.ur);
    clear(g.br);
    clear(g.wc);
    clear(g.uc);
    clear(g.bc);
  }
  clear(z.gain_w);
  clear(z.gain_b);
  clear(z.strength_w);
  clear(z.strength_b);
  clear(z.vad_w);
  clear(z.vad_b);
  return z;
}

std::vector<NamedTensor> NetParams::to_tensors() const {
  const auto& c = config;
  const uint32_t C = c.conv_channels, F = c.feat_dim, H = c.gru_hidden,
                 B = c.n_bands;
  std::vector<NamedTensor> t;
  t.push_back({"conv1.w", {C, 3, F}, conv1_w});
  t.push_back({"conv1.b", {C}, conv1_b});
  t.push_back({"conv2.w", {C, 3, C}, conv2_w});
  t.push_back({"conv2.b", {C}, conv2_b});
  for (int l = 0; l < c.gru_layers; ++l) {
    const uint32_t in = static_cast<uint32_t>(c.gru_input_dim(l));
    const std::string pre = "gru" + std::to_string(l) + ".";
    const GruParams& g = gru[l];
    t.push_back({pre + "wz", {H, in}, g.wz});
    t.push_back({pre + "uz", {H, H}, g.uz});
    t.push_back({pre + "bz", {H}, g.bz});
    t.push_back({pre + "wr", {H, in}, g.wr});
    t.push_back({pre + "ur", {H, H}, g.ur});
    t.push_back({pre + "br", {H}, g.br});
    t.push_back({pre + "wc", {H, in}, g.wc});
    t.push_back({pre + "uc", {H, H}, g.uc});
    t.push_back({pre + "bc", {H}, g.bc});
  }
  t.push_back({"head.gain.w", {B, H}, gain_w});
  t.push_back({"head.gain.b", {B}, gain_b});
  t.push_back({"head.strength.w", {B, H}, strength_w});
  t.push_back({"head.strength.b", {B}, strength_b});
  t.push_back({"head.vad.w", {1, H}, vad_w});
  t.push_back({"head.vad.b", {1}, vad_b});
  return t;
}

std::vector<std::vector<double>*> NetParams::tensor_views() {
  std::vector<std::vector<double>*> v{&conv1_w, &conv1_b, &conv2_w, &conv2_b};
  for (auto& g : gru) {
    v.push_back(&g.wz);
    v.push_back(&g.uz);
    v.push_back(&g.bz);
    v.push_back(&g.wr);
    v.push_back(&g.ur);
    v.push_back(&g.br);
    v.push_back(&g.wc);
    v.push_back(&g.uc);
    v.push_back(&g.bc);
  }
  v.push_back(&gain_w);
  v.push_back(&gain_b);
  v.push_back(&strength_w);
  v.push_back(&strength_b);
  v.push_back(&vad_w);
  v.push_back(&vad_b);
  return v;
}

std::vector<const std::vector<double>*> NetParams::tensor_views() const {
  auto views = const_cast<NetParams*>(this)->tensor_views();
  return {views.begin(), views.end()};
}

NetParams NetParams::from_tensors(const std::vector<NamedTensor>& tensors) {
  auto find = [&](const std::string& name) -> const NamedTensor& {
    for (const auto& t : tensors)
      if (t.name == name) return t;
    throw std::runtime_error("checkpoint is missing tensor " + name);
  };

  const auto& c1w = find("conv1.w");
  if (c1w.dims.size() != 3 || c1w.dims[1] != 3)
    throw std::runtime_error("tensor conv1.w has unexpected shape");
  NetConfig cfg;
  cfg.conv_channels = static_cast<int>(c1w.dims[0]);
  cfg.feat_dim = static_cast<int>(c1w.dims[2]);
  int layers = 0;
  while (true) {
    const std::string name = "gru" + std::to_string(layers) + ".wz";
    bool found = false;
    for (const auto& t : tensors) found = found || t.name == name;
    if (!found) break;
    ++layers;
  }
  if (layers == 0) throw std::runtime_error("checkpoint has no GRU tensors");
  cfg.gru_layers = layers;
  const auto& g0wz = find("gru0.wz");
  if (g0wz.dims.size() != 2)
    throw std::runtime_error("tensor gru0.wz has unexpected shape");
  cfg.gru_hidden = static_cast<int>(g0wz.dims[0]);
  cfg.cond_dim = static_cast<int>(g0wz.dims[1]) - cfg.conv_channels;
  const auto& gw = find("head.gain.w");
  if (gw.dims.size() != 2)
    throw std::runtime_error("tensor head.gain.w has unexpected shape");
  cfg.n_bands = static_cast<int>(gw.dims[0]);
  cfg.validate();

  NetParams p;
  p.config = cfg;
  auto take = [&](const std::string& name, std::vector<double>& dst,
                  size_t expect) {
    const auto& t = find(name);
    if (t.values.size() != expect)
      throw std::runtime_error("tensor " + name + " has unexpected size");
    dst = t.values;
  };
  const size_t C = cfg.conv_channels, F = cfg.feat_dim, H = cfg.gru_hidden,
               B = cfg.n_bands;
  take("conv1.w", p.conv1_w, C * 3 * F);
  take("conv1.b", p.conv1_b, C);
  take("conv2.w", p.conv2_w, C * 3 * C);
  take("conv2.b", p.conv2_b, C);
  p.gru.resize(cfg.gru_layers);
  for (int l = 0; l < cfg.gru_layers; ++l) {
    const size_t in = cfg.gru_input_dim(l);
    const std::string pre = "gru" + std::to_string(l) + ".";
    GruParams& g = p.gru[l];
    take(pre + "wz", g.wz, H * in);
    take(pre + "uz", g.uz, H * H);
    take(pre + "bz", g.bz, H);
    take(pre + "wr", g.wr, H * in);
    take(pre + "ur", g.ur, H * H);
    take(pre + "br", g.br, H);
    take(pre + "wc", g.wc, H * in);
    take(pre + "uc", g.uc, H * H);
    take(pre + "bc", g.bc, H);
  }
  take("head.gain.w", p.gain_w, B * H);
  take("head.gain.b", p.gain_b, B);
  take("head.strength.w", p.strength_w, B * H);
  take("head.strength.b", p.strength_b, B);
  take("head.vad.w", p.vad_w, H);
  take("head.vad.b", p.vad_b, 1);
  return p;
}

NetState make_state(const NetConfig& config) {
  NetState s;
  s.gru_h.assign(config.gru_layers,
                 std::vector<double>(config.gru_hidden, 0.0));
  s.conv1_in[0].assign(config.feat_dim, 0.0);
  s.conv1_in[1].assign(config.feat_dim, 0.0);
  s.conv2_in[0].assign(config.conv_channels, 0.0);
  s.conv2_in[1].assign(config.conv_channels, 0.0);
  return s;
}

/// Per-step activations captured for backpropagation.
struct ForwardTrace {
  NetConfig config;
  int steps = 0;
  std::vector<std::vector<double>> x_norm;  // [T][feat]
  std::vector<std::vector<double>> c1;      // [T][C], post-tanh
  std::vector<std::vector<double>> c2;      // [T][C], post-tanh
  std::vector<std::vector<double>> cond;    // [T][cond_dim]
  // Per layer, per step: gates and hidden state (post-activation).
  std::vector<std::vector<std::vector<double>>> z, r, cand, h;
  std::vector<EnhancerOutput> outputs;
};

namespace {

// One step of the full network. Histories x1/x2 are the previous two
// normalized feature vectors, c1h likewise for conv1 outputs. If `trace` is
// non-null the activations are recorded.
EnhancerOutput step(const NetParams& p,
                    const std::array<double, kFeatureDim>& raw_features,
                    const std::vector<double>& cond, NetState& state,
                    ForwardTrace* trace) {
  const NetConfig& cfg = p.config;
  const int C = cfg.conv_channels, H = cfg.gru_hidden, B = cfg.n_bands;
  if (static_cast<int>(cond.size()) != cfg.cond_dim)
    throw std::invalid_argument("forward: condition dimension mismatch");

  std::array<double, kFeatureDim> xn;
  normalize_features(raw_features, xn);

  // conv1 over (t-2, t-1, t).
  std::vector<double> c1(C);
  for (int c = 0; c < C; ++c) c1[c] = p.conv1_b[c];
  const double* w1 = p.conv1_w.data();
  const int F = cfg.feat_dim;
  {
    const double* taps[3] = {state.conv1_in[0].data(),
                             state.conv1_in[1].data(), xn.data()};
    for (int c = 0; c < C; ++c) {
      double acc = 0.0;
      for (int d = 0; d < 3; ++d) {
        const double* wr = w1 + (static_cast<size_t>(c) * 3 + d) * F;
        const double* x = taps[d];
        for (int f = 0; f < F; ++f) acc += wr[f] * x[f];
      }
      c1[c] = std::tanh(c1[c] + acc);
    }
  }

  // conv2 over (t-2, t-1, t) of conv1 outputs.
  std::vector<double> c2(C);
  {
    const double* taps[3] = {state.conv2_in[0].data(),
                             state.conv2_in[1].data(), c1.data()};
    for (int c = 0; c < C; ++c) {
      double acc = p.conv2_b[c];
      for (int d = 0; d < 3; ++d) {
        const double* wr =
            p.conv2_w.data() + (static_cast<size_t>(c) * 3 + d) * C;
        const double* x = taps[d];
        for (int f = 0; f < C; ++f) acc += wr[f] * x[f];
      }
      c2[c] = std::tanh(acc);
    }
  }

  // Shift conv histories.
  state.conv1_in[0] = state.conv1_in[1];
  state.conv1_in[1].assign(xn.begin(), xn.end());
  state.conv2_in[0] = state.conv2_in[1];
  state.conv2_in[1] = c1;

  // GRU stack; layer 0 input is [c2 ; cond].
  std::vector<double> x;
  x.reserve(C + cfg.cond_dim);
  x.assign(c2.begin(), c2.end());
  x.insert(x.end(), cond.begin(), cond.end());

  for (int l = 0; l < cfg.gru_layers; ++l) {
    const GruParams& g = p.gru[l];
    std::vector<double>& h = state.gru_h[l];
    const int in = cfg.gru_input_dim(l);
    std::vector<double> z(g.bz), r(g.br);
    matvec_acc(g.wz.data(), x.data(), z.data(), H, in);
    matvec_acc(g.uz.data(), h.data(), z.data(), H, H);
    matvec_acc(g.wr.data(), x.data(), r.data(), H, in);
    matvec_acc(g.ur.data(), h.data(), r.data(), H, H);
    for (int i = 0; i < H; ++i) {
      z[i] = sigmoid(z[i]);
      r[i] = sigmoid(r[i]);
    }
    std::vector<double> rh(H);
    for (int i = 0; i < H; ++i) rh[i] = r[i] * h[i];
    std::vector<double> cand(g.bc);
    matvec_acc(g.wc.data(), x.data(), cand.data(), H, in);
    matvec_acc(g.uc.data(), rh.data(), cand.data(), H, H);
    std::vector<double> h_new(H);
    for (int i = 0; i < H; ++i) {
      cand[i] = std::tanh(cand[i]);
      h_new[i] = z[i] * h[i] + (1.0 - z[i]) * cand[i];
    }
    if (trace) {
      trace->z[l].push_back(z);
      trace->r[l].push_back(r);
      trace->cand[l].push_back(cand);
      trace->h[l].push_back(h_new);
    }
    h = h_new;
    x = h;
  }

  EnhancerOutput out;
  const std::vector<double>& top = state.gru_h[cfg.gru_layers - 1];
  for (int b = 0; b < B; ++b) {
    double acc = p.gain_b[b];
    const double* wr = p.gain_w.data() + static_cast<size_t>(b) * H;
    for (int i = 0; i < H; ++i) acc += wr[i] * top[i];
    out.gains[b] = sigmoid(acc);
    acc = p.strength_b[b];
    wr = p.strength_w.data() + static_cast<size_t>(b) * H;
    for (int i = 0; i < H; ++i) acc += wr[i] * top[i];
    out.strengths[b] = sigmoid(acc);
  }
  double acc = p.vad_b[0];
  for (int i = 0; i < H; ++i) acc += p.vad_w[i] * top[i];
  out.vad = sigmoid(acc);

  if (trace) {
    trace->x_norm.emplace_back(xn.begin(), xn.end());
    trace->c1.push_back(std::move(c1));
    trace->c2.push_back(std::move(c2));
    trace->cond.push_back(cond);
    trace->outputs.push_back(out);
    ++trace->steps;
  }
  return out;
}

}  // namespace

std::vector<EnhancerOutput> forward(const NetParams& params,
                                    const FeatureSeq& features,
                                    const std::vector<ConditionVector>& conds,
                                    NetState& state) {
  if (features.size() != conds.size())
    throw std::invalid_argument("forward: sequence length mismatch");
  std::vector<EnhancerOutput> out;
  out.reserve(features.size());
  for (size_t t = 0; t < features.size(); ++t)
    out.push_back(step(params, features[t], conds[t].values, state, nullptr));
  return out;
}

std::vector<EnhancerOutput> forward_aligned(
    const NetParams& params, const FeatureSeq& features,
    const std::vector<ConditionVector>& conds) {
  if (features.empty()) return {};
  if (features.size() != conds.size())
    throw std::invalid_argument("forward_aligned: sequence length mismatch");
  NetState state = make_state(params.config);
  std::vector<EnhancerOutput> all;
  all.reserve(features.size() + 2);
  const std::array<double, kFeatureDim> zero{};
  for (size_t t = 0; t < features.size() + 2; ++t) {
    const auto& f = t < features.size() ? features[t] : zero;
    const auto& c = conds[std::min(t, conds.size() - 1)];
    all.push_back(step(params, f, c.values, state, nullptr));
  }
  return {all.begin() + 2, all.end()};
}

TracedForward forward_traced(const NetParams& params,
                             const FeatureSeq& features,
                             const std::vector<ConditionVector>& conds) {
  if (features.size() != conds.size())
    throw std::invalid_argument("forward_traced: sequence length mismatch");
  TracedForward res;
  res.trace = std::make_shared<ForwardTrace>();
  ForwardTrace& tr = *res.trace;
  tr.config = params.config;
  const int L = params.config.gru_layers;
  tr.z.resize(L);
  tr.r.resize(L);
  tr.cand.resize(L);
  tr.h.resize(L);
  NetState state = make_state(params.config);
  for (size_t t = 0; t < features.size(); ++t)
    res.outputs.push_back(
        step(params, features[t], conds[t].values, state, &tr));
  return res;
}

NetParams backward(const NetParams& params, const TracedForward& fwd,
                   const std::vector<OutputGrads>& grads_out) {
  const ForwardTrace& tr = *fwd.trace;
  const NetConfig& cfg = params.config;
  const int T = tr.steps, C = cfg.conv_channels, H = cfg.gru_hidden,
            B = cfg.n_bands, L = cfg.gru_layers, F = cfg.feat_dim;
  if (static_cast<int>(grads_out.size()) != T)
    throw std::invalid_argument("backward: gradient sequence length mismatch");

  NetParams g = zeros_like(params);

  // dh[l][t] accumulates gradients flowing into layer l's hidden state at
  // step t. Running BPTT layer-futures first: process steps in reverse,
  // carrying one dh vector per layer plus d(input) chains downwards.
  std::vector<std::vector<double>> dh_next(L, std::vector<double>(H, 0.0));
  // d c2 per step accumulated from layer-0 input gradient.
  std::vector<std::vector<double>> dc2(T, std::vector<double>(C, 0.0));

  const std::vector<double> zero_h(H, 0.0);
  for (int t = T - 1; t >= 0; --t) {
    // Heads.
    std::vector<double> dh(H, 0.0);
    const EnhancerOutput& out = tr.outputs[t];
    const OutputGrads& go = grads_out[t];
    for (int b = 0; b < B; ++b) {
      const double dg = go.d_gains[b] * out.gains[b] * (1.0 - out.gains[b]);
      if (dg != 0.0) {
        g.gain_b[b] += dg;
        const double* wr = params.gain_w.data() + static_cast<size_t>(b) * H;
        double* gw = g.gain_w.data() + static_cast<size_t>(b) * H;
        const double* top = tr.h[L - 1][t].data();
        for (int i = 0; i < H; ++i) {
          gw[i] += dg * top[i];
          dh[i] += wr[i] * dg;
        }
      }
      const double ds =
          go.d_strengths[b] * out.strengths[b] * (1.0 - out.strengths[b]);
      if (ds != 0.0) {
        g.strength_b[b] += ds;
        const double* wr =
            params.strength_w.data() + static_cast<size_t>(b) * H;
        double* gw = g.strength_w.data() + static_cast<size_t>(b) * H;
        const double* top = tr.h[L - 1][t].data();
        for (int i = 0; i < H; ++i) {
          gw[i] += ds * top[i];
          dh[i] += wr[i] * ds;
        }
      }
    }
    const double dv = go.d_vad * out.vad * (1.0 - out.vad);
    if (dv != 0.0) {
      g.vad_b[0] += dv;
      const double* top = tr.h[L - 1][t].data();
      for (int i = 0; i < H; ++i) {
        g.vad_w[i] += dv * top[i];
        dh[i] += params.vad_w[i] * dv;
      }
    }

    // GRU layers, top down. dh combines the head gradient (top layer), the
    // future-step carry dh_next[l], and the input gradient from layer l+1.
    std::vector<double> dx_upper;  // d input of the layer above
    for (int l = L - 1; l >= 0; --l) {
      const GruParams& gp = params.gru[l];
      GruParams& gg = g.gru[l];
      const int in = cfg.gru_input_dim(l);
      const std::vector<double>& h_prev = t > 0 ? tr.h[l][t - 1] : zero_h;
      const std::vector<double>& z = tr.z[l][t];
      const std::vector<double>& r = tr.r[l][t];
      const std::vector<double>& cand = tr.cand[l][t];

      std::vector<double> dht(H);
      for (int i = 0; i < H; ++i) {
        dht[i] = dh_next[l][i];
        if (l == L - 1)
          dht[i] += dh[i];
        else
          dht[i] += dx_upper[i];
      }

      // The layer input: [c2 ; cond] for layer 0, else previous layer's h.
      const std::vector<double>* x_ptr = nullptr;
      std::vector<double> x0;
      if (l == 0) {
        x0.reserve(in);
        x0.assign(tr.c2[t].begin(), tr.c2[t].end());
        x0.insert(x0.end(), tr.cond[t].begin(), tr.cond[t].end());
        x_ptr = &x0;
      } else {
        x_ptr = &tr.h[l - 1][t];
      }
      const std::vector<double>& x = *x_ptr;

      std::vector<double> dz(H), dc(H), dhp(H), dxa(in, 0.0);
      for (int i = 0; i < H; ++i) {
        dz[i] = dht[i] * (h_prev[i] - cand[i]);
        dc[i] = dht[i] * (1.0 - z[i]);
        dhp[i] = dht[i] * z[i];
      }
      // Candidate path.
      std::vector<double> dc_pre(H), drh(H, 0.0);
      for (int i = 0; i < H; ++i)
        dc_pre[i] = dc[i] * (1.0 - cand[i] * cand[i]);
      outer_acc(dc_pre.data(), x.data(), gg.wc.data(), H, in);
      {
        std::vector<double> rh(H);
        for (int i = 0; i < H; ++i) rh[i] = r[i] * h_prev[i];
        outer_acc(dc_pre.data(), rh.data(), gg.uc.data(), H, H);
      }
      for (int i = 0; i < H; ++i) gg.bc[i] += dc_pre[i];
      matvec_t_acc(gp.wc.data(), dc_pre.data(), dxa.data(), H, in);
      matvec_t_acc(gp.uc.data(), dc_pre.data(), drh.data(), H, H);
      std::vector<double> dr(H);
      for (int i = 0; i < H; ++i) {
        dr[i] = drh[i] * h_prev[i];
        dhp[i] += drh[i] * r[i];
      }
      // Gate paths.
      std::vector<double> dz_pre(H), dr_pre(H);
      for (int i = 0; i < H; ++i) {
        dz_pre[i] = dz[i] * z[i] * (1.0 - z[i]);
        dr_pre[i] = dr[i] * r[i] * (1.0 - r[i]);
      }
      outer_acc(dz_pre.data(), x.data(), gg.wz.data(), H, in);
      outer_acc(dz_pre.data(), h_prev.data(), gg.uz.data(), H, H);
      for (int i = 0; i < H; ++i) gg.bz[i] += dz_pre[i];
      matvec_t_acc(gp.wz.data(), dz_pre.data(), dxa.data(), H, in);
      matvec_t_acc(gp.uz.data(), dz_pre.data(), dhp.data(), H, H);
      outer_acc(dr_pre.data(), x.data(), gg.wr.data(), H, in);
      outer_acc(dr_pre.data(), h_prev.data(), gg.ur.data(), H, H);
      for (int i = 0; i < H; ++i) gg.br[i] += dr_pre[i];
      matvec_t_acc(gp.wr.data(), dr_pre.data(), dxa.data(), H, in);
      matvec_t_acc(gp.ur.data(), dr_pre.data(), dhp.data(), H, H);

      dh_next[l] = dhp;
      if (l == 0) {
        for (int i = 0; i < C; ++i) dc2[t][i] += dxa[i];
        // Gradient w.r.t. the condition vector is not needed.
      } else {
        dx_upper = std::move(dxa);
      }
    }
  }

  // Convolutions, reverse over time. dc1 needs the +-2 future window, so
  // run conv2 backward first over all steps, then conv1.
  std::vector<std::vector<double>> dc1(T, std::vector<double>(C, 0.0));
  const std::vector<double> zero_c(C, 0.0);
  for (int t = T - 1; t >= 0; --t) {
    std::vector<double> d_pre(C);
    for (int c = 0; c < C; ++c)
      d_pre[c] = dc2[t][c] * (1.0 - tr.c2[t][c] * tr.c2[t][c]);
    for (int d = 0; d < 3; ++d) {
      const int src = t - 2 + d;
      const std::vector<double>& x = src >= 0 ? tr.c1[src] : zero_c;
      for (int c = 0; c < C; ++c) {
        const double dp = d_pre[c];
        if (dp == 0.0) continue;
        double* gw = g.conv2_w.data() + (static_cast<size_t>(c) * 3 + d) * C;
        const double* wr =
            params.conv2_w.data() + (static_cast<size_t>(c) * 3 + d) * C;
        for (int f = 0; f < C; ++f) gw[f] += dp * x[f];
        if (src >= 0) {
          double* dst = dc1[src].data();
          for (int f = 0; f < C; ++f) dst[f] += wr[f] * dp;
        }
      }
      if (d == 2)
        for (int c = 0; c < C; ++c) g.conv2_b[c] += d_pre[c];
    }
  }
  const std::vector<double> zero_f(F, 0.0);
  for (int t = T - 1; t >= 0; --t) {
    std::vector<double> d_pre(C);
    for (int c = 0; c < C; ++c)
      d_pre[c] = dc1[t][c] * (1.0 - tr.c1[t][c] * tr.c1[t][c]);
    for (int d = 0; d < 3; ++d) {
      const int src = t - 2 + d;
      const std::vector<double>& x = src >= 0 ? tr.x_norm[src] : zero_f;
      for (int c = 0; c < C; ++c) {
        const double dp = d_pre[c];
        if (dp == 0.0) continue;
        double* gw = g.conv1_w.data() + (static_cast<size_t>(c) * 3 + d) * F;
        for (int f = 0; f < F; ++f) gw[f] += dp * x[f];
      }
      if (d == 2)
        for (int c = 0; c < C; ++c) g.conv1_b[c] += d_pre[c];
    }
  }
  return g;
}

NetParams backward(const NetParams& params, const FeatureSeq& features,
                   const std::vector<ConditionVector>& conds,
                   const std::vector<OutputGrads>& grads_out) {
  return backward(params, forward_traced(params, features, conds), grads_out);
}

void save_params(const NetParams& params, const std::string& path) {
  write_tensor_file(path, params.to_tensors());
}

NetParams load_params(const std::string& path) {
  return NetParams::from_tensors(read_tensor_file(path));
}

}  // namespace upn
