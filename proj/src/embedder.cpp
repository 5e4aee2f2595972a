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

#include "upn/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "upn/fft.hpp"
#include "upn/rng.hpp"
#include "upn/tensor_io.hpp"

namespace upn {

namespace {

constexpr double kStatEps = 1e-10;

void matvec(const std::vector<double>& w, const std::vector<double>& b,
            const std::vector<double>& x, std::vector<double>& y) {
  const size_t rows = b.size(), cols = x.size();
  y.resize(rows);
  for (size_t r = 0; r < rows; ++r) {
    double acc = b[r];
    const double* wr = w.data() + r * cols;
    for (size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

struct EmbedderTrace {
  std::vector<double> h1;      // post-tanh hidden
  std::vector<double> raw;     // pre-normalization output
  double raw_norm = 0.0;
  std::vector<double> out;     // unit-norm embedding
};

EmbedderTrace embedder_forward(const EmbedderModel& m,
                               const std::vector<double>& stats) {
  EmbedderTrace tr;
  matvec(m.w1, m.b1, stats, tr.h1);
  for (double& v : tr.h1) v = std::tanh(v);
  matvec(m.w2, m.b2, tr.h1, tr.raw);
  for (double& v : tr.raw) v = std::tanh(v);
  double n2 = 0.0;
  for (double v : tr.raw) n2 += v * v;
  tr.raw_norm = std::sqrt(std::max(n2, 1e-30));
  tr.out = tr.raw;
  for (double& v : tr.out) v /= tr.raw_norm;
  return tr;
}

// Backprop d loss / d out through the forward pass, accumulating parameter
// gradients in-place.
void embedder_backward(const EmbedderModel& m, const std::vector<double>& stats,
                       const EmbedderTrace& tr,
                       const std::vector<double>& d_out,
                       std::vector<double>& gw1, std::vector<double>& gb1,
                       std::vector<double>& gw2, std::vector<double>& gb2) {
  const size_t out_dim = tr.raw.size(), hid = tr.h1.size(),
               in = stats.size();
  // L2 normalization jacobian: d raw = (d_out - out * (out . d_out)) / norm.
  double dot = 0.0;
  for (size_t i = 0; i < out_dim; ++i) dot += tr.out[i] * d_out[i];
  std::vector<double> d_raw(out_dim);
  for (size_t i = 0; i < out_dim; ++i)
    d_raw[i] = (d_out[i] - tr.out[i] * dot) / tr.raw_norm;
  // Through the output tanh.
  for (size_t i = 0; i < out_dim; ++i)
    d_raw[i] *= 1.0 - tr.raw[i] * tr.raw[i];
  std::vector<double> d_h1(hid, 0.0);
  for (size_t r = 0; r < out_dim; ++r) {
    gb2[r] += d_raw[r];
    for (size_t c = 0; c < hid; ++c) {
      gw2[r * hid + c] += d_raw[r] * tr.h1[c];
      d_h1[c] += m.w2[r * hid + c] * d_raw[r];
    }
  }
  for (size_t r = 0; r < hid; ++r) {
    const double d = d_h1[r] * (1.0 - tr.h1[r] * tr.h1[r]);
    gb1[r] += d;
    for (size_t c = 0; c < in; ++c) gw1[r * in + c] += d * stats[c];
  }
}

std::vector<double> pink_noise(size_t n, Rng& rng) {
  // Kellet's three-pole pink filter; close enough to -3 dB/oct for
  // augmentation noise.
  std::vector<double> out(n);
  double b0 = 0, b1 = 0, b2 = 0;
  for (size_t i = 0; i < n; ++i) {
    const double w = rng.normal();
    b0 = 0.99765 * b0 + w * 0.0990460;
    b1 = 0.96300 * b1 + w * 0.2965164;
    b2 = 0.57000 * b2 + w * 1.0526913;
    out[i] = 0.25 * (b0 + b1 + b2 + w * 0.1848);
  }
  return out;
}

}  // namespace

void SpeakerEmbedding::normalize() {
  double n2 = 0.0;
  for (double v : values) n2 += v * v;
  const double n = std::sqrt(n2);
  if (n <= 0.0) throw std::runtime_error("cannot normalize zero embedding");
  for (double& v : values) v /= n;
}

double cosine_similarity(const SpeakerEmbedding& a, const SpeakerEmbedding& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  double dot = 0.0;
  for (int i = 0; i < a.dim(); ++i) dot += a.values[i] * b.values[i];
  return dot;
}

EmbedderModel init_embedder(int stat_dim, int hidden_dim, int out_dim,
                            int n_classes, uint64_t seed) {
  EmbedderModel m;
  m.stat_dim = stat_dim;
  m.hidden_dim = hidden_dim;
  m.out_dim = out_dim;
  m.n_classes = n_classes;
  Rng rng(seed);
  auto init = [&](std::vector<double>& w, int rows, int cols) {
    w.resize(static_cast<size_t>(rows) * cols);
    const double s = std::sqrt(1.0 / cols);
    for (double& v : w) v = rng.uniform(-s, s);
  };
  init(m.w1, hidden_dim, stat_dim);
  m.b1.assign(hidden_dim, 0.0);
  init(m.w2, out_dim, hidden_dim);
  m.b2.assign(out_dim, 0.0);
  if (n_classes > 0) {
    init(m.class_weights, n_classes, out_dim);
    for (int c = 0; c < n_classes; ++c) {
      double n2 = 0.0;
      for (int i = 0; i < out_dim; ++i)
        n2 += m.class_weights[c * out_dim + i] *
              m.class_weights[c * out_dim + i];
      const double n = std::sqrt(std::max(n2, 1e-30));
      for (int i = 0; i < out_dim; ++i) m.class_weights[c * out_dim + i] /= n;
    }
  }
  quantize_to_f32(m.w1);
  quantize_to_f32(m.w2);
  quantize_to_f32(m.class_weights);
  return m;
}

std::vector<double> utterance_stats(const AudioBuffer& audio,
                                    const AnalysisConfig& config) {
  const auto fb = build_erb_filterbank(config);
  const auto win = sine_window(config.window_len);
  Fft fft(config.fft_len);
  const int n_frames = frame_count(audio.samples.size(), config);
  if (n_frames < 1) throw std::invalid_argument("utterance_stats: empty audio");

  // Per-frame band energies, then divide by the global mean so an overall
  // gain on the input cancels exactly.
  std::vector<std::vector<double>> energies(n_frames);
  double mean_energy = 0.0;
  std::vector<double> frame(config.window_len);
  Spectrum spec(config.n_bins());
  for (int t = 0; t < n_frames; ++t) {
    const int64_t start = static_cast<int64_t>(t - 1) * config.frame_hop;
    for (int i = 0; i < config.window_len; ++i) {
      const int64_t idx = start + i;
      const double s =
          (idx >= 0 && idx < static_cast<int64_t>(audio.samples.size()))
              ? audio.samples[idx]
              : 0.0;
      frame[i] = s * win[i];
    }
    fft.forward_real(frame, spec);
    energies[t] = band_energies(spec, fb);
    for (double e : energies[t]) mean_energy += e;
  }
  mean_energy /= static_cast<double>(n_frames) * config.n_bands;
  const double denom = std::max(mean_energy, kStatEps);

  const int nb = config.n_bands;
  std::vector<double> mean(nb, 0.0), var(nb, 0.0);
  for (int t = 0; t < n_frames; ++t)
    for (int b = 0; b < nb; ++b) {
      energies[t][b] = std::log(energies[t][b] / denom + kStatEps);
      mean[b] += energies[t][b];
    }
  for (int b = 0; b < nb; ++b) mean[b] /= n_frames;
  for (int t = 0; t < n_frames; ++t)
    for (int b = 0; b < nb; ++b) {
      const double d = energies[t][b] - mean[b];
      var[b] += d * d;
    }
  std::vector<double> stats(2 * nb);
  for (int b = 0; b < nb; ++b) {
    stats[b] = mean[b];
    stats[nb + b] = std::sqrt(var[b] / n_frames);
  }
  return stats;
}

SpeakerEmbedding embed(const EmbedderModel& model,
                       const AudioBuffer& enrollment) {
  if (enrollment.duration_s() < 1.0)
    throw std::invalid_argument("embed: enrollment must be at least 1 s");
  if (enrollment.sample_rate != kSampleRate)
    throw std::invalid_argument("embed: enrollment must be 48 kHz");
  const AnalysisConfig cfg;
  const auto stats = utterance_stats(enrollment, cfg);
  if (static_cast<int>(stats.size()) != model.stat_dim)
    throw std::invalid_argument("embed: model/stat dimension mismatch");
  const auto tr = embedder_forward(model, stats);
  SpeakerEmbedding z;
  z.values = tr.out;
  return z;
}

AamResult aam_softmax_loss(const std::vector<double>& embedding, int label,
                           const std::vector<double>& class_weights,
                           int n_classes, double margin, double scale) {
  const int dim = static_cast<int>(embedding.size());
  if (label < 0 || label >= n_classes)
    throw std::invalid_argument("aam_softmax_loss: bad label");
  if (static_cast<int>(class_weights.size()) != n_classes * dim)
    throw std::invalid_argument("aam_softmax_loss: weight shape mismatch");
  if (margin < 0.0 || margin > 0.5 || scale <= 0.0)
    throw std::invalid_argument("aam_softmax_loss: bad hyperparameters");

  double e_norm2 = 0.0;
  for (double v : embedding) e_norm2 += v * v;
  const double e_norm = std::sqrt(std::max(e_norm2, 1e-30));

  std::vector<double> w_norm(n_classes), cosines(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    const double* wc = class_weights.data() + static_cast<size_t>(c) * dim;
    double n2 = 0.0, dot = 0.0;
    for (int i = 0; i < dim; ++i) {
      n2 += wc[i] * wc[i];
      dot += wc[i] * embedding[i];
    }
    w_norm[c] = std::sqrt(std::max(n2, 1e-30));
    cosines[c] = dot / (e_norm * w_norm[c]);
  }

  // Logits: s cos(theta_y + m) for the true class, s cos(theta_j) otherwise.
  std::vector<double> logits(n_classes), dlogit_dcos(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    if (c == label) {
      const double cy = std::clamp(cosines[c], -1.0 + 1e-12, 1.0 - 1e-12);
      const double sy = std::sqrt(1.0 - cy * cy);
      logits[c] = scale * (cy * std::cos(margin) - sy * std::sin(margin));
      dlogit_dcos[c] =
          scale * (std::cos(margin) + cy / sy * std::sin(margin));
    } else {
      logits[c] = scale * cosines[c];
      dlogit_dcos[c] = scale;
    }
  }

  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum_exp = 0.0;
  for (double l : logits) sum_exp += std::exp(l - max_logit);
  const double log_z = max_logit + std::log(sum_exp);

  AamResult res;
  res.loss = log_z - logits[label];
  res.grad_embedding.assign(dim, 0.0);
  res.grad_class_weights.assign(class_weights.size(), 0.0);
  for (int c = 0; c < n_classes; ++c) {
    const double p = std::exp(logits[c] - log_z);
    const double dl = (p - (c == label ? 1.0 : 0.0)) * dlogit_dcos[c];
    const double* wc = class_weights.data() + static_cast<size_t>(c) * dim;
    double* gw = res.grad_class_weights.data() + static_cast<size_t>(c) * dim;
    for (int i = 0; i < dim; ++i) {
      // d cos / d e and d cos / d w for non-normalized inputs.
      const double e_hat = embedding[i] / e_norm;
      const double w_hat = wc[i] / w_norm[c];
      res.grad_embedding[i] += dl * (w_hat - cosines[c] * e_hat) / e_norm;
      gw[i] += dl * (e_hat - cosines[c] * w_hat) / w_norm[c];
    }
  }
  return res;
}

double compute_eer(const std::vector<double>& scores_same,
                   const std::vector<double>& scores_diff) {
  if (scores_same.empty() || scores_diff.empty())
    throw std::invalid_argument("compute_eer: empty score list");
  std::vector<double> thresholds;
  thresholds.reserve(scores_same.size() + scores_diff.size() + 2);
  thresholds.insert(thresholds.end(), scores_same.begin(), scores_same.end());
  thresholds.insert(thresholds.end(), scores_diff.begin(), scores_diff.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  auto far_at = [&](double th) {
    size_t n = 0;
    for (double s : scores_diff) n += s >= th;
    return static_cast<double>(n) / scores_diff.size();
  };
  auto frr_at = [&](double th) {
    size_t n = 0;
    for (double s : scores_same) n += s < th;
    return static_cast<double>(n) / scores_same.size();
  };

  // FRR - FAR is nondecreasing in the threshold; find the sign change and
  // interpolate linearly between the two adjacent thresholds.
  double prev_far = 1.0, prev_frr = 0.0;
  bool have_prev = false;
  double prev_th = 0.0;
  for (double th : thresholds) {
    const double far = far_at(th), frr = frr_at(th);
    if (frr >= far) {
      if (!have_prev || frr == far) return 0.5 * (far + frr);
      // Interpolate both rates in threshold between prev_th and th.
      const double dfar = far - prev_far, dfrr = frr - prev_frr;
      const double denom = dfrr - dfar;
      double alpha = denom != 0.0 ? (prev_far - prev_frr) / denom : 0.0;
      alpha = std::clamp(alpha, 0.0, 1.0);
      (void)prev_th;
      return prev_far + alpha * dfar;
    }
    prev_far = far;
    prev_frr = frr;
    prev_th = th;
    have_prev = true;
  }
  // Past the largest score everything is rejected: FAR 0, FRR 1.
  const double denom = (1.0 - prev_frr) - (0.0 - prev_far);
  double alpha = denom != 0.0 ? (prev_far - prev_frr) / denom : 0.0;
  alpha = std::clamp(alpha, 0.0, 1.0);
  return prev_far + alpha * (0.0 - prev_far);
}

std::vector<AudioBuffer> augment_enrollment(const AudioBuffer& enrollment,
                                            int n_variants, uint64_t seed) {
  if (n_variants < 1)
    throw std::invalid_argument("augment_enrollment: n_variants must be >= 1");
  const Rng base(seed);
  std::vector<AudioBuffer> out;
  out.reserve(n_variants);
  for (int v = 0; v < n_variants; ++v) {
    Rng rng = base.fork(v);
    const double rt60 = rng.uniform(0.1, 0.6);
    const double snr_db = rng.uniform(0.0, 20.0);

    // Synthetic room response: unit direct path plus exponentially decaying
    // white noise, normalized to unit energy.
    const int rir_len = static_cast<int>(rt60 * enrollment.sample_rate);
    std::vector<double> rir(rir_len + 1);
    rir[0] = 1.0;
    const double decay = -3.0 * std::log(10.0) / (rt60 * enrollment.sample_rate);
    for (int i = 1; i <= rir_len; ++i)
      rir[i] = 0.25 * rng.normal() * std::exp(decay * i);
    double rir_e = 0.0;
    for (double h : rir) rir_e += h * h;
    for (double& h : rir) h /= std::sqrt(rir_e);

    auto rev = fft_convolve(enrollment.samples, rir);
    rev.resize(enrollment.samples.size());  // keep the input length

    double rev_e = 0.0;
    for (double s : rev) rev_e += s * s;

    // White + pink mixture scaled to the drawn SNR against the reverbed
    // signal.
    auto noise = pink_noise(rev.size(), rng);
    for (double& n : noise) n = 0.5 * n + 0.5 * rng.normal();
    double noise_e = 0.0;
    for (double n : noise) noise_e += n * n;
    const double target_noise_e = rev_e / std::pow(10.0, snr_db / 10.0);
    const double gain =
        noise_e > 0.0 ? std::sqrt(target_noise_e / noise_e) : 0.0;

    AudioBuffer var;
    var.sample_rate = enrollment.sample_rate;
    var.samples.resize(rev.size());
    for (size_t i = 0; i < rev.size(); ++i)
      var.samples[i] = rev[i] + gain * noise[i];
    out.push_back(std::move(var));
  }
  return out;
}

std::vector<double> train_embedder(EmbedderModel& model,
                                   const std::vector<std::vector<double>>& stats,
                                   const std::vector<int>& labels,
                                   const EmbedderTrainConfig& config) {
  if (stats.size() != labels.size() || stats.empty())
    throw std::invalid_argument("train_embedder: bad dataset");
  if (model.n_classes <= 1)
    throw std::invalid_argument("train_embedder: need >= 2 classes");

  std::vector<double> losses;
  losses.reserve(config.epochs);
  Rng rng(config.seed);
  std::vector<size_t> order(stats.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  const size_t w1n = model.w1.size(), w2n = model.w2.size();
  std::vector<double> gw1(w1n), gb1(model.b1.size()), gw2(w2n),
      gb2(model.b2.size()), gcw(model.class_weights.size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with our own rng, full-batch gradient.
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_int(0, i - 1)]);
    std::fill(gw1.begin(), gw1.end(), 0.0);
    std::fill(gb1.begin(), gb1.end(), 0.0);
    std::fill(gw2.begin(), gw2.end(), 0.0);
    std::fill(gb2.begin(), gb2.end(), 0.0);
    std::fill(gcw.begin(), gcw.end(), 0.0);
    double loss = 0.0;
    for (size_t idx : order) {
      const auto tr = embedder_forward(model, stats[idx]);
      const auto aam =
          aam_softmax_loss(tr.out, labels[idx], model.class_weights,
                           model.n_classes, config.margin, config.scale);
      loss += aam.loss;
      embedder_backward(model, stats[idx], tr, aam.grad_embedding, gw1, gb1,
                        gw2, gb2);
      for (size_t i = 0; i < gcw.size(); ++i)
        gcw[i] += aam.grad_class_weights[i];
    }
    const double inv = 1.0 / stats.size();
    const double lr = config.learning_rate;
    for (size_t i = 0; i < w1n; ++i) model.w1[i] -= lr * inv * gw1[i];
    for (size_t i = 0; i < gb1.size(); ++i) model.b1[i] -= lr * inv * gb1[i];
    for (size_t i = 0; i < w2n; ++i) model.w2[i] -= lr * inv * gw2[i];
    for (size_t i = 0; i < gb2.size(); ++i) model.b2[i] -= lr * inv * gb2[i];
    for (size_t i = 0; i < gcw.size(); ++i)
      model.class_weights[i] -= lr * inv * gcw[i];
    // Keep class-weight rows on the unit sphere.
    for (int c = 0; c < model.n_classes; ++c) {
      double n2 = 0.0;
      double* wc = model.class_weights.data() +
                   static_cast<size_t>(c) * model.out_dim;
      for (int i = 0; i < model.out_dim; ++i) n2 += wc[i] * wc[i];
      const double n = std::sqrt(std::max(n2, 1e-30));
      for (int i = 0; i < model.out_dim; ++i) wc[i] /= n;
    }
    losses.push_back(loss * inv);
  }
  return losses;
}

void save_embedder(const std::string& path, const EmbedderModel& model) {
  std::vector<NamedTensor> t;
  t.push_back({"embedder.w1",
               {static_cast<uint32_t>(model.hidden_dim),
                static_cast<uint32_t>(model.stat_dim)},
               model.w1});
  t.push_back({"embedder.b1", {static_cast<uint32_t>(model.hidden_dim)},
               model.b1});
  t.push_back({"embedder.w2",
               {static_cast<uint32_t>(model.out_dim),
                static_cast<uint32_t>(model.hidden_dim)},
               model.w2});
  t.push_back({"embedder.b2", {static_cast<uint32_t>(model.out_dim)},
               model.b2});
  write_tensor_file(path, t);
}

EmbedderModel load_embedder(const std::string& path) {
  const auto tensors = read_tensor_file(path);
  EmbedderModel m;
  m.n_classes = 0;
  bool w1 = false, b1 = false, w2 = false, b2 = false;
  for (const auto& t : tensors) {
    if (t.name == "embedder.w1") {
      if (t.dims.size() != 2)
        throw std::runtime_error("embedder.w1 has wrong rank");
      m.hidden_dim = static_cast<int>(t.dims[0]);
      m.stat_dim = static_cast<int>(t.dims[1]);
      m.w1 = t.values;
      w1 = true;
    } else if (t.name == "embedder.b1") {
      m.b1 = t.values;
      b1 = true;
    } else if (t.name == "embedder.w2") {
      if (t.dims.size() != 2)
        throw std::runtime_error("embedder.w2 has wrong rank");
      m.out_dim = static_cast<int>(t.dims[0]);
      m.w2 = t.values;
      w2 = true;
    } else if (t.name == "embedder.b2") {
      m.b2 = t.values;
      b2 = true;
    }
  }
  if (!w1 || !b1 || !w2 || !b2)
    throw std::runtime_error("not an embedder checkpoint: " + path);
  return m;
}

void write_embedding_cache(
    const std::string& path,
    const std::vector<std::pair<std::string, SpeakerEmbedding>>& entries) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot create embedding cache: " + path);
  auto put_u32 = [&](uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    f.write(reinterpret_cast<char*>(b), 4);
  };
  f.write("UPNEMB1", 7);
  const uint32_t dim =
      entries.empty() ? 0 : static_cast<uint32_t>(entries[0].second.dim());
  put_u32(static_cast<uint32_t>(entries.size()));
  put_u32(dim);
  for (const auto& [id, emb] : entries) {
    if (static_cast<uint32_t>(emb.dim()) != dim)
      throw std::runtime_error("embedding cache entries differ in dimension");
    put_u32(static_cast<uint32_t>(id.size()));
    f.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (double v : emb.values) {
      const float fv = static_cast<float>(v);
      uint32_t u;
      std::memcpy(&u, &fv, 4);
      put_u32(u);
    }
  }
  if (!f) throw std::runtime_error("short write to embedding cache: " + path);
}

std::vector<std::pair<std::string, SpeakerEmbedding>> read_embedding_cache(
    const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open embedding cache: " + path);
  auto get_u32 = [&]() {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw std::runtime_error("truncated embedding cache: " + path);
    return static_cast<uint32_t>(b[0]) | (b[1] << 8) | (b[2] << 16) |
           (static_cast<uint32_t>(b[3]) << 24);
  };
  char magic[7];
  f.read(magic, 7);
  if (!f || std::memcmp(magic, "UPNEMB1", 7) != 0)
    throw std::runtime_error("bad embedding cache magic: " + path);
  const uint32_t count = get_u32();
  const uint32_t dim = get_u32();
  std::vector<std::pair<std::string, SpeakerEmbedding>> out(count);
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t id_len = get_u32();
    out[i].first.resize(id_len);
    f.read(out[i].first.data(), id_len);
    out[i].second.values.resize(dim);
    for (uint32_t d = 0; d < dim; ++d) {
      const uint32_t u = get_u32();
      float fv;
      std::memcpy(&fv, &u, 4);
      out[i].second.values[d] = fv;
    }
  }
  return out;
}

}  // namespace upn
