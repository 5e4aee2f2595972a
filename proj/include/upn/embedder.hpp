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

#ifndef UPN_EMBEDDER_HPP
#define UPN_EMBEDDER_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "upn/audio.hpp"
#include "upn/dsp.hpp"

namespace upn {

/// Unit-norm speaker identity vector.
struct SpeakerEmbedding {
  std::vector<double> values;

  int dim() const { return static_cast<int>(values.size()); }
  void normalize();
};

double cosine_similarity(const SpeakerEmbedding& a, const SpeakerEmbedding& b);

/// Small trainable speaker embedder.
///
/// Utterance statistics (mean and standard deviation over frames of
/// level-normalized log ERB-band energies) feed two tanh dense layers; the
/// output is L2-normalized. Level normalization divides band energies by
/// their global mean, so embeddings are invariant to input gain.
struct EmbedderModel {
  int stat_dim = 2 * kNumBands;
  int hidden_dim = 64;
  int out_dim = 32;
  std::vector<double> w1, b1;  // [hidden][stat], [hidden]
  std::vector<double> w2, b2;  // [out][hidden], [out]
  // AAM-softmax class weights, rows unit-norm; kept only during training.
  int n_classes = 0;
  std::vector<double> class_weights;  // [n_classes][out]
};

EmbedderModel init_embedder(int stat_dim, int hidden_dim, int out_dim,
                            int n_classes, uint64_t seed);

/// Utterance statistics vector (the embedder's input features).
std::vector<double> utterance_stats(const AudioBuffer& audio,
                                    const AnalysisConfig& config);

/// Embeds at least one second of enrollment audio into a unit-norm vector.
SpeakerEmbedding embed(const EmbedderModel& model,
                       const AudioBuffer& enrollment);

/// Additive-angular-margin softmax loss and its gradients.
struct AamResult {
  double loss = 0.0;
  std::vector<double> grad_embedding;      // d loss / d embedding
  std::vector<double> grad_class_weights;  // d loss / d W, [n_classes][dim]
};

AamResult aam_softmax_loss(const std::vector<double>& embedding, int label,
                           const std::vector<double>& class_weights,
                           int n_classes, double margin, double scale);

/// Equal error rate from same/different-speaker score lists, with linear
/// interpolation between adjacent thresholds.
double compute_eer(const std::vector<double>& scores_same,
                   const std::vector<double>& scores_diff);

/// Enrollment augmentation: each variant is the input convolved with a
/// random synthetic room response (RT60 ~ U(0.1, 0.6) s) plus white/pink
/// noise at an SNR drawn from U(0, 20) dB, truncated to the input length.
std::vector<AudioBuffer> augment_enrollment(const AudioBuffer& enrollment,
                                            int n_variants, uint64_t seed);

struct EmbedderTrainConfig {
  double learning_rate = 0.05;
  int epochs = 300;
  double margin = 0.2;
  double scale = 30.0;
  uint64_t seed = 1;
};

/// Trains the embedder with AAM-softmax on labeled utterance statistics.
/// Returns the per-epoch mean loss.
std::vector<double> train_embedder(EmbedderModel& model,
                                   const std::vector<std::vector<double>>& stats,
                                   const std::vector<int>& labels,
                                   const EmbedderTrainConfig& config);

/// Embedder checkpoint (same tensor container as enhancer checkpoints).
void save_embedder(const std::string& path, const EmbedderModel& model);
EmbedderModel load_embedder(const std::string& path);

/// Embedding cache: "UPNEMB1", u32 count, u32 D, then per entry a
/// length-prefixed UTF-8 speaker id followed by D LE f32 values.
void write_embedding_cache(
    const std::string& path,
    const std::vector<std::pair<std::string, SpeakerEmbedding>>& entries);
std::vector<std::pair<std::string, SpeakerEmbedding>> read_embedding_cache(
    const std::string& path);

}  // namespace upn

#endif  // UPN_EMBEDDER_HPP
