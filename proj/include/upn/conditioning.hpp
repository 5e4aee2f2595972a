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

#ifndef UPN_CONDITIONING_HPP
#define UPN_CONDITIONING_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "upn/embedder.hpp"

namespace upn {

constexpr int kMinRunFrames = 200;  // 2 s at a 10 ms hop

/// Per-frame binary personalization control. At most two switches per
/// schedule and every constant run lasts at least min_run frames.
struct FlagSchedule {
  std::vector<uint8_t> q;  // values in {0, 1}
  int min_run = kMinRunFrames;

  int n_frames() const { return static_cast<int>(q.size()); }
  int switch_count() const;
  void validate() const;
};

/// Per-frame conditioning input: the speaker embedding with the flag
/// appended when personalized, the exact zero vector otherwise.
struct ConditionVector {
  std::vector<double> values;  // D + 1 entries
};

ConditionVector make_condition(const SpeakerEmbedding& z, int q);

/// Draws one of three equally likely schedule shapes: all ones, all zeros,
/// or an alternating layout with one or two switches whose run lengths are
/// uniform over all feasible layouts with runs >= min_run. When n_frames
/// can't fit a switch the alternating option degenerates to a constant
/// schedule (fair coin).
FlagSchedule sample_schedule(int n_frames, int min_run, uint64_t seed);

/// Frame t takes the personalized stream iff q_t = 1.
template <typename T>
std::vector<T> select_targets(const std::vector<T>& personalized,
                              const std::vector<T>& non_personalized,
                              const FlagSchedule& schedule) {
  if (personalized.size() != non_personalized.size() ||
      static_cast<int>(personalized.size()) != schedule.n_frames())
    throw std::invalid_argument("select_targets: length mismatch");
  std::vector<T> out(personalized.size());
  for (size_t t = 0; t < out.size(); ++t)
    out[t] = schedule.q[t] ? personalized[t] : non_personalized[t];
  return out;
}

/// Schedule file: UTF-8 lines "start_frame<TAB>q". The first entry must
/// start at frame 0; later frames inherit q until the next entry.
FlagSchedule read_schedule_file(const std::string& path, int n_frames);
void write_schedule_file(const std::string& path,
                         const FlagSchedule& schedule);

}  // namespace upn

#endif  // UPN_CONDITIONING_HPP
