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

#include "upn/conditioning.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "upn/rng.hpp"

namespace upn {

int FlagSchedule::switch_count() const {
  int switches = 0;
  for (size_t t = 1; t < q.size(); ++t)
    if (q[t] != q[t - 1]) ++switches;
  return switches;
}

void FlagSchedule::validate() const {
  if (q.empty()) throw std::invalid_argument("schedule is empty");
  for (uint8_t v : q)
    if (v > 1) throw std::invalid_argument("schedule values must be 0 or 1");
  const int switches = switch_count();
  if (switches > 2)
    throw std::invalid_argument("schedule has more than 2 switches");
  int run = 1;
  for (size_t t = 1; t <= q.size(); ++t) {
    if (t < q.size() && q[t] == q[t - 1]) {
      ++run;
    } else {
      if (run < min_run)
        throw std::invalid_argument("schedule run shorter than min_run");
      run = 1;
    }
  }
}

ConditionVector make_condition(const SpeakerEmbedding& z, int q) {
  ConditionVector c;
  c.values.assign(z.dim() + 1, 0.0);
  if (q == 1) {
    std::copy(z.values.begin(), z.values.end(), c.values.begin());
    c.values.back() = 1.0;
  }
  return c;
}

namespace {

// Uniform composition of `total` into `parts` nonnegative summands via
// stars and bars: choose parts-1 distinct bars from total+parts-1 slots.
std::vector<int> uniform_composition(int total, int parts, Rng& rng) {
  std::vector<int64_t> bars;
  const int64_t slots = static_cast<int64_t>(total) + parts - 1;
  while (static_cast<int>(bars.size()) < parts - 1) {
    const int64_t cand = rng.uniform_int(1, slots);
    if (std::find(bars.begin(), bars.end(), cand) == bars.end())
      bars.push_back(cand);
  }
  std::sort(bars.begin(), bars.end());
  std::vector<int> out(parts);
  int64_t prev = 0;
  for (int i = 0; i < parts - 1; ++i) {
    out[i] = static_cast<int>(bars[i] - prev - 1);
    prev = bars[i];
  }
  out[parts - 1] = static_cast<int>(slots - prev);
  return out;
}

}  // namespace

FlagSchedule sample_schedule(int n_frames, int min_run, uint64_t seed) {
  if (n_frames < min_run)
    throw std::invalid_argument("sample_schedule: n_frames < min_run");
  Rng rng(seed);
  FlagSchedule s;
  s.min_run = min_run;
  s.q.assign(n_frames, 0);

  const int64_t option = rng.uniform_int(0, 2);
  if (option == 0) {
    std::fill(s.q.begin(), s.q.end(), uint8_t{1});
    return s;
  }
  if (option == 1) return s;  // all zeros

  // Alternating. Pick 1 or 2 switches among the feasible counts.
  const bool one_ok = n_frames >= 2 * min_run;
  const bool two_ok = n_frames >= 3 * min_run;
  int switches = 0;
  if (one_ok && two_ok)
    switches = rng.coin() ? 1 : 2;
  else if (one_ok)
    switches = 1;
  if (switches == 0) {
    // No switch fits; degrade to a constant schedule.
    if (rng.coin()) std::fill(s.q.begin(), s.q.end(), uint8_t{1});
    return s;
  }
  const int parts = switches + 1;
  const int excess = n_frames - parts * min_run;
  const auto extra = uniform_composition(excess, parts, rng);
  uint8_t value = rng.coin() ? 1 : 0;
  int pos = 0;
  for (int p = 0; p < parts; ++p) {
    const int run = min_run + extra[p];
    std::fill(s.q.begin() + pos, s.q.begin() + pos + run, value);
    pos += run;
    value = static_cast<uint8_t>(1 - value);
  }
  return s;
}

FlagSchedule read_schedule_file(const std::string& path, int n_frames) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open schedule file: " + path);
  std::vector<std::pair<int64_t, int>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    int64_t start = -1;
    int q = -1;
    ss >> start >> q;
    if (ss.fail() || (q != 0 && q != 1) || start < 0)
      throw std::runtime_error("bad schedule line " + std::to_string(line_no) +
                               " in " + path);
    entries.emplace_back(start, q);
  }
  if (entries.empty() || entries.front().first != 0)
    throw std::runtime_error("schedule must start at frame 0: " + path);
  for (size_t i = 1; i < entries.size(); ++i)
    if (entries[i].first <= entries[i - 1].first)
      throw std::runtime_error("schedule start frames must increase: " + path);

  FlagSchedule s;
  s.min_run = 1;  // inference schedules are unrestricted
  s.q.assign(n_frames, 0);
  for (size_t i = 0; i < entries.size(); ++i) {
    const int64_t lo = entries[i].first;
    const int64_t hi =
        i + 1 < entries.size() ? entries[i + 1].first : n_frames;
    for (int64_t t = lo; t < std::min<int64_t>(hi, n_frames); ++t)
      s.q[t] = static_cast<uint8_t>(entries[i].second);
  }
  return s;
}

void write_schedule_file(const std::string& path,
                         const FlagSchedule& schedule) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot create schedule file: " + path);
  if (schedule.q.empty()) return;
  f << 0 << '\t' << static_cast<int>(schedule.q[0]) << '\n';
  for (size_t t = 1; t < schedule.q.size(); ++t)
    if (schedule.q[t] != schedule.q[t - 1])
      f << t << '\t' << static_cast<int>(schedule.q[t]) << '\n';
}

}  // namespace upn
