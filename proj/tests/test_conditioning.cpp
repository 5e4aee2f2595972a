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

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "upn/conditioning.hpp"
#include "upn/rng.hpp"

using namespace upn;

TEST_CASE("flag off yields the exact zero vector") {
  SpeakerEmbedding z;
  z.values = {0.6, 0.8};
  const auto c = make_condition(z, 0);
  REQUIRE(c.values.size() == 3);
  for (double v : c.values) CHECK(v == 0.0);
}

TEST_CASE("flag on appends one to the embedding") {
  SpeakerEmbedding z;
  z.values = {0.6, 0.8};
  const auto c = make_condition(z, 1);
  REQUIRE(c.values.size() == 3);
  CHECK(c.values[0] == 0.6);
  CHECK(c.values[1] == 0.8);
  CHECK(c.values[2] == 1.0);
}

TEST_CASE("sampled schedules obey the structural invariants") {
  for (uint64_t seed = 0; seed < 2000; ++seed) {
    const auto s = sample_schedule(2000, 200, seed);
    CHECK(s.n_frames() == 2000);
    s.validate();  // throws on violation
    CHECK(s.switch_count() <= 2);
  }
}

TEST_CASE("minimum-length schedules never switch") {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    const auto s = sample_schedule(200, 200, seed);
    CHECK(s.switch_count() == 0);
  }
}

TEST_CASE("three options appear with equal frequency") {
  int all_on = 0, all_off = 0, alternating = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const auto s = sample_schedule(2000, 200, 77000 + i);
    if (s.switch_count() == 0) {
      if (s.q[0] == 1)
        ++all_on;
      else
        ++all_off;
    } else {
      ++alternating;
    }
  }
  CHECK(std::abs(all_on / static_cast<double>(trials) - 1.0 / 3) < 0.02);
  CHECK(std::abs(all_off / static_cast<double>(trials) - 1.0 / 3) < 0.02);
  CHECK(std::abs(alternating / static_cast<double>(trials) - 1.0 / 3) < 0.02);
}

TEST_CASE("sampler rejects too-short sequences") {
  CHECK_THROWS_AS(sample_schedule(100, 200, 1), std::invalid_argument);
}

TEST_CASE("target selection follows the flag per frame") {
  std::vector<int> pers(1000), nonpers(1000);
  for (int t = 0; t < 1000; ++t) {
    pers[t] = t;
    nonpers[t] = -t - 1;
  }
  FlagSchedule s;
  s.min_run = 200;
  s.q.assign(1000, 0);

  SUBCASE("all ones copies the personalized stream") {
    std::fill(s.q.begin(), s.q.end(), uint8_t{1});
    CHECK(select_targets(pers, nonpers, s) == pers);
  }
  SUBCASE("all zeros copies the non-personalized stream") {
    CHECK(select_targets(pers, nonpers, s) == nonpers);
  }
  SUBCASE("a switch at frame 500 splits exactly there") {
    std::fill(s.q.begin(), s.q.begin() + 500, uint8_t{1});
    const auto sel = select_targets(pers, nonpers, s);
    for (int t = 0; t < 500; ++t) CHECK(sel[t] == pers[t]);
    for (int t = 500; t < 1000; ++t) CHECK(sel[t] == nonpers[t]);
  }
  SUBCASE("length mismatch throws") {
    pers.pop_back();
    CHECK_THROWS_AS(select_targets(pers, nonpers, s), std::invalid_argument);
  }
}

TEST_CASE("changing one flag changes only that frame's target") {
  std::vector<int> pers(400), nonpers(400);
  for (int t = 0; t < 400; ++t) {
    pers[t] = t;
    nonpers[t] = -t - 1;
  }
  FlagSchedule a;
  a.min_run = 1;
  a.q.assign(400, 0);
  FlagSchedule b = a;
  b.q[123] = 1;
  const auto sa = select_targets(pers, nonpers, a);
  const auto sb = select_targets(pers, nonpers, b);
  for (int t = 0; t < 400; ++t) {
    if (t == 123)
      CHECK(sa[t] != sb[t]);
    else
      CHECK(sa[t] == sb[t]);
  }
}

TEST_CASE("schedule files round trip and inherit values") {
  const auto path =
      (std::filesystem::temp_directory_path() / "upn_sched.tsv").string();
  {
    std::ofstream f(path);
    f << "0\t1\n500\t0\n900\t1\n";
  }
  const auto s = read_schedule_file(path, 1200);
  CHECK(s.q[0] == 1);
  CHECK(s.q[499] == 1);
  CHECK(s.q[500] == 0);
  CHECK(s.q[899] == 0);
  CHECK(s.q[900] == 1);
  CHECK(s.q[1199] == 1);

  const auto path2 =
      (std::filesystem::temp_directory_path() / "upn_sched2.tsv").string();
  write_schedule_file(path2, s);
  const auto s2 = read_schedule_file(path2, 1200);
  CHECK(s2.q == s.q);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("schedule files must start at frame zero") {
  const auto path =
      (std::filesystem::temp_directory_path() / "upn_sched3.tsv").string();
  {
    std::ofstream f(path);
    f << "10\t1\n";
  }
  CHECK_THROWS_AS(read_schedule_file(path, 100), std::runtime_error);
  std::remove(path.c_str());
}
