/* Copyright 2026 The reltrav Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <doctest.h>

#include <cmath>
#include <set>

#include "../test_util.hpp"
#include "reltrav/image.hpp"
#include "reltrav/pairgen.hpp"

using namespace reltrav;
using testutil::CodeOf;

namespace {

DatasetManifest Uniform(int n, int w = 424, int h = 240) {
  std::vector<ImageEntry> images;
  for (int i = 0; i < n; ++i) {
    images.push_back({"img" + std::to_string(i), "img" + std::to_string(i) + ".ppm", w, h,
                      std::nullopt});
  }
  return DatasetManifest(std::move(images));
}

constexpr int kGrass = 3, kWater = 6, kAsphalt = 10, kBush = 19, kConcrete = 23, kSky = 7;

}  // namespace

TEST_CASE("intra pairs respect the minimum distance") {
  for (auto [w, h] : {std::pair{424, 240}, std::pair{16, 16}}) {
    const double threshold = MinPairDistance(w, h);
    for (std::uint64_t s = 0; s < 10000; ++s) {
      Rng rng(s);
      const auto [a, b] = SampleIntraPair("x", w, h, rng);
      REQUIRE(PixelDistance(a, b) >= threshold);
      REQUIRE(a.x >= 0);
      REQUIRE(a.x < w);
      REQUIRE(b.y >= 0);
      REQUIRE(b.y < h);
    }
  }
  Rng r1(5), r2(5);
  CHECK(SampleIntraPair("x", 424, 240, r1) == SampleIntraPair("x", 424, 240, r2));
}

TEST_CASE("cross pairs choose a different image") {
  const DatasetManifest two = Uniform(2);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) CHECK(SampleCrossPair(two, "img0", rng).second.image_id == "img1");
  CHECK(CodeOf([&] { SampleCrossPair(Uniform(1), "img0", rng); }) == ErrorCode::kSingleImageDataset);
  CHECK(CodeOf([&] { SampleCrossPair(two, "img7", rng); }) == ErrorCode::kUnknownImageId);
}

TEST_CASE("cross partner distribution is uniform") {
  const DatasetManifest m = Uniform(100);
  Rng rng(42);
  std::vector<int> counts(100, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto [a, b] = SampleCrossPair(m, "img0", rng);
    REQUIRE(b.image_id != "img0");
    counts[m.IndexOf(b.image_id)]++;
  }
  CHECK(counts[0] == 0);
  const double expected = draws / 99.0;
  double chi2 = 0.0;
  for (int i = 1; i < 100; ++i) chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  // 98 degrees of freedom: mean 98, sd 14; accept within 3 sd.
  CHECK(chi2 < 98.0 + 3.0 * 14.0);
}

TEST_CASE("task generation counts and determinism") {
  CHECK(GeneratePairTasks(Uniform(2), 0).size() == 4);
  CHECK(GeneratePairTasks(Uniform(1), 0, {true, false, std::nullopt}).size() == 1);
  CHECK(CodeOf([] { GeneratePairTasks(Uniform(1), 0); }) == ErrorCode::kSingleImageDataset);
  CHECK(CodeOf([] { GeneratePairTasks(DatasetManifest(std::vector<ImageEntry>{}), 0); }) == ErrorCode::kEmptySet);

  const DatasetManifest m = Uniform(30);
  const auto t1 = GeneratePairTasks(m, 9);
  CHECK(t1 == GeneratePairTasks(m, 9));
  CHECK(t1 != GeneratePairTasks(m, 10));
  std::set<std::string> ids;
  for (const PairTask& t : t1) {
    ids.insert(t.task_id);
    CHECK(t.status == TaskStatus::kPending);
    if (t.kind == PairKind::kIntra) {
      CHECK(t.a.image_id == t.b.image_id);
      CHECK(PixelDistance(t.a, t.b) >= 12.0);
    } else {
      CHECK(t.a.image_id != t.b.image_id);
    }
  }
  CHECK(ids.size() == t1.size());
  const LabelAccounting acc = AccountTasks(m.size(), t1);
  CHECK(acc.intra == 30);
  CHECK(acc.cross == 30);
  CHECK(acc.accounted_labels == 45);
}

TEST_CASE("label accounting reproduces the collection totals") {
  const LabelAccounting acc = AccountLabels(16558, 16558, 16558);
  CHECK(acc.tasks == 33116);
  CHECK(acc.accounted_labels == 24837);
}

TEST_CASE("bottom-biased sampling") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) CHECK(SampleBiasedPoint("x", 424, 240, rng, 1.0).y >= 120);
  int bottom = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) bottom += SampleBiasedPoint("x", 424, 240, rng, 0.9).y >= 120;
  CHECK(std::abs(static_cast<double>(bottom) / n - 0.95) <= 0.005);
  bottom = 0;
  for (int i = 0; i < n; ++i) bottom += SampleBiasedPoint("x", 424, 240, rng, 0.0).y >= 120;
  CHECK(std::abs(static_cast<double>(bottom) / n - 0.5) <= 0.01);

  const auto biased = GeneratePairTasks(Uniform(50), 3, {true, true, 1.0});
  for (const PairTask& t : biased) {
    CHECK(t.a.y >= 120);
    CHECK(t.b.y >= 120);
  }
}

TEST_CASE("autolabel from tiers") {
  const TierTable rugd = TierTable::RugdDefault();
  CHECK(rugd.classes().size() == 25);
  CHECK(AutolabelFromTiers(kGrass, kConcrete, rugd) == 1);
  CHECK(AutolabelFromTiers(kWater, kBush, rugd) == 0);
  CHECK(AutolabelFromTiers(kAsphalt, kWater, rugd) == -1);
  CHECK(rugd.TierOf(kSky) == 0);
  CHECK(CodeOf([&] { rugd.TierOf(99); }) == ErrorCode::kUnknownClassId);
  for (int a = 0; a < 25; ++a) {
    for (int b = 0; b < 25; ++b) {
      CHECK(AutolabelFromTiers(a, b, rugd) == -AutolabelFromTiers(b, a, rugd));
    }
  }
  CHECK(TierTable::FromJson(rugd.ToJson()).classes().size() == 25);
  CHECK(CodeOf([] { TierTable({{0, "x", 4}}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("autolabel tasks reads class maps") {
  testutil::TempDir dir("autolabel");
  Grid<int> left(20, 20, kGrass), right(20, 20, kConcrete);
  for (int y = 10; y < 20; ++y) {
    for (int x = 0; x < 20; ++x) left.at(y, x) = kAsphalt;
  }
  WritePgm16(left, dir / "l.pgm");
  WritePgm16(right, dir / "r.pgm");
  const DatasetManifest m({{"l", "l.ppm", 20, 20, std::string("l.pgm")},
                           {"r", "r.ppm", 20, 20, std::string("r.pgm")}},
                          20, 20, dir.path());
  std::vector<PairTask> tasks{
      {"t0", {"l", 5, 2}, {"l", 5, 15}, PairKind::kIntra, TaskStatus::kPending},
      {"t1", {"l", 5, 15}, {"r", 1, 1}, PairKind::kCross, TaskStatus::kPending},
      {"t2", {"r", 1, 1}, {"l", 1, 1}, PairKind::kCross, TaskStatus::kPending},
      {"t3", {"r", 1, 1}, {"l", 1, 1}, PairKind::kCross, TaskStatus::kSkipped}};
  const auto anns = AutolabelTasks(m, tasks, TierTable::RugdDefault());
  REQUIRE(anns.size() == 3);
  CHECK(anns[0].t == 1);
  CHECK(anns[1].t == 0);
  CHECK(anns[2].t == -1);
  CHECK(anns[0].source == LabelSource::kAuto);
}

TEST_CASE("task file round trip") {
  testutil::TempDir dir("tasks");
  auto tasks = GeneratePairTasks(Uniform(5), 1);
  tasks[2].status = TaskStatus::kSkipped;
  SaveTasks(tasks, dir / "t.jsonl");
  CHECK(LoadTasks(dir / "t.jsonl") == tasks);
  CHECK(CodeOf([] { TaskFromJsonLine("[]"); }) == ErrorCode::kParse);
}
