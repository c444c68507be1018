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

#include <fstream>
#include <random>

#include "../test_util.hpp"
#include "reltrav/core.hpp"

using namespace reltrav;
using testutil::CodeOf;

namespace {

DatasetManifest TwoImages() {
  return DatasetManifest({{"img0", "img0.ppm", 424, 240, std::nullopt},
                          {"img1", "img1.ppm", 424, 240, std::nullopt}});
}

PairAnnotation Intra(const std::string& id, int x0, int y0, int x1, int y1, int t = 1) {
  return PairAnnotation{id, {"img0", x0, y0}, {"img0", x1, y1}, t, PairKind::kIntra,
                        LabelSource::kHuman};
}

}  // namespace

TEST_CASE("manifest preserves order and rejects duplicates") {
  const DatasetManifest m = TwoImages();
  REQUIRE(m.size() == 2);
  CHECK(m.images()[0].image_id == "img0");
  CHECK(m.images()[1].image_id == "img1");
  CHECK(m.IndexOf("img1") == 1);
  CHECK(m.Find("nope") == nullptr);
  CHECK(CodeOf([&] { m.Get("nope"); }) == ErrorCode::kUnknownImageId);
  CHECK(CodeOf([] {
          DatasetManifest({{"img0", "a", 20, 20, std::nullopt}, {"img0", "b", 20, 20, std::nullopt}});
        }) == ErrorCode::kDuplicateImageId);
  CHECK(DatasetManifest(std::vector<ImageEntry>{}).empty());
  CHECK(CodeOf([] { DatasetManifest({{"x", "a", 0, 10, std::nullopt}}); }) ==
        ErrorCode::kInvalidDimensions);
}

TEST_CASE("manifest file round trip") {
  testutil::TempDir dir("manifest");
  DatasetManifest m({{"a", "a.ppm", 80, 48, std::string("a_gt.pgm")},
                     {"b", "b.ppm", 64, 32, std::nullopt}},
                    48, 80);
  SaveManifest(m, dir / "m.jsonl");
  const DatasetManifest back = LoadManifest(dir / "m.jsonl");
  CHECK(back.images() == m.images());
  CHECK(back.target_height() == 48);
  CHECK(back.target_width() == 80);
  CHECK(back.Resolve("a.ppm") == dir.path() / "a.ppm");
  CHECK(CodeOf([&] { LoadManifest(dir / "missing.jsonl"); }) == ErrorCode::kIo);
}

TEST_CASE("minimum pair distance is 12 px at 424x240") {
  const DatasetManifest m = TwoImages();
  CHECK(MinPairDistance(424, 240) == doctest::Approx(12.0));
  CHECK(MinPairDistance(16, 16) == doctest::Approx(0.8));
  CHECK_NOTHROW(ValidateAnnotation(Intra("ok", 10, 10, 60, 10), m));
  CHECK_NOTHROW(ValidateAnnotation(Intra("edge", 10, 10, 22, 10), m));
  CHECK(CodeOf([&] { ValidateAnnotation(Intra("near", 10, 10, 21, 10), m); }) ==
        ErrorCode::kMinDistanceViolation);
}

TEST_CASE("annotation validation errors") {
  const DatasetManifest m = TwoImages();
  PairAnnotation cross{"c", {"img0", 1, 1}, {"img0", 100, 100}, 0, PairKind::kCross,
                       LabelSource::kHuman};
  CHECK(CodeOf([&] { ValidateAnnotation(cross, m); }) == ErrorCode::kKindMismatch);
  cross.b.image_id = "img1";
  CHECK_NOTHROW(ValidateAnnotation(cross, m));
  CHECK(CodeOf([&] { ValidateAnnotation(Intra("t", 0, 0, 50, 50, 2), m); }) ==
        ErrorCode::kInvalidLabel);
  CHECK(CodeOf([&] { ValidateAnnotation(Intra("o", 0, 0, 424, 50), m); }) == ErrorCode::kOutOfBounds);
  CHECK(CodeOf([&] { ValidateAnnotation(Intra("n", -1, 0, 50, 50), m); }) == ErrorCode::kOutOfBounds);
  PairAnnotation unknown = Intra("u", 0, 0, 50, 50);
  unknown.a.image_id = unknown.b.image_id = "img9";
  CHECK(CodeOf([&] { ValidateAnnotation(unknown, m); }) == ErrorCode::kUnknownImageId);
}

TEST_CASE("display coordinates map back to native pixels") {
  const PointRef p = FromDisplay("img0", 212.0, 120.0, 848.0, 480.0, 424, 240);
  CHECK(p.x == 106);
  CHECK(p.y == 60);
  const PointRef edge = FromDisplay("img0", 848.0, 480.0, 848.0, 480.0, 424, 240);
  CHECK(edge.x == 423);
  CHECK(edge.y == 239);
}

TEST_CASE("store round trip reproduces the sequence") {
  testutil::TempDir dir("store");
  const DatasetManifest m = TwoImages();
  std::mt19937_64 gen(3);
  std::vector<PairAnnotation> written;
  AnnotationStore store(dir / "ann.jsonl");
  for (int i = 0; i < 200; ++i) {
    PairAnnotation a;
    a.pair_id = "p" + std::to_string(i);
    a.t = static_cast<int>(gen() % 3) - 1;
    a.source = static_cast<LabelSource>(gen() % 3);
    if (i % 2 == 0) {
      a = PairAnnotation{a.pair_id, {"img0", 0, static_cast<int>(gen() % 240)},
                         {"img0", 100 + static_cast<int>(gen() % 324), static_cast<int>(gen() % 240)},
                         a.t, PairKind::kIntra, a.source};
    } else {
      a = PairAnnotation{a.pair_id, {"img0", static_cast<int>(gen() % 424), static_cast<int>(gen() % 240)},
                         {"img1", static_cast<int>(gen() % 424), static_cast<int>(gen() % 240)},
                         a.t, PairKind::kCross, a.source};
    }
    store.Append(a, m);
    written.push_back(a);
  }
  CHECK(store.Effective() == written);
  CHECK(LoadAnnotations(dir / "ann.jsonl") == written);
  SaveAnnotations(written, dir / "plain.jsonl");
  CHECK(LoadAnnotations(dir / "plain.jsonl") == written);
  CHECK(AnnotationFromJsonLine(AnnotationToJsonLine(written[5])) == written[5]);
}

TEST_CASE("store rejects duplicates and honours retract and skip") {
  testutil::TempDir dir("store2");
  const DatasetManifest m = TwoImages();
  AnnotationStore store(dir / "ann.jsonl");
  store.Append(Intra("a", 0, 0, 50, 0), m);
  store.Append(Intra("b", 0, 0, 60, 0), m);
  CHECK(CodeOf([&] { store.Append(Intra("a", 0, 0, 70, 0), m); }) == ErrorCode::kDuplicatePairId);
  CHECK(CodeOf([&] { store.Append(Intra("bad", 0, 0, 5, 0), m); }) ==
        ErrorCode::kMinDistanceViolation);
  store.Retract("a");
  store.MarkSkipped("c");
  std::vector<PairAnnotation> eff = store.Effective();
  REQUIRE(eff.size() == 1);
  CHECK(eff[0].pair_id == "b");
  store.Append(Intra("a", 0, 0, 70, 0), m);
  eff = store.Effective();
  REQUIRE(eff.size() == 2);
  CHECK(eff[1].b.x == 70);

  const std::vector<StoreRecord> recs = ReadStoreRecords(dir / "ann.jsonl");
  REQUIRE(recs.size() == 5);
  CHECK(recs[2].type == StoreRecord::Type::kRetract);
  CHECK(recs[3].type == StoreRecord::Type::kSkip);
  CHECK(recs[3].pair_id == "c");
  CHECK(ResolveRecords(recs) == eff);

  AnnotationStore reopened(dir / "ann.jsonl");
  CHECK(reopened.Effective() == eff);
  CHECK(CodeOf([&] { reopened.Append(Intra("b", 0, 0, 80, 0), m); }) == ErrorCode::kDuplicatePairId);
}

TEST_CASE("malformed annotation lines are parse errors") {
  CHECK(CodeOf([] { AnnotationFromJsonLine("{not json"); }) == ErrorCode::kParse);
  CHECK(CodeOf([] { AnnotationFromJsonLine(R"({"pair_id":"x"})"); }) == ErrorCode::kParse);
}

TEST_CASE("traversability map validation") {
  TraversabilityMap m(2, 2, 0.5);
  CHECK_NOTHROW(ValidateTraversabilityMap(m));
  m.at(1, 1) = 1.01;
  CHECK(CodeOf([&] { ValidateTraversabilityMap(m); }) == ErrorCode::kOutOfBounds);
  m.at(1, 1) = std::nan("");
  CHECK(CodeOf([&] { ValidateTraversabilityMap(m); }) == ErrorCode::kOutOfBounds);
}

TEST_CASE("error code names are CamelCase") {
  CHECK(ErrorCodeName(ErrorCode::kMinDistanceViolation) == "MinDistanceViolation");
  CHECK(ErrorCodeName(ErrorCode::kNothingToUndo) == "NothingToUndo");
}
