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
#include <limits>

#include "../test_util.hpp"
#include "reltrav/trainer.hpp"

using namespace reltrav;
using testutil::CodeOf;

namespace {

TrainConfig Tiny(std::uint64_t seed = 0) {
  TrainConfig c;
  c.model.encoder_widths = {4, 6, 8};
  c.seed = seed;
  c.steps = 6;
  c.batch_size = 2;
  return c;
}

const SynthDataset& SmallSet() {
  static const SynthDataset ds = BuildSynthDataset(3, 8, SynthConfig{});
  return ds;
}

bool SameLog(const std::vector<StepLog>& a, const std::vector<StepLog>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].acc_loss != b[i].acc_loss || a[i].cons_loss != b[i].cons_loss ||
        a[i].total != b[i].total || a[i].pairs != b[i].pairs) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("oversampling reaches the target inequality fraction") {
  std::vector<int> labels(90, 0);
  labels.insert(labels.end(), {1, -1, 1, -1, 1, -1, 1, -1, 1, -1});
  OversampleStream s(labels, 0.5, 17);
  int unequal = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) unequal += labels[s.Next()] != 0;
  CHECK(std::abs(unequal / static_cast<double>(n) - 0.5) <= 0.02);

  const std::vector<int> all{1, -1, 1};
  OversampleStream only(all, 0.5, 1);
  for (int i = 0; i < 1000; ++i) CHECK(all[only.Next()] != 0);

  OversampleStream x(labels, 0.5, 99), y(labels, 0.5, 99);
  for (int i = 0; i < 500; ++i) CHECK(x.Next() == y.Next());

  CHECK(CodeOf([] { OversampleStream(std::vector<int>{}, 0.5, 0); }) ==
        ErrorCode::kEmptyAnnotationSet);
  CHECK(CodeOf([&] { OversampleStream(labels, 1.0, 0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("geometric transform point mapping") {
  GeometricTransform g = GeometricTransform::Identity(80, 48);
  for (int x : {0, 17, 79}) {
    const auto p = g.MapPoint(x, 5);
    REQUIRE(p.has_value());
    CHECK(p->first == doctest::Approx(x));
    CHECK(p->second == doctest::Approx(5));
  }
  g.flip = true;
  CHECK(g.MapPoint(10, 7)->first == doctest::Approx(80 - 1 - 10));
  CHECK(g.MapPoint(10, 7)->second == doctest::Approx(7));

  GeometricTransform crop{10, 4, 64, 40, false, 64, 40};
  CHECK(!crop.MapPoint(5, 20).has_value());
  CHECK(!crop.MapPoint(20, 2).has_value());
  CHECK(crop.MapPoint(10, 4)->first == doctest::Approx(0.0));
}

TEST_CASE("augmentation shares geometry and jitters colors independently") {
  const Tensor img = ToTensor(SmallSet().scenes[0].image);
  AugmentConfig fixed;
  fixed.crop_scale_min = 1.0;
  fixed.flip_probability = 0.0;
  Rng rng(3);
  const std::vector<PointRef> pts{{"img", 3, 4}, {"img", 70, 40}};
  const AugmentedPair a = AugmentPair(img, pts, 48, 80, fixed, rng);
  CHECK(a.geometry.crop_w == 80);
  CHECK(a.geometry.crop_h == 48);
  CHECK(!a.geometry.flip);
  CHECK(ApplyGeometric(img, a.geometry) == img);
  CHECK(!(a.student_view == a.teacher_view));
  CHECK(a.points[0]->first == doctest::Approx(3.0));
  CHECK(ApplyJitter(img, ColorJitter{}) == img);

  AugmentConfig off;
  off.enabled = false;
  const AugmentedPair b = AugmentPair(img, pts, 48, 80, off, rng);
  CHECK(b.student_view == img);
  CHECK(b.teacher_view == img);

  AugmentConfig flipping;
  flipping.crop_scale_min = 1.0;
  flipping.flip_probability = 1.0;
  const AugmentedPair f = AugmentPair(img, pts, 48, 80, flipping, rng);
  CHECK(f.points[0]->first == doctest::Approx(76.0));
  CHECK(f.points[1]->first == doctest::Approx(9.0));

  Rng r1(8), r2(8);
  AugmentConfig def;
  const AugmentedPair d1 = AugmentPair(img, pts, 48, 80, def, r1);
  const AugmentedPair d2 = AugmentPair(img, pts, 48, 80, def, r2);
  CHECK(d1.student_view == d2.student_view);
  for (int i = 0; i < 50; ++i) {
    const GeometricTransform g = SampleGeometric(48, 80, 48, 80, def, r1);
    CHECK(g.crop_w >= static_cast<int>(0.8 * 80) - 1);
    CHECK(g.crop_x + g.crop_w <= 80);
    CHECK(g.crop_y + g.crop_h <= 48);
  }
}

TEST_CASE("pure ranking steps reduce the accuracy loss") {
  const SynthDataset& ds = SmallSet();
  TrainConfig c = Tiny();
  c.loss_config.consistency_weight = 0.0;
  c.augment.enabled = false;
  c.learning_rate = 1e-3;
  Trainer t(c, ds.manifest, ds.annotations, testutil::SceneProvider(ds));
  const double before = t.AccuracyLoss(ds.annotations);
  for (int i = 0; i < 5; ++i) t.StepOn(ds.annotations);
  CHECK(t.AccuracyLoss(ds.annotations) < before);
}

TEST_CASE("teacher follows the EMA configuration") {
  const SynthDataset& ds = SmallSet();
  TrainConfig frozen = Tiny();
  frozen.alpha = 1.0;
  Trainer a(frozen, ds.manifest, ds.annotations, testutil::SceneProvider(ds));
  const ParamSet t0 = a.teacher();
  for (int i = 0; i < 3; ++i) a.Step();
  CHECK(a.teacher() == t0);
  CHECK(!(a.student() == t0));

  TrainConfig copy = Tiny();
  copy.alpha = 0.0;
  copy.loss_config.consistency_weight = 0.0;
  Trainer b(copy, ds.manifest, ds.annotations, testutil::SceneProvider(ds));
  for (int i = 0; i < 3; ++i) {
    b.Step();
    CHECK(b.teacher() == b.student());
  }
}

TEST_CASE("training is bit identical under a fixed seed") {
  const SynthDataset& ds = SmallSet();
  const TrainResult r1 = Train(Tiny(4), ds.manifest, ds.annotations, testutil::SceneProvider(ds));
  const TrainResult r2 = Train(Tiny(4), ds.manifest, ds.annotations, testutil::SceneProvider(ds));
  CHECK(SameLog(r1.log, r2.log));
  CHECK(r1.checkpoint == r2.checkpoint);
  CHECK(r1.log.size() == 6);
  CHECK(r1.checkpoint.step == 6);
  const TrainResult r3 = Train(Tiny(5), ds.manifest, ds.annotations, testutil::SceneProvider(ds));
  CHECK(!SameLog(r1.log, r3.log));
  for (const StepLog& s : r1.log) {
    CHECK(s.total == doctest::Approx(s.acc_loss + s.cons_loss));
    CHECK(s.lr == 1e-3);
  }
}

TEST_CASE("intra-only mode equals training on pre-filtered labels") {
  const SynthDataset& ds = SmallSet();
  std::vector<PairAnnotation> intra;
  for (const PairAnnotation& a : ds.annotations) {
    if (a.kind == PairKind::kIntra) intra.push_back(a);
  }
  TrainConfig flag = Tiny(2);
  flag.intra_only = true;
  const TrainResult r1 = Train(flag, ds.manifest, ds.annotations, testutil::SceneProvider(ds));
  const TrainResult r2 = Train(Tiny(2), ds.manifest, intra, testutil::SceneProvider(ds));
  CHECK(SameLog(r1.log, r2.log));
  CHECK(r1.checkpoint.student == r2.checkpoint.student);
}

TEST_CASE("epoch length counts image touches") {
  const SynthDataset& ds = SmallSet();
  TrainConfig c = Tiny();
  c.steps = 0;
  c.epochs = 3;
  Trainer t(c, ds.manifest, ds.annotations, testutil::SceneProvider(ds));
  // 8 intra (1 image each) + 8 cross (2 images each) = 24 touches, batch 2.
  CHECK(t.TotalSteps() == 3 * 12);
  TrainConfig b = c;
  b.label_budget = 4;
  CHECK(Trainer(b, ds.manifest, ds.annotations, testutil::SceneProvider(ds)).annotations().size() == 4);
}

TEST_CASE("trainer input validation") {
  const SynthDataset& ds = SmallSet();
  CHECK(CodeOf([&] { Trainer(Tiny(), ds.manifest, {}, testutil::SceneProvider(ds)); }) ==
        ErrorCode::kEmptyAnnotationSet);
  std::vector<PairAnnotation> cross_only;
  for (const PairAnnotation& a : ds.annotations) {
    if (a.kind == PairKind::kCross) cross_only.push_back(a);
  }
  TrainConfig c = Tiny();
  c.intra_only = true;
  CHECK(CodeOf([&] { Trainer(c, ds.manifest, cross_only, testutil::SceneProvider(ds)); }) ==
        ErrorCode::kEmptyAnnotationSet);
  TrainConfig bad = Tiny();
  bad.alpha = 2.0;
  CHECK_THROWS_AS(bad.Validate(), Error);
  std::vector<PairAnnotation> broken = ds.annotations;
  broken[0].t = 5;
  CHECK(CodeOf([&] { Trainer(Tiny(), ds.manifest, broken, testutil::SceneProvider(ds)); }) ==
        ErrorCode::kInvalidLabel);
}

TEST_CASE("non-finite inputs stop training") {
  const SynthDataset& ds = SmallSet();
  TrainConfig c = Tiny();
  c.augment.enabled = false;
  ImageProvider nan_images = [](const ImageEntry& e) {
    return Tensor(3, e.height, e.width, std::numeric_limits<double>::quiet_NaN());
  };
  Trainer t(c, ds.manifest, ds.annotations, nan_images);
  CHECK(CodeOf([&] { t.Step(); }) == ErrorCode::kNonFiniteLoss);
}
