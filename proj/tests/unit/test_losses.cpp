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
#include <random>

#include "../oracles.hpp"
#include "reltrav/losses.hpp"

using namespace reltrav;

namespace {

constexpr LossKind kAll[] = {LossKind::kDiw, LossKind::kSnow, LossKind::kRizz, LossKind::kRizzL1};

double OracleFor(LossKind k, double pa, double pb, int t, double margin, double clamp) {
  switch (k) {
    case LossKind::kDiw: return oracle::Diw(pa, pb, t);
    case LossKind::kSnow: return oracle::Snow(pa, pb, t, clamp);
    case LossKind::kRizz: return oracle::Rizz(pa, pb, t, margin);
    case LossKind::kRizzL1: return oracle::RizzL1(pa, pb, t, margin);
  }
  return 0.0;
}

LossValue Eval(LossKind k, double pa, double pb, int t, double margin = 0.5, double clamp = 1.0) {
  LossConfig cfg;
  cfg.margin = margin;
  cfg.snow_clamp = clamp;
  return losses::Pair(k, pa, pb, t, cfg);
}

}  // namespace

TEST_CASE("diw scalar examples") {
  CHECK(losses::Diw(0.5, 0.5, 0).value == 0.0);
  CHECK(losses::Diw(0.5, 0.5, 1).value == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(losses::Diw(0.7, 0.3, 1).value == doctest::Approx(0.913015).epsilon(1e-6));
}

TEST_CASE("snow scalar examples") {
  CHECK(losses::Snow(0.0, 1.0, 1, 0.5).value == doctest::Approx(0.474077).epsilon(1e-6));
  CHECK(losses::Snow(0.3, 0.5, 1, 1.0).value == losses::Diw(0.3, 0.5, 1).value);
  CHECK(losses::Snow(0.2, 0.2, 0, 1.0).value == 0.0);
}

TEST_CASE("rizz scalar examples") {
  CHECK(losses::Rizz(0.1, 0.8, 1, 0.5).value == 0.0);
  CHECK(losses::Rizz(0.5, 0.5, 1, 0.5).value == doctest::Approx(0.25));
  CHECK(losses::Rizz(0.3, 0.5, 0, 0.5).value == doctest::Approx(0.04));
}

TEST_CASE("rizz_l1 scalar examples") {
  CHECK(losses::RizzL1(0.5, 0.5, 1, 0.5).value == doctest::Approx(0.5));
  CHECK(losses::RizzL1(0.3, 0.5, 0, 0.5).value == doctest::Approx(0.2));
  CHECK(losses::RizzL1(0.1, 0.8, -1, 0.5).value == doctest::Approx(1.2));
}

TEST_CASE("losses agree with the scalar oracles") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> ti(-1, 1);
  for (int i = 0; i < 2000; ++i) {
    const double pa = u(gen), pb = u(gen);
    const int t = ti(gen);
    for (LossKind k : kAll) {
      CHECK(std::abs(Eval(k, pa, pb, t).value - OracleFor(k, pa, pb, t, 0.5, 1.0)) < 1e-10);
    }
  }
}

TEST_CASE("inequality branches are antisymmetric") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double pa = u(gen), pb = u(gen);
    for (LossKind k : kAll) {
      for (int t : {-1, 1}) {
        CHECK(Eval(k, pa, pb, t).value == doctest::Approx(Eval(k, pb, pa, -t).value).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("analytic partials match central differences") {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double h = 1e-4;
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const double pa = u(gen), pb = u(gen);
    const double d = pb - pa;
    for (int t : {-1, 0, 1}) {
      for (LossKind k : kAll) {
        if ((k == LossKind::kRizz || k == LossKind::kRizzL1) && t != 0 && std::abs(t * d - 0.5) < 1e-3) continue;
        if (k == LossKind::kSnow && t != 0 && std::abs(std::abs(d) - 1.0) < 1e-3) continue;
        if (k == LossKind::kRizzL1 && t == 0 && std::abs(d) < 1e-3) continue;
        const LossValue v = Eval(k, pa, pb, t);
        const double fa = (Eval(k, pa + h, pb, t).value - Eval(k, pa - h, pb, t).value) / (2 * h);
        const double fb = (Eval(k, pa, pb + h, t).value - Eval(k, pa, pb - h, t).value) / (2 * h);
        const double sa = std::max({std::abs(fa), std::abs(v.d_pa), 1e-8});
        const double sb = std::max({std::abs(fb), std::abs(v.d_pb), 1e-8});
        CHECK(std::abs(fa - v.d_pa) <= 1e-4 * sa + 1e-12);
        CHECK(std::abs(fb - v.d_pb) <= 1e-4 * sb + 1e-12);
        ++checked;
      }
    }
  }
  CHECK(checked > 11000);
}

TEST_CASE("rizz zero set versus diw") {
  std::mt19937_64 gen(14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    double pa = u(gen) * 0.5, pb = 0.5 + u(gen) * 0.5;
    const int t = (i % 2 == 0) ? 1 : -1;
    if (t == -1) std::swap(pa, pb);
    if (t * (pb - pa) < 0.5) continue;
    const LossValue r = losses::Rizz(pa, pb, t, 0.5);
    CHECK(r.value == 0.0);
    CHECK(r.d_pa == 0.0);
    CHECK(r.d_pb == 0.0);
    CHECK(losses::Diw(pa, pb, t).value > 0.0);
  }
  CHECK(losses::Rizz(0.4, 0.4, 0, 0.5).value == 0.0);
  CHECK(losses::Rizz(0.4, 0.45, 0, 0.5).value > 0.0);
}

TEST_CASE("inequality losses are non-increasing in p_b for t = 1") {
  for (LossKind k : kAll) {
    double prev = Eval(k, 0.3, 0.0, 1).value;
    for (int i = 1; i <= 100; ++i) {
      const double cur = Eval(k, 0.3, i / 100.0, 1).value;
      CHECK(cur <= prev + 1e-15);
      prev = cur;
    }
  }
}

TEST_CASE("rizz is C1 across the hinge, rizz_l1 is only continuous") {
  const double e = 1e-7;
  const LossValue below = losses::Rizz(0.0, 0.5 - e, 1, 0.5);
  const LossValue above = losses::Rizz(0.0, 0.5 + e, 1, 0.5);
  CHECK(std::abs(below.value - above.value) < 1e-12);
  CHECK(std::abs(below.d_pb - above.d_pb) < 1e-6);
  const LossValue l1b = losses::RizzL1(0.0, 0.5 - e, 1, 0.5);
  const LossValue l1a = losses::RizzL1(0.0, 0.5 + e, 1, 0.5);
  CHECK(std::abs(l1b.value - l1a.value) < 1e-6);
  CHECK(std::abs(l1b.d_pb - l1a.d_pb) == doctest::Approx(1.0));
}

TEST_CASE("softplus is stable for large arguments") {
  CHECK(losses::Softplus(1000.0) == doctest::Approx(1000.0));
  CHECK(losses::Softplus(-1000.0) >= 0.0);
  CHECK(std::isfinite(losses::Softplus(-1000.0)));
}

TEST_CASE("consistency loss") {
  TraversabilityMap a(2, 2, 0.0), b(2, 2, 0.0);
  CHECK(losses::Consistency(a, b) == 0.0);
  b.at(0, 0) = 1.0;
  CHECK(losses::Consistency(a, b) == doctest::Approx(0.25));
  CHECK(losses::Consistency(TraversabilityMap(3, 3, 1.0), TraversabilityMap(3, 3, 0.0)) == 1.0);
  TraversabilityMap c(2, 3, 0.0);
  try {
    losses::Consistency(a, c);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
  }
  const Grid<double> g = losses::ConsistencyGrad(a, b);
  CHECK(g.at(0, 0) == doctest::Approx(-0.5));
  CHECK(g.at(1, 1) == 0.0);
}

TEST_CASE("total loss") {
  CHECK(losses::Total(0.5, 0.2, 1.0) == doctest::Approx(0.7));
  CHECK(losses::Total(0.5, 0.2, 0.0) == 0.5);
  CHECK(losses::Total(0.0, 0.0, 5.0) == 0.0);
}

TEST_CASE("loss config validation and names") {
  LossConfig c;
  CHECK_NOTHROW(c.Validate());
  c.margin = 0.0;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = LossConfig{};
  c.snow_clamp = -1;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = LossConfig{};
  c.consistency_weight = -0.1;
  CHECK_THROWS_AS(c.Validate(), Error);
  for (LossKind k : kAll) CHECK(ParseLossKind(LossKindName(k)) == k);
  CHECK_THROWS_AS(ParseLossKind("hinge"), Error);
}
