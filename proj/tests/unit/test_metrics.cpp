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
#include "../test_util.hpp"
#include "reltrav/metrics.hpp"

using namespace reltrav;
using testutil::CodeOf;

namespace {

using Preds = std::vector<std::pair<double, double>>;

TierMap FromVector(int h, int w, const std::vector<int>& v) {
  TierMap m(h, w);
  m.values = v;
  return m;
}

}  // namespace

TEST_CASE("ordinal examples and antisymmetry") {
  CHECK(OrdinalOf(0.2, 0.6, 0.25) == 1);
  CHECK(OrdinalOf(0.5, 0.5, 0.25) == 0);
  CHECK(OrdinalOf(0.9, 0.6, 0.25) == -1);
  CHECK(OrdinalOf(0.0, 0.25, 0.25) == 0);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    const double a = u(gen), b = u(gen), tau = u(gen) * 0.5;
    CHECK(OrdinalOf(a, b, tau) == -OrdinalOf(b, a, tau));
  }
}

TEST_CASE("hdr worked example") {
  const Preds p{{0.1, 0.9}, {0.5, 0.5}, {0.8, 0.2}};
  const std::vector<int> t{1, 0, 1};
  const double taus[] = {0.25};
  const HdrReport r = Hdr(p, t, taus);
  CHECK(r.rows[0].hdr == doctest::Approx(1.0 / 3.0));
  CHECK(*r.rows[0].hdr_eq == 0.0);
  CHECK(*r.rows[0].hdr_neq == doctest::Approx(0.5));
  CHECK(r.At(0.25).n == 3);
}

TEST_CASE("hdr degenerate cases") {
  const double taus[] = {0.1, 0.25, 0.5};
  const Preds perfect{{0.0, 1.0}, {1.0, 0.0}, {0.4, 0.4}};
  const std::vector<int> t{1, -1, 0};
  for (const HdrRow& row : Hdr(perfect, t, taus).rows) {
    CHECK(row.hdr == 0.0);
    CHECK(*row.hdr_eq == 0.0);
    CHECK(*row.hdr_neq == 0.0);
  }
  const Preds flat{{0.3, 0.3}, {0.6, 0.6}};
  const std::vector<int> eq{0, 0};
  const HdrRow row = Hdr(flat, eq, taus).rows[1];
  CHECK(*row.hdr_eq == 0.0);
  CHECK(!row.hdr_neq.has_value());
  CHECK(row.n_neq == 0);
  CHECK(CodeOf([&] { Hdr(Preds{}, std::vector<int>{}, taus); }) == ErrorCode::kEmptySet);
  CHECK(CodeOf([&] { Hdr(flat, std::vector<int>{0}, taus); }) == ErrorCode::kLengthMismatch);
}

TEST_CASE("hdr agrees with the brute-force oracle and decomposes exactly") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 1 + gen() % 300;
    Preds p;
    std::vector<int> t;
    for (std::size_t i = 0; i < n; ++i) {
      p.emplace_back(u(gen), u(gen));
      t.push_back(static_cast<int>(gen() % 3) - 1);
    }
    const double taus[] = {0.1, 0.25, 0.5};
    const HdrReport r = Hdr(p, t, taus);
    for (const HdrRow& row : r.rows) {
      const oracle::HdrResult o = oracle::Hdr(p, t, row.tau);
      CHECK(row.hdr == o.hdr);
      CHECK(row.hdr_eq == o.eq);
      CHECK(row.hdr_neq == o.neq);
      CHECK(row.n_eq == o.n_eq);
      CHECK(row.n_neq == o.n_neq);
      CHECK(row.n_eq + row.n_neq == row.n);
      CHECK(row.hdr * static_cast<double>(row.n) ==
            doctest::Approx(static_cast<double>(row.miss_eq + row.miss_neq)));
      const double weighted = row.hdr_eq.value_or(0.0) * static_cast<double>(row.n_eq) +
                              row.hdr_neq.value_or(0.0) * static_cast<double>(row.n_neq);
      CHECK(std::abs(row.hdr * static_cast<double>(row.n) - weighted) < 1e-9);
    }
  }
}

TEST_CASE("hdr is invariant to a common shift of both predictions") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  Preds p, shifted;
  std::vector<int> t;
  for (int i = 0; i < 400; ++i) {
    // Quarter-integer grid keeps the shifted differences exact.
    const double a = std::round(u(gen) * 64) / 64, b = std::round(u(gen) * 64) / 64;
    p.emplace_back(a, b);
    shifted.emplace_back(a + 0.25, b + 0.25);
    t.push_back(static_cast<int>(gen() % 3) - 1);
  }
  const double taus[] = {0.1, 0.25};
  const HdrReport r1 = Hdr(p, t, taus), r2 = Hdr(shifted, t, taus);
  for (std::size_t i = 0; i < r1.rows.size(); ++i) CHECK(r1.rows[i].hdr == r2.rows[i].hdr);
}

TEST_CASE("tier cutoff examples") {
  // tier 3: mean 0.9, population sd 0.05; tier 2: mean 0.6, sd 0.1.
  std::map<int, std::vector<double>> s{
      {3, {0.85, 0.95}}, {2, {0.5, 0.7}}, {1, {0.2}}, {0, {0.0}}};
  const TierCutoffs c = ComputeTierCutoffs(s);
  CHECK(std::abs(c.cutoff[3] - 0.775) < 1e-12);
  CHECK(std::abs(c.mean[3] - 0.9) < 1e-12);
  CHECK(std::abs(c.stddev[2] - 0.1) < 1e-12);

  const TierCutoffs mid =
      ComputeTierCutoffs({{3, {0.8}}, {2, {0.6}}, {1, {0.4}}, {0, {0.2}}});
  CHECK(std::abs(mid.cutoff[3] - 0.7) < 1e-12);
  CHECK(std::abs(mid.cutoff[2] - 0.5) < 1e-12);
  CHECK(std::abs(mid.cutoff[1] - 0.3) < 1e-12);

  CHECK(CodeOf([] { ComputeTierCutoffs({{3, {0.5}}, {2, {0.5}}, {1, {0.5}}, {0, {0.5}}}); }) ==
        ErrorCode::kNonMonotoneCutoffs);
  CHECK(CodeOf([] { ComputeTierCutoffs({{3, {0.5}}, {2, {0.4}}, {1, {}}, {0, {0.1}}}); }) ==
        ErrorCode::kEmptyTier);
  CHECK(CodeOf([] { ComputeTierCutoffs({{3, {0.5}}, {2, {0.4}}, {0, {0.1}}}); }) ==
        ErrorCode::kEmptyTier);

  TierTable tiers = TierTable::RugdDefault();
  TierTable back;
  const TierCutoffs round = TierCutoffs::FromJson(mid.ToJson(&tiers), &back);
  CHECK(round.cutoff == mid.cutoff);
  CHECK(back.classes().size() == 25);
}

TEST_CASE("discretization boundaries") {
  const TierCutoffs c = ComputeTierCutoffs({{3, {0.8}}, {2, {0.6}}, {1, {0.4}}, {0, {0.2}}});
  CHECK(TierOfScore(0.99, c) == 3);
  CHECK(TierOfScore(c.cutoff[2], c) == 1);
  CHECK(TierOfScore(c.cutoff[3], c) == 2);
  CHECK(TierOfScore(c.cutoff[1], c) == 0);
  CHECK(TierOfScore(0.0, c) == 0);
  TraversabilityMap m(1, 4);
  m.values = {0.0, 0.35, 0.55, 0.95};
  CHECK(Discretize(m, c).values == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("segmentation examples") {
  const TierMap gt = FromVector(4, 1, {3, 3, 2, 0});
  const TierMap pred = FromVector(4, 1, {3, 2, 2, 0});
  const SegMetrics m = ComputeSegMetrics(pred, gt);
  CHECK(*m.iou[3] == doctest::Approx(0.5));
  CHECK(*m.iou[2] == doctest::Approx(0.5));
  CHECK(*m.iou[0] == doctest::Approx(1.0));
  CHECK(!m.iou[1].has_value());
  CHECK(std::abs(m.miou - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(m.fw_miou - 5.0 / 8.0) < 1e-12);
  CHECK(std::abs(m.macc - 5.0 / 6.0) < 1e-12);
  CHECK(std::abs(m.fw_macc - 0.75) < 1e-12);

  const SegMetrics same = ComputeSegMetrics(gt, gt);
  CHECK(same.miou == 1.0);
  CHECK(same.fw_miou == 1.0);
  CHECK(same.macc == 1.0);
  CHECK(same.fw_macc == 1.0);

  const TierMap two = FromVector(2, 2, {0, 0, 3, 3});
  const TierMap comp = FromVector(2, 2, {3, 3, 0, 0});
  const SegMetrics z = ComputeSegMetrics(comp, two);
  CHECK(z.miou == 0.0);
  CHECK(z.macc == 0.0);

  CHECK(CodeOf([&] { ComputeSegMetrics(gt, two); }) == ErrorCode::kShapeMismatch);
  CHECK(CodeOf([&] { ComputeSegMetrics(FromVector(4, 1, {4, 0, 0, 0}), gt); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("segmentation metrics agree with the brute-force oracle") {
  std::mt19937_64 gen(4);
  for (int inst = 0; inst < 100; ++inst) {
    std::vector<int> g(32 * 32), p(32 * 32);
    const int classes = 1 + static_cast<int>(gen() % 4);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = static_cast<int>(gen() % classes);
      p[i] = (gen() % 3 == 0) ? static_cast<int>(gen() % 4) : g[i];
    }
    const SegMetrics m = ComputeSegMetrics(FromVector(32, 32, p), FromVector(32, 32, g));
    const oracle::Seg o = oracle::SegMetrics(p, g);
    CHECK(std::abs(m.miou - o.miou) < 1e-12);
    CHECK(std::abs(m.fw_miou - o.fw_miou) < 1e-12);
    CHECK(std::abs(m.macc - o.macc) < 1e-12);
    CHECK(std::abs(m.fw_macc - o.fw_macc) < 1e-12);
    CHECK(ComputeSegMetrics(FromVector(32, 32, g), FromVector(32, 32, g)).miou == 1.0);
  }
}

TEST_CASE("confusion accumulation over several maps") {
  ConfusionMatrix cm{};
  AccumulateConfusion(FromVector(1, 2, {0, 1}), FromVector(1, 2, {0, 0}), &cm);
  AccumulateConfusion(FromVector(1, 2, {1, 1}), FromVector(1, 2, {1, 0}), &cm);
  CHECK(cm[0][0] == 1);
  CHECK(cm[0][1] == 2);
  CHECK(cm[1][1] == 1);
  const SegMetrics m = MetricsFromConfusion(cm);
  CHECK(m.gt_count[0] == 3);
  CHECK(*m.acc[0] == doctest::Approx(1.0 / 3.0));
}
