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
#include "reltrav/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

namespace reltrav {

using json = nlohmann::ordered_json;

std::string SweepRow::ToJson() const {
  return json{{"fraction", fraction}, {"seed", seed},   {"images", images},
              {"labels", labels},     {"hdr", hdr}}
      .dump();
}

bool SweepResult::MonotoneNonIncreasing() const {
  for (std::size_t i = 1; i < summary.size(); ++i) {
    if (summary[i].median_hdr > summary[i - 1].median_hdr) return false;
  }
  return true;
}

std::string SweepResult::ToJsonLines() const {
  std::string out;
  for (const SweepRow& r : rows) out += r.ToJson() + "\n";
  for (const SweepSummary& s : summary) {
    out += json{{"fraction", s.fraction}, {"median_hdr", s.median_hdr}}.dump() + "\n";
  }
  out += json{{"monotone_non_increasing", MonotoneNonIncreasing()}}.dump() + "\n";
  return out;
}

double Median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptySet, "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

namespace {

ImageProvider SceneProvider(const SynthDataset& ds) {
  return [&ds](const ImageEntry& e) {
    return ToTensor(ds.scenes[ds.manifest.IndexOf(e.image_id)].image);
  };
}

}  // namespace

SweepResult RunLabelSweep(const SweepConfig& config,
                          const std::function<void(const SweepRow&)>& on_row) {
  if (config.fractions.empty() || config.seeds.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "sweep needs fractions and seeds");
  }
  for (double f : config.fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "fractions must lie in (0, 1]");
  }
  std::vector<double> fractions = config.fractions;
  std::sort(fractions.begin(), fractions.end());

  SynthConfig held_cfg = config.synth;
  held_cfg.image_prefix = "held";
  const double taus[] = {config.tau};

  SweepResult result;
  for (std::uint64_t seed : config.seeds) {
    const SynthDataset train = BuildSynthDataset(seed, config.n_images, config.synth);
    const SynthDataset held =
        BuildSynthDataset(DeriveSeed(seed, "heldout"), config.n_heldout, held_cfg);

    std::vector<std::string> order;
    for (const ImageEntry& e : train.manifest.images()) order.push_back(e.image_id);
    std::shuffle(order.begin(), order.end(), Rng(DeriveSeed(seed, "sweep")).engine());

    TrainConfig tc = config.train;
    tc.seed = seed;
    for (double f : fractions) {
      const auto k = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(f * static_cast<double>(order.size()) - 1e-9)));
      const std::unordered_set<std::string> chosen(order.begin(), order.begin() + k);
      std::vector<PairAnnotation> subset;
      for (const PairAnnotation& a : train.annotations) {
        if (chosen.count(a.a.image_id)) subset.push_back(a);
      }
      Trainer trainer(tc, train.manifest, subset, SceneProvider(train));
      const TrainResult run = trainer.Run();
      const HdrReport report = EvaluateHdr(trainer.network(), run.checkpoint.teacher, held.manifest,
                                           held.annotations, taus, SceneProvider(held));
      SweepRow row{f, seed, k, trainer.annotations().size(), report.rows[0].hdr};
      if (on_row) on_row(row);
      result.rows.push_back(row);
    }
  }
  for (double f : fractions) {
    std::vector<double> v;
    for (const SweepRow& r : result.rows) {
      if (r.fraction == f) v.push_back(r.hdr);
    }
    result.summary.push_back(SweepSummary{f, Median(v)});
  }
  return result;
}

}  // namespace reltrav
