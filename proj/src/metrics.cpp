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
#include "reltrav/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace reltrav {

using json = nlohmann::ordered_json;

int OrdinalOf(double p_a, double p_b, double tau) {
  const double d = p_b - p_a;
  if (d > tau) return 1;
  if (d < -tau) return -1;
  return 0;
}

const HdrRow& HdrReport::At(double tau) const {
  for (const HdrRow& r : rows) {
    if (r.tau == tau) return r;
  }
  throw Error(ErrorCode::kInvalidArgument, "no HDR row for tau " + std::to_string(tau));
}

std::string HdrReport::ToJsonLines() const {
  std::string out;
  for (const HdrRow& r : rows) {
    json j{{"tau", r.tau},
           {"hdr", r.hdr},
           {"hdr_eq", r.hdr_eq ? json(*r.hdr_eq) : json(nullptr)},
           {"hdr_neq", r.hdr_neq ? json(*r.hdr_neq) : json(nullptr)},
           {"n", r.n},
           {"n_eq", r.n_eq},
           {"n_neq", r.n_neq}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string HdrReport::ToTable() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%6s  %7s  %7s  %7s  %7s  %7s  %7s\n", "tau", "HDR", "HDR=",
                "HDR!=", "N", "N=", "N!=");
  out << line;
  auto fmt = [](const std::optional<double>& v) {
    char buf[32];
    if (v) {
      std::snprintf(buf, sizeof(buf), "%7.3f", *v);
    } else {
      std::snprintf(buf, sizeof(buf), "%7s", "-");
    }
    return std::string(buf);
  };
  for (const HdrRow& r : rows) {
    std::snprintf(line, sizeof(line), "%6.3f  %7.3f  %s  %s  %7zu  %7zu  %7zu\n", r.tau, r.hdr,
                  fmt(r.hdr_eq).c_str(), fmt(r.hdr_neq).c_str(), r.n, r.n_eq, r.n_neq);
    out << line;
  }
  return out.str();
}

HdrReport Hdr(std::span<const std::pair<double, double>> predictions, std::span<const int> labels,
              std::span<const double> taus) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "predictions and labels differ in length");
  }
  if (predictions.empty()) throw Error(ErrorCode::kEmptySet, "HDR needs at least one pair");
  HdrReport report;
  for (double tau : taus) {
    if (!(tau >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "thresholds must be >= 0");
    HdrRow row;
    row.tau = tau;
    row.n = labels.size();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < -1 || labels[i] > 1) {
        throw Error(ErrorCode::kInvalidLabel, "label t must be -1, 0 or 1");
      }
      const bool miss = OrdinalOf(predictions[i].first, predictions[i].second, tau) != labels[i];
      if (labels[i] == 0) {
        ++row.n_eq;
        row.miss_eq += miss;
      } else {
        ++row.n_neq;
        row.miss_neq += miss;
      }
    }
    row.hdr = static_cast<double>(row.miss_eq + row.miss_neq) / static_cast<double>(row.n);
    if (row.n_eq > 0) row.hdr_eq = static_cast<double>(row.miss_eq) / static_cast<double>(row.n_eq);
    if (row.n_neq > 0) {
      row.hdr_neq = static_cast<double>(row.miss_neq) / static_cast<double>(row.n_neq);
    }
    report.rows.push_back(row);
  }
  return report;
}

// --- tiers ----------------------------------------------------------------------

TierCutoffs ComputeTierCutoffs(const std::map<int, std::vector<double>>& scores_by_tier) {
  TierCutoffs out;
  for (int tier = 0; tier < kNumTiers; ++tier) {
    auto it = scores_by_tier.find(tier);
    if (it == scores_by_tier.end() || it->second.empty()) {
      throw Error(ErrorCode::kEmptyTier, "tier " + std::to_string(tier) + " has no scores");
    }
    const std::vector<double>& s = it->second;
    double sum = 0.0;
    for (double v : s) sum += v;
    const double mean = sum / static_cast<double>(s.size());
    double sq = 0.0;
    for (double v : s) sq += (v - mean) * (v - mean);
    out.mean[tier] = mean;
    out.stddev[tier] = std::sqrt(sq / static_cast<double>(s.size()));
  }
  for (int n = kNumTiers - 1; n >= 1; --n) {
    out.cutoff[n] = ((out.mean[n] - out.stddev[n]) + (out.mean[n - 1] + out.stddev[n - 1])) / 2.0;
  }
  if (!(out.cutoff[3] > out.cutoff[2] && out.cutoff[2] > out.cutoff[1])) {
    std::ostringstream msg;
    msg << "cutoffs are not strictly decreasing: " << out.cutoff[3] << ", " << out.cutoff[2]
        << ", " << out.cutoff[1];
    throw Error(ErrorCode::kNonMonotoneCutoffs, msg.str());
  }
  return out;
}

std::string TierCutoffs::ToJson(const TierTable* tiers) const {
  json j{{"cutoff_3", cutoff[3]},
         {"cutoff_2", cutoff[2]},
         {"cutoff_1", cutoff[1]},
         {"mean", mean},
         {"stddev", stddev}};
  if (tiers != nullptr) j["tiers"] = json::parse(tiers->ToJson());
  return j.dump(2);
}

TierCutoffs TierCutoffs::FromJson(const std::string& text, TierTable* tiers) {
  try {
    json j = json::parse(text);
    TierCutoffs c;
    c.cutoff[3] = j.at("cutoff_3").get<double>();
    c.cutoff[2] = j.at("cutoff_2").get<double>();
    c.cutoff[1] = j.at("cutoff_1").get<double>();
    if (j.contains("mean")) c.mean = j.at("mean").get<std::array<double, kNumTiers>>();
    if (j.contains("stddev")) c.stddev = j.at("stddev").get<std::array<double, kNumTiers>>();
    if (tiers != nullptr && j.contains("tiers")) *tiers = TierTable::FromJson(j.at("tiers").dump());
    if (!(c.cutoff[3] > c.cutoff[2] && c.cutoff[2] > c.cutoff[1])) {
      throw Error(ErrorCode::kNonMonotoneCutoffs, "cutoffs are not strictly decreasing");
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed cutoffs: ") + e.what());
  }
}

int TierOfScore(double score, const TierCutoffs& cutoffs) {
  if (score > cutoffs.cutoff[3]) return 3;
  if (score > cutoffs.cutoff[2]) return 2;
  if (score > cutoffs.cutoff[1]) return 1;
  return 0;
}

TierMap Discretize(const TraversabilityMap& map, const TierCutoffs& cutoffs) {
  TierMap out(map.height, map.width);
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    out.values[i] = TierOfScore(map.values[i], cutoffs);
  }
  return out;
}

// --- segmentation -----------------------------------------------------------------

void AccumulateConfusion(const TierMap& pred, const TierMap& gt, ConfusionMatrix* cm) {
  if (!pred.SameShape(gt)) throw Error(ErrorCode::kShapeMismatch, "tier maps differ in shape");
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    const int g = gt.values[i];
    const int p = pred.values[i];
    if (g < 0 || g >= kNumTiers || p < 0 || p >= kNumTiers) {
      throw Error(ErrorCode::kInvalidArgument, "tier ids must lie in 0..3");
    }
    ++(*cm)[g][p];
  }
}

SegMetrics MetricsFromConfusion(const ConfusionMatrix& cm) {
  SegMetrics m;
  std::int64_t total = 0;
  for (int g = 0; g < kNumTiers; ++g) {
    for (int p = 0; p < kNumTiers; ++p) {
      m.gt_count[g] += cm[g][p];
    }
    total += m.gt_count[g];
  }
  int present = 0;
  double iou_sum = 0.0;
  double acc_sum = 0.0;
  double iou_weighted = 0.0;
  double acc_weighted = 0.0;
  for (int k = 0; k < kNumTiers; ++k) {
    if (m.gt_count[k] == 0) continue;
    std::int64_t pred_count = 0;
    for (int g = 0; g < kNumTiers; ++g) pred_count += cm[g][k];
    const double tp = static_cast<double>(cm[k][k]);
    const double uni = static_cast<double>(m.gt_count[k] + pred_count) - tp;
    m.iou[k] = tp / uni;
    m.acc[k] = tp / static_cast<double>(m.gt_count[k]);
    ++present;
    iou_sum += *m.iou[k];
    acc_sum += *m.acc[k];
    iou_weighted += static_cast<double>(m.gt_count[k]) * *m.iou[k];
    acc_weighted += static_cast<double>(m.gt_count[k]) * *m.acc[k];
  }
  if (present > 0) {
    m.miou = iou_sum / present;
    m.macc = acc_sum / present;
    m.fw_miou = iou_weighted / static_cast<double>(total);
    m.fw_macc = acc_weighted / static_cast<double>(total);
  }
  return m;
}

SegMetrics ComputeSegMetrics(const TierMap& pred, const TierMap& gt) {
  ConfusionMatrix cm{};
  AccumulateConfusion(pred, gt, &cm);
  return MetricsFromConfusion(cm);
}

std::string SegMetrics::ToJson() const {
  json per_class = json::array();
  for (int k = 0; k < kNumTiers; ++k) {
    per_class.push_back(json{{"tier", k},
                             {"iou", iou[k] ? json(*iou[k]) : json(nullptr)},
                             {"acc", acc[k] ? json(*acc[k]) : json(nullptr)},
                             {"gt_pixels", gt_count[k]}});
  }
  return json{{"miou", miou},
              {"fw_miou", fw_miou},
              {"macc", macc},
              {"fw_macc", fw_macc},
              {"per_class", per_class}}
      .dump(2);
}

}  // namespace reltrav
