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
#include "reltrav/cli.hpp"

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "reltrav/inference.hpp"
#include "reltrav/metrics.hpp"
#include "reltrav/pairgen.hpp"
#include "reltrav/service.hpp"
#include "reltrav/sweep.hpp"
#include "reltrav/synthworld.hpp"
#include "reltrav/trainer.hpp"

namespace reltrav {
namespace {

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct PairgenArgs {
  std::string manifest, out;
  std::uint64_t seed = 0;
  bool intra_only = false;
  double bottom_bias = -1.0;
};

int CmdPairgen(const PairgenArgs& a) {
  const DatasetManifest manifest = LoadManifest(a.manifest);
  PairGenOptions opt;
  opt.cross = !a.intra_only;
  if (a.bottom_bias >= 0.0) opt.bottom_fraction = a.bottom_bias;
  const std::vector<PairTask> tasks = GeneratePairTasks(manifest, a.seed, opt);
  SaveTasks(tasks, a.out);
  const LabelAccounting acc = AccountTasks(manifest.size(), tasks);
  std::printf("images=%zu intra=%zu cross=%zu tasks=%zu accounted_labels=%zu\n", acc.images,
              acc.intra, acc.cross, acc.tasks, acc.accounted_labels);
  return kExitOk;
}

struct AutolabelArgs {
  std::string manifest, tasks, tiers, out;
};

int CmdAutolabel(const AutolabelArgs& a) {
  const DatasetManifest manifest = LoadManifest(a.manifest);
  const std::vector<PairAnnotation> anns =
      AutolabelTasks(manifest, LoadTasks(a.tasks), TierTable::Load(a.tiers));
  SaveAnnotations(anns, a.out);
  std::printf("labeled=%zu\n", anns.size());
  return kExitOk;
}

struct SynthArgs {
  std::string out;
  int n = 200;
  std::uint64_t seed = 0;
  bool stress = false;
  int height = 48;
  int width = 80;
};

int CmdSynth(const SynthArgs& a) {
  SynthConfig cfg;
  cfg.stress_calibration = a.stress;
  cfg.height = a.height;
  cfg.width = a.width;
  const SynthDataset ds = BuildSynthDataset(a.seed, a.n, cfg);
  WriteSynthDataset(ds, cfg, a.out, true);
  std::printf("images=%zu annotations=%zu dir=%s\n", ds.manifest.size(), ds.annotations.size(),
              a.out.c_str());
  return kExitOk;
}

struct TrainArgs {
  std::string manifest, annotations, out, log, pretrained, loss = "rizz";
  double margin = 0.5, alpha = 0.99, lambda = 1.0, snow_clamp = 1.0, lr = 1e-3, oversample = 0.5;
  int epochs = 10, batch_size = 4;
  std::int64_t steps = 0;
  std::size_t label_budget = 0;
  std::uint64_t seed = 0;
  bool intra_only = false, no_augment = false, quiet = false;
  std::vector<int> widths{8, 16, 24, 32};
};

int CmdTrain(const TrainArgs& a) {
  const DatasetManifest manifest = LoadManifest(a.manifest);
  TrainConfig tc;
  tc.loss = ParseLossKind(a.loss);
  tc.loss_config.margin = a.margin;
  tc.loss_config.snow_clamp = a.snow_clamp;
  tc.loss_config.consistency_weight = a.lambda;
  tc.alpha = a.alpha;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch_size;
  tc.steps = a.steps;
  tc.seed = a.seed;
  tc.learning_rate = a.lr;
  tc.oversample_target = a.oversample;
  tc.intra_only = a.intra_only;
  tc.label_budget = a.label_budget;
  tc.augment.enabled = !a.no_augment;
  tc.model.encoder_widths = a.widths;
  if (!a.pretrained.empty()) tc.pretrained_checkpoint = a.pretrained;

  std::ofstream log;
  if (!a.log.empty()) {
    log.open(a.log);
    if (!log) throw Error(ErrorCode::kIo, "cannot open '" + a.log + "' for writing");
  }
  Trainer trainer(tc, manifest, LoadAnnotations(a.annotations), DiskImageProvider(manifest));
  const std::int64_t total = trainer.TotalSteps();
  const TrainResult result = trainer.Run([&](const StepLog& s) {
    if (log.is_open()) log << s.ToJson() << '\n';
    if (!a.quiet && (s.step % 100 == 0 || s.step == total)) {
      std::printf("step %lld/%lld acc=%.5f cons=%.6f total=%.5f\n", static_cast<long long>(s.step),
                  static_cast<long long>(total), s.acc_loss, s.cons_loss, s.total);
      std::fflush(stdout);
    }
  });
  SaveCheckpoint(result.checkpoint, a.out);
  std::printf("wrote %s (steps=%lld, labels=%zu)\n", a.out.c_str(),
              static_cast<long long>(result.checkpoint.step), trainer.annotations().size());
  return kExitOk;
}

const ParamSet& Select(const Checkpoint& ckpt, bool student) {
  return student ? ckpt.student : ckpt.teacher;
}

struct EvalArgs {
  std::string checkpoint, manifest, annotations, out;
  std::vector<double> thresholds{0.1, 0.25, 0.5};
  bool student = false;
};

int CmdEval(const EvalArgs& a) {
  const DatasetManifest manifest = LoadManifest(a.manifest);
  const Checkpoint ckpt = LoadCheckpoint(a.checkpoint);
  ModelConfig mc = ckpt.config;
  const Network network(mc);
  const std::vector<PairAnnotation> anns = LoadAnnotations(a.annotations);
  const HdrReport report = EvaluateHdr(network, Select(ckpt, a.student), manifest, anns,
                                       a.thresholds, DiskImageProvider(manifest));
  std::fputs(report.ToTable().c_str(), stdout);
  if (!a.out.empty()) WriteText(a.out, report.ToJsonLines());
  return kExitOk;
}

struct CalibrateArgs {
  std::string checkpoint, manifest, tiers, out;
  bool student = false;
};

int CmdCalibrate(const CalibrateArgs& a) {
  const DatasetManifest manifest = LoadManifest(a.manifest);
  const Checkpoint ckpt = LoadCheckpoint(a.checkpoint);
  const Network network(ckpt.config);
  const TierTable tiers = TierTable::Load(a.tiers);
  const auto scores = CollectTierScores(network, Select(ckpt, a.student), manifest, tiers,
                                        DiskImageProvider(manifest), DiskClassMapProvider(manifest));
  const TierCutoffs cutoffs = ComputeTierCutoffs(scores);
  WriteText(a.out, cutoffs.ToJson(&tiers) + "\n");
  std::printf("cutoff_3=%.6f cutoff_2=%.6f cutoff_1=%.6f\n", cutoffs.cutoff[3], cutoffs.cutoff[2],
              cutoffs.cutoff[1]);
  return kExitOk;
}

struct SegevalArgs {
  std::string checkpoint, manifest, cutoffs, tiers, out;
  bool student = false;
};

int CmdSegeval(const SegevalArgs& a) {
  const DatasetManifest manifest = LoadManifest(a.manifest);
  const Checkpoint ckpt = LoadCheckpoint(a.checkpoint);
  const Network network(ckpt.config);
  TierTable tiers = TierTable::RugdDefault();
  const TierCutoffs cutoffs = TierCutoffs::FromJson(ReadText(a.cutoffs), &tiers);
  if (!a.tiers.empty()) tiers = TierTable::Load(a.tiers);
  const SegMetrics m = SegEvaluate(network, Select(ckpt, a.student), manifest, tiers, cutoffs,
                                   DiskImageProvider(manifest), DiskClassMapProvider(manifest));
  const std::string text = m.ToJson();
  std::printf("mIOU=%.4f fw-mIOU=%.4f mAcc=%.4f fw-mAcc=%.4f\n", m.miou, m.fw_miou, m.macc,
              m.fw_macc);
  if (!a.out.empty()) WriteText(a.out, text + "\n");
  return kExitOk;
}

struct ServeArgs {
  std::string manifest, tasks, annotations, host = "127.0.0.1";
  int port = 8080;
};

HttpServer* g_server = nullptr;

extern "C" void HandleStopSignal(int) {
  if (g_server != nullptr) g_server->Stop();
}

int CmdServe(const ServeArgs& a) {
  const DatasetManifest manifest = LoadManifest(a.manifest);
  AnnotationService service(manifest, LoadTasks(a.tasks), a.annotations);
  HttpServer server(service);
  const int port = server.Bind(a.host, a.port);
  g_server = &server;
  std::signal(SIGINT, HandleStopSignal);
  std::signal(SIGTERM, HandleStopSignal);
  std::printf("listening on http://%s:%d\n", a.host.c_str(), port);
  std::fflush(stdout);
  const bool ok = server.ListenAfterBind();
  g_server = nullptr;
  return ok ? kExitOk : kExitFailure;
}

struct SweepArgs {
  std::vector<double> fractions{0.05, 0.1, 0.25, 0.5, 1.0};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  int n = 200, heldout = 100, epochs = 10, batch_size = 4;
  std::int64_t steps = 0;
  double tau = 0.25;
  std::string loss = "rizz", out;
};

int CmdSweep(const SweepArgs& a) {
  SweepConfig c;
  c.fractions = a.fractions;
  c.seeds = a.seeds;
  c.n_images = a.n;
  c.n_heldout = a.heldout;
  c.tau = a.tau;
  c.train.loss = ParseLossKind(a.loss);
  c.train.epochs = a.epochs;
  c.train.batch_size = a.batch_size;
  c.train.steps = a.steps;
  const SweepResult r = RunLabelSweep(c, [](const SweepRow& row) {
    std::printf("fraction=%.3f seed=%llu images=%zu labels=%zu hdr=%.4f\n", row.fraction,
                static_cast<unsigned long long>(row.seed), row.images, row.labels, row.hdr);
    std::fflush(stdout);
  });
  for (const SweepSummary& s : r.summary) {
    std::printf("fraction=%.3f median_hdr=%.4f\n", s.fraction, s.median_hdr);
  }
  std::printf("monotone_non_increasing=%s\n", r.MonotoneNonIncreasing() ? "true" : "false");
  if (!a.out.empty()) WriteText(a.out, r.ToJsonLines());
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args) {
  CLI::App app{"reltrav: relative traversability labeling, training and evaluation"};
  app.require_subcommand(1);
  app.name(args.empty() ? "reltrav" : args[0]);

  PairgenArgs pg;
  auto* c_pairgen = app.add_subcommand("pairgen", "Generate intra and cross pair tasks");
  c_pairgen->add_option("--manifest", pg.manifest)->required();
  c_pairgen->add_option("--out", pg.out)->required();
  c_pairgen->add_option("--seed", pg.seed);
  c_pairgen->add_flag("--intra-only", pg.intra_only);
  c_pairgen->add_option("--bottom-bias", pg.bottom_bias, "Fraction of points from the lower half")
      ->check(CLI::Range(0.0, 1.0));

  AutolabelArgs al;
  auto* c_autolabel = app.add_subcommand("autolabel", "Label tasks from semantic ground truth");
  c_autolabel->add_option("--manifest", al.manifest)->required();
  c_autolabel->add_option("--tasks", al.tasks)->required();
  c_autolabel->add_option("--tiers", al.tiers)->required();
  c_autolabel->add_option("--out", al.out)->required();

  SynthArgs sy;
  auto* c_synth = app.add_subcommand("synth", "Write a synthetic dataset with oracle labels");
  c_synth->add_option("--out", sy.out)->required();
  c_synth->add_option("--n", sy.n);
  c_synth->add_option("--seed", sy.seed);
  c_synth->add_option("--height", sy.height);
  c_synth->add_option("--width", sy.width);
  c_synth->add_flag("--stress-calibration", sy.stress);

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a student/teacher pair");
  c_train->add_option("--manifest", tr.manifest)->required();
  c_train->add_option("--annotations", tr.annotations)->required();
  c_train->add_option("--out", tr.out)->required();
  c_train->add_option("--loss", tr.loss)
      ->check(CLI::IsMember({"rizz", "rizz_l1", "diw", "snow"}));
  c_train->add_option("--margin", tr.margin);
  c_train->add_option("--snow-clamp", tr.snow_clamp);
  c_train->add_option("--alpha", tr.alpha);
  c_train->add_option("--lambda", tr.lambda);
  c_train->add_option("--epochs", tr.epochs);
  c_train->add_option("--steps", tr.steps, "Fixed step count (overrides epochs)");
  c_train->add_option("--batch-size", tr.batch_size);
  c_train->add_option("--lr", tr.lr);
  c_train->add_option("--oversample", tr.oversample);
  c_train->add_option("--label-budget", tr.label_budget);
  c_train->add_option("--seed", tr.seed);
  c_train->add_option("--widths", tr.widths)->delimiter(',');
  c_train->add_option("--pretrained", tr.pretrained, "Checkpoint to import (head excluded)");
  c_train->add_option("--log", tr.log, "Per-step JSON lines");
  c_train->add_flag("--intra-only", tr.intra_only);
  c_train->add_flag("--no-augment", tr.no_augment);
  c_train->add_flag("--quiet", tr.quiet);

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "HDR report on labeled pairs");
  c_eval->add_option("--checkpoint", ev.checkpoint)->required();
  c_eval->add_option("--manifest", ev.manifest)->required();
  c_eval->add_option("--annotations", ev.annotations)->required();
  c_eval->add_option("--thresholds", ev.thresholds)->delimiter(',');
  c_eval->add_option("--out", ev.out);
  c_eval->add_flag("--student", ev.student, "Evaluate the student instead of the teacher");

  CalibrateArgs ca;
  auto* c_cal = app.add_subcommand("calibrate", "Tier cutoffs from ground-truth class maps");
  c_cal->add_option("--checkpoint", ca.checkpoint)->required();
  c_cal->add_option("--manifest", ca.manifest)->required();
  c_cal->add_option("--tiers", ca.tiers)->required();
  c_cal->add_option("--out", ca.out)->required();
  c_cal->add_flag("--student", ca.student);

  SegevalArgs se;
  auto* c_seg = app.add_subcommand("segeval", "Four-tier segmentation metrics");
  c_seg->add_option("--checkpoint", se.checkpoint)->required();
  c_seg->add_option("--manifest", se.manifest)->required();
  c_seg->add_option("--cutoffs", se.cutoffs)->required();
  c_seg->add_option("--tiers", se.tiers, "Override the tier table stored with the cutoffs");
  c_seg->add_option("--out", se.out);
  c_seg->add_flag("--student", se.student);

  ServeArgs sv;
  auto* c_serve = app.add_subcommand("serve", "Run the annotation task server");
  c_serve->add_option("--manifest", sv.manifest)->required();
  c_serve->add_option("--tasks", sv.tasks)->required();
  c_serve->add_option("--annotations", sv.annotations)->required();
  c_serve->add_option("--port", sv.port);
  c_serve->add_option("--host", sv.host);

  SweepArgs sw;
  auto* c_sweep = app.add_subcommand("sweep-labels", "HDR versus annotated-image fraction");
  c_sweep->add_option("--fractions", sw.fractions)->delimiter(',');
  c_sweep->add_option("--seeds", sw.seeds)->delimiter(',');
  c_sweep->add_option("--n", sw.n);
  c_sweep->add_option("--heldout", sw.heldout);
  c_sweep->add_option("--epochs", sw.epochs);
  c_sweep->add_option("--steps", sw.steps);
  c_sweep->add_option("--batch-size", sw.batch_size);
  c_sweep->add_option("--tau", sw.tau);
  c_sweep->add_option("--loss", sw.loss)->check(CLI::IsMember({"rizz", "rizz_l1", "diw", "snow"}));
  c_sweep->add_option("--out", sw.out);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  if (args.empty()) argv.push_back("reltrav");
  for (const std::string& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (c_pairgen->parsed()) return CmdPairgen(pg);
    if (c_autolabel->parsed()) return CmdAutolabel(al);
    if (c_synth->parsed()) return CmdSynth(sy);
    if (c_train->parsed()) return CmdTrain(tr);
    if (c_eval->parsed()) return CmdEval(ev);
    if (c_cal->parsed()) return CmdCalibrate(ca);
    if (c_seg->parsed()) return CmdSegeval(se);
    if (c_serve->parsed()) return CmdServe(sv);
    if (c_sweep->parsed()) return CmdSweep(sw);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(ErrorCodeName(e.code())).c_str(), e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  std::fputs(app.help().c_str(), stderr);
  return kExitUsage;
}

}  // namespace reltrav
