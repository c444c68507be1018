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
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "reltrav/cli.hpp"
#include "reltrav/inference.hpp"
#include "reltrav/losses.hpp"
#include "reltrav/metrics.hpp"
#include "reltrav/pairgen.hpp"
#include "reltrav/synthworld.hpp"
#include "reltrav/trainer.hpp"

namespace py = pybind11;
using namespace reltrav;

namespace {

py::dict LossDict(const LossValue& v) {
  py::dict d;
  d["value"] = v.value;
  d["d_pa"] = v.d_pa;
  d["d_pb"] = v.d_pb;
  return d;
}

template <typename T>
Grid<T> GridFromArray(const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::kShapeMismatch, "expected a 2-D array");
  Grid<T> g(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), g.values.begin());
  return g;
}

template <typename T>
py::array_t<T> ArrayFromGrid(const Grid<T>& g) {
  py::array_t<T> a({g.height, g.width});
  std::copy(g.values.begin(), g.values.end(), a.mutable_data());
  return a;
}

py::dict CutoffsDict(const TierCutoffs& c) {
  py::dict d;
  d["cutoff_3"] = c.cutoff[3];
  d["cutoff_2"] = c.cutoff[2];
  d["cutoff_1"] = c.cutoff[1];
  d["mean"] = c.mean;
  d["stddev"] = c.stddev;
  return d;
}

TierCutoffs CutoffsFromDict(const py::dict& d) {
  TierCutoffs c;
  c.cutoff[3] = d["cutoff_3"].cast<double>();
  c.cutoff[2] = d["cutoff_2"].cast<double>();
  c.cutoff[1] = d["cutoff_1"].cast<double>();
  return c;
}

py::dict AnnotationDict(const PairAnnotation& a) {
  py::dict d;
  d["pair_id"] = a.pair_id;
  d["kind"] = std::string(PairKindName(a.kind));
  d["a"] = py::make_tuple(a.a.image_id, a.a.x, a.a.y);
  d["b"] = py::make_tuple(a.b.image_id, a.b.x, a.b.y);
  d["t"] = a.t;
  d["source"] = std::string(LabelSourceName(a.source));
  return d;
}

}  // namespace

PYBIND11_MODULE(_reltrav, m) {
  m.doc() = "Relative traversability toolkit: losses, metrics, synthetic data and training.";

  static py::exception<Error> error(m, "ReltravError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(ErrorCodeName(e.code())) + ": " + e.what();
      PyErr_SetString(error.ptr(), msg.c_str());
    }
  });

  m.def(
      "pair_loss",
      [](const std::string& kind, double pa, double pb, int t, double margin, double clamp) {
        LossConfig cfg;
        cfg.margin = margin;
        cfg.snow_clamp = clamp;
        return LossDict(losses::Pair(ParseLossKind(kind), pa, pb, t, cfg));
      },
      py::arg("kind"), py::arg("p_a"), py::arg("p_b"), py::arg("t"), py::arg("margin") = 0.5,
      py::arg("clamp") = 1.0, "Pairwise loss value and partial derivatives.");

  m.def(
      "hdr",
      [](const std::vector<std::pair<double, double>>& preds, const std::vector<int>& labels,
         const std::vector<double>& taus) {
        py::list rows;
        for (const HdrRow& r : Hdr(preds, labels, taus).rows) {
          py::dict d;
          d["tau"] = r.tau;
          d["hdr"] = r.hdr;
          d["hdr_eq"] = r.hdr_eq ? py::cast(*r.hdr_eq) : py::none();
          d["hdr_neq"] = r.hdr_neq ? py::cast(*r.hdr_neq) : py::none();
          d["n"] = r.n;
          d["n_eq"] = r.n_eq;
          d["n_neq"] = r.n_neq;
          rows.append(d);
        }
        return rows;
      },
      py::arg("predictions"), py::arg("labels"), py::arg("taus"));

  m.def(
      "tier_cutoffs",
      [](const std::map<int, std::vector<double>>& scores) {
        return CutoffsDict(ComputeTierCutoffs(scores));
      },
      py::arg("scores_by_tier"));

  m.def(
      "discretize",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& map,
         const py::dict& cutoffs) {
        return ArrayFromGrid(Discretize(GridFromArray<double>(map), CutoffsFromDict(cutoffs)));
      },
      py::arg("map"), py::arg("cutoffs"));

  m.def(
      "seg_metrics",
      [](const py::array_t<int, py::array::c_style | py::array::forcecast>& pred,
         const py::array_t<int, py::array::c_style | py::array::forcecast>& gt) {
        const SegMetrics s = ComputeSegMetrics(GridFromArray<int>(pred), GridFromArray<int>(gt));
        py::dict d;
        d["miou"] = s.miou;
        d["fw_miou"] = s.fw_miou;
        d["macc"] = s.macc;
        d["fw_macc"] = s.fw_macc;
        return d;
      },
      py::arg("pred"), py::arg("gt"));

  m.def("min_pair_distance", &MinPairDistance, py::arg("width"), py::arg("height"));

  m.def(
      "label_accounting",
      [](std::size_t images, std::size_t intra, std::size_t cross) {
        const LabelAccounting a = AccountLabels(images, intra, cross);
        py::dict d;
        d["images"] = a.images;
        d["intra"] = a.intra;
        d["cross"] = a.cross;
        d["tasks"] = a.tasks;
        d["accounted_labels"] = a.accounted_labels;
        return d;
      },
      py::arg("images"), py::arg("intra"), py::arg("cross"));

  m.def(
      "synth_dataset",
      [](std::uint64_t seed, int n, bool stress) {
        SynthConfig cfg;
        cfg.stress_calibration = stress;
        const SynthDataset ds = BuildSynthDataset(seed, n, cfg);
        py::list images;
        py::list gts;
        for (const SyntheticScene& s : ds.scenes) {
          py::array_t<std::uint8_t> img({s.image.height, s.image.width, 3});
          std::copy(s.image.data.begin(), s.image.data.end(), img.mutable_data());
          images.append(img);
          gts.append(ArrayFromGrid(s.gt_field));
        }
        py::list anns;
        for (const PairAnnotation& a : ds.annotations) anns.append(AnnotationDict(a));
        py::dict d;
        d["images"] = images;
        d["gt"] = gts;
        d["annotations"] = anns;
        return d;
      },
      py::arg("seed"), py::arg("n"), py::arg("stress_calibration") = false);

  m.def(
      "write_synth",
      [](const std::string& dir, std::uint64_t seed, int n, bool stress) {
        SynthConfig cfg;
        cfg.stress_calibration = stress;
        WriteSynthDataset(BuildSynthDataset(seed, n, cfg), cfg, dir, true);
      },
      py::arg("dir"), py::arg("seed"), py::arg("n"), py::arg("stress_calibration") = false);

  m.def(
      "generate_pair_tasks",
      [](const std::string& manifest_path, std::uint64_t seed, bool intra_only) {
        const DatasetManifest manifest = LoadManifest(manifest_path);
        PairGenOptions opt;
        opt.cross = !intra_only;
        py::list out;
        for (const PairTask& t : GeneratePairTasks(manifest, seed, opt)) {
          py::dict d;
          d["task_id"] = t.task_id;
          d["kind"] = std::string(PairKindName(t.kind));
          d["a"] = py::make_tuple(t.a.image_id, t.a.x, t.a.y);
          d["b"] = py::make_tuple(t.b.image_id, t.b.x, t.b.y);
          out.append(d);
        }
        return out;
      },
      py::arg("manifest"), py::arg("seed") = 0, py::arg("intra_only") = false);

  m.def(
      "train",
      [](const std::string& manifest_path, const std::string& annotations_path,
         const std::string& out, const std::string& loss, std::int64_t steps, int epochs,
         std::uint64_t seed, bool intra_only) {
        const DatasetManifest manifest = LoadManifest(manifest_path);
        TrainConfig tc;
        tc.loss = ParseLossKind(loss);
        tc.steps = steps;
        tc.epochs = epochs;
        tc.seed = seed;
        tc.intra_only = intra_only;
        TrainResult result;
        {
          py::gil_scoped_release release;
          result = Train(tc, manifest, LoadAnnotations(annotations_path), DiskImageProvider(manifest));
          SaveCheckpoint(result.checkpoint, out);
        }
        py::list log;
        for (const StepLog& s : result.log) {
          py::dict d;
          d["step"] = s.step;
          d["acc_loss"] = s.acc_loss;
          d["cons_loss"] = s.cons_loss;
          d["total"] = s.total;
          d["lr"] = s.lr;
          log.append(d);
        }
        return log;
      },
      py::arg("manifest"), py::arg("annotations"), py::arg("out"), py::arg("loss") = "rizz",
      py::arg("steps") = 0, py::arg("epochs") = 10, py::arg("seed") = 0,
      py::arg("intra_only") = false, "Trains and writes a checkpoint; returns the step log.");

  m.def(
      "predict",
      [](const std::string& checkpoint,
         const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& image,
         bool student) {
        if (image.ndim() != 3 || image.shape(2) != 3) {
          throw Error(ErrorCode::kShapeMismatch, "expected an H x W x 3 uint8 image");
        }
        RgbImage8 rgb(static_cast<int>(image.shape(0)), static_cast<int>(image.shape(1)));
        std::copy(image.data(), image.data() + image.size(), rgb.data.begin());
        const Checkpoint ckpt = LoadCheckpoint(checkpoint);
        const Network net(ckpt.config);
        return ArrayFromGrid(PredictMap(net, student ? ckpt.student : ckpt.teacher, ToTensor(rgb)));
      },
      py::arg("checkpoint"), py::arg("image"), py::arg("student") = false,
      "Traversability map at the model's input resolution.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full{"reltrav"};
        full.insert(full.end(), args.begin(), args.end());
        py::gil_scoped_release release;
        return RunCli(full);
      },
      py::arg("args"), "Runs a reltrav subcommand; returns the exit code.");
}
