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
#include "reltrav/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <Eigen/Core>
#include <json.hpp>

#include "reltrav/rng.hpp"

namespace reltrav {

using json = nlohmann::ordered_json;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

// --- config -----------------------------------------------------------------

void ModelConfig::Validate() const {
  if (encoder_widths.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "model needs at least two encoder stages");
  }
  for (int w : encoder_widths) {
    if (w <= 0) throw Error(ErrorCode::kInvalidArgument, "encoder widths must be positive");
  }
  const int factor = 1 << (encoder_widths.size() - 1);
  if (input_height <= 0 || input_width <= 0 || input_height % factor != 0 ||
      input_width % factor != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "input resolution " + std::to_string(input_height) + "x" +
                    std::to_string(input_width) + " must be divisible by " +
                    std::to_string(factor));
  }
}

std::string ModelConfig::ToJson() const {
  return json{{"encoder_widths", encoder_widths},
              {"input_height", input_height},
              {"input_width", input_width},
              {"decoder", "conv3x3+nearest_up2+skip_concat"},
              {"head", "conv1x1+sigmoid"}}
      .dump();
}

ModelConfig ModelConfig::FromJson(const std::string& text) {
  try {
    json j = json::parse(text);
    ModelConfig c;
    c.encoder_widths = j.at("encoder_widths").get<std::vector<int>>();
    c.input_height = j.at("input_height").get<int>();
    c.input_width = j.at("input_width").get<int>();
    c.Validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed model config: ") + e.what());
  }
}

// --- params -----------------------------------------------------------------

const NamedArray* ParamSet::Find(const std::string& name) const {
  for (const NamedArray& a : arrays_) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

NamedArray* ParamSet::Find(const std::string& name) {
  for (NamedArray& a : arrays_) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const NamedArray& ParamSet::Get(const std::string& name) const {
  const NamedArray* a = Find(name);
  if (a == nullptr) throw Error(ErrorCode::kShapeMismatch, "missing parameter '" + name + "'");
  return *a;
}

std::size_t ParamSet::NumValues() const {
  std::size_t n = 0;
  for (const NamedArray& a : arrays_) n += a.values.size();
  return n;
}

ParamSet ParamSet::ZerosLike() const {
  ParamSet z = *this;
  for (NamedArray& a : z.arrays_) std::fill(a.values.begin(), a.values.end(), 0.0);
  return z;
}

bool ParamSet::CompatibleWith(const ParamSet& other) const {
  if (arrays_.size() != other.arrays_.size()) return false;
  for (std::size_t i = 0; i < arrays_.size(); ++i) {
    if (arrays_[i].name != other.arrays_[i].name || arrays_[i].shape != other.arrays_[i].shape ||
        arrays_[i].values.size() != other.arrays_[i].values.size()) {
      return false;
    }
  }
  return true;
}

// --- layer kernels ------------------------------------------------------------

namespace {

int ConvOut(int n, int kernel, int stride) {
  const int pad = kernel / 2;
  return (n + 2 * pad - kernel) / stride + 1;
}

// Unfolds x into a (C*k*k) x (Ho*Wo) row-major matrix.
void Im2Col(const Tensor& x, int kernel, int stride, int ho, int wo, RowMatrix* cols) {
  const int pad = kernel / 2;
  cols->resize(static_cast<Eigen::Index>(x.channels) * kernel * kernel,
               static_cast<Eigen::Index>(ho) * wo);
  double* out = cols->data();
  for (int c = 0; c < x.channels; ++c) {
    const double* plane = x.data.data() + c * x.plane();
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= x.height) {
            std::fill(out, out + wo, 0.0);
            out += wo;
            continue;
          }
          const double* row = plane + static_cast<std::size_t>(iy) * x.width;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride - pad + kx;
            *out++ = (ix >= 0 && ix < x.width) ? row[ix] : 0.0;
          }
        }
      }
    }
  }
}

// Adjoint of Im2Col, accumulating into dx.
void Col2Im(const RowMatrix& cols, int kernel, int stride, int ho, int wo, Tensor* dx) {
  const int pad = kernel / 2;
  const double* in = cols.data();
  for (int c = 0; c < dx->channels; ++c) {
    double* plane = dx->data.data() + c * dx->plane();
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= dx->height) {
            in += wo;
            continue;
          }
          double* row = plane + static_cast<std::size_t>(iy) * dx->width;
          for (int ox = 0; ox < wo; ++ox, ++in) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < dx->width) row[ix] += *in;
          }
        }
      }
    }
  }
}

Tensor ConvForward(const Tensor& x, const NamedArray& w, const NamedArray& b, int cout,
                   int kernel, int stride) {
  const int ho = ConvOut(x.height, kernel, stride);
  const int wo = ConvOut(x.width, kernel, stride);
  Tensor y(cout, ho, wo);
  MatMap out(y.data.data(), cout, static_cast<Eigen::Index>(ho) * wo);
  ConstMatMap weight(w.values.data(), cout, static_cast<Eigen::Index>(x.channels) * kernel * kernel);
  if (kernel == 1 && stride == 1) {
    ConstMatMap in(x.data.data(), x.channels, static_cast<Eigen::Index>(ho) * wo);
    out.noalias() = weight * in;
  } else {
    RowMatrix cols;
    Im2Col(x, kernel, stride, ho, wo, &cols);
    out.noalias() = weight * cols;
  }
  for (int c = 0; c < cout; ++c) out.row(c).array() += b.values[c];
  return y;
}

// Accumulates weight/bias gradients; writes the input gradient to *dx when
// dx is non-null (overwriting).
void ConvBackward(const Tensor& x, const NamedArray& w, const Tensor& dy, int kernel, int stride,
                  NamedArray* dw, NamedArray* db, Tensor* dx) {
  const int cout = dy.channels;
  const int ho = dy.height;
  const int wo = dy.width;
  const Eigen::Index k = static_cast<Eigen::Index>(x.channels) * kernel * kernel;
  ConstMatMap grad_out(dy.data.data(), cout, static_cast<Eigen::Index>(ho) * wo);
  ConstMatMap weight(w.values.data(), cout, k);
  MatMap grad_w(dw->values.data(), cout, k);
  for (int c = 0; c < cout; ++c) db->values[c] += grad_out.row(c).sum();
  if (kernel == 1 && stride == 1) {
    ConstMatMap in(x.data.data(), x.channels, static_cast<Eigen::Index>(ho) * wo);
    grad_w.noalias() += grad_out * in.transpose();
    if (dx != nullptr) {
      *dx = Tensor(x.channels, x.height, x.width);
      MatMap gin(dx->data.data(), x.channels, static_cast<Eigen::Index>(ho) * wo);
      gin.noalias() = weight.transpose() * grad_out;
    }
    return;
  }
  RowMatrix cols;
  Im2Col(x, kernel, stride, ho, wo, &cols);
  grad_w.noalias() += grad_out * cols.transpose();
  if (dx != nullptr) {
    RowMatrix dcols = weight.transpose() * grad_out;
    *dx = Tensor(x.channels, x.height, x.width);
    Col2Im(dcols, kernel, stride, ho, wo, dx);
  }
}

void ReluInPlace(Tensor* t) {
  for (double& v : t->data) v = v < 0.0 ? 0.0 : v;
}

// dy masked by the ReLU output.
void ReluBackwardInPlace(const Tensor& out, Tensor* dy) {
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    if (!(out.data[i] > 0.0)) dy->data[i] = 0.0;
  }
}

Tensor Upsample2(const Tensor& x) {
  Tensor y(x.channels, x.height * 2, x.width * 2);
  for (int c = 0; c < x.channels; ++c) {
    for (int yy = 0; yy < y.height; ++yy) {
      for (int xx = 0; xx < y.width; ++xx) y.at(c, yy, xx) = x.at(c, yy / 2, xx / 2);
    }
  }
  return y;
}

Tensor Upsample2Backward(const Tensor& dy) {
  Tensor dx(dy.channels, dy.height / 2, dy.width / 2);
  for (int c = 0; c < dy.channels; ++c) {
    for (int yy = 0; yy < dy.height; ++yy) {
      for (int xx = 0; xx < dy.width; ++xx) dx.at(c, yy / 2, xx / 2) += dy.at(c, yy, xx);
    }
  }
  return dx;
}

Tensor Concat(const Tensor& a, const Tensor& b) {
  Tensor y(a.channels + b.channels, a.height, a.width);
  std::copy(a.data.begin(), a.data.end(), y.data.begin());
  std::copy(b.data.begin(), b.data.end(), y.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
  return y;
}

// Splits a channel-concatenated gradient back into its two parts.
std::pair<Tensor, Tensor> Split(const Tensor& y, int first_channels) {
  Tensor a(first_channels, y.height, y.width);
  Tensor b(y.channels - first_channels, y.height, y.width);
  std::copy(y.data.begin(), y.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()), a.data.begin());
  std::copy(y.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()), y.data.end(), b.data.begin());
  return {std::move(a), std::move(b)};
}

void AddInto(Tensor* dst, const Tensor& src) {
  for (std::size_t i = 0; i < src.data.size(); ++i) dst->data[i] += src.data[i];
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::string EncName(int i) { return "enc" + std::to_string(i); }
std::string DecName(int i) { return "dec" + std::to_string(i); }

}  // namespace

// --- network ------------------------------------------------------------------

Network::Network(ModelConfig config) : config_(std::move(config)) {
  config_.Validate();
  const std::vector<int>& w = config_.encoder_widths;
  const int n = stages();
  convs_.push_back({EncName(0), 3, w[0], 3, 1});
  for (int i = 1; i < n; ++i) convs_.push_back({EncName(i), w[i - 1], w[i], 3, 2});
  int channels = w[n - 1];
  for (int i = n - 1; i >= 1; --i) {
    convs_.push_back({DecName(i), channels, w[i - 1], 3, 1});
    channels = 2 * w[i - 1];
  }
  convs_.push_back({"final", channels, w[0], 3, 1});
  convs_.push_back({"head", w[0], 1, 1, 1});
}

const Network::ConvSpec& Network::Spec(const std::string& name) const {
  for (const ConvSpec& s : convs_) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "no layer '" + name + "'");
}

ParamSet Network::InitParams(std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<NamedArray> arrays;
  for (const ConvSpec& s : convs_) {
    NamedArray weight{s.name + ".weight", {s.out_channels, s.in_channels, s.kernel, s.kernel}, {}};
    const int fan_in = s.in_channels * s.kernel * s.kernel;
    const double stddev = s.name == "head" ? 0.1 / std::sqrt(fan_in) : std::sqrt(2.0 / fan_in);
    weight.values.resize(static_cast<std::size_t>(s.out_channels) * fan_in);
    for (double& v : weight.values) v = rng.Normal(0.0, stddev);
    arrays.push_back(std::move(weight));
    arrays.push_back(NamedArray{s.name + ".bias", {s.out_channels},
                                std::vector<double>(static_cast<std::size_t>(s.out_channels), 0.0)});
  }
  return ParamSet(std::move(arrays));
}

void Network::ZeroHead(ParamSet* params) {
  for (const char* name : {"head.weight", "head.bias"}) {
    NamedArray* a = params->Find(name);
    if (a != nullptr) std::fill(a->values.begin(), a->values.end(), 0.0);
  }
}

TraversabilityMap Network::Forward(const ParamSet& params, const Tensor& image,
                                   ForwardCache* cache) const {
  if (image.channels != 3 || image.height != config_.input_height ||
      image.width != config_.input_width) {
    throw Error(ErrorCode::kShapeMismatch,
                "network expects 3x" + std::to_string(config_.input_height) + "x" +
                    std::to_string(config_.input_width) + " input, got " +
                    std::to_string(image.channels) + "x" + std::to_string(image.height) + "x" +
                    std::to_string(image.width));
  }
  const int n = stages();
  auto conv = [&](const std::string& name, const Tensor& x) {
    const ConvSpec& s = Spec(name);
    return ConvForward(x, params.Get(name + ".weight"), params.Get(name + ".bias"), s.out_channels,
                       s.kernel, s.stride);
  };

  ForwardCache local;
  ForwardCache& c = cache != nullptr ? *cache : local;
  c.enc_in.assign(n, Tensor());
  c.enc_out.assign(n, Tensor());
  c.dec_in.assign(n, Tensor());
  c.dec_out.assign(n, Tensor());

  const Tensor* x = &image;
  for (int i = 0; i < n; ++i) {
    if (cache != nullptr) c.enc_in[i] = *x;
    c.enc_out[i] = conv(EncName(i), *x);
    ReluInPlace(&c.enc_out[i]);
    x = &c.enc_out[i];
  }
  Tensor current = c.enc_out[n - 1];
  for (int i = n - 1; i >= 1; --i) {
    c.dec_in[i] = std::move(current);
    c.dec_out[i] = conv(DecName(i), c.dec_in[i]);
    ReluInPlace(&c.dec_out[i]);
    current = Concat(Upsample2(c.dec_out[i]), c.enc_out[i - 1]);
  }
  c.final_in = std::move(current);
  c.final_out = conv("final", c.final_in);
  ReluInPlace(&c.final_out);
  Tensor logits = conv("head", c.final_out);

  TraversabilityMap out(config_.input_height, config_.input_width);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = Sigmoid(logits.data[i]);
  if (cache != nullptr) c.output = out;
  return out;
}

void Network::Backward(const ParamSet& params, const ForwardCache& cache,
                       const Grid<double>& d_output, ParamSet* grads) const {
  if (!d_output.SameShape(cache.output)) {
    throw Error(ErrorCode::kShapeMismatch, "output gradient shape mismatch");
  }
  if (!grads->CompatibleWith(params)) {
    throw Error(ErrorCode::kShapeMismatch, "gradient buffer does not match parameters");
  }
  const int n = stages();
  const std::vector<int>& w = config_.encoder_widths;
  auto conv_back = [&](const std::string& name, const Tensor& x, const Tensor& dy, Tensor* dx) {
    const ConvSpec& s = Spec(name);
    ConvBackward(x, params.Get(name + ".weight"), dy, s.kernel, s.stride,
                 grads->Find(name + ".weight"), grads->Find(name + ".bias"), dx);
  };

  Tensor d_logits(1, d_output.height, d_output.width);
  for (std::size_t i = 0; i < d_output.values.size(); ++i) {
    const double s = cache.output.values[i];
    d_logits.data[i] = d_output.values[i] * s * (1.0 - s);
  }
  Tensor d_final_out;
  conv_back("head", cache.final_out, d_logits, &d_final_out);
  ReluBackwardInPlace(cache.final_out, &d_final_out);
  Tensor d_concat;
  conv_back("final", cache.final_in, d_final_out, &d_concat);

  std::vector<Tensor> d_enc(n);
  for (int i = 0; i < n; ++i) {
    d_enc[i] = Tensor(cache.enc_out[i].channels, cache.enc_out[i].height, cache.enc_out[i].width);
  }
  for (int i = 1; i <= n - 1; ++i) {
    auto [d_up, d_skip] = Split(d_concat, w[i - 1]);
    AddInto(&d_enc[i - 1], d_skip);
    Tensor d_dec_out = Upsample2Backward(d_up);
    ReluBackwardInPlace(cache.dec_out[i], &d_dec_out);
    Tensor d_dec_in;
    conv_back(DecName(i), cache.dec_in[i], d_dec_out, &d_dec_in);
    if (i == n - 1) {
      AddInto(&d_enc[n - 1], d_dec_in);
    } else {
      d_concat = std::move(d_dec_in);
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    ReluBackwardInPlace(cache.enc_out[i], &d_enc[i]);
    Tensor d_in;
    conv_back(EncName(i), cache.enc_in[i], d_enc[i], i > 0 ? &d_in : nullptr);
    if (i > 0) AddInto(&d_enc[i - 1], d_in);
  }
}

// --- EMA / pretraining ---------------------------------------------------------

void EmaUpdateInPlace(ParamSet* teacher, const ParamSet& student, double alpha) {
  if (!teacher->CompatibleWith(student)) {
    throw Error(ErrorCode::kShapeMismatch, "teacher and student parameters differ in shape");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "EMA decay must lie in [0, 1]");
  }
  for (std::size_t k = 0; k < student.arrays().size(); ++k) {
    std::vector<double>& t = teacher->arrays()[k].values;
    const std::vector<double>& s = student.arrays()[k].values;
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = alpha * t[i] + (1.0 - alpha) * s[i];
  }
}

ParamSet EmaUpdate(const ParamSet& teacher, const ParamSet& student, double alpha) {
  ParamSet out = teacher;
  EmaUpdateInPlace(&out, student, alpha);
  return out;
}

std::size_t ImportPretrained(ParamSet* target, const ParamSet& source) {
  std::size_t imported = 0;
  for (NamedArray& a : target->arrays()) {
    if (a.name.rfind("head.", 0) == 0) continue;
    const NamedArray* s = source.Find(a.name);
    if (s != nullptr && s->shape == a.shape) {
      a.values = s->values;
      ++imported;
    }
  }
  return imported;
}

// --- checkpoint -----------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'R', 'T', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void Put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T Take(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorCode::kParse, "truncated checkpoint");
  return v;
}

void PutString(std::ostream& out, const std::string& s) {
  Put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string TakeString(std::istream& in) {
  const auto n = Take<std::uint64_t>(in);
  if (n > (1ULL << 32)) throw Error(ErrorCode::kParse, "corrupt checkpoint string");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw Error(ErrorCode::kParse, "truncated checkpoint");
  return s;
}

void PutArrays(std::ostream& out, const std::string& prefix, const ParamSet& params) {
  for (const NamedArray& a : params.arrays()) {
    PutString(out, prefix + a.name);
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(a.shape.size()));
    for (int d : a.shape) Put<std::int64_t>(out, d);
    Put<std::uint64_t>(out, a.values.size());
    out.write(reinterpret_cast<const char*>(a.values.data()),
              static_cast<std::streamsize>(a.values.size() * sizeof(double)));
  }
}

}  // namespace

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little, "checkpoints are little-endian");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint '" + path.string() + "'");
  json meta{{"config", json::parse(ckpt.config.ToJson())},
            {"step", ckpt.step},
            {"alpha", ckpt.alpha},
            {"loss", ckpt.loss_name},
            {"margin", ckpt.margin}};
  out.write(kMagic, sizeof(kMagic));
  PutString(out, meta.dump());
  Put<std::uint64_t>(out, ckpt.student.arrays().size() + ckpt.teacher.arrays().size());
  PutArrays(out, "student/", ckpt.student);
  PutArrays(out, "teacher/", ckpt.teacher);
  if (!out) throw Error(ErrorCode::kIo, "failed writing checkpoint '" + path.string() + "'");
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open checkpoint '" + path.string() + "'");
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kParse, "'" + path.string() + "' is not a checkpoint");
  }
  Checkpoint ckpt;
  try {
    json meta = json::parse(TakeString(in));
    ckpt.config = ModelConfig::FromJson(meta.at("config").dump());
    ckpt.step = meta.at("step").get<std::int64_t>();
    ckpt.alpha = meta.at("alpha").get<double>();
    ckpt.loss_name = meta.at("loss").get<std::string>();
    ckpt.margin = meta.at("margin").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad checkpoint metadata: ") + e.what());
  }
  const auto count = Take<std::uint64_t>(in);
  for (std::uint64_t k = 0; k < count; ++k) {
    NamedArray a;
    std::string name = TakeString(in);
    const auto ndim = Take<std::uint32_t>(in);
    for (std::uint32_t d = 0; d < ndim; ++d) a.shape.push_back(static_cast<int>(Take<std::int64_t>(in)));
    const auto n = Take<std::uint64_t>(in);
    a.values.resize(n);
    in.read(reinterpret_cast<char*>(a.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw Error(ErrorCode::kParse, "truncated checkpoint");
    if (name.rfind("student/", 0) == 0) {
      a.name = name.substr(8);
      ckpt.student.arrays().push_back(std::move(a));
    } else if (name.rfind("teacher/", 0) == 0) {
      a.name = name.substr(8);
      ckpt.teacher.arrays().push_back(std::move(a));
    } else {
      throw Error(ErrorCode::kParse, "unexpected checkpoint array '" + name + "'");
    }
  }
  return ckpt;
}

}  // namespace reltrav
