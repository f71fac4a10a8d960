// Copyright 2026 The FMSC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "fmsc/bytes.h"
#include "fmsc/error.h"
#include "fmsc/random.h"
#include "fmsc/training.h"

namespace fmsc::train {
namespace {

constexpr char kStateMagic[4] = {'F', 'M', 'T', 'S'};
constexpr uint16_t kStateVersion = 1;

// Seed streams.
constexpr uint64_t kCropStream = 0x63726f70;
constexpr uint64_t kEpochStream = 0x65706f63;
constexpr uint64_t kNoiseStream = 0x6e6f6973;
constexpr uint64_t kValidStream = 0x76616c69;
constexpr uint64_t kBasisStream = 0x62617369;

double BlockRange(const Tensor& x) {
  const auto [lo, hi] = std::minmax_element(x.values().begin(), x.values().end());
  return *hi - *lo;
}

// Normalized, padded training fields plus a balanced sampling order.
class BlockSource {
 public:
  BlockSource(const std::vector<data::FieldSeries>& datasets, const data::Dims& crop, uint64_t seed)
      : crop_(crop), seed_(seed) {
    Require(!datasets.empty(), ErrorKind::kTraining, "no training data");
    for (const auto& fs : datasets) {
      data::FieldSeries norm = data::Normalize(fs).first;
      const auto& d = norm.dims();
      if (d[0] < crop[0] || d[1] < crop[1] || d[2] < crop[2])
        norm = data::ReflectPadTo(norm, {std::max(d[0], crop[0]), std::max(d[1], crop[1]),
                                         std::max(d[2], crop[2])}).first;
      const auto& p = norm.dims();
      sizes_.push_back(((p[0] + crop[0] - 1) / crop[0]) * ((p[1] + crop[1] - 1) / crop[1]) *
                       ((p[2] + crop[2] - 1) / crop[2]));
      fields_.push_back(std::move(norm));
    }
    epoch_len_ = static_cast<int64_t>(data::BalancedEpoch(sizes_, 0).size());
  }

  // Sample number pos of the training stream; a pure function of pos.
  Tensor Sample(int64_t pos) {
    const int64_t epoch = pos / epoch_len_;
    if (epoch != cached_epoch_) {
      order_ = data::BalancedEpoch(sizes_, MixSeed(MixSeed(seed_, kEpochStream), epoch));
      cached_epoch_ = epoch;
    }
    return Crop(order_[pos % epoch_len_], MixSeed(MixSeed(seed_, kCropStream), pos));
  }

  Tensor Crop(int dataset, uint64_t seed) const {
    const auto& fs = fields_[dataset];
    const auto& d = fs.dims();
    Rng rng(seed);
    const data::Dims origin = {static_cast<int64_t>(rng.Below(d[0] - crop_[0] + 1)),
                               static_cast<int64_t>(rng.Below(d[1] - crop_[1] + 1)),
                               static_cast<int64_t>(rng.Below(d[2] - crop_[2] + 1))};
    return BlockTensor(data::ExtractBlock(fs, origin, crop_));
  }

  // Fixed blocks drawn round-robin from every dataset.
  std::vector<Tensor> FixedBlocks(int count, uint64_t stream) const {
    std::vector<Tensor> out;
    for (int i = 0; i < count; ++i)
      out.push_back(Crop(i % static_cast<int>(fields_.size()), MixSeed(MixSeed(seed_, stream), i)));
    return out;
  }

 private:
  std::vector<data::FieldSeries> fields_;
  std::vector<int64_t> sizes_;
  data::Dims crop_;
  uint64_t seed_;
  int64_t epoch_len_ = 1;
  int64_t cached_epoch_ = -1;
  std::vector<int> order_;
};

RDPoint Mean(const std::vector<RDPoint>& pts) {
  RDPoint m;
  for (const auto& p : pts) {
    m.bits_per_voxel += p.bits_per_voxel;
    m.mse += p.mse;
    m.nrmse += p.nrmse;
    m.loss += p.loss;
    m.lambda = p.lambda;
  }
  const double n = static_cast<double>(std::max<size_t>(pts.size(), 1));
  m.bits_per_voxel /= n;
  m.mse /= n;
  m.nrmse /= n;
  m.loss /= n;
  return m;
}

nlohmann::json PointJson(const RDPoint& p) {
  return {{"bits_per_voxel", p.bits_per_voxel}, {"mse", p.mse}, {"nrmse", p.nrmse},
          {"lambda", p.lambda}, {"loss", p.loss}};
}

TrainResult RunTraining(Model model, BlockSource& source, const TrainConfig& cfg,
                        nlohmann::json metadata, const StepCallback& on_step) {
  cfg.Validate();
  TrainState state;
  if (!cfg.resume_state.empty()) state = LoadTrainState(cfg.resume_state, model);

  std::ofstream log;
  if (!cfg.log_csv.empty()) {
    log.open(cfg.log_csv, state.iteration > 0 ? std::ios::app : std::ios::trunc);
    Require(log.good(), ErrorKind::kIo, "cannot write " + cfg.log_csv);
    if (state.iteration == 0) log << "iteration,lambda,lr,mse,bits_per_voxel,loss\n";
    log << std::setprecision(9);
  }

  const std::vector<Tensor> validation = source.FixedBlocks(cfg.validation_blocks, kValidStream);
  nlohmann::json validation_log = nlohmann::json::array();
  auto validate = [&](int64_t it) {
    if (validation.empty()) return RDPoint{};
    std::vector<RDPoint> pts;
    for (const Tensor& x : validation) pts.push_back(EvaluateBlock(model, x, LambdaSchedule(it, cfg)));
    const RDPoint m = Mean(pts);
    nlohmann::json j = PointJson(m);
    j["iteration"] = it;
    validation_log.push_back(j);
    return m;
  };

  TrainResult result;
  for (int64_t it = state.iteration; it < cfg.total_iterations; ++it) {
    std::vector<Tensor> batch;
    for (int b = 0; b < cfg.batch_size; ++b) batch.push_back(source.Sample(it * cfg.batch_size + b));
    const RDPoint p = TrainStep(state, model, batch, cfg, MixSeed(MixSeed(cfg.seed, kNoiseStream), it));
    result.history.push_back(p);
    if (log.is_open())
      log << it << "," << p.lambda << "," << state.lr << "," << p.mse << "," << p.bits_per_voxel << ","
          << p.loss << "\n";
    if (on_step) on_step(it, p);
    if (cfg.validate_every > 0 && (it + 1) % cfg.validate_every == 0) validate(it + 1);
    if (cfg.checkpoint_every > 0 && !cfg.checkpoint_path.empty() && (it + 1) % cfg.checkpoint_every == 0 &&
        it + 1 < cfg.total_iterations) {
      WeightStore::FromModel(model).Save(cfg.checkpoint_path);
      SaveTrainState(cfg.checkpoint_path + ".state", state, model);
    }
  }
  const RDPoint final_validation = validate(cfg.total_iterations);

  // The codec runs on float32 weights; fit the basis on exactly those.
  result.weights = WeightStore::FromModel(model);
  const Model rounded = result.weights.ToModel();
  result.weights.basis = FitResidualBasis(rounded, source.FixedBlocks(cfg.basis_blocks, kBasisStream),
                                          cfg.basis_block);
  metadata["train"] = ToJson(cfg);
  metadata["iterations"] = cfg.total_iterations;
  metadata["final_validation"] = PointJson(final_validation);
  result.weights.metadata = metadata;

  result.summary = {{"mode", cfg.mode == TrainMode::kFoundation ? "foundation" : "finetune"},
                    {"iterations", cfg.total_iterations},
                    {"param_count", result.weights.ParamCount()},
                    {"model_hash", HexDigest(result.weights.ModelHash())},
                    {"basis_hash", HexDigest(result.weights.basis->Hash())},
                    {"final_validation", PointJson(final_validation)},
                    {"validation", validation_log}};
  if (!result.history.empty()) {
    const size_t tail = std::min<size_t>(result.history.size(), 100);
    result.summary["final_train"] =
        PointJson(Mean({result.history.end() - static_cast<std::ptrdiff_t>(tail), result.history.end()}));
  }
  if (metadata.contains("base_hash")) result.summary["base_hash"] = metadata["base_hash"];
  if (!cfg.checkpoint_path.empty()) {
    result.weights.Save(cfg.checkpoint_path);
    SaveTrainState(cfg.checkpoint_path + ".state", state, model);
  }
  return result;
}

}  // namespace

Tensor BlockTensor(const data::SpatioTemporalBlock& b) {
  return Tensor({b.dims[0], b.dims[1], b.dims[2]}, std::vector<double>(b.values.begin(), b.values.end()));
}

double RdLoss(const Tensor& x, const Tensor& x_hat, double y_bits, double z_bits, double lambda,
              int64_t n_voxels) {
  Require(x.shape() == x_hat.shape(), ErrorKind::kShape,
          "loss inputs differ: " + ShapeString(x.shape()) + " vs " + ShapeString(x_hat.shape()));
  Require(lambda >= 0, ErrorKind::kParameter, "lambda must be non-negative");
  Require(n_voxels > 0, ErrorKind::kParameter, "voxel count must be positive");
  double se = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double e = x_hat[i] - x[i];
    se += e * e;
  }
  return se / static_cast<double>(x.size()) + lambda * (y_bits + z_bits) / static_cast<double>(n_voxels);
}

RDPoint LossAndGrad(Model& model, const Tensor& x, double lambda, uint64_t noise_seed, bool accumulate,
                    double grad_scale) {
  Model::Pass pass;
  const ForwardResult r = model.Forward(x, QuantMode::kNoise, noise_seed, accumulate ? &pass : nullptr);
  const double n = static_cast<double>(x.size());
  RDPoint p;
  p.lambda = lambda;
  p.loss = RdLoss(x, r.x_hat, r.y_bits, r.z_bits, lambda, static_cast<int64_t>(x.size()));
  p.bits_per_voxel = (r.y_bits + r.z_bits) / n;
  p.mse = p.loss - lambda * p.bits_per_voxel;
  const double range = BlockRange(x);
  p.nrmse = range > 0 ? std::sqrt(p.mse) / range : 0.0;
  if (accumulate) {
    Tensor dx(r.x_hat.shape());
    for (size_t i = 0; i < dx.size(); ++i) dx[i] = grad_scale * 2.0 * (r.x_hat[i] - x[i]) / n;
    model.Backward(pass, dx, grad_scale * lambda / n, grad_scale * lambda / n);
  }
  return p;
}

RDPoint EvaluateBlock(const Model& model, const Tensor& x, double lambda) {
  const ForwardResult r = model.Forward(x, QuantMode::kRound, 0, nullptr);
  const double n = static_cast<double>(x.size());
  RDPoint p;
  p.lambda = lambda;
  p.loss = RdLoss(x, r.x_hat, r.y_bits, r.z_bits, lambda, static_cast<int64_t>(x.size()));
  p.bits_per_voxel = (r.y_bits + r.z_bits) / n;
  p.mse = p.loss - lambda * p.bits_per_voxel;
  const double range = BlockRange(x);
  p.nrmse = range > 0 ? std::sqrt(p.mse) / range : 0.0;
  return p;
}

RDPoint TrainStep(TrainState& state, Model& model, const std::vector<Tensor>& batch, const TrainConfig& cfg,
                  uint64_t noise_seed) {
  Require(!batch.empty(), ErrorKind::kTraining, "empty batch");
  auto& params = model.params();
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const auto& p : params) {
      state.m.emplace_back(p.size(), 0.0);
      state.v.emplace_back(p.size(), 0.0);
    }
  }
  state.lambda = LambdaSchedule(state.iteration, cfg);
  state.lr = LrSchedule(state.iteration, cfg);

  params.ZeroGrad();
  std::vector<RDPoint> pts;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (size_t i = 0; i < batch.size(); ++i)
    pts.push_back(LossAndGrad(model, batch[i], state.lambda, MixSeed(noise_seed, i), true, scale));
  const RDPoint mean = Mean(pts);

  bool finite = std::isfinite(mean.loss);
  for (const auto& p : params)
    for (double g : p.grad) finite = finite && std::isfinite(g);
  if (!finite) {
    std::ostringstream os;
    os << "non-finite loss or gradient at iteration " << state.iteration << " (lambda=" << state.lambda
       << ", lr=" << state.lr << ", batch seed=" << noise_seed << ", batch size=" << batch.size() << ")";
    Fail(ErrorKind::kTraining, os.str());
  }

  ++state.adam_step;
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.adam_step));
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.adam_step));
  size_t k = 0;
  for (auto& p : params) {
    auto& m = state.m[k];
    auto& v = state.v[k];
    ++k;
    for (size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g;
      v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g * g;
      p.value[i] -= state.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.adam_eps);
    }
  }
  state.loss_history.push_back(mean.loss);
  if (state.loss_history.size() > TrainState::kHistory) state.loss_history.pop_front();
  ++state.iteration;
  return mean;
}

void SaveTrainState(const std::string& path, const TrainState& state, const Model& model) {
  ByteWriter w;
  w.PutBytes({reinterpret_cast<const uint8_t*>(kStateMagic), 4});
  w.Put<uint16_t>(kStateVersion);
  w.Put<int64_t>(state.iteration);
  w.Put<int64_t>(state.adam_step);
  w.Put<double>(state.lambda);
  w.Put<double>(state.lr);
  w.Put<uint32_t>(static_cast<uint32_t>(state.loss_history.size()));
  for (double l : state.loss_history) w.Put<double>(l);
  const auto& params = model.params();
  w.Put<uint32_t>(static_cast<uint32_t>(params.size()));
  const bool has_moments = state.m.size() == params.size();
  size_t k = 0;
  for (const auto& p : params) {
    w.Put<uint16_t>(static_cast<uint16_t>(p.name.size()));
    w.PutString(p.name);
    w.Put<uint64_t>(p.size());
    auto put = [&](const std::vector<double>& v) {
      w.PutBytes({reinterpret_cast<const uint8_t*>(v.data()), v.size() * sizeof(double)});
    };
    put(p.value);
    put(has_moments ? state.m[k] : std::vector<double>(p.size(), 0.0));
    put(has_moments ? state.v[k] : std::vector<double>(p.size(), 0.0));
    ++k;
  }
  WriteFileBytes(path, w.bytes());
}

TrainState LoadTrainState(const std::string& path, Model& model) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  ByteReader r(bytes);
  const auto magic = r.GetBytes(4);
  Require(std::equal(magic.begin(), magic.end(), kStateMagic), ErrorKind::kFormat, "not a training state file");
  Require(r.Get<uint16_t>() == kStateVersion, ErrorKind::kFormat, "unsupported training state version");
  TrainState s;
  s.iteration = r.Get<int64_t>();
  s.adam_step = r.Get<int64_t>();
  s.lambda = r.Get<double>();
  s.lr = r.Get<double>();
  const uint32_t nh = r.Get<uint32_t>();
  for (uint32_t i = 0; i < nh; ++i) s.loss_history.push_back(r.Get<double>());
  auto& params = model.params();
  Require(r.Get<uint32_t>() == params.size(), ErrorKind::kModel, "training state does not match model");
  for (auto& p : params) {
    Require(r.GetString(r.Get<uint16_t>()) == p.name, ErrorKind::kModel, "training state parameter order differs");
    Require(r.Get<uint64_t>() == p.size(), ErrorKind::kModel, "training state size differs for " + p.name);
    auto get = [&](std::vector<double>& v) {
      v.resize(p.size());
      const auto raw = r.GetBytes(p.size() * sizeof(double));
      std::memcpy(v.data(), raw.data(), raw.size());
    };
    get(p.value);
    s.m.emplace_back();
    get(s.m.back());
    s.v.emplace_back();
    get(s.v.back());
  }
  Require(r.done(), ErrorKind::kFormat, "trailing bytes in training state");
  return s;
}

eb::PcaBasis FitResidualBasis(const Model& model, const std::vector<Tensor>& blocks, const eb::BlockDims& block) {
  Require(!blocks.empty(), ErrorKind::kTraining, "no blocks to fit the residual basis");
  std::vector<Eigen::MatrixXd> parts;
  int64_t cols = 0;
  for (const Tensor& x : blocks) {
    const Tensor y = model.Encode(x);
    Tensor y_q(y.shape());
    for (size_t i = 0; i < y.size(); ++i) y_q[i] = entropy::RoundHalfAway(y[i]);
    const Tensor x_hat = model.Reconstruct(y_q);
    parts.push_back(eb::ExtractResidualBlocks(x.span(), x_hat.span(), {x.dim(0), x.dim(1), x.dim(2)}, block));
    cols += parts.back().cols();
  }
  Eigen::MatrixXd all(block.d(), cols);
  int64_t c = 0;
  for (const auto& p : parts) {
    all.middleCols(c, p.cols()) = p;
    c += p.cols();
  }
  return eb::FitPcaBasis(all, block);
}

TrainResult TrainFoundation(const std::vector<data::FieldSeries>& datasets, const ModelConfig& model_config,
                            const TrainConfig& cfg, const StepCallback& on_step) {
  BlockSource source(datasets, cfg.crop, cfg.seed);
  nlohmann::json meta = {{"stage", "foundation"}};
  nlohmann::json names = nlohmann::json::array();
  for (const auto& fs : datasets) names.push_back(fs.manifest.field_name);
  meta["datasets"] = names;
  return RunTraining(Model(model_config), source, cfg, meta, on_step);
}

TrainResult FineTune(const WeightStore& base, const data::FieldSeries& dataset, const TrainConfig& cfg,
                     const StepCallback& on_step) {
  BlockSource source({dataset}, cfg.crop, cfg.seed);
  nlohmann::json meta = {{"stage", "finetune"},
                         {"base_hash", HexDigest(base.ModelHash())},
                         {"datasets", {dataset.manifest.field_name}}};
  nlohmann::json chain = base.metadata.value("provenance", nlohmann::json::array());
  chain.push_back(HexDigest(base.ModelHash()));
  meta["provenance"] = chain;
  return RunTraining(base.ToModel(), source, cfg, meta, on_step);
}

}  // namespace fmsc::train
