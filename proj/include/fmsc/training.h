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

#ifndef FMSC_TRAINING_H_
#define FMSC_TRAINING_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fmsc/error_bound.h"
#include "fmsc/field.h"
#include "fmsc/model.h"
#include "fmsc/weights.h"

namespace fmsc::train {

enum class TrainMode { kFoundation, kFinetune };

struct LambdaStep {
  int64_t start = 0;
  double lambda = 0.0;
};

struct TrainConfig {
  TrainMode mode = TrainMode::kFoundation;
  std::vector<LambdaStep> lambda_schedule;
  double lr_initial = 1e-3;
  int64_t lr_halving_interval = 100000;
  int64_t total_iterations = 0;
  int batch_size = 1;
  uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  data::Dims crop = {8, 256, 256};

  int64_t validate_every = 500;
  int validation_blocks = 4;
  int basis_blocks = 16;          // crops used to fit the residual basis
  eb::BlockDims basis_block;
  int64_t checkpoint_every = 0;   // 0: only at the end
  std::string checkpoint_path;    // weights; training state goes to <path>.state
  std::string log_csv;            // iteration,lambda,lr,mse,bits_per_voxel,loss
  std::string resume_state;       // state file to continue from

  static TrainConfig Foundation(uint64_t seed = 0);
  static TrainConfig Finetune(uint64_t seed = 0);
  // Desk-scale run: constant lambda, small crops, short horizon.
  static TrainConfig Desk(double lambda, int64_t iterations, uint64_t seed = 0);

  void Validate() const;
};

nlohmann::json ToJson(const TrainConfig& c);
TrainConfig TrainConfigFromJson(const nlohmann::json& j);

double LambdaSchedule(int64_t iteration, const TrainConfig& cfg);
double LrSchedule(int64_t iteration, const TrainConfig& cfg);

// MSE(x, x^) + lambda * (y_bits + z_bits) / n_voxels.
double RdLoss(const Tensor& x, const Tensor& x_hat, double y_bits, double z_bits, double lambda,
              int64_t n_voxels);

struct RDPoint {
  double bits_per_voxel = 0.0;
  double mse = 0.0;
  double nrmse = 0.0;
  double lambda = 0.0;
  double loss = 0.0;
};

// Loss of one block in noise mode; with accumulate set, adds
// grad_scale * dL/dparams into the model's gradients.
RDPoint LossAndGrad(Model& model, const Tensor& x, double lambda, uint64_t noise_seed,
                    bool accumulate, double grad_scale = 1.0);
// Round-mode rate/distortion of a block (rates are model estimates).
RDPoint EvaluateBlock(const Model& model, const Tensor& x, double lambda);

struct TrainState {
  int64_t iteration = 0;
  int64_t adam_step = 0;
  std::vector<std::vector<double>> m, v;
  double lambda = 0.0;
  double lr = 0.0;
  std::deque<double> loss_history;  // most recent kHistory losses

  static constexpr size_t kHistory = 256;
};

// One Adam step on the mean loss of the batch.
RDPoint TrainStep(TrainState& state, Model& model, const std::vector<Tensor>& batch,
                  const TrainConfig& cfg, uint64_t noise_seed);

void SaveTrainState(const std::string& path, const TrainState& state, const Model& model);
// Restores iteration, optimizer moments and full-precision weights.
TrainState LoadTrainState(const std::string& path, Model& model);

struct TrainResult {
  WeightStore weights;
  std::vector<RDPoint> history;   // one per iteration run in this call
  nlohmann::json summary;
};

using StepCallback = std::function<void(int64_t iteration, const RDPoint& point)>;

TrainResult TrainFoundation(const std::vector<data::FieldSeries>& datasets, const ModelConfig& model_config,
                            const TrainConfig& cfg, const StepCallback& on_step = {});
TrainResult FineTune(const WeightStore& base, const data::FieldSeries& dataset, const TrainConfig& cfg,
                     const StepCallback& on_step = {});

// Residual basis of a model on normalized blocks [T, H, W].
eb::PcaBasis FitResidualBasis(const Model& model, const std::vector<Tensor>& blocks,
                              const eb::BlockDims& block);

// Block tensor [T, H, W] from float values.
Tensor BlockTensor(const data::SpatioTemporalBlock& b);

}  // namespace fmsc::train

#endif  // FMSC_TRAINING_H_
