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

#include "fmsc/error.h"
#include "fmsc/training.h"

namespace fmsc::train {

TrainConfig TrainConfig::Foundation(uint64_t seed) {
  TrainConfig c;
  c.mode = TrainMode::kFoundation;
  c.lambda_schedule = {{0, 1e-5}, {250000, 1e-4}};
  c.lr_initial = 1e-3;
  c.lr_halving_interval = 100000;
  c.total_iterations = 500000;
  c.batch_size = 8;
  c.seed = seed;
  return c;
}

TrainConfig TrainConfig::Finetune(uint64_t seed) {
  TrainConfig c;
  c.mode = TrainMode::kFinetune;
  c.lambda_schedule = {{0, 1e-4}};
  c.lr_initial = 1e-4;
  c.lr_halving_interval = 20000;
  c.total_iterations = 100000;
  c.batch_size = 8;
  c.seed = seed;
  return c;
}

TrainConfig TrainConfig::Desk(double lambda, int64_t iterations, uint64_t seed) {
  TrainConfig c = Foundation(seed);
  c.lambda_schedule = {{0, lambda}};
  c.total_iterations = iterations;
  // Five halvings over the run, like the foundation recipe.
  c.lr_halving_interval = std::max<int64_t>(1, iterations / 5);
  c.batch_size = 1;
  c.crop = {8, 64, 64};
  c.validate_every = 500;
  c.validation_blocks = 4;
  return c;
}

void TrainConfig::Validate() const {
  Require(!lambda_schedule.empty(), ErrorKind::kSchedule, "lambda schedule is empty");
  Require(lambda_schedule.front().start == 0, ErrorKind::kSchedule, "lambda schedule must start at iteration 0");
  for (size_t i = 0; i < lambda_schedule.size(); ++i) {
    Require(lambda_schedule[i].lambda >= 0, ErrorKind::kSchedule, "lambda must be non-negative");
    if (i > 0)
      Require(lambda_schedule[i].start > lambda_schedule[i - 1].start, ErrorKind::kSchedule,
              "lambda schedule must be sorted by iteration");
  }
  Require(lr_initial > 0 && lr_halving_interval > 0, ErrorKind::kSchedule, "bad learning-rate schedule");
  Require(total_iterations >= 0, ErrorKind::kSchedule, "iteration count must be non-negative");
  Require(batch_size >= 1, ErrorKind::kSchedule, "batch size must be at least 1");
  Require(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1 && adam_eps > 0,
          ErrorKind::kSchedule, "bad optimizer constants");
  Require(crop[0] % 4 == 0 && crop[0] > 0 && crop[1] % 64 == 0 && crop[1] > 0 && crop[2] % 64 == 0 && crop[2] > 0,
          ErrorKind::kSchedule, "crop must be [4k, 64m, 64n], got " + data::DimsString(crop));
  Require(validation_blocks >= 0 && basis_blocks >= 1 && validate_every >= 0 && checkpoint_every >= 0,
          ErrorKind::kSchedule, "bad bookkeeping intervals");
}

double LambdaSchedule(int64_t iteration, const TrainConfig& cfg) {
  Require(iteration >= 0, ErrorKind::kSchedule, "iteration must be non-negative");
  Require(!cfg.lambda_schedule.empty(), ErrorKind::kSchedule, "lambda schedule is empty");
  double lambda = cfg.lambda_schedule.front().lambda;
  for (const auto& s : cfg.lambda_schedule)
    if (iteration >= s.start) lambda = s.lambda;
  return lambda;
}

double LrSchedule(int64_t iteration, const TrainConfig& cfg) {
  Require(iteration >= 0, ErrorKind::kSchedule, "iteration must be non-negative");
  return std::ldexp(cfg.lr_initial, -static_cast<int>(iteration / cfg.lr_halving_interval));
}

nlohmann::json ToJson(const TrainConfig& c) {
  nlohmann::json sched = nlohmann::json::array();
  for (const auto& s : c.lambda_schedule) sched.push_back({s.start, s.lambda});
  return {{"mode", c.mode == TrainMode::kFoundation ? "foundation" : "finetune"},
          {"lambda_schedule", sched},
          {"lr_initial", c.lr_initial},
          {"lr_halving_interval", c.lr_halving_interval},
          {"total_iterations", c.total_iterations},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"crop", {c.crop[0], c.crop[1], c.crop[2]}},
          {"validate_every", c.validate_every},
          {"validation_blocks", c.validation_blocks},
          {"basis_blocks", c.basis_blocks},
          {"basis_block", {c.basis_block.t, c.basis_block.h, c.basis_block.w}}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  try {
    const std::string mode = j.value("mode", "foundation");
    Require(mode == "foundation" || mode == "finetune", ErrorKind::kFormat, "unknown mode '" + mode + "'");
    TrainConfig c = mode == "foundation" ? TrainConfig::Foundation() : TrainConfig::Finetune();
    if (j.contains("lambda_schedule")) {
      c.lambda_schedule.clear();
      for (const auto& s : j.at("lambda_schedule")) c.lambda_schedule.push_back({s.at(0).get<int64_t>(), s.at(1).get<double>()});
    }
    if (j.contains("lambda")) c.lambda_schedule = {{0, j.at("lambda").get<double>()}};
    c.lr_initial = j.value("lr_initial", c.lr_initial);
    c.lr_halving_interval = j.value("lr_halving_interval", c.lr_halving_interval);
    c.total_iterations = j.value("total_iterations", c.total_iterations);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_eps = j.value("adam_eps", c.adam_eps);
    if (j.contains("crop")) {
      const auto v = j.at("crop").get<std::vector<int64_t>>();
      Require(v.size() == 3, ErrorKind::kFormat, "crop needs 3 entries");
      c.crop = {v[0], v[1], v[2]};
    }
    c.validate_every = j.value("validate_every", c.validate_every);
    c.validation_blocks = j.value("validation_blocks", c.validation_blocks);
    c.basis_blocks = j.value("basis_blocks", c.basis_blocks);
    if (j.contains("basis_block")) {
      const auto v = j.at("basis_block").get<std::vector<int64_t>>();
      Require(v.size() == 3, ErrorKind::kFormat, "basis_block needs 3 entries");
      c.basis_block = {v[0], v[1], v[2]};
    }
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.checkpoint_path = j.value("checkpoint_path", c.checkpoint_path);
    c.log_csv = j.value("log_csv", c.log_csv);
    c.resume_state = j.value("resume_state", c.resume_state);
    c.Validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kFormat, std::string("bad training config: ") + e.what());
  }
}

}  // namespace fmsc::train
