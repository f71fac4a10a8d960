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

// fmsc: train, compress, decompress and evaluate spatiotemporal fields.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fmsc/codec.h"
#include "fmsc/error.h"
#include "fmsc/field.h"
#include "fmsc/training.h"
#include "fmsc/weights.h"

namespace {

using fmsc::ErrorKind;
using fmsc::Require;
using nlohmann::json;

std::string SidecarPath(const std::string& path) {
  return std::filesystem::path(path).replace_extension(".json").string();
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorKind::kIo, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fmsc::Fail(ErrorKind::kFormat, path + " is not JSON: " + e.what());
  }
}

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  Require(out.good(), ErrorKind::kIo, "cannot write " + path);
  out << text;
}

std::vector<fmsc::data::FieldSeries> LoadInputs(const std::vector<std::string>& inputs,
                                                const std::vector<std::string>& manifests) {
  Require(!inputs.empty(), ErrorKind::kIo, "no --input given");
  Require(manifests.empty() || manifests.size() == inputs.size(), ErrorKind::kIo,
          "give one --manifest per --input, or none");
  std::vector<fmsc::data::FieldSeries> out;
  for (size_t i = 0; i < inputs.size(); ++i)
    out.push_back(fmsc::data::LoadFieldSeries(inputs[i], manifests.empty() ? SidecarPath(inputs[i]) : manifests[i]));
  return out;
}

template <typename T>
std::vector<T> ParseList(const std::string& s) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v;
    is >> v;
    Require(!is.fail(), ErrorKind::kParameter, "bad list entry '" + item + "'");
    out.push_back(v);
  }
  Require(!out.empty(), ErrorKind::kParameter, "empty list");
  return out;
}

struct Flags {
  std::string ckpt;
  std::vector<std::string> inputs;
  std::vector<std::string> manifests;
  std::string out;
  std::string config;
  std::string nrmse = "1e-3";
  std::string block = "64";
  uint64_t seed = 0;
  bool seed_set = false;
  std::string recon;
  std::string artifact;
  std::string order = "magnitude";
  std::string log_csv;
  std::string summary;
  int64_t iterations = -1;
  std::string kind = "traveling_wave";
  std::vector<int64_t> dims = {8, 64, 64};
};

fmsc::train::TrainConfig TrainConfigFor(const Flags& f, fmsc::train::TrainMode mode, const json& cfg) {
  json t = cfg.value("train", json::object());
  if (!t.contains("mode")) t["mode"] = mode == fmsc::train::TrainMode::kFoundation ? "foundation" : "finetune";
  fmsc::train::TrainConfig c = fmsc::train::TrainConfigFromJson(t);
  if (f.seed_set) c.seed = f.seed;
  if (f.iterations >= 0) c.total_iterations = f.iterations;
  if (!f.log_csv.empty()) c.log_csv = f.log_csv;
  c.checkpoint_path = f.out;
  c.Validate();
  return c;
}

void PrintTrainSummary(const fmsc::train::TrainResult& r, const Flags& f) {
  const std::string text = r.summary.dump(2) + "\n";
  if (!f.summary.empty()) WriteText(f.summary, text);
  std::cout << text;
}

int RunTrain(const Flags& f) {
  Require(!f.out.empty(), ErrorKind::kIo, "train needs --out");
  const json cfg = f.config.empty() ? json::object() : ReadJsonFile(f.config);
  fmsc::ModelConfig mc = fmsc::ModelConfigFromJson(cfg.value("model", json::object()));
  if (f.seed_set) mc.seed = f.seed;
  const auto tc = TrainConfigFor(f, fmsc::train::TrainMode::kFoundation, cfg);
  const auto result = fmsc::train::TrainFoundation(LoadInputs(f.inputs, f.manifests), mc, tc);
  PrintTrainSummary(result, f);
  return 0;
}

int RunFinetune(const Flags& f) {
  Require(!f.out.empty() && !f.ckpt.empty(), ErrorKind::kIo, "finetune needs --ckpt and --out");
  const json cfg = f.config.empty() ? json::object() : ReadJsonFile(f.config);
  const auto tc = TrainConfigFor(f, fmsc::train::TrainMode::kFinetune, cfg);
  const auto inputs = LoadInputs(f.inputs, f.manifests);
  Require(inputs.size() == 1, ErrorKind::kIo, "finetune takes exactly one field");
  const auto result = fmsc::train::FineTune(fmsc::WeightStore::Load(f.ckpt), inputs[0], tc);
  PrintTrainSummary(result, f);
  return 0;
}

fmsc::eb::SelectionOrder OrderFromName(const std::string& s) {
  if (s == "magnitude") return fmsc::eb::SelectionOrder::kMagnitude;
  if (s == "eigen" || s == "eigenvalue") return fmsc::eb::SelectionOrder::kEigenvalue;
  fmsc::Fail(ErrorKind::kParameter, "unknown selection order '" + s + "'");
}

int RunCompress(const Flags& f) {
  Require(!f.out.empty() && !f.ckpt.empty(), ErrorKind::kIo, "compress needs --ckpt and --out");
  const auto inputs = LoadInputs(f.inputs, f.manifests);
  Require(inputs.size() == 1, ErrorKind::kIo, "compress takes exactly one field");
  const auto weights = fmsc::WeightStore::Load(f.ckpt);
  fmsc::codec::CompressOptions opt;
  opt.nrmse = ParseList<double>(f.nrmse).front();
  opt.hs = opt.ws = ParseList<int64_t>(f.block).front();
  opt.order = OrderFromName(f.order);
  fmsc::codec::CompressStats stats;
  const auto bytes = fmsc::codec::SerializeArtifact(fmsc::codec::Compress(inputs[0], weights, opt, &stats));
  fmsc::WriteFileBytes(f.out, bytes);
  const json j = {{"artifact", f.out},
                  {"bytes", bytes.size()},
                  {"compression_ratio", fmsc::codec::CompressionRatio(fmsc::data::DimsNumel(inputs[0].dims()), bytes.size())},
                  {"rate_estimate_bits", stats.y_bits_estimate + stats.z_bits_estimate},
                  {"coded_latent_bits", 8 * (stats.y_payload_bytes + stats.z_payload_bytes)},
                  {"coefficients", stats.coefficients},
                  {"seconds", stats.seconds}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int RunDecompress(const Flags& f) {
  Require(f.inputs.size() == 1 && !f.out.empty() && !f.ckpt.empty(), ErrorKind::kIo,
          "decompress needs --ckpt, one --input artifact and --out");
  const auto weights = fmsc::WeightStore::Load(f.ckpt);
  const auto artifact = fmsc::codec::ParseArtifact(fmsc::ReadFileBytes(f.inputs[0]));
  const auto recon = fmsc::codec::Decompress(artifact, weights);
  const std::string manifest = f.manifests.empty() ? SidecarPath(f.out) : f.manifests[0];
  fmsc::data::SaveFieldSeries(recon, f.out, manifest);
  std::cout << json{{"output", f.out}, {"manifest", manifest}, {"dims", recon.dims()}}.dump(2) << "\n";
  return 0;
}

int RunEval(const Flags& f) {
  Require(!f.recon.empty(), ErrorKind::kIo, "eval needs --recon");
  const auto orig = LoadInputs(f.inputs, f.manifests);
  Require(orig.size() == 1, ErrorKind::kIo, "eval takes exactly one original field");
  const auto recon = fmsc::data::LoadFieldSeries(f.recon, SidecarPath(f.recon));
  json j;
  if (!f.artifact.empty()) {
    const auto bytes = fmsc::ReadFileBytes(f.artifact);
    j = fmsc::codec::MakeReport(orig[0], recon, bytes).ToJson();
  } else {
    j = {{"nrmse", fmsc::codec::EvaluateNrmse(orig[0], recon)}};
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int RunSynth(const Flags& f) {
  Require(!f.out.empty(), ErrorKind::kIo, "synth needs --out");
  fmsc::data::SyntheticSpec s;
  json cfg = f.config.empty() ? json::object() : ReadJsonFile(f.config);
  s.kind = fmsc::data::SyntheticKindFromName(cfg.value("kind", f.kind));
  Require(f.dims.size() == 3, ErrorKind::kParameter, "--dims needs T H W");
  const auto dims = cfg.value("dims", f.dims);
  Require(dims.size() == 3, ErrorKind::kParameter, "dims needs 3 entries");
  s.dims = {dims[0], dims[1], dims[2]};
  s.seed = f.seed_set ? f.seed : cfg.value("seed", uint64_t{0});
  s.amplitude = cfg.value("amplitude", s.amplitude);
  s.velocity = cfg.value("velocity", s.velocity);
  if (cfg.contains("direction")) s.direction = cfg.at("direction").get<double>();
  s.harmonics = cfg.value("harmonics", s.harmonics);
  s.min_wavelength = cfg.value("min_wavelength", s.min_wavelength);
  s.max_wavelength = cfg.value("max_wavelength", s.max_wavelength);
  s.blobs = cfg.value("blobs", s.blobs);
  s.blob_sigma = cfg.value("blob_sigma", s.blob_sigma);
  const auto fs = fmsc::data::SynthesizeDataset(s);
  const std::string manifest = f.manifests.empty() ? SidecarPath(f.out) : f.manifests[0];
  fmsc::data::SaveFieldSeries(fs, f.out, manifest);
  std::cout << json{{"output", f.out}, {"manifest", manifest}, {"dims", fs.dims()}}.dump(2) << "\n";
  return 0;
}

int RunRdCurve(const Flags& f) {
  Require(!f.ckpt.empty(), ErrorKind::kIo, "rd-curve needs --ckpt");
  const auto inputs = LoadInputs(f.inputs, f.manifests);
  Require(inputs.size() == 1, ErrorKind::kIo, "rd-curve takes exactly one field");
  const auto rows = fmsc::codec::RdCurve(fmsc::WeightStore::Load(f.ckpt), inputs[0], ParseList<double>(f.nrmse),
                                         ParseList<int64_t>(f.block));
  WriteText(f.out, fmsc::codec::RdCsv(rows));
  return 0;
}

int RunInspect(const Flags& f) {
  Require(f.inputs.size() == 1, ErrorKind::kIo, "inspect needs one --input artifact");
  std::cout << fmsc::codec::Inspect(fmsc::ReadFileBytes(f.inputs[0])).dump(2) << "\n";
  return 0;
}

void ReportError(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fmsc: learned error-bounded compressor for spatiotemporal fields"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--ckpt", f.ckpt, "Checkpoint file");
    sub->add_option("--input", f.inputs, "Input file (repeatable for train)");
    sub->add_option("--manifest", f.manifests, "Manifest JSON (defaults to the input's .json sidecar)");
    sub->add_option("--out", f.out, "Output path");
    sub->add_option("--config", f.config, "JSON config");
    sub->add_option("--nrmse", f.nrmse, "Target NRMSE (comma list for rd-curve)");
    sub->add_option("--block", f.block, "Spatial block size (comma list for rd-curve)");
    sub->add_option_function<uint64_t>("--seed", [&](uint64_t s) { f.seed = s; f.seed_set = true; }, "Seed");
  };

  auto* train = app.add_subcommand("train", "Foundation training on one or more fields");
  add_common(train);
  train->add_option("--iterations", f.iterations, "Override iteration count");
  train->add_option("--log", f.log_csv, "CSV training log");
  train->add_option("--summary", f.summary, "Write the JSON summary here too");
  auto* finetune = app.add_subcommand("finetune", "Fine-tune a checkpoint on one field");
  add_common(finetune);
  finetune->add_option("--iterations", f.iterations, "Override iteration count");
  finetune->add_option("--log", f.log_csv, "CSV training log");
  finetune->add_option("--summary", f.summary, "Write the JSON summary here too");
  auto* compress = app.add_subcommand("compress", "Compress a field");
  add_common(compress);
  compress->add_option("--order", f.order, "Coefficient order: magnitude or eigen");
  auto* decompress = app.add_subcommand("decompress", "Decompress an artifact");
  add_common(decompress);
  auto* eval = app.add_subcommand("eval", "NRMSE (and ratio) of a reconstruction");
  add_common(eval);
  eval->add_option("--recon", f.recon, "Reconstructed field")->required();
  eval->add_option("--artifact", f.artifact, "Artifact, for the compression ratio");
  auto* synth = app.add_subcommand("synth", "Generate a synthetic field");
  add_common(synth);
  synth->add_option("--kind", f.kind, "traveling_wave, advected_blobs or mixed");
  synth->add_option("--dims", f.dims, "T H W")->expected(3);
  auto* rd = app.add_subcommand("rd-curve", "Compression ratio vs NRMSE sweep as CSV");
  add_common(rd);
  auto* inspect = app.add_subcommand("inspect", "Dump artifact header and section sizes");
  add_common(inspect);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (e.get_exit_code() == 0) return 0;
    std::cerr << app.help();
    ReportError("usage", e.what());
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) return RunTrain(f);
    if (*finetune) return RunFinetune(f);
    if (*compress) return RunCompress(f);
    if (*decompress) return RunDecompress(f);
    if (*eval) return RunEval(f);
    if (*synth) return RunSynth(f);
    if (*rd) return RunRdCurve(f);
    if (*inspect) return RunInspect(f);
  } catch (const fmsc::Error& e) {
    ReportError(fmsc::ErrorKindName(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    ReportError("internal", e.what());
    return 1;
  }
  return 2;
}
