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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "fmsc/codec.h"
#include "fmsc/error.h"
#include "fmsc/error_bound.h"
#include "fmsc/field.h"
#include "fmsc/training.h"
#include "fmsc/weights.h"

namespace py = pybind11;

namespace {

using Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

fmsc::data::FieldSeries FromNumpy(const Array& a, const std::string& name) {
  if (a.ndim() != 3) throw py::value_error("expected a [T, H, W] array");
  const fmsc::data::Dims dims = {a.shape(0), a.shape(1), a.shape(2)};
  std::vector<float> v(a.data(), a.data() + a.size());
  return fmsc::data::MakeField(dims, std::move(v), name);
}

Array ToNumpy(const fmsc::data::FieldSeries& fs) {
  const auto d = fs.dims();
  Array out({d[0], d[1], d[2]});
  std::copy(fs.values.begin(), fs.values.end(), out.mutable_data());
  return out;
}

std::string JsonDump(const nlohmann::json& j) { return j.dump(); }

}  // namespace

PYBIND11_MODULE(_fmsc, m) {
  m.doc() = "Native core of the fmsc compressor";

  static py::exception<fmsc::Error> error(m, "FmscError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const fmsc::Error& e) {
      PyErr_SetString(error.ptr(), (std::string(fmsc::ErrorKindName(e.kind())) + ": " + e.what()).c_str());
    }
  });

  m.def(
      "synthesize",
      [](const std::string& kind, std::vector<int64_t> dims, uint64_t seed) {
        if (dims.size() != 3) throw py::value_error("dims must be [T, H, W]");
        fmsc::data::SyntheticSpec s;
        s.kind = fmsc::data::SyntheticKindFromName(kind);
        s.dims = {dims[0], dims[1], dims[2]};
        s.seed = seed;
        return ToNumpy(fmsc::data::SynthesizeDataset(s));
      },
      py::arg("kind"), py::arg("dims"), py::arg("seed") = 0);

  m.def(
      "compress",
      [](const Array& field, const std::string& ckpt, double nrmse, int64_t block) {
        const auto fs = FromNumpy(field, "field");
        const auto weights = fmsc::WeightStore::Load(ckpt);
        fmsc::codec::CompressOptions opt;
        opt.nrmse = nrmse;
        opt.hs = opt.ws = block;
        std::vector<uint8_t> bytes;
        {
          py::gil_scoped_release release;
          bytes = fmsc::codec::SerializeArtifact(fmsc::codec::Compress(fs, weights, opt));
        }
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      },
      py::arg("field"), py::arg("ckpt"), py::arg("nrmse") = 1e-3, py::arg("block") = 64);

  m.def(
      "decompress",
      [](const py::bytes& data, const std::string& ckpt) {
        const std::string s = data;
        const std::vector<uint8_t> bytes(s.begin(), s.end());
        const auto weights = fmsc::WeightStore::Load(ckpt);
        fmsc::data::FieldSeries out;
        {
          py::gil_scoped_release release;
          out = fmsc::codec::Decompress(fmsc::codec::ParseArtifact(bytes), weights);
        }
        return ToNumpy(out);
      },
      py::arg("data"), py::arg("ckpt"));

  m.def(
      "inspect_json",
      [](const py::bytes& data) {
        const std::string s = data;
        const std::vector<uint8_t> bytes(s.begin(), s.end());
        return JsonDump(fmsc::codec::Inspect(bytes));
      },
      py::arg("data"));

  m.def(
      "nrmse",
      [](const Array& orig, const Array& recon) {
        return fmsc::codec::EvaluateNrmse(FromNumpy(orig, "orig"), FromNumpy(recon, "recon"));
      },
      py::arg("orig"), py::arg("recon"));

  m.def("tau_from_nrmse", &fmsc::eb::TauFromNrmse, py::arg("eps"), py::arg("range"), py::arg("n_b"));

  m.def(
      "train_desk_json",
      [](const std::vector<Array>& fields, const std::string& out, int64_t iterations, double lam,
         uint64_t seed) {
        std::vector<fmsc::data::FieldSeries> data;
        for (size_t i = 0; i < fields.size(); ++i) data.push_back(FromNumpy(fields[i], "field" + std::to_string(i)));
        const fmsc::ModelConfig mc = fmsc::ModelConfig::Desk(seed);
        auto tc = fmsc::train::TrainConfig::Desk(lam, iterations, seed);
        tc.checkpoint_path = out;
        fmsc::train::TrainResult r;
        {
          py::gil_scoped_release release;
          r = fmsc::train::TrainFoundation(data, mc, tc);
        }
        return JsonDump(r.summary);
      },
      py::arg("fields"), py::arg("out"), py::arg("iterations") = 200, py::arg("lam") = 1e-4,
      py::arg("seed") = 0);

  m.def(
      "param_count",
      [](const std::string& ckpt) { return fmsc::WeightStore::Load(ckpt).ParamCount(); },
      py::arg("ckpt"));
}
