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

#include "fmsc/codec.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "fmsc/bytes.h"
#include "fmsc/entropy.h"
#include "fmsc/error.h"

namespace fmsc::codec {
namespace {

constexpr char kMagic[4] = {'F', 'M', 'S', 'C'};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int32_t ClampedSymbol(double v) {
  const double r = entropy::RoundHalfAway(v);
  return static_cast<int32_t>(std::clamp<double>(r, -kMaxLatentMagnitude, kMaxLatentMagnitude));
}

// Geometry shared by the encoder and decoder.
struct Layout {
  int64_t channels = 0;     // C
  int64_t slices = 0;       // T_block / 4
  int64_t z_per_slice = 0;  // 4C * hs/64 * ws/64
  int64_t y_per_slice = 0;  // 2C * hs/16 * ws/16
  int64_t z_plane = 0;      // hs/64 * ws/64
  Shape z_shape, y_slice_shape;

  Layout(const ModelConfig& cfg, int64_t hs, int64_t ws) : channels(cfg.channels) {
    slices = data::kBlockFrames / 4;
    z_plane = (hs / 64) * (ws / 64);
    z_shape = {4 * channels, hs / 64, ws / 64};
    y_slice_shape = {2 * channels, hs / 16, ws / 16};
    z_per_slice = ShapeNumel(z_shape);
    y_per_slice = ShapeNumel(y_slice_shape);
  }
};

// x^R of one block in physical units, written into the padded field.
void StoreReconstruction(const Tensor& xr, const data::Dims& origin, const data::Dims& padded,
                         const data::NormalizationParams& norm, std::vector<double>& out) {
  const int64_t t_n = xr.dim(0), h_n = xr.dim(1), w_n = xr.dim(2);
  size_t k = 0;
  for (int64_t t = 0; t < t_n; ++t)
    for (int64_t h = 0; h < h_n; ++h) {
      double* row = out.data() + ((origin[0] + t) * padded[1] + origin[1] + h) * padded[2] + origin[2];
      for (int64_t w = 0; w < w_n; ++w) row[w] = xr[k++] * norm.range + norm.mean;
    }
}

class PriorTables {
 public:
  PriorTables(const Model& model, const Layout& layout) : model_(model), layout_(layout) {}

  entropy::CdfTable operator()(size_t i, int32_t lo, int32_t hi) {
    const int channel = static_cast<int>((i % layout_.z_per_slice) / layout_.z_plane);
    if (cache_.empty() || lo != lo_ || hi != hi_) {
      cache_.assign(4 * layout_.channels, std::nullopt);
      lo_ = lo;
      hi_ = hi;
    }
    if (!cache_[channel]) cache_[channel] = model_.prior().Table(model_.params(), channel, lo, hi);
    return *cache_[channel];
  }

 private:
  const Model& model_;
  const Layout& layout_;
  std::vector<std::optional<entropy::CdfTable>> cache_;
  int32_t lo_ = 0, hi_ = 0;
};

data::Dims Blocked(const data::Dims& padded, int64_t hs, int64_t ws) {
  return {padded[0] / data::kBlockFrames, padded[1] / hs, padded[2] / ws};
}

nlohmann::json RangeJson(const SymbolRange& r) { return {r.min, r.max}; }

SymbolRange RangeFromJson(const nlohmann::json& j) {
  return {j.at(0).get<int32_t>(), j.at(1).get<int32_t>()};
}

int64_t Lcm(int64_t a, int64_t b) { return std::lcm(a, b); }

}  // namespace

nlohmann::json ToJson(const ArtifactHeader& h) {
  return {{"version", h.version},
          {"model_hash", HexDigest(h.model_hash)},
          {"basis_hash", HexDigest(h.basis_hash)},
          {"manifest", data::ToJson(h.manifest)},
          {"norm", {{"mean", h.norm.mean}, {"range", h.norm.range}}},
          {"pad", data::ToJson(h.pad)},
          {"padded_dims", {h.padded[0], h.padded[1], h.padded[2]}},
          {"block", {h.hs, h.ws}},
          {"num_blocks", h.num_blocks},
          {"z_range", RangeJson(h.z_range)},
          {"y_range", RangeJson(h.y_range)},
          {"eps", h.eps},
          {"tau", h.tau},
          {"delta", h.delta},
          {"basis_block", {h.basis_block.t, h.basis_block.h, h.basis_block.w}},
          {"order", h.order},
          {"rate_estimate", {{"y_bits", h.y_bits_estimate}, {"z_bits", h.z_bits_estimate}}},
          {"sections", {{"hyper", h.hyper_len}, {"latent", h.latent_len}, {"correction", h.corr_len}}}};
}

ArtifactHeader ArtifactHeaderFromJson(const nlohmann::json& j) {
  ArtifactHeader h;
  try {
    h.version = j.at("version").get<uint16_t>();
    h.model_hash = DigestFromHex(j.at("model_hash").get<std::string>());
    h.basis_hash = DigestFromHex(j.at("basis_hash").get<std::string>());
    h.manifest = data::ManifestFromJson(j.at("manifest"));
    h.norm = {j.at("norm").at("mean").get<double>(), j.at("norm").at("range").get<double>()};
    h.pad = data::PadInfoFromJson(j.at("pad"));
    const auto p = j.at("padded_dims").get<std::vector<int64_t>>();
    Require(p.size() == 3, ErrorKind::kFormat, "padded_dims needs 3 entries");
    h.padded = {p[0], p[1], p[2]};
    h.hs = j.at("block").at(0).get<int64_t>();
    h.ws = j.at("block").at(1).get<int64_t>();
    h.num_blocks = j.at("num_blocks").get<int64_t>();
    h.z_range = RangeFromJson(j.at("z_range"));
    h.y_range = RangeFromJson(j.at("y_range"));
    h.eps = j.at("eps").get<double>();
    h.tau = j.at("tau").get<double>();
    h.delta = j.at("delta").get<double>();
    const auto b = j.at("basis_block").get<std::vector<int64_t>>();
    Require(b.size() == 3, ErrorKind::kFormat, "basis_block needs 3 entries");
    h.basis_block = {b[0], b[1], b[2]};
    h.order = j.at("order").get<std::string>();
    h.y_bits_estimate = j.at("rate_estimate").at("y_bits").get<double>();
    h.z_bits_estimate = j.at("rate_estimate").at("z_bits").get<double>();
    h.hyper_len = j.at("sections").at("hyper").get<uint64_t>();
    h.latent_len = j.at("sections").at("latent").get<uint64_t>();
    h.corr_len = j.at("sections").at("correction").get<uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kFormat, std::string("bad artifact header: ") + e.what());
  }
  return h;
}

std::vector<uint8_t> SerializeArtifact(const CompressedArtifact& a) {
  ArtifactHeader h = a.header;
  h.hyper_len = a.hyper.size();
  h.latent_len = a.latent.size();
  h.corr_len = a.correction.size();
  const std::string head = ToJson(h).dump();
  ByteWriter w;
  w.PutBytes({reinterpret_cast<const uint8_t*>(kMagic), 4});
  w.Put<uint16_t>(h.version);
  w.Put<uint32_t>(static_cast<uint32_t>(head.size()));
  w.PutString(head);
  for (const auto* s : {&a.hyper, &a.latent, &a.correction}) {
    w.Put<uint32_t>(static_cast<uint32_t>(s->size()));
    w.PutBytes(*s);
  }
  w.Put<uint32_t>(Crc32(w.bytes()));
  return w.Take();
}

CompressedArtifact ParseArtifact(std::span<const uint8_t> bytes) {
  Require(bytes.size() >= 14, ErrorKind::kFormat, "artifact too short");
  Require(std::equal(kMagic, kMagic + 4, bytes.begin()), ErrorKind::kFormat, "not an artifact (bad magic)");
  uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  Require(Crc32(bytes.first(bytes.size() - 4)) == stored, ErrorKind::kChecksum, "artifact checksum mismatch");

  ByteReader r(bytes.first(bytes.size() - 4));
  r.GetBytes(4);
  const uint16_t version = r.Get<uint16_t>();
  Require(version == kArtifactVersion, ErrorKind::kFormat, "unsupported artifact version " + std::to_string(version));
  CompressedArtifact a;
  const std::string head = r.GetString(r.Get<uint32_t>());
  try {
    a.header = ArtifactHeaderFromJson(nlohmann::json::parse(head));
  } catch (const nlohmann::json::parse_error& e) {
    Fail(ErrorKind::kFormat, std::string("artifact header is not JSON: ") + e.what());
  }
  for (auto* s : {&a.hyper, &a.latent, &a.correction}) {
    const auto part = r.GetBytes(r.Get<uint32_t>());
    s->assign(part.begin(), part.end());
  }
  Require(r.done(), ErrorKind::kFormat, "trailing bytes in artifact");
  Require(a.header.hyper_len == a.hyper.size() && a.header.latent_len == a.latent.size() &&
              a.header.corr_len == a.correction.size(),
          ErrorKind::kFormat, "section lengths disagree with header");
  return a;
}

CompressedArtifact Compress(const data::FieldSeries& fs, const WeightStore& weights, const CompressOptions& options,
                            CompressStats* stats) {
  const auto t0 = Clock::now();
  Require(weights.basis.has_value(), ErrorKind::kModel, "checkpoint carries no residual basis");
  const eb::PcaBasis& basis = *weights.basis;
  Require(options.nrmse > 0 && std::isfinite(options.nrmse), ErrorKind::kParameter, "target NRMSE must be positive");
  Require(options.hs > 0 && options.ws > 0 && options.hs % 64 == 0 && options.ws % 64 == 0, ErrorKind::kPartition,
          "block sizes must be positive multiples of 64");
  fs.manifest.Validate();
  Require(static_cast<int64_t>(fs.values.size()) == data::DimsNumel(fs.dims()), ErrorKind::kShape,
          "field value count does not match its manifest");
  data::CheckFinite(fs);
  const data::NormalizationParams norm = data::ComputeNormalization(fs);
  const Model model = weights.ToModel();
  const Layout layout(model.config(), options.hs, options.ws);

  const data::PadAlignment align{Lcm(data::kBlockFrames, basis.block.t), Lcm(options.hs, basis.block.h),
                                 Lcm(options.ws, basis.block.w)};
  const auto [padded, pad] = data::ReflectPad(fs, align);
  const data::Dims pd = padded.dims();
  const auto blocks = data::PartitionBlocks(padded, options.hs, options.ws);

  std::vector<int32_t> z_syms, y_syms;
  std::vector<double> mu, sigma;
  std::vector<double> xr_phys(data::DimsNumel(pd));
  double y_bits = 0.0, z_bits = 0.0;
  for (const auto& b : blocks) {
    Tensor x({b.dims[0], b.dims[1], b.dims[2]});
    for (size_t i = 0; i < x.size(); ++i) x[i] = (static_cast<double>(b.values[i]) - norm.mean) / norm.range;
    const Tensor y = model.Encode(x);
    Tensor y_q(y.shape());
    for (size_t i = 0; i < y.size(); ++i) y_q[i] = ClampedSymbol(y[i]);
    const auto y_slices = SplitTemporal(y);
    const auto yq_slices = SplitTemporal(y_q);
    for (size_t s = 0; s < y_slices.size(); ++s) {
      const Tensor z = model.HyperEncode(y_slices[s]);
      Tensor z_q(z.shape());
      for (size_t i = 0; i < z.size(); ++i) {
        z_q[i] = ClampedSymbol(z[i]);
        z_syms.push_back(static_cast<int32_t>(z_q[i]));
      }
      const GaussianParams gp = model.HyperDecode(z_q);
      for (size_t i = 0; i < yq_slices[s].size(); ++i) y_syms.push_back(static_cast<int32_t>(yq_slices[s][i]));
      mu.insert(mu.end(), gp.mu.values().begin(), gp.mu.values().end());
      sigma.insert(sigma.end(), gp.sigma.values().begin(), gp.sigma.values().end());
      y_bits += entropy::GaussianLikelihoodBits(yq_slices[s].span(), gp.mu.span(), gp.sigma.span()).total;
      z_bits += model.prior().Bits(model.params(), z_q).total;
    }
    StoreReconstruction(model.Reconstruct(y_q), b.origin, pd, norm, xr_phys);
  }

  PriorTables prior_tables(model, layout);
  const entropy::CodedStream z_stream = entropy::WriteCodedStream(
      z_syms, [&](size_t i, int32_t lo, int32_t hi) { return prior_tables(i, lo, hi); });
  const entropy::CodedStream y_stream = entropy::WriteCodedStream(
      y_syms, [&](size_t i, int32_t lo, int32_t hi) { return entropy::BuildGaussianCdfTable(mu[i], sigma[i], lo, hi); });

  // Correction in physical units. Padding adds blocks, so tau shrinks by
  // sqrt(N_d / N_pad) to keep the global bound over the original region.
  const std::vector<double> x_phys(padded.values.begin(), padded.values.end());
  const Eigen::MatrixXd xb = eb::BlockVectors(x_phys, pd, basis.block);
  const Eigen::MatrixXd rb = eb::BlockVectors(xr_phys, pd, basis.block);
  const double tau = eb::TauFromNrmse(options.nrmse, norm.range, basis.d()) *
                     std::sqrt(static_cast<double>(data::DimsNumel(fs.dims())) / static_cast<double>(data::DimsNumel(pd)));
  const double delta = eb::DefaultStep(tau, basis.d());
  eb::CorrectionPayload payload;
  payload.basis_hash = basis.Hash();
  payload.delta = delta;
  payload.records.reserve(xb.cols());
  int64_t coefficients = 0;
  const eb::SelectOptions select{options.order, true};
  for (int64_t c = 0; c < xb.cols(); ++c) {
    payload.records.push_back(eb::SelectAndQuantize(xb.col(c), rb.col(c), basis, tau, delta, select));
    coefficients += static_cast<int64_t>(payload.records.back().selected.size());
  }

  CompressedArtifact a;
  ArtifactHeader& h = a.header;
  h.model_hash = weights.ModelHash();
  h.basis_hash = payload.basis_hash;
  h.manifest = fs.manifest;
  h.norm = norm;
  h.pad = pad;
  h.padded = pd;
  h.hs = options.hs;
  h.ws = options.ws;
  h.num_blocks = static_cast<int64_t>(blocks.size());
  h.z_range = {z_stream.sym_min, z_stream.sym_max};
  h.y_range = {y_stream.sym_min, y_stream.sym_max};
  h.eps = options.nrmse;
  h.tau = tau;
  h.delta = delta;
  h.basis_block = basis.block;
  h.order = options.order == eb::SelectionOrder::kMagnitude ? "magnitude" : "eigenvalue";
  h.y_bits_estimate = y_bits;
  h.z_bits_estimate = z_bits;
  a.hyper = z_stream.bytes;
  a.latent = y_stream.bytes;
  a.correction = eb::EncodeCorrection(payload, basis.d());
  h.hyper_len = a.hyper.size();
  h.latent_len = a.latent.size();
  h.corr_len = a.correction.size();
  if (stats) {
    stats->y_bits_estimate = y_bits;
    stats->z_bits_estimate = z_bits;
    stats->y_payload_bytes = y_stream.payload_bytes;
    stats->z_payload_bytes = z_stream.payload_bytes;
    stats->coefficients = coefficients;
    stats->seconds = Seconds(t0);
  }
  return a;
}

data::FieldSeries Decompress(const CompressedArtifact& artifact, const WeightStore& weights) {
  const ArtifactHeader& h = artifact.header;
  Require(h.version == kArtifactVersion, ErrorKind::kFormat, "unsupported artifact version");
  Require(h.model_hash == weights.ModelHash(), ErrorKind::kModel,
          "artifact model hash " + HexDigest(h.model_hash) + " does not match checkpoint " +
              HexDigest(weights.ModelHash()));
  Require(weights.basis.has_value() && weights.basis->Hash() == h.basis_hash, ErrorKind::kModel,
          "artifact basis hash does not match checkpoint");
  const eb::PcaBasis& basis = *weights.basis;
  Require(h.hs > 0 && h.ws > 0 && h.hs % 64 == 0 && h.ws % 64 == 0 && h.padded[0] % data::kBlockFrames == 0 &&
              h.padded[1] % h.hs == 0 && h.padded[2] % h.ws == 0 && h.norm.range > 0,
          ErrorKind::kFormat, "inconsistent artifact geometry");
  const Model model = weights.ToModel();
  const Layout layout(model.config(), h.hs, h.ws);
  const data::Dims grid = Blocked(h.padded, h.hs, h.ws);
  const int64_t num_blocks = grid[0] * grid[1] * grid[2];
  Require(num_blocks == h.num_blocks, ErrorKind::kFormat, "block count disagrees with geometry");

  PriorTables prior_tables(model, layout);
  size_t off = 0;
  const std::vector<int32_t> z_syms = entropy::ReadCodedStream(
      artifact.hyper, off, [&](size_t i, int32_t lo, int32_t hi) { return prior_tables(i, lo, hi); });
  Require(off == artifact.hyper.size(), ErrorKind::kCoding, "trailing bytes in hyper-latent section");
  Require(static_cast<int64_t>(z_syms.size()) == num_blocks * layout.slices * layout.z_per_slice, ErrorKind::kCoding,
          "hyper-latent symbol count disagrees with geometry");

  std::vector<double> mu, sigma;
  mu.reserve(num_blocks * layout.slices * layout.y_per_slice);
  sigma.reserve(mu.capacity());
  for (int64_t k = 0; k < num_blocks * layout.slices; ++k) {
    Tensor z_q(layout.z_shape);
    for (int64_t i = 0; i < layout.z_per_slice; ++i) z_q[i] = z_syms[k * layout.z_per_slice + i];
    const GaussianParams gp = model.HyperDecode(z_q);
    mu.insert(mu.end(), gp.mu.values().begin(), gp.mu.values().end());
    sigma.insert(sigma.end(), gp.sigma.values().begin(), gp.sigma.values().end());
  }
  off = 0;
  const std::vector<int32_t> y_syms = entropy::ReadCodedStream(
      artifact.latent, off, [&](size_t i, int32_t lo, int32_t hi) {
        Require(i < mu.size(), ErrorKind::kCoding, "latent symbol count disagrees with geometry");
        return entropy::BuildGaussianCdfTable(mu[i], sigma[i], lo, hi);
      });
  Require(off == artifact.latent.size(), ErrorKind::kCoding, "trailing bytes in latent section");
  Require(y_syms.size() == mu.size(), ErrorKind::kCoding, "latent symbol count disagrees with geometry");

  std::vector<double> xr_phys(data::DimsNumel(h.padded));
  int64_t b = 0;
  for (int64_t t = 0; t < grid[0]; ++t)
    for (int64_t i = 0; i < grid[1]; ++i)
      for (int64_t j = 0; j < grid[2]; ++j, ++b) {
        std::vector<Tensor> slices;
        for (int64_t s = 0; s < layout.slices; ++s) {
          Tensor ys(layout.y_slice_shape);
          const int64_t base = (b * layout.slices + s) * layout.y_per_slice;
          for (int64_t k = 0; k < layout.y_per_slice; ++k) ys[k] = y_syms[base + k];
          slices.push_back(std::move(ys));
        }
        StoreReconstruction(model.Reconstruct(MergeTemporal(slices)),
                            {t * data::kBlockFrames, i * h.hs, j * h.ws}, h.padded, h.norm, xr_phys);
      }

  const eb::CorrectionPayload payload = eb::DecodeCorrection(artifact.correction, basis.d());
  Require(payload.basis_hash == h.basis_hash, ErrorKind::kModel, "correction basis hash mismatch");
  Require(payload.delta == h.delta, ErrorKind::kFormat, "correction step disagrees with header");
  Eigen::MatrixXd rb = eb::BlockVectors(xr_phys, h.padded, basis.block);
  Require(static_cast<int64_t>(payload.records.size()) == rb.cols(), ErrorKind::kFormat,
          "correction record count disagrees with geometry");
  for (int64_t c = 0; c < rb.cols(); ++c)
    rb.col(c) = eb::ApplyCorrection(rb.col(c), payload.records[c], basis, payload.delta, true);
  const std::vector<double> xg = eb::UnblockVectors(rb, h.padded, basis.block);

  data::FieldSeries padded;
  padded.manifest = h.manifest;
  padded.manifest.dims = h.padded;
  padded.values.assign(xg.begin(), xg.end());
  data::FieldSeries out = data::Unpad(padded, h.pad);
  Require(out.dims() == h.manifest.dims, ErrorKind::kFormat, "decoded dims disagree with manifest");
  out.manifest = h.manifest;
  return out;
}

double EvaluateNrmse(const data::FieldSeries& orig, const data::FieldSeries& recon) {
  Require(orig.dims() == recon.dims() && orig.values.size() == recon.values.size(), ErrorKind::kShape,
          "NRMSE inputs differ: " + data::DimsString(orig.dims()) + " vs " + data::DimsString(recon.dims()));
  Require(!orig.values.empty(), ErrorKind::kData, "empty field");
  const auto [lo, hi] = std::minmax_element(orig.values.begin(), orig.values.end());
  const double range = static_cast<double>(*hi) - static_cast<double>(*lo);
  Require(range > 0, ErrorKind::kData, "original field has zero range");
  double se = 0.0;
  for (size_t i = 0; i < orig.values.size(); ++i) {
    const double e = static_cast<double>(orig.values[i]) - static_cast<double>(recon.values[i]);
    se += e * e;
  }
  return std::sqrt(se / static_cast<double>(orig.values.size())) / range;
}

double CompressionRatio(int64_t elements, size_t artifact_bytes) {
  Require(artifact_bytes > 0, ErrorKind::kParameter, "empty artifact");
  return 4.0 * static_cast<double>(elements) / static_cast<double>(artifact_bytes);
}

nlohmann::json Report::ToJson() const {
  return {{"nrmse", nrmse},
          {"compression_ratio", compression_ratio},
          {"bits_per_voxel", bits_per_voxel},
          {"artifact_bytes", artifact_bytes},
          {"sections", {{"header", header_bytes}, {"hyper", hyper_bytes}, {"latent", latent_bytes},
                        {"correction", correction_bytes}}},
          {"timing", {{"compress_s", compress_seconds}, {"decompress_s", decompress_seconds}}}};
}

Report MakeReport(const data::FieldSeries& orig, const data::FieldSeries& recon,
                  std::span<const uint8_t> artifact_bytes) {
  Report r;
  r.nrmse = EvaluateNrmse(orig, recon);
  r.artifact_bytes = artifact_bytes.size();
  const int64_t n = data::DimsNumel(orig.dims());
  r.compression_ratio = CompressionRatio(n, artifact_bytes.size());
  r.bits_per_voxel = 8.0 * static_cast<double>(artifact_bytes.size()) / static_cast<double>(n);
  const nlohmann::json info = Inspect(artifact_bytes);
  r.header_bytes = info["sections"]["header"].get<size_t>();
  r.hyper_bytes = info["sections"]["hyper"].get<size_t>();
  r.latent_bytes = info["sections"]["latent"].get<size_t>();
  r.correction_bytes = info["sections"]["correction"].get<size_t>();
  return r;
}

std::vector<RdRow> RdCurve(const WeightStore& weights, const data::FieldSeries& fs, const std::vector<double>& eps_list,
                           const std::vector<int64_t>& blocks, const std::string& label) {
  Require(!eps_list.empty() && !blocks.empty(), ErrorKind::kParameter, "empty sweep");
  std::vector<RdRow> rows;
  for (int64_t block : blocks)
    for (double eps : eps_list) {
      CompressOptions opt;
      opt.nrmse = eps;
      opt.hs = opt.ws = block;
      const std::vector<uint8_t> bytes = SerializeArtifact(Compress(fs, weights, opt));
      const data::FieldSeries recon = Decompress(ParseArtifact(bytes), weights);
      const Report r = MakeReport(fs, recon, bytes);
      rows.push_back({label, block, eps, r.compression_ratio, r.nrmse, r.bits_per_voxel});
    }
  return rows;
}

std::string RdCsv(const std::vector<RdRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "label,block,eps,compression_ratio,nrmse,bits_per_voxel\n";
  for (const auto& r : rows)
    os << r.label << "," << r.block << "," << r.eps << "," << r.compression_ratio << "," << r.nrmse << ","
       << r.bits_per_voxel << "\n";
  return os.str();
}

nlohmann::json Inspect(std::span<const uint8_t> bytes) {
  const CompressedArtifact a = ParseArtifact(bytes);
  uint32_t head_len;
  std::memcpy(&head_len, bytes.data() + 6, 4);
  const size_t header = 4 + 2 + 4 + head_len;
  return {{"header", ToJson(a.header)},
          {"total_bytes", bytes.size()},
          {"sections", {{"header", header},
                        {"hyper", 4 + a.hyper.size()},
                        {"latent", 4 + a.latent.size()},
                        {"correction", 4 + a.correction.size()},
                        {"checksum", 4}}}};
}

}  // namespace fmsc::codec
