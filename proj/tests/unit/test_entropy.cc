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

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include "fmsc/entropy.h"
#include "fmsc/nn/params.h"
#include "fmsc/random.h"
#include "grad_check.h"
#include "test_util.h"

namespace fmsc::entropy {
namespace {

// Simpson integral of the normal density over [a, b].
double NormalMassSimpson(double a, double b, double mu, double sigma) {
  const int n = 20000;
  const double h = (b - a) / n;
  auto pdf = [&](double x) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  };
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(a + i * h);
  return s * h / 3.0;
}

TEST_CASE("quantize_round") {
  const std::vector<double> v = {0.4, -0.4, 0.5, -1.5, 3.0, -7.0, 2.5, -0.5};
  CHECK(QuantizeRound(v) == std::vector<int32_t>{0, 0, 1, -2, 3, -7, 3, -1});
  const std::vector<double> bad = {1.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK_FMSC_ERROR(QuantizeRound(bad), ErrorKind::kData);
}

TEST_CASE("add_uniform_noise") {
  std::vector<double> v(1000000, 0.0);
  const auto a = AddUniformNoise(v, 3);
  CHECK(AddUniformNoise(v, 3) == a);
  CHECK(AddUniformNoise(v, 4) != a);
  double mean = 0.0;
  for (double x : a) {
    CHECK_UNARY(std::abs(x) < 0.5);
    mean += x;
  }
  CHECK(std::abs(mean / static_cast<double>(a.size())) < 1e-3);
}

TEST_CASE("gaussian likelihood bits against a quadrature oracle") {
  const std::vector<double> y = {0.0, 0.0}, mu = {0.0, 0.0}, sigma = {0.3, 10.0};
  const BitsResult r = GaussianLikelihoodBits(y, mu, sigma);
  CHECK(r.bits[0] == doctest::Approx(0.145).epsilon(2e-3));
  CHECK(r.bits[1] == doctest::Approx(4.648).epsilon(2e-4));
  CHECK(r.bits[0] == doctest::Approx(-std::log2(NormalMassSimpson(-0.5, 0.5, 0.0, 0.3))).epsilon(1e-9));
  CHECK(r.bits[1] == doctest::Approx(-std::log2(NormalMassSimpson(-0.5, 0.5, 0.0, 10.0))).epsilon(1e-9));
  CHECK(r.total == doctest::Approx(r.bits[0] + r.bits[1]));

  CHECK_FMSC_ERROR(GaussianLikelihoodBits(y, mu, std::vector<double>{1e-7, 1.0}), ErrorKind::kParameter);
}

TEST_CASE("gaussian likelihood shift invariance and floor") {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const double y = std::round(rng.Uniform(-20, 20)), mu = rng.Uniform(-20, 20), s = rng.Uniform(0.01, 8);
    const double k = std::round(rng.Uniform(-50, 50));
    const std::vector<double> a{y}, b{y + k}, ma{mu}, mb{mu + k}, ss{s};
    CHECK(GaussianLikelihoodBits(a, ma, ss).total ==
          doctest::Approx(GaussianLikelihoodBits(b, mb, ss).total).epsilon(1e-12));
  }
  // Far tail: floored at 2^-24.
  const std::vector<double> far{1000.0}, zero{0.0}, one{1.0};
  CHECK(GaussianLikelihoodBits(far, zero, one).total == doctest::Approx(24.0));
}

TEST_CASE("bits do not increase as sigma shrinks around the mean") {
  const std::vector<double> y{3.0}, mu{3.2};
  double prev = std::numeric_limits<double>::infinity();
  for (double s = 5.0; s >= 1e-6; s *= 0.7) {
    const double b = GaussianLikelihoodBits(y, mu, std::vector<double>{s}).total;
    CHECK(b <= prev + 1e-15);
    prev = b;
  }
  CHECK(prev < 1e-9);
}

TEST_CASE("gaussian likelihood gradient") {
  Rng rng(3);
  std::vector<double> y(50), mu(50), sigma(50);
  for (size_t i = 0; i < 50; ++i) {
    y[i] = rng.Uniform(-4, 4);
    mu[i] = rng.Uniform(-4, 4);
    sigma[i] = rng.Uniform(0.2, 3.0);
  }
  std::vector<double> dy(50, 0.0), dmu(50, 0.0), ds(50, 0.0);
  GaussianLikelihoodBitsBackward(y, mu, sigma, 1.0, dy, dmu, ds);
  const double h = 1e-6;
  auto total = [&] { return GaussianLikelihoodBits(y, mu, sigma).total; };
  double worst = 0.0;
  for (size_t i = 0; i < 50; ++i) {
    for (auto [vec, grad] : {std::pair{&y, &dy}, std::pair{&mu, &dmu}, std::pair{&sigma, &ds}}) {
      const double saved = (*vec)[i];
      (*vec)[i] = saved + h;
      const double up = total();
      (*vec)[i] = saved - h;
      const double down = total();
      (*vec)[i] = saved;
      worst = std::max(worst, testing::RelErr((*grad)[i], (up - down) / (2 * h)));
    }
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("estimate_rate") {
  CHECK(EstimateRate(0, 0) == 0);
  CHECK(EstimateRate(1000, 24) == 1024);
  CHECK_FMSC_ERROR(EstimateRate(-1, 0), ErrorKind::kParameter);
}

TEST_CASE("gaussian cdf table") {
  const CdfTable t = BuildGaussianCdfTable(0.0, 0.3, -4, 4);
  CHECK(t.count() == 9);
  CHECK(t.cum.front() == 0);
  CHECK(t.cum.back() == kProbabilityTotal);
  CHECK(t.Frequency(0) >= 59245 - 2);
  for (int32_t s = -4; s <= 4; ++s) CHECK(t.Frequency(s) >= 1);
  for (size_t i = 1; i < t.cum.size(); ++i) CHECK(t.cum[i] > t.cum[i - 1]);

  const CdfTable wide = BuildGaussianCdfTable(3.0, 200.0, -1000, 1000);
  for (size_t i = 1; i < wide.cum.size(); ++i) CHECK(wide.cum[i] > wide.cum[i - 1]);
  CHECK(wide.cum.back() == kProbabilityTotal);

  CHECK_FMSC_ERROR(BuildGaussianCdfTable(0.0, 1.0, -20000, 20000), ErrorKind::kTable);
  CHECK_FMSC_ERROR(BuildGaussianCdfTable(0.0, 1.0, 3, 2), ErrorKind::kTable);
}

TEST_CASE("range coder round trip, determinism and bounds") {
  SUBCASE("empty input") {
    const std::vector<int32_t> none;
    const CdfTable t = UniformTable(4);
    const auto bytes = RangeEncode(none, std::span<const CdfTable>(&t, 1));
    CHECK(bytes.size() <= 16);
    CHECK(RangeDecode(bytes, std::span<const CdfTable>(&t, 1), 0).empty());
  }
  SUBCASE("randomized streams with per-symbol tables") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      const size_t n = 1 + rng.Below(3000);
      std::vector<CdfTable> tables;
      std::vector<int32_t> syms;
      double ideal = 0.0;
      for (size_t i = 0; i < n; ++i) {
        const double mu = rng.Uniform(-10, 10), sigma = rng.Uniform(0.05, 20);
        tables.push_back(BuildGaussianCdfTable(mu, sigma, -30, 30));
        syms.push_back(static_cast<int32_t>(rng.Below(61)) - 30);
        ideal += tables.back().Bits(syms.back());
      }
      const auto bytes = RangeEncode(syms, tables);
      CHECK(RangeEncode(syms, tables) == bytes);
      CHECK(static_cast<double>(bytes.size()) <= ideal / 8.0 + 32.0);
      CHECK(RangeDecode(bytes, tables, n) == syms);
    }
  }
  SUBCASE("out-of-range symbol and truncation") {
    const CdfTable t = BuildGaussianCdfTable(0.0, 1.0, -3, 3);
    const std::vector<int32_t> bad = {4};
    CHECK_FMSC_ERROR(RangeEncode(bad, std::span<const CdfTable>(&t, 1)), ErrorKind::kCoding);
    std::vector<int32_t> syms(2000);
    Rng rng(5);
    for (auto& s : syms) s = static_cast<int32_t>(rng.Below(7)) - 3;
    auto bytes = RangeEncode(syms, std::span<const CdfTable>(&t, 1));
    bytes.resize(bytes.size() / 2);
    CHECK_FMSC_ERROR(RangeDecode(bytes, std::span<const CdfTable>(&t, 1), syms.size()), ErrorKind::kCoding);
  }
}

TEST_CASE("coding efficiency near the table entropy") {
  const CdfTable t = BuildGaussianCdfTable(0.3, 2.5, -16, 16);
  // Draw symbols from the table's own distribution.
  Rng rng(6);
  std::vector<int32_t> syms(100000);
  for (auto& s : syms) {
    const uint32_t u = static_cast<uint32_t>(rng.Below(kProbabilityTotal));
    int32_t k = 0;
    while (t.cum[static_cast<size_t>(k) + 1] <= u) ++k;
    s = t.sym_min + k;
  }
  const auto bytes = RangeEncode(syms, std::span<const CdfTable>(&t, 1));
  const double rate = 8.0 * static_cast<double>(bytes.size()) / static_cast<double>(syms.size());
  CHECK(std::abs(rate - TableEntropy(t)) < 0.03);
}

TEST_CASE("coded stream framing") {
  const std::vector<int32_t> syms = {-2, 5, 0, 3};
  auto table_for = [](size_t, int32_t lo, int32_t hi) { return BuildGaussianCdfTable(0.0, 3.0, lo, hi); };
  const CodedStream s = WriteCodedStream(syms, table_for);
  CHECK(s.sym_min == -2);
  CHECK(s.sym_max == 5);
  uint32_t n, len;
  int32_t lo, hi;
  std::memcpy(&n, s.bytes.data(), 4);
  std::memcpy(&lo, s.bytes.data() + 4, 4);
  std::memcpy(&hi, s.bytes.data() + 8, 4);
  std::memcpy(&len, s.bytes.data() + 12, 4);
  CHECK(n == 4);
  CHECK(lo == -2);
  CHECK(hi == 5);
  CHECK(len == s.payload_bytes);
  CHECK(s.bytes.size() == 16 + len);
  size_t offset = 0;
  CHECK(ReadCodedStream(s.bytes, offset, table_for) == syms);
  CHECK(offset == s.bytes.size());
}

TEST_CASE("factorized prior") {
  Rng rng(7);
  nn::ParamSet ps;
  FactorizedPrior prior(ps, "prior", 3, rng);
  CHECK(ps.ScalarCount() == 3u * 43u);
  for (int c = 0; c < 3; ++c) {
    double total = 0.0, prev_cdf = 0.0;
    for (int k = -200; k <= 200; ++k) {
      const double p = prior.Mass(ps, c, k);
      CHECK(p >= 0.0);
      total += p;
      const double cdf = prior.Cdf(ps, c, k + 0.5);
      CHECK(cdf >= prev_cdf);
      prev_cdf = cdf;
    }
    CHECK(std::abs(total - 1.0) < 1e-4);
  }
  Tensor z({3, 61, 1});
  for (int64_t c = 0; c < 3; ++c)
    for (int64_t i = 0; i < 61; ++i) z[c * 61 + i] = static_cast<double>(i - 30);
  const BitsResult b = prior.Bits(ps, z);
  for (double v : b.bits) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
  const CdfTable t = prior.Table(ps, 1, -30, 30);
  CHECK(t.cum.back() == kProbabilityTotal);
  for (size_t i = 1; i < t.cum.size(); ++i) CHECK(t.cum[i] > t.cum[i - 1]);
}

TEST_CASE("factorized prior gradient") {
  Rng rng(8);
  nn::ParamSet ps;
  FactorizedPrior prior(ps, "prior", 2, rng);
  Tensor z = testing::RandomTensor({2, 5, 5}, 9, 3.0);
  ps.ZeroGrad();
  Tensor dz(z.shape());
  prior.BitsBackward(ps, z, 1.0, dz);
  auto loss = [&] { return prior.Bits(ps, z).total; };
  const auto rp = testing::CheckParamGrads(ps, loss, 10, 11, 1e-6);
  const auto ri = testing::CheckInputGrads(z, dz, loss, 30, 12, 1e-4);
  INFO(rp.where << " / " << ri.where);
  CHECK(rp.worst <= 1e-5);
  CHECK(ri.worst <= 1e-5);
}

}  // namespace
}  // namespace fmsc::entropy
