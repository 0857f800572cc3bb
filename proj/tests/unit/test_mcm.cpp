#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "test_support.hpp"
#include "tinylic/error.hpp"
#include "tinylic/mcm.hpp"

using namespace tinylic;
using tinylic::testing::random_tensor;

namespace {

struct Case {
  McmWeights w;
  Tensor y;
  Tensor psi;
};

Case make_case(std::uint64_t seed, int h, int w, double amp = 0.3) {
  const NetworkConfig cfg = NetworkConfig::tiny();
  Case c{McmWeights::from_store(seeded_init(cfg, seed, {amp}), cfg), {}, {}};
  std::mt19937_64 rng(seed * 7919 + 1);
  c.y = random_tensor(rng, cfg.latent_channels(), h, w, -6.0f, 6.0f);
  c.psi = random_tensor(rng, cfg.prior_channels, h, w, -2.0f, 2.0f);
  return c;
}

using ParamLog = std::map<std::pair<int, int>, GaussianParams>;

McmObserver recorder(ParamLog& log) {
  return [&log](int stage, int step, const GaussianParams& p) { log[{stage, step}] = p; };
}

}  // namespace

TEST_CASE("cosine slice") {
  auto sizes = [](int c) {
    const SliceSpec s = cosine_slice(c);
    return std::vector<int>(s.sizes.begin(), s.sizes.end());
  };
  CHECK(sizes(320) == std::vector<int>{24, 69, 104, 123});
  CHECK(sizes(40) == std::vector<int>{3, 8, 13, 16});
  CHECK(sizes(20) == std::vector<int>{1, 4, 7, 8});
  for (int c = 14; c <= 400; ++c) {
    const SliceSpec s = cosine_slice(c);
    int total = 0;
    for (int g = 0; g < kStageCount; ++g) {
      CHECK(s.offsets[g] == total);
      total += s.sizes[g];
      if (g > 0) CHECK(s.sizes[g] >= s.sizes[g - 1]);
    }
    CHECK(total == c);
  }
}

TEST_CASE("linear slice") {
  auto sizes = [](int c) {
    const SliceSpec s = linear_slice(c);
    return std::vector<int>(s.sizes.begin(), s.sizes.end());
  };
  CHECK(sizes(320) == std::vector<int>{80, 80, 80, 80});
  CHECK(sizes(10) == std::vector<int>{2, 2, 3, 3});
  CHECK(sizes(4) == std::vector<int>{1, 1, 1, 1});
  CHECK_THROWS_AS(linear_slice(3), ConfigError);
  const std::vector<int> bad{3, 2, 4, 5};
  CHECK_THROWS_AS(SliceSpec::from_sizes(bad), ConfigError);
}

TEST_CASE("four-step masks") {
  const auto m = gcp_masks(2, 2, 4);
  REQUIRE(m.size() == 4);
  CHECK(m[0].at(0, 0));
  CHECK(m[1].at(1, 1));
  CHECK(m[2].at(0, 1));
  CHECK(m[3].at(1, 0));
  for (const auto& s : m) CHECK(s.count() == 1);

  const auto big = gcp_masks(4, 4, 4);
  for (const auto& s : big) CHECK(s.count() == 4);
  for (int h = 0; h < 4; ++h)
    for (int w = 0; w < 4; ++w) {
      int hits = 0;
      for (const auto& s : big) hits += s.at(h, w);
      CHECK(hits == 1);
    }
}

TEST_CASE("two-step masks and the complementary swap") {
  const auto plain = gcp_masks(4, 6, 2);
  const auto comp = gcp_masks(4, 6, 2, true);
  REQUIRE(plain.size() == 2);
  CHECK(plain[0] == comp[1]);
  CHECK(plain[1] == comp[0]);
  CHECK(plain[0].at(0, 0));
  CHECK(plain[0].count() + plain[1].count() == 24);
  CHECK(gcp_masks(4, 6, 1)[0].count() == 24);
  CHECK_THROWS_AS(gcp_masks(3, 4, 2), ConfigError);
  CHECK_THROWS_AS(gcp_masks(4, 4, 3), ConfigError);
}

TEST_CASE("every schedule partitions each stage and totals nine passes") {
  for (int h = 2; h <= 16; h += 2)
    for (int w = 2; w <= 12; w += 2) {
      const GcpSchedule s = GcpSchedule::make(h, w);
      CHECK(s.pass_count() == 9);
      for (int st = 0; st < kStageCount; ++st) {
        const auto& steps = s.stages[static_cast<std::size_t>(st)];
        CHECK(s.available(st, 0).count() == 0);
        int total = 0;
        for (const auto& m : steps) total += m.count();
        CHECK(total == h * w);
        CHECK(s.available(st, static_cast<int>(steps.size()) - 1).count() == h * w - steps.back().count());
      }
    }
}

TEST_CASE("zero weights give unit-free params") {
  const NetworkConfig cfg = NetworkConfig::tiny();
  const McmWeights w = McmWeights::zeros(cfg);
  std::mt19937_64 rng(41);
  const Tensor psi = random_tensor(rng, cfg.prior_channels, 4, 4);
  const Tensor g(w.slice.sizes[0], 4, 4);
  const GaussianParams p = stage_entropy_params(0, psi, {}, g, w);
  const float softplus0 = static_cast<float>(std::log(2.0));
  for (float v : p.mu.data()) CHECK(v == 0.0f);
  for (float v : p.sigma.data()) CHECK(v == doctest::Approx(softplus0));
}

TEST_CASE("stage 1 step 0 depends only on psi") {
  Case c = make_case(42, 4, 4);
  const auto p0 = one_shot_stage_params(0, c.psi, c.y, c.w)[0];
  Tensor other = c.y;
  for (float& v : other.data()) v = -v + 1.0f;
  CHECK(one_shot_stage_params(0, c.psi, other, c.w)[0].mu == p0.mu);
}

TEST_CASE("encode, decode and one-shot parameters are bit-identical") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Case c = make_case(seed, 4 + 2 * static_cast<int>(seed % 3), 6);
    ParamLog enc_log, dec_log;
    const McmEncoded e = mcm_encode(c.y, c.psi, c.w, recorder(enc_log));
    McmDecodeStats stats;
    const Tensor y_hat = mcm_decode(e.segments, c.psi, c.w, &stats, recorder(dec_log));
    CHECK(y_hat == e.y_hat);
    CHECK(stats.passes == 9);
    REQUIRE(enc_log.size() == 9);
    REQUIRE(dec_log.size() == 9);
    for (const auto& [key, p] : enc_log) {
      CHECK(p.mu == dec_log[key].mu);
      CHECK(p.sigma == dec_log[key].sigma);
    }
    for (int s = 0; s < kStageCount; ++s) {
      const auto shot = one_shot_stage_params(s, c.psi, e.y_hat, c.w);
      for (std::size_t k = 0; k < shot.size(); ++k) {
        CHECK(shot[k].mu == enc_log[{s, static_cast<int>(k)}].mu);
        CHECK(shot[k].sigma == enc_log[{s, static_cast<int>(k)}].sigma);
      }
    }
  }
}

TEST_CASE("y_hat is a mixed quantization of y") {
  Case c = make_case(9, 6, 4);
  ParamLog log;
  const McmEncoded e = mcm_encode(c.y, c.psi, c.w, recorder(log));
  for (float v : e.y_hat.data()) CHECK(std::isfinite(v));
  for (std::size_t i = 0; i < c.y.size(); ++i) CHECK(std::abs(e.y_hat.data()[i] - c.y.data()[i]) <= 0.5f + 1e-4f);
}

TEST_CASE("zero latents with zero weights") {
  const NetworkConfig cfg = NetworkConfig::tiny();
  const McmWeights w = McmWeights::zeros(cfg);
  const Tensor y(cfg.latent_channels(), 8, 8);
  const Tensor psi(cfg.prior_channels, 8, 8);
  const McmEncoded e = mcm_encode(y, psi, w);
  for (int s = 0; s < kStageCount; ++s) {
    const double p0 = cdf_probability(ScaleTable::instance().cdf_for(std::log(2.0)), kMaxSymbol);
    const double bound = static_cast<double>(e.symbol_counts[s]) * -std::log2(p0) / 8.0 + 32.0;
    CHECK(static_cast<double>(e.segments[s].size()) <= bound);
  }
  const Tensor y_hat = mcm_decode(e.segments, psi, w);
  for (float v : y_hat.data()) CHECK(v == 0.0f);
}

TEST_CASE("rate estimate matches coded segments") {
  for (std::uint64_t seed = 11; seed < 15; ++seed) {
    Case c = make_case(seed, 8, 8);
    const McmEncoded e = mcm_encode(c.y, c.psi, c.w);
    for (int s = 0; s < kStageCount; ++s) {
      const double diff = 8.0 * static_cast<double>(e.segments[s].size()) - e.estimated_bits[s];
      CHECK(diff >= -1.0);
      CHECK(diff <= 256.0);
    }
  }
}

TEST_CASE("truncated later segment leaves the prefix decodable") {
  Case c = make_case(20, 8, 8);
  const McmEncoded e = mcm_encode(c.y, c.psi, c.w);
  auto segs = e.segments;
  segs[2].resize(segs[2].size() / 2);
  CHECK_THROWS_AS(mcm_decode(segs, c.psi, c.w), DecodeError);
  const std::span<const std::vector<std::uint8_t>> prefix(segs.data(), 2);
  const Tensor part = progressive_decode(prefix, c.psi, c.w);
  const int n = c.w.slice.offsets[2];
  CHECK(slice_channels(part, 0, n) == slice_channels(e.y_hat, 0, n));

  auto extra = e.segments;
  extra[1].push_back(0x00);
  CHECK_THROWS_AS(mcm_decode(extra, c.psi, c.w), DecodeError);
}

TEST_CASE("progressive prefix law") {
  Case c = make_case(30, 6, 8);
  const McmEncoded e = mcm_encode(c.y, c.psi, c.w);
  const Tensor full = mcm_decode(e.segments, c.psi, c.w);
  for (int k = 1; k <= 4; ++k) {
    McmDecodeStats stats;
    const std::span<const std::vector<std::uint8_t>> prefix(e.segments.data(), static_cast<std::size_t>(k));
    const Tensor part = progressive_decode(prefix, c.psi, c.w, &stats);
    CHECK(stats.stages_decoded == k);
    for (int s = 0; s < kStageCount; ++s)
      CHECK(stats.bytes_consumed[s] == (s < k ? e.segments[s].size() : 0u));
    const int n = k == 4 ? c.w.slice.channels() : c.w.slice.offsets[k];
    CHECK(slice_channels(part, 0, n) == slice_channels(full, 0, n));
    if (k == 4) CHECK(part == full);
  }
  CHECK_THROWS_AS(progressive_decode({}, c.psi, c.w), ConfigError);
}

TEST_CASE("shape checks") {
  Case c = make_case(50, 4, 4);
  CHECK_THROWS_AS(mcm_encode(slice_channels(c.y, 0, 10), c.psi, c.w), ShapeError);
  CHECK_THROWS_AS(mcm_encode(c.y, slice_channels(c.psi, 0, 10), c.w), ShapeError);
}
