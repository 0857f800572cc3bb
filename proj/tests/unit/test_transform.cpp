#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "tinylic/codec.hpp"
#include "tinylic/error.hpp"
#include "tinylic/transform.hpp"

using namespace tinylic;
using tinylic::testing::random_tensor;

namespace {

std::size_t transform_param_count(const NetworkConfig& c) {
  std::vector<ParamDemand> d;
  append_transform_demands(c, d);
  std::size_t n = 0;
  for (const auto& p : d) {
    std::size_t e = 1;
    for (auto v : p.dims) e *= v;
    n += e;
  }
  return n;
}

}  // namespace

TEST_CASE("tiny profile shape chain") {
  const NetworkConfig cfg = NetworkConfig::tiny();
  const WeightStore store = seeded_init(cfg, 3);
  const TransformWeights w = TransformWeights::from_store(store, cfg);
  std::mt19937_64 rng(1);
  const Tensor x = random_tensor(rng, 3, 64, 64, 0.0f, 1.0f);
  const Tensor y = analysis_main(x, w);
  CHECK(y.channels() == 20);
  CHECK(y.height() == 4);
  CHECK(y.width() == 4);
  const Tensor z = analysis_hyper(y, w);
  CHECK(z.channels() == 12);
  CHECK(z.height() == 1);
  CHECK(z.width() == 1);
  const Tensor psi = synthesis_hyper(z, w);
  CHECK(psi.channels() == 2 * cfg.latent_channels());
  CHECK(psi.height() == y.height());
  CHECK(psi.width() == y.width());
  const Tensor xr = synthesis_main(y, w);
  CHECK(xr.same_shape(x));
  for (float v : xr.data()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("psi matches y spatially for several sizes") {
  const NetworkConfig cfg = NetworkConfig::tiny();
  const TransformWeights w = TransformWeights::from_store(seeded_init(cfg, 4), cfg);
  std::mt19937_64 rng(2);
  for (auto [h, wd] : {std::pair{64, 128}, std::pair{128, 64}, std::pair{192, 128}}) {
    const Tensor y = analysis_main(random_tensor(rng, 3, h, wd, 0.0f, 1.0f), w);
    const Tensor psi = synthesis_hyper(analysis_hyper(y, w), w);
    CHECK(psi.height() == y.height());
    CHECK(psi.width() == y.width());
  }
}

TEST_CASE("analysis rejects dims that are not multiples of 64") {
  const NetworkConfig cfg = NetworkConfig::tiny();
  const TransformWeights w = TransformWeights::zeros(cfg);
  CHECK_THROWS_AS(analysis_main(Tensor(3, 64, 96), w), DimensionError);
  CHECK_THROWS_AS(analysis_main(Tensor(3, 32, 64), w), DimensionError);
}

TEST_CASE("zero weights give zero latents and a black image") {
  const NetworkConfig cfg = NetworkConfig::tiny();
  const TransformWeights w = TransformWeights::zeros(cfg);
  std::mt19937_64 rng(3);
  const Tensor y = analysis_main(random_tensor(rng, 3, 64, 128, 0.0f, 1.0f), w);
  CHECK(y.channels() == 20);
  for (float v : y.data()) CHECK(v == 0.0f);
  const Tensor z = analysis_hyper(Tensor(20, 4, 8), w);
  for (float v : z.data()) CHECK(v == 0.0f);
  const Tensor x = synthesis_main(Tensor(20, 4, 8), w);
  CHECK(x.height() == 64);
  CHECK(x.width() == 128);
  for (float v : x.data()) CHECK(v == 0.0f);
}

TEST_CASE("default profile instantiates and runs") {
  const NetworkConfig cfg = NetworkConfig::default_profile();
  CHECK(cfg.main_depths == std::array<int, 4>{2, 2, 6, 2});
  CHECK(cfg.main_heads == std::array<int, 4>{8, 12, 16, 20});
  const WeightStore store = seeded_init(cfg, 1);
  const TransformWeights w = TransformWeights::from_store(store, cfg);
  std::mt19937_64 rng(4);
  const Tensor x = random_tensor(rng, 3, 64, 64, 0.0f, 1.0f);
  const Tensor y = analysis_main(x, w);
  CHECK(y.channels() == 320);
  CHECK(y.height() == 4);
  const Tensor z = analysis_hyper(y, w);
  CHECK(z.channels() == 192);
  const Tensor psi = synthesis_hyper(z, w);
  CHECK(psi.channels() == 384);
  CHECK(psi.height() == 4);
  CHECK(synthesis_main(y, w).same_shape(x));
}

TEST_CASE("default profile transform parameter count") {
  // Closed form per layer, summed by hand outside the codebase.
  CHECK(transform_param_count(NetworkConfig::default_profile()) == 18475587u);
  CHECK(transform_param_count(NetworkConfig::tiny()) == 42379u);
}

TEST_CASE("outputs stay finite on adversarial inputs") {
  const NetworkConfig cfg = NetworkConfig::tiny();
  const TransformWeights w = TransformWeights::from_store(seeded_init(cfg, 5, {0.5}), cfg);
  std::mt19937_64 rng(5);
  for (float amp : {1.0f, 100.0f, 1e4f}) {
    const Tensor x = random_tensor(rng, 3, 64, 64, -amp, amp);
    const Tensor y = analysis_main(x, w);
    for (float v : y.data()) REQUIRE(std::isfinite(v));
    const Tensor psi = synthesis_hyper(analysis_hyper(y, w), w);
    for (float v : psi.data()) REQUIRE(std::isfinite(v));
    for (float v : synthesis_main(y, w).data()) REQUIRE(std::isfinite(v));
  }
}

TEST_CASE("missing or misshapen parameters are reported by name") {
  const NetworkConfig cfg = NetworkConfig::tiny();
  const WeightStore full = seeded_init(cfg, 6);
  WeightStore partial(full.profile_text());
  for (const auto& [name, t] : full.tensors())
    if (name != "gs.stage3.rnab1.na.rpb") partial.add(name, t);
  try {
    TransformWeights::from_store(partial, cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("gs.stage3.rnab1.na.rpb") != std::string::npos);
  }
}
