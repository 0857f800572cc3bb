#include <benchmark/benchmark.h>

#include <random>

#include "tinylic/codec.hpp"
#include "tinylic/nn.hpp"
#include "tinylic/range_coder.hpp"

using namespace tinylic;

namespace {

Tensor random_tensor(int c, int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Tensor t(c, h, w);
  for (float& v : t.data()) v = u(rng);
  return t;
}

void fill(std::span<float> v, std::uint64_t seed, float scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-scale, scale);
  for (float& x : v) x = u(rng);
}

const Model& tiny() {
  static const Model m = Model::from_store(seeded_init(NetworkConfig::tiny(), 1, {0.3}));
  return m;
}

}  // namespace

// args: in channels, out channels, spatial side, kernel
void BM_Conv2d(benchmark::State& state) {
  const int cin = static_cast<int>(state.range(0));
  const int cout = static_cast<int>(state.range(1));
  const int side = static_cast<int>(state.range(2));
  const int k = static_cast<int>(state.range(3));
  const Tensor x = random_tensor(cin, side, side, 1);
  ConvKernel kern = ConvKernel::make(cout, cin, k, 2);
  fill(kern.weights, 2, 0.05f);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, kern));
  const double macs = double(cout) * cin * k * k * (side / 2) * (side / 2);
  state.counters["MAC/s"] = benchmark::Counter(macs, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv2d)->Args({3, 128, 128, 5})->Args({128, 192, 64, 3})->Args({256, 320, 32, 3})->Unit(benchmark::kMillisecond);

void BM_TConv2d(benchmark::State& state) {
  const int cin = static_cast<int>(state.range(0));
  const int cout = static_cast<int>(state.range(1));
  const int side = static_cast<int>(state.range(2));
  const Tensor x = random_tensor(cin, side, side, 3);
  ConvKernel kern = ConvKernel::make(cout, cin, 3, 2);
  fill(kern.weights, 4, 0.05f);
  for (auto _ : state) benchmark::DoNotOptimize(tconv2d(x, kern));
}
BENCHMARK(BM_TConv2d)->Args({320, 256, 16})->Args({192, 128, 32})->Unit(benchmark::kMillisecond);

// args: channels, heads, window, spatial side
void BM_NeighborhoodAttention(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int heads = static_cast<int>(state.range(1));
  const int window = static_cast<int>(state.range(2));
  const int side = static_cast<int>(state.range(3));
  NaParams p = NaParams::make(c, heads, window);
  std::uint64_t seed = 5;
  for (Linear* fc : {&p.q, &p.k, &p.v, &p.proj}) fill(fc->weight, seed++, 0.1f);
  fill(p.rel_bias, seed, 0.5f);
  const Tensor x = random_tensor(c, side, side, 9);
  for (auto _ : state) benchmark::DoNotOptimize(neighborhood_attention(x, p));
  state.counters["tokens/s"] = benchmark::Counter(double(side) * side, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_NeighborhoodAttention)->Args({128, 8, 7, 64})->Args({320, 20, 7, 16})->Args({192, 12, 3, 16})->Unit(benchmark::kMillisecond);

void BM_RangeEncode(benchmark::State& state) {
  const ScaleTable& table = ScaleTable::instance();
  std::mt19937_64 rng(11);
  const int n = 1 << 16;
  std::vector<int> idx(n);
  std::vector<std::span<const std::uint32_t>> cdfs(n);
  for (int i = 0; i < n; ++i) {
    cdfs[static_cast<std::size_t>(i)] = table.cdf(static_cast<int>(rng() % 24));
    idx[static_cast<std::size_t>(i)] = kMaxSymbol + static_cast<int>(rng() % 5) - 2;
  }
  for (auto _ : state) benchmark::DoNotOptimize(encode_stream(idx, cdfs));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_RangeEncode);

void BM_RangeDecode(benchmark::State& state) {
  const ScaleTable& table = ScaleTable::instance();
  std::mt19937_64 rng(12);
  const int n = 1 << 16;
  std::vector<int> idx(n);
  std::vector<std::span<const std::uint32_t>> cdfs(n);
  for (int i = 0; i < n; ++i) {
    cdfs[static_cast<std::size_t>(i)] = table.cdf(static_cast<int>(rng() % 24));
    idx[static_cast<std::size_t>(i)] = kMaxSymbol + static_cast<int>(rng() % 5) - 2;
  }
  const auto bytes = encode_stream(idx, cdfs);
  for (auto _ : state) {
    RangeDecoder dec(bytes);
    int sum = 0;
    for (int i = 0; i < n; ++i) sum += dec.decode_symbol(cdfs[static_cast<std::size_t>(i)]);
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_RangeDecode);

// arg: image side
void BM_McmEncode(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  EncodeTrace et;
  encode_image(synthetic_image(side, side, 1), tiny(), 3, &et);
  for (auto _ : state) benchmark::DoNotOptimize(mcm_encode(et.y, et.psi, tiny().mcm));
}
BENCHMARK(BM_McmEncode)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_McmDecode(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  EncodeTrace et;
  const Container c = encode_image(synthetic_image(side, side, 1), tiny(), 3, &et);
  for (auto _ : state) benchmark::DoNotOptimize(mcm_decode(c.stage_segments(), et.psi, tiny().mcm));
}
BENCHMARK(BM_McmDecode)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_EncodeImage(benchmark::State& state) {
  const ImageBuffer img = synthetic_image(256, 256, 2);
  for (auto _ : state) benchmark::DoNotOptimize(encode_image(img, tiny(), 3));
}
BENCHMARK(BM_EncodeImage)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
