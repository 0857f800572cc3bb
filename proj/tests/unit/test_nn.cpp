#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "test_support.hpp"
#include "tinylic/error.hpp"
#include "tinylic/nn.hpp"

using namespace tinylic;
using tinylic::testing::fill_random;
using tinylic::testing::max_abs_diff;
using tinylic::testing::random_tensor;

namespace {

void set_identity(Linear& fc) {
  std::fill(fc.weight.begin(), fc.weight.end(), 0.0f);
  std::fill(fc.bias.begin(), fc.bias.end(), 0.0f);
  for (int i = 0; i < std::min(fc.out_features, fc.in_features); ++i)
    fc.weight[static_cast<std::size_t>(i) * fc.in_features + i] = 1.0f;
}

NaParams random_na(std::mt19937_64& rng, int c, int heads, int window) {
  NaParams p = NaParams::make(c, heads, window);
  for (Linear* fc : {&p.q, &p.k, &p.v, &p.proj}) {
    fill_random(rng, fc->weight, 0.8f);
    fill_random(rng, fc->bias, 0.2f);
  }
  fill_random(rng, p.rel_bias, 1.0f);
  return p;
}

}  // namespace

TEST_CASE("neighborhood_span") {
  CHECK(neighborhood_span(0, 10, 3).start == 0);
  CHECK(neighborhood_span(5, 10, 3).start == 4);
  CHECK(neighborhood_span(9, 10, 3).start == 7);
  CHECK(neighborhood_span(1, 2, 7).len == 2);
  for (int n = 1; n < 12; ++n)
    for (int w : {3, 5, 7})
      for (int p = 0; p < n; ++p) {
        const WindowSpan s = neighborhood_span(p, n, w);
        CHECK(s.start >= 0);
        CHECK(s.start + s.len <= n);
        CHECK(s.len == std::min(n, w));
        CHECK(p >= s.start);
        CHECK(p < s.start + s.len);
      }
}

TEST_CASE("constant V gives constant output") {
  std::mt19937_64 rng(21);
  NaParams p = random_na(rng, 4, 2, 3);
  std::fill(p.v.weight.begin(), p.v.weight.end(), 0.0f);
  p.v.bias = {0.5f, -1.25f, 2.0f, 0.75f};
  set_identity(p.proj);
  const Tensor x = random_tensor(rng, 4, 6, 5, -3.0f, 3.0f);
  const Tensor y = neighborhood_attention(x, p);
  for (int c = 0; c < 4; ++c)
    for (int h = 0; h < 6; ++h)
      for (int w = 0; w < 5; ++w) CHECK(y(c, h, w) == doctest::Approx(p.v.bias[c]).epsilon(1e-6));
}

TEST_CASE("zero queries and bias give a moving average of V") {
  std::mt19937_64 rng(22);
  const int c = 2;
  NaParams p = NaParams::make(c, 1, 3);
  set_identity(p.v);
  set_identity(p.proj);
  fill_random(rng, p.k.weight);
  const Tensor x = random_tensor(rng, c, 7, 6);
  const Tensor y = neighborhood_attention(x, p);
  for (int ch = 0; ch < c; ++ch)
    for (int h = 0; h < 7; ++h)
      for (int w = 0; w < 6; ++w) {
        const int r0 = std::clamp(h - 1, 0, 7 - 3);
        const int c0 = std::clamp(w - 1, 0, 6 - 3);
        double s = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) s += x(ch, r0 + a, c0 + b);
        CHECK(std::abs(y(ch, h, w) - s / 9.0) < 1e-6);
      }
}

TEST_CASE("3x3 image matches exhaustive score enumeration") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int c = 2;
    const NaParams p = random_na(rng, c, 1, 3);
    const Tensor x = random_tensor(rng, c, 3, 3);
    const Tensor got = neighborhood_attention(x, p);

    // Project every position, score all 9x9 pairs, then mix.
    double q[9][2], k[9][2], v[9][2];
    for (int t = 0; t < 9; ++t)
      for (int o = 0; o < c; ++o) {
        q[t][o] = p.q.bias[o];
        k[t][o] = p.k.bias[o];
        v[t][o] = p.v.bias[o];
        for (int i = 0; i < c; ++i) {
          const double xi = x(i, t / 3, t % 3);
          q[t][o] += p.q.weight[o * c + i] * xi;
          k[t][o] += p.k.weight[o * c + i] * xi;
          v[t][o] += p.v.weight[o * c + i] * xi;
        }
      }
    double scores[9][9];
    for (int a = 0; a < 9; ++a)
      for (int b = 0; b < 9; ++b) {
        const int dy = b / 3 - a / 3;
        const int dx = b % 3 - a % 3;
        const double bias = p.rel_bias[static_cast<std::size_t>((dy + 2) * 5 + (dx + 2))];
        scores[a][b] = (q[a][0] * k[b][0] + q[a][1] * k[b][1] + bias) / std::sqrt(2.0);
      }
    Tensor want(c, 3, 3);
    for (int a = 0; a < 9; ++a) {
      double z = 0.0;
      for (int b = 0; b < 9; ++b) z += std::exp(scores[a][b]);
      double mixed[2] = {0, 0};
      for (int b = 0; b < 9; ++b)
        for (int j = 0; j < c; ++j) mixed[j] += std::exp(scores[a][b]) / z * v[b][j];
      for (int o = 0; o < c; ++o) {
        double s = p.proj.bias[o];
        for (int j = 0; j < c; ++j) s += p.proj.weight[o * c + j] * mixed[j];
        want(o, a / 3, a % 3) = static_cast<float>(s);
      }
    }
    CHECK(max_abs_diff(got.data(), want.data()) < 1e-5);
  }
}

TEST_CASE("attention output lies in the convex hull of V") {
  std::mt19937_64 rng(24);
  NaParams p = random_na(rng, 6, 3, 5);
  set_identity(p.proj);
  const Tensor x = random_tensor(rng, 6, 9, 8);
  const Tensor y = neighborhood_attention(x, p);
  const Matrix v = linear(to_tokens(x), p.v);
  for (int ch = 0; ch < 6; ++ch) {
    float lo = INFINITY, hi = -INFINITY;
    for (int t = 0; t < v.rows(); ++t) {
      lo = std::min(lo, v(t, ch));
      hi = std::max(hi, v(t, ch));
    }
    for (float o : y.plane(ch)) {
      CHECK(o >= lo - 1e-5f);
      CHECK(o <= hi + 1e-5f);
    }
  }
}

TEST_CASE("interior outputs are translation equivariant") {
  std::mt19937_64 rng(25);
  const NaParams p = random_na(rng, 4, 2, 3);
  const Tensor x = random_tensor(rng, 4, 10, 10);
  Tensor shifted(4, 10, 10);
  for (int c = 0; c < 4; ++c)
    for (int h = 0; h < 10; ++h)
      for (int w = 0; w < 10; ++w) shifted(c, h, w) = x(c, h, (w + 1) % 10);
  const Tensor a = neighborhood_attention(x, p);
  const Tensor b = neighborhood_attention(shifted, p);
  for (int c = 0; c < 4; ++c)
    for (int h = 0; h < 10; ++h)
      for (int w = 1; w < 8; ++w) CHECK(std::abs(b(c, h, w) - a(c, h, w + 1)) < 1e-6);
}

TEST_CASE("window larger than the image covers it entirely") {
  std::mt19937_64 rng(26);
  const NaParams p = random_na(rng, 4, 2, 7);
  const Tensor x = random_tensor(rng, 4, 2, 3);
  const Tensor y = neighborhood_attention(x, p);
  CHECK(y.same_shape(x));
  for (float v : y.data()) CHECK(std::isfinite(v));
}

TEST_CASE("rnab with zero output projections is the identity") {
  std::mt19937_64 rng(27);
  RnabParams p = RnabParams::make(8, 2, 3);
  p.na = random_na(rng, 8, 2, 3);
  std::fill(p.na.proj.weight.begin(), p.na.proj.weight.end(), 0.0f);
  std::fill(p.na.proj.bias.begin(), p.na.proj.bias.end(), 0.0f);
  fill_random(rng, p.mlp.fc1.weight);
  const Tensor x = random_tensor(rng, 8, 4, 4);
  const Tensor y = rnab_forward(x, p);
  CHECK(y.same_shape(x));
  CHECK(y == x);
}

TEST_CASE("rnab equals manual composition") {
  std::mt19937_64 rng(28);
  RnabParams p = RnabParams::make(4, 2, 3);
  p.na = random_na(rng, 4, 2, 3);
  fill_random(rng, p.ln1.gamma, 1.0f);
  fill_random(rng, p.ln2.beta, 0.5f);
  fill_random(rng, p.mlp.fc1.weight);
  fill_random(rng, p.mlp.fc1.bias);
  fill_random(rng, p.mlp.fc2.weight);
  const Tensor x = random_tensor(rng, 4, 7, 7);

  Matrix t = to_tokens(x);
  const Matrix attn = neighborhood_attention(layer_norm(t, p.ln1), 7, 7, p.na);
  for (std::size_t i = 0; i < t.data().size(); ++i) t.data()[i] += attn.data()[i];
  Matrix hidden = linear(layer_norm(t, p.ln2), p.mlp.fc1);
  for (float& v : hidden.data()) v = gelu(v);
  const Matrix out = linear(hidden, p.mlp.fc2);
  for (std::size_t i = 0; i < t.data().size(); ++i) t.data()[i] += out.data()[i];

  CHECK(rnab_forward(x, p) == from_tokens(t, 7, 7));
}

TEST_CASE("icsa shapes") {
  IcsaParams a;
  a.resample = ConvKernel::make(128, 3, 5, 2);
  a.blocks.push_back(RnabParams::make(128, 8, 7));
  a.blocks.push_back(RnabParams::make(128, 8, 7));
  const Tensor y = icsa_forward(Tensor(3, 64, 64), a, IcsaDirection::kAnalysis);
  CHECK(y.channels() == 128);
  CHECK(y.height() == 32);
  CHECK(y.width() == 32);

  IcsaParams s;
  s.resample = ConvKernel::make(3, 128, 5, 2);
  s.blocks.push_back(RnabParams::make(128, 8, 7));
  const Tensor back = icsa_forward(y, s, IcsaDirection::kSynthesis);
  CHECK(back.channels() == 3);
  CHECK(back.height() == 64);
  CHECK(back.width() == 64);
}

TEST_CASE("icsa with no blocks is the bare conv") {
  std::mt19937_64 rng(29);
  IcsaParams p;
  p.resample = ConvKernel::make(4, 3, 3, 2);
  fill_random(rng, p.resample.weights);
  const Tensor x = random_tensor(rng, 3, 8, 8);
  CHECK(icsa_forward(x, p, IcsaDirection::kAnalysis) == conv2d(x, p.resample));
  IcsaParams t;
  t.resample = ConvKernel::make(2, 3, 3, 2);
  fill_random(rng, t.resample.weights);
  CHECK(icsa_forward(x, t, IcsaDirection::kSynthesis) == tconv2d(x, t.resample));
}

TEST_CASE("na parameter validation") {
  CHECK_THROWS_AS(NaParams::make(6, 4, 3), ConfigError);
  NaParams p = NaParams::make(4, 2, 3);
  p.rel_bias.pop_back();
  CHECK_THROWS(p.validate());
  const NaParams ok = NaParams::make(4, 2, 3);
  CHECK_THROWS_AS(neighborhood_attention(Tensor(3, 4, 4), ok), ShapeError);
}
