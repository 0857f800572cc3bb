#include "tinylic/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tinylic/error.hpp"

namespace tinylic {

NaParams NaParams::make(int channels, int heads, int window) {
  NaParams p;
  p.heads = heads;
  p.window = window;
  p.q = Linear::make(channels, channels);
  p.k = Linear::make(channels, channels);
  p.v = Linear::make(channels, channels);
  p.proj = Linear::make(channels, channels);
  p.rel_bias.assign(static_cast<std::size_t>(heads) * p.bias_side() * p.bias_side(), 0.0f);
  p.validate();
  return p;
}

void NaParams::validate() const {
  const int c = channels();
  if (heads < 1 || c % heads != 0) {
    throw ConfigError("attention heads (" + std::to_string(heads) + ") must divide channels (" +
                      std::to_string(c) + ")");
  }
  if (window < 1 || window % 2 == 0) throw ConfigError("attention window must be odd");
  for (const Linear* fc : {&q, &k, &v, &proj}) {
    fc->validate();
    if (fc->in_features != c || fc->out_features != c) throw ShapeError("attention projection width mismatch");
  }
  if (rel_bias.size() != static_cast<std::size_t>(heads) * bias_side() * bias_side()) {
    throw ShapeError("relative position bias table has wrong size");
  }
}

RnabParams RnabParams::make(int channels, int heads, int window) {
  RnabParams p;
  p.ln1 = LayerNormParams::identity(channels);
  p.na = NaParams::make(channels, heads, window);
  p.ln2 = LayerNormParams::identity(channels);
  p.mlp.fc1 = Linear::make(2 * channels, channels);
  p.mlp.fc2 = Linear::make(channels, 2 * channels);
  return p;
}

WindowSpan neighborhood_span(int pos, int extent, int window) {
  if (extent <= window) return {0, extent};
  const int half = (window - 1) / 2;
  const int start = std::clamp(pos - half, 0, extent - window);
  return {start, window};
}

Matrix neighborhood_attention(const Matrix& tokens, int height, int width, const NaParams& p) {
  p.validate();
  if (tokens.cols() != p.channels()) {
    throw ShapeError("neighborhood_attention: input has " + std::to_string(tokens.cols()) +
                     " channels, parameters expect " + std::to_string(p.channels()));
  }
  if (tokens.rows() != height * width) throw ShapeError("neighborhood_attention: token count mismatch");

  const Matrix q = linear(tokens, p.q);
  const Matrix k = linear(tokens, p.k);
  const Matrix v = linear(tokens, p.v);
  const int c = p.channels();
  const int d = p.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Matrix mixed(tokens.rows(), c);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    std::vector<double> scores;
    std::vector<double> acc(static_cast<std::size_t>(d));
    for (int x = 0; x < width; ++x) {
      const WindowSpan rows = neighborhood_span(y, height, p.window);
      const WindowSpan cols = neighborhood_span(x, width, p.window);
      const int query = y * width + x;
      scores.resize(static_cast<std::size_t>(rows.len) * cols.len);
      for (int h = 0; h < p.heads; ++h) {
        const int off = h * d;
        const auto qrow = q.row(query);
        double peak = -INFINITY;
        for (int a = 0; a < rows.len; ++a) {
          for (int b = 0; b < cols.len; ++b) {
            const int ky = rows.start + a;
            const int kx = cols.start + b;
            const auto krow = k.row(ky * width + kx);
            double dot = 0.0;
            for (int j = 0; j < d; ++j) dot += static_cast<double>(qrow[off + j]) * krow[off + j];
            const double s = (dot + p.bias(h, ky - y, kx - x)) * scale;
            scores[static_cast<std::size_t>(a) * cols.len + b] = s;
            peak = std::max(peak, s);
          }
        }
        double total = 0.0;
        for (double& s : scores) {
          s = std::exp(s - peak);
          total += s;
        }
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int a = 0; a < rows.len; ++a) {
          for (int b = 0; b < cols.len; ++b) {
            const double wgt = scores[static_cast<std::size_t>(a) * cols.len + b] / total;
            const auto vrow = v.row((rows.start + a) * width + cols.start + b);
            for (int j = 0; j < d; ++j) acc[j] += wgt * vrow[off + j];
          }
        }
        auto dst = mixed.row(query);
        for (int j = 0; j < d; ++j) dst[off + j] = static_cast<float>(acc[j]);
      }
    }
  }
  return linear(mixed, p.proj);
}

Tensor neighborhood_attention(const Tensor& x, const NaParams& p) {
  return from_tokens(neighborhood_attention(to_tokens(x), x.height(), x.width(), p), x.height(), x.width());
}

Matrix mlp_forward(const Matrix& tokens, const MlpParams& p) {
  Matrix hidden = linear(tokens, p.fc1);
  gelu_inplace(hidden.data());
  return linear(hidden, p.fc2);
}

Tensor rnab_forward(const Tensor& x, const RnabParams& p) {
  Matrix t = to_tokens(x);
  add_inplace(t, neighborhood_attention(layer_norm(t, p.ln1), x.height(), x.width(), p.na));
  add_inplace(t, mlp_forward(layer_norm(t, p.ln2), p.mlp));
  return from_tokens(t, x.height(), x.width());
}

Tensor icsa_forward(const Tensor& x, const IcsaParams& p, IcsaDirection direction) {
  if (direction == IcsaDirection::kAnalysis) {
    Tensor out = conv2d(x, p.resample);
    for (const RnabParams& block : p.blocks) out = rnab_forward(out, block);
    return out;
  }
  Tensor out = x;
  for (const RnabParams& block : p.blocks) out = rnab_forward(out, block);
  return tconv2d(out, p.resample);
}

}  // namespace tinylic
