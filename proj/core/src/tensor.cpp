#include "tinylic/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "tinylic/error.hpp"

namespace tinylic {

namespace {

void check_dims(int c, int h, int w) {
  if (c < 1 || h < 1 || w < 1) {
    throw ShapeError("tensor dims must be >= 1, got " + std::to_string(c) + "x" + std::to_string(h) +
                     "x" + std::to_string(w));
  }
}

// Right-hand GEMM operand, converted to double and packed into strips of
// kStrip columns so the micro-kernel reads it contiguously.
constexpr int kStrip = 8;

struct PackedB {
  int kdim = 0;
  int n = 0;
  std::vector<double> data;  // [strip][k][kStrip]

  // bt is k-major: bt[k * n + col].
  PackedB(const std::vector<float>& bt, int kdim_, int n_) : kdim(kdim_), n(n_) {
    const int strips = (n + kStrip - 1) / kStrip;
    data.assign(static_cast<std::size_t>(strips) * kdim * kStrip, 0.0);
    for (int s = 0; s < strips; ++s)
      for (int k = 0; k < kdim; ++k)
        for (int j = 0; j < kStrip && s * kStrip + j < n; ++j)
          data[(static_cast<std::size_t>(s) * kdim + k) * kStrip + j] = bt[static_cast<std::size_t>(k) * n + s * kStrip + j];
  }
};

template <int R>
void micro_kernel(const float* a, int kdim, const double* bp, double (&acc)[4][kStrip]) {
  for (int k = 0; k < kdim; ++k) {
    const double* b = bp + static_cast<std::size_t>(k) * kStrip;
    for (int r = 0; r < R; ++r) {
      const double av = a[static_cast<std::size_t>(r) * kdim + k];
      for (int j = 0; j < kStrip; ++j) acc[r][j] += av * b[j];
    }
  }
}

// out[r][n] = bias[n] + sum_k a[r][k] * b[k][n], accumulated in double in
// increasing k order. The order is independent of blocking, so results are
// bit-identical however the work is split.
void gemm(const float* a, int rows, const PackedB& b, const float* bias, float* out) {
  const int kdim = b.kdim;
  const int n = b.n;
  const int strips = (n + kStrip - 1) / kStrip;
  for (int r0 = 0; r0 < rows; r0 += 4) {
    const int rb = std::min(4, rows - r0);
    const float* ar = a + static_cast<std::size_t>(r0) * kdim;
    for (int s = 0; s < strips; ++s) {
      double acc[4][kStrip] = {};
      const double* bp = b.data.data() + static_cast<std::size_t>(s) * kdim * kStrip;
      switch (rb) {
        case 4: micro_kernel<4>(ar, kdim, bp, acc); break;
        case 3: micro_kernel<3>(ar, kdim, bp, acc); break;
        case 2: micro_kernel<2>(ar, kdim, bp, acc); break;
        default: micro_kernel<1>(ar, kdim, bp, acc); break;
      }
      const int c0 = s * kStrip;
      const int cb = std::min(kStrip, n - c0);
      for (int r = 0; r < rb; ++r) {
        float* orow = out + static_cast<std::size_t>(r0 + r) * n + c0;
        for (int c = 0; c < cb; ++c) {
          const double bb = bias ? static_cast<double>(bias[c0 + c]) : 0.0;
          orow[c] = static_cast<float>(acc[r][c] + bb);
        }
      }
    }
  }
}

constexpr int kPositionChunk = 64;

}  // namespace

Tensor::Tensor(int channels, int height, int width, float fill)
    : channels_(channels), height_(height), width_(width) {
  check_dims(channels, height, width);
  data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

Tensor::Tensor(int channels, int height, int width, std::vector<float> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
  check_dims(channels, height, width);
  if (data_.size() != static_cast<std::size_t>(channels) * height * width) {
    throw ShapeError("tensor data length does not match dims");
  }
}

Matrix::Matrix(int rows, int cols, float fill) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 1) throw ShapeError("matrix dims out of range");
  data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

Matrix::Matrix(int rows, int cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows < 0 || cols < 1) throw ShapeError("matrix dims out of range");
  if (data_.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("matrix data length does not match dims");
  }
}

ConvKernel ConvKernel::make(int out_channels, int in_channels, int k, int stride) {
  ConvKernel kernel;
  kernel.out_channels = out_channels;
  kernel.in_channels = in_channels;
  kernel.k = k;
  kernel.stride = stride;
  kernel.padding = (k - 1) / 2;
  kernel.validate();
  kernel.weights.assign(static_cast<std::size_t>(out_channels) * in_channels * k * k, 0.0f);
  kernel.bias.assign(static_cast<std::size_t>(out_channels), 0.0f);
  return kernel;
}

void ConvKernel::validate() const {
  if (k != 1 && k != 3 && k != 5) throw ConfigError("conv kernel size must be 1, 3 or 5");
  if (stride != 1 && stride != 2) throw ConfigError("conv stride must be 1 or 2");
  if (padding != (k - 1) / 2) throw ConfigError("conv padding must be (k - 1) / 2");
  if (out_channels < 1 || in_channels < 1) throw ConfigError("conv channel counts must be >= 1");
  if (!weights.empty() &&
      weights.size() != static_cast<std::size_t>(out_channels) * in_channels * k * k) {
    throw ShapeError("conv weight length mismatch");
  }
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(out_channels)) {
    throw ShapeError("conv bias length mismatch");
  }
}

Linear Linear::make(int out_features, int in_features) {
  Linear fc;
  fc.out_features = out_features;
  fc.in_features = in_features;
  fc.weight.assign(static_cast<std::size_t>(out_features) * in_features, 0.0f);
  fc.bias.assign(static_cast<std::size_t>(out_features), 0.0f);
  return fc;
}

void Linear::validate() const {
  if (weight.size() != static_cast<std::size_t>(out_features) * in_features ||
      bias.size() != static_cast<std::size_t>(out_features)) {
    throw ShapeError("linear parameter length mismatch");
  }
}

LayerNormParams LayerNormParams::identity(int features) {
  return {std::vector<float>(features, 1.0f), std::vector<float>(features, 0.0f)};
}

Tensor conv2d(const Tensor& x, const ConvKernel& kernel) {
  kernel.validate();
  if (x.channels() != kernel.in_channels) {
    throw ShapeError("conv2d: input has " + std::to_string(x.channels()) + " channels, kernel expects " +
                     std::to_string(kernel.in_channels));
  }
  const int k = kernel.k;
  const int s = kernel.stride;
  const int pad = kernel.padding;
  const int out_h = (x.height() + 2 * pad - k) / s + 1;
  const int out_w = (x.width() + 2 * pad - k) / s + 1;
  const int cin = kernel.in_channels;
  const int cout = kernel.out_channels;
  const int kdim = cin * k * k;

  std::vector<float> bt(static_cast<std::size_t>(kdim) * cout);
  for (int o = 0; o < cout; ++o) {
    for (int j = 0; j < kdim; ++j) {
      bt[static_cast<std::size_t>(j) * cout + o] = kernel.weights[static_cast<std::size_t>(o) * kdim + j];
    }
  }

  const PackedB packed(bt, kdim, cout);
  Tensor out(cout, out_h, out_w);
  const int positions = out_h * out_w;
  const int chunks = (positions + kPositionChunk - 1) / kPositionChunk;

#pragma omp parallel for schedule(static)
  for (int chunk = 0; chunk < chunks; ++chunk) {
    const int p0 = chunk * kPositionChunk;
    const int pn = std::min(kPositionChunk, positions - p0);
    std::vector<float> cols(static_cast<std::size_t>(pn) * kdim, 0.0f);
    for (int p = 0; p < pn; ++p) {
      const int oy = (p0 + p) / out_w;
      const int ox = (p0 + p) % out_w;
      float* col = cols.data() + static_cast<std::size_t>(p) * kdim;
      for (int i = 0; i < cin; ++i) {
        for (int kh = 0; kh < k; ++kh) {
          const int iy = oy * s - pad + kh;
          if (iy < 0 || iy >= x.height()) continue;
          for (int kw = 0; kw < k; ++kw) {
            const int ix = ox * s - pad + kw;
            if (ix < 0 || ix >= x.width()) continue;
            col[(i * k + kh) * k + kw] = x(i, iy, ix);
          }
        }
      }
    }
    std::vector<float> res(static_cast<std::size_t>(pn) * cout);
    gemm(cols.data(), pn, packed, kernel.bias.data(), res.data());
    for (int p = 0; p < pn; ++p) {
      const int oy = (p0 + p) / out_w;
      const int ox = (p0 + p) % out_w;
      for (int o = 0; o < cout; ++o) out(o, oy, ox) = res[static_cast<std::size_t>(p) * cout + o];
    }
  }
  return out;
}

Tensor tconv2d(const Tensor& x, const ConvKernel& kernel) {
  kernel.validate();
  if (x.channels() != kernel.in_channels) {
    throw ShapeError("tconv2d: input has " + std::to_string(x.channels()) + " channels, kernel expects " +
                     std::to_string(kernel.in_channels));
  }
  const int k = kernel.k;
  const int s = kernel.stride;
  const int pad = kernel.padding;
  const int out_h = (x.height() - 1) * s - 2 * pad + k + (s - 1);
  const int out_w = (x.width() - 1) * s - 2 * pad + k + (s - 1);
  const int cin = kernel.in_channels;
  const int cout = kernel.out_channels;
  Tensor out(cout, out_h, out_w);

  // Output pixel (y, x) receives input (iy, ix) through tap (kh, kw) when
  // y = iy * s - pad + kh. Within one output parity class the contributing
  // taps are fixed, so each class is a dense gather-GEMM.
  auto taps_for = [&](int parity) {
    std::vector<int> taps;
    for (int t = 0; t < k; ++t) {
      if (((parity + pad - t) % s + s) % s == 0) taps.push_back(t);
    }
    return taps;
  };

  for (int py = 0; py < s; ++py) {
    for (int px = 0; px < s; ++px) {
      const std::vector<int> ty = taps_for(py);
      const std::vector<int> tx = taps_for(px);
      const int ny = (out_h - py + s - 1) / s;
      const int nx = (out_w - px + s - 1) / s;
      if (ny <= 0 || nx <= 0) continue;
      const int ntaps = static_cast<int>(ty.size() * tx.size());
      const int kdim = cin * ntaps;
      if (kdim == 0) {
        for (int o = 0; o < cout; ++o)
          for (int a = 0; a < ny; ++a)
            for (int b = 0; b < nx; ++b) out(o, py + a * s, px + b * s) = kernel.bias[o];
        continue;
      }
      std::vector<float> bt(static_cast<std::size_t>(kdim) * cout);
      for (int i = 0; i < cin; ++i) {
        for (std::size_t a = 0; a < ty.size(); ++a) {
          for (std::size_t b = 0; b < tx.size(); ++b) {
            const std::size_t j = static_cast<std::size_t>(i) * ntaps + a * tx.size() + b;
            for (int o = 0; o < cout; ++o) bt[j * cout + o] = kernel.w(o, i, ty[a], tx[b]);
          }
        }
      }
      const PackedB packed(bt, kdim, cout);
      const int positions = ny * nx;
      const int chunks = (positions + kPositionChunk - 1) / kPositionChunk;

#pragma omp parallel for schedule(static)
      for (int chunk = 0; chunk < chunks; ++chunk) {
        const int p0 = chunk * kPositionChunk;
        const int pn = std::min(kPositionChunk, positions - p0);
        std::vector<float> cols(static_cast<std::size_t>(pn) * kdim, 0.0f);
        for (int p = 0; p < pn; ++p) {
          const int oy = py + ((p0 + p) / nx) * s;
          const int ox = px + ((p0 + p) % nx) * s;
          float* col = cols.data() + static_cast<std::size_t>(p) * kdim;
          for (std::size_t a = 0; a < ty.size(); ++a) {
            const int ny_num = oy + pad - ty[a];
            if (ny_num < 0) continue;
            const int iy = ny_num / s;
            if (iy >= x.height()) continue;
            for (std::size_t b = 0; b < tx.size(); ++b) {
              const int nx_num = ox + pad - tx[b];
              if (nx_num < 0) continue;
              const int ix = nx_num / s;
              if (ix >= x.width()) continue;
              const std::size_t tap = a * tx.size() + b;
              for (int i = 0; i < cin; ++i) col[static_cast<std::size_t>(i) * ntaps + tap] = x(i, iy, ix);
            }
          }
        }
        std::vector<float> res(static_cast<std::size_t>(pn) * cout);
        gemm(cols.data(), pn, packed, kernel.bias.data(), res.data());
        for (int p = 0; p < pn; ++p) {
          const int oy = py + ((p0 + p) / nx) * s;
          const int ox = px + ((p0 + p) % nx) * s;
          for (int o = 0; o < cout; ++o) out(o, oy, ox) = res[static_cast<std::size_t>(p) * cout + o];
        }
      }
    }
  }
  return out;
}

Matrix layer_norm(const Matrix& tokens, std::span<const float> gamma, std::span<const float> beta,
                  float eps) {
  const int c = tokens.cols();
  if (gamma.size() != static_cast<std::size_t>(c) || beta.size() != static_cast<std::size_t>(c)) {
    throw ShapeError("layer_norm: affine parameters do not match feature width");
  }
  Matrix out(tokens.rows(), c);
  for (int r = 0; r < tokens.rows(); ++r) {
    const auto row = tokens.row(r);
    double mean = 0.0;
    for (float v : row) mean += v;
    mean /= c;
    double var = 0.0;
    for (float v : row) var += (v - mean) * (v - mean);
    var /= c;
    const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
    auto dst = out.row(r);
    for (int j = 0; j < c; ++j) {
      dst[j] = static_cast<float>((row[j] - mean) * inv * gamma[j] + beta[j]);
    }
  }
  return out;
}

float gelu(float x) {
  const double v = x;
  return static_cast<float>(0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))));
}

void gelu_inplace(std::span<float> values) {
  for (float& v : values) v = gelu(v);
}

Matrix linear(const Matrix& x, const Linear& fc) {
  fc.validate();
  if (x.cols() != fc.in_features) {
    throw ShapeError("linear: input width " + std::to_string(x.cols()) + " != " +
                     std::to_string(fc.in_features));
  }
  const int n = fc.out_features;
  const int kdim = fc.in_features;
  std::vector<float> bt(static_cast<std::size_t>(kdim) * n);
  for (int o = 0; o < n; ++o)
    for (int j = 0; j < kdim; ++j) bt[static_cast<std::size_t>(j) * n + o] = fc.weight[static_cast<std::size_t>(o) * kdim + j];

  const PackedB packed(bt, kdim, n);
  Matrix out(x.rows(), n);
  const int chunks = (x.rows() + kPositionChunk - 1) / kPositionChunk;
#pragma omp parallel for schedule(static)
  for (int chunk = 0; chunk < chunks; ++chunk) {
    const int r0 = chunk * kPositionChunk;
    const int rn = std::min(kPositionChunk, x.rows() - r0);
    gemm(x.data().data() + static_cast<std::size_t>(r0) * kdim, rn, packed, fc.bias.data(),
         out.data().data() + static_cast<std::size_t>(r0) * n);
  }
  return out;
}

std::vector<float> softmax(std::span<const float> x) {
  std::vector<float> out(x.size());
  if (x.empty()) return out;
  const float m = *std::max_element(x.begin(), x.end());
  double total = 0.0;
  std::vector<double> e(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    e[i] = std::exp(static_cast<double>(x[i]) - m);
    total += e[i];
  }
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<float>(e[i] / total);
  return out;
}

Matrix to_tokens(const Tensor& x) {
  const int t = x.height() * x.width();
  Matrix m(t, x.channels());
  for (int c = 0; c < x.channels(); ++c) {
    const auto p = x.plane(c);
    for (int i = 0; i < t; ++i) m(i, c) = p[i];
  }
  return m;
}

Tensor from_tokens(const Matrix& tokens, int height, int width) {
  if (tokens.rows() != height * width) throw ShapeError("from_tokens: row count != height * width");
  Tensor x(tokens.cols(), height, width);
  for (int c = 0; c < tokens.cols(); ++c) {
    auto p = x.plane(c);
    for (int i = 0; i < tokens.rows(); ++i) p[i] = tokens(i, c);
  }
  return x;
}

Tensor concat_channels(std::span<const Tensor* const> parts) {
  if (parts.empty()) throw ShapeError("concat_channels: nothing to concatenate");
  const int h = parts.front()->height();
  const int w = parts.front()->width();
  int total = 0;
  for (const Tensor* t : parts) {
    if (t->height() != h || t->width() != w) throw ShapeError("concat_channels: spatial dims differ");
    total += t->channels();
  }
  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(total) * h * w);
  for (const Tensor* t : parts) data.insert(data.end(), t->data().begin(), t->data().end());
  return Tensor(total, h, w, std::move(data));
}

Tensor slice_channels(const Tensor& x, int begin, int count) {
  if (begin < 0 || count < 1 || begin + count > x.channels()) {
    throw ShapeError("slice_channels: range out of bounds");
  }
  const auto first = x.data().begin() + static_cast<std::ptrdiff_t>(begin * x.plane_size());
  std::vector<float> data(first, first + static_cast<std::ptrdiff_t>(count * x.plane_size()));
  return Tensor(count, x.height(), x.width(), std::move(data));
}

void add_inplace(Matrix& acc, const Matrix& delta) {
  if (acc.rows() != delta.rows() || acc.cols() != delta.cols()) throw ShapeError("add: shape mismatch");
  auto a = acc.data();
  const auto d = delta.data();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += d[i];
}

}  // namespace tinylic
