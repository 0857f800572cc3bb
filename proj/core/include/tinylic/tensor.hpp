#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tinylic {

// Dense C x H x W array of 32-bit floats, row-major in (c, h, w).
class Tensor {
 public:
  Tensor() = default;
  Tensor(int channels, int height, int width, float fill = 0.0f);
  Tensor(int channels, int height, int width, std::vector<float> data);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  bool empty() const { return data_.empty(); }

  float& operator()(int c, int h, int w) { return data_[index(c, h, w)]; }
  float operator()(int c, int h, int w) const { return data_[index(c, h, w)]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  std::span<float> plane(int c) { return {data_.data() + c * plane_size(), plane_size()}; }
  std::span<const float> plane(int c) const {
    return {data_.data() + c * plane_size(), plane_size()};
  }

  bool same_shape(const Tensor& other) const {
    return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t index(int c, int h, int w) const {
    return (static_cast<std::size_t>(c) * height_ + h) * width_ + w;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

// Token matrix: rows are positions, columns are features.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, float fill = 0.0f);
  Matrix(int rows, int cols, std::vector<float> data);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  float& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  float operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  std::span<float> row(int r) { return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }
  std::span<const float> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }
  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<float> data_;
};

// Square convolution kernel. weights are indexed (o, i, kh, kw) for both
// the forward and the transposed convolution.
struct ConvKernel {
  int out_channels = 0;
  int in_channels = 0;
  int k = 1;
  int stride = 1;
  int padding = 0;
  std::vector<float> weights;
  std::vector<float> bias;

  // Zero-initialised kernel with padding (k - 1) / 2. Throws ConfigError on
  // k outside {1, 3, 5} or stride outside {1, 2}.
  static ConvKernel make(int out_channels, int in_channels, int k, int stride);

  float& w(int o, int i, int kh, int kw) {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * k + kh) * k + kw];
  }
  float w(int o, int i, int kh, int kw) const {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * k + kh) * k + kw];
  }
  void validate() const;
};

// Fully connected layer, weight is out x in row-major.
struct Linear {
  int out_features = 0;
  int in_features = 0;
  std::vector<float> weight;
  std::vector<float> bias;

  static Linear make(int out_features, int in_features);
  void validate() const;
};

struct LayerNormParams {
  std::vector<float> gamma;
  std::vector<float> beta;

  static LayerNormParams identity(int features);
};

inline constexpr float kLayerNormEps = 1e-6f;

Tensor conv2d(const Tensor& x, const ConvKernel& kernel);

// Transposed convolution; output_padding is stride - 1 so that a stride-2
// layer exactly doubles each spatial dimension.
Tensor tconv2d(const Tensor& x, const ConvKernel& kernel);

Matrix layer_norm(const Matrix& tokens, std::span<const float> gamma, std::span<const float> beta,
                  float eps = kLayerNormEps);
inline Matrix layer_norm(const Matrix& tokens, const LayerNormParams& p, float eps = kLayerNormEps) {
  return layer_norm(tokens, p.gamma, p.beta, eps);
}

// Exact-erf GELU.
float gelu(float x);
void gelu_inplace(std::span<float> values);

Matrix linear(const Matrix& x, const Linear& fc);

std::vector<float> softmax(std::span<const float> x);

Matrix to_tokens(const Tensor& x);
Tensor from_tokens(const Matrix& tokens, int height, int width);

// Elementwise helpers used by the context model and pipeline.
Tensor concat_channels(std::span<const Tensor* const> parts);
Tensor slice_channels(const Tensor& x, int begin, int count);
void add_inplace(Matrix& acc, const Matrix& delta);

}  // namespace tinylic
