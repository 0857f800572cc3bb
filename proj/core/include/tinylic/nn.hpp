#pragma once

#include <vector>

#include "tinylic/tensor.hpp"

namespace tinylic {

// Multi-head neighborhood attention over a w x w window.
//
// rel_bias holds one (2w-1) x (2w-1) table per head, indexed by the offset
// (key - query) + (w - 1) along each axis.
struct NaParams {
  int heads = 1;
  int window = 3;
  Linear q;
  Linear k;
  Linear v;
  Linear proj;
  std::vector<float> rel_bias;

  int channels() const { return q.in_features; }
  int head_dim() const { return channels() / heads; }
  int bias_side() const { return 2 * window - 1; }
  float bias(int head, int dy, int dx) const {
    const int side = bias_side();
    return rel_bias[(static_cast<std::size_t>(head) * side + (dy + window - 1)) * side + (dx + window - 1)];
  }

  static NaParams make(int channels, int heads, int window);
  void validate() const;
};

struct MlpParams {
  Linear fc1;  // C -> 2C
  Linear fc2;  // 2C -> C
};

struct RnabParams {
  LayerNormParams ln1;
  NaParams na;
  LayerNormParams ln2;
  MlpParams mlp;

  static RnabParams make(int channels, int heads, int window);
};

enum class IcsaDirection { kAnalysis, kSynthesis };

// One ICSA unit. Analysis: stride-2 conv, then the RNAB stack.
// Synthesis: the RNAB stack, then the stride-2 transposed conv.
struct IcsaParams {
  ConvKernel resample;
  std::vector<RnabParams> blocks;
};

// Window bounds along one axis: [start, start + len). Windows are shifted
// inward at borders so they stay fully in bounds; an axis shorter than the
// window is covered entirely.
struct WindowSpan {
  int start;
  int len;
};
WindowSpan neighborhood_span(int pos, int extent, int window);

Tensor neighborhood_attention(const Tensor& x, const NaParams& p);
Matrix neighborhood_attention(const Matrix& tokens, int height, int width, const NaParams& p);

Matrix mlp_forward(const Matrix& tokens, const MlpParams& p);

Tensor rnab_forward(const Tensor& x, const RnabParams& p);

Tensor icsa_forward(const Tensor& x, const IcsaParams& p, IcsaDirection direction);

}  // namespace tinylic
