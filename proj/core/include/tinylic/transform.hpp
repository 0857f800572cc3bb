#pragma once

#include <string>
#include <vector>

#include "tinylic/config.hpp"
#include "tinylic/nn.hpp"
#include "tinylic/tensor.hpp"
#include "tinylic/weights.hpp"

namespace tinylic {

// Static description of one ICSA unit inside a transform network.
struct IcsaLayout {
  std::string prefix;  // e.g. "ga.stage2"
  IcsaDirection direction = IcsaDirection::kAnalysis;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  int depth = 0;
  int heads = 1;
  int window = 3;

  // Width the RNAB stack runs at.
  int block_channels() const {
    return direction == IcsaDirection::kAnalysis ? out_channels : in_channels;
  }
};

struct TransformLayout {
  std::vector<IcsaLayout> analysis_main;
  std::vector<IcsaLayout> synthesis_main;
  std::vector<IcsaLayout> analysis_hyper;
  std::vector<IcsaLayout> synthesis_hyper;

  static TransformLayout from_config(const NetworkConfig& config);
};

struct TransformWeights {
  NetworkConfig config;
  std::vector<IcsaParams> analysis_main;
  std::vector<IcsaParams> synthesis_main;
  std::vector<IcsaParams> analysis_hyper;
  std::vector<IcsaParams> synthesis_hyper;

  // Resolves every parameter by canonical name; throws ConfigError on a
  // missing name and ShapeError on a dims mismatch.
  static TransformWeights from_store(const WeightStore& store, const NetworkConfig& config);
  // All-zero parameters (layer-norm gains one).
  static TransformWeights zeros(const NetworkConfig& config);
};

void append_transform_demands(const NetworkConfig& config, std::vector<ParamDemand>& out);

// g_a: 3 x H x W -> C4 x H/16 x W/16. Throws DimensionError unless H and W
// are multiples of 64.
Tensor analysis_main(const Tensor& x, const TransformWeights& w);
// g_s: C4 x h x w -> 3 x 16h x 16w, clamped to [0, 1].
Tensor synthesis_main(const Tensor& y_hat, const TransformWeights& w);
// h_a: C4 x h x w -> C6 x h/4 x w/4.
Tensor analysis_hyper(const Tensor& y, const TransformWeights& w);
// h_s: C6 x h x w -> prior_channels x 4h x 4w.
Tensor synthesis_hyper(const Tensor& z_hat, const TransformWeights& w);

}  // namespace tinylic
