#include "tinylic/transform.hpp"

#include <algorithm>

#include "params.hpp"
#include "tinylic/error.hpp"

namespace tinylic {

namespace {

std::string stage_prefix(const char* net, int i) { return std::string(net) + ".stage" + std::to_string(i); }

std::string block_prefix(const IcsaLayout& u, int j) { return u.prefix + ".rnab" + std::to_string(j + 1); }

void demand_unit(const IcsaLayout& u, std::vector<ParamDemand>& out) {
  detail::demand_conv(out, u.prefix + ".conv", u.out_channels, u.in_channels, u.kernel);
  for (int j = 0; j < u.depth; ++j) {
    detail::demand_rnab(out, block_prefix(u, j), u.block_channels(), u.heads, u.window);
  }
}

IcsaParams load_unit(const WeightStore& s, const IcsaLayout& u) {
  IcsaParams p;
  p.resample = detail::load_conv(s, u.prefix + ".conv", u.out_channels, u.in_channels, u.kernel, 2);
  for (int j = 0; j < u.depth; ++j) {
    p.blocks.push_back(detail::load_rnab(s, block_prefix(u, j), u.block_channels(), u.heads, u.window));
  }
  return p;
}

IcsaParams zero_unit(const IcsaLayout& u) {
  IcsaParams p;
  p.resample = ConvKernel::make(u.out_channels, u.in_channels, u.kernel, 2);
  for (int j = 0; j < u.depth; ++j) p.blocks.push_back(RnabParams::make(u.block_channels(), u.heads, u.window));
  return p;
}

Tensor run(const Tensor& x, const std::vector<IcsaParams>& units, IcsaDirection direction) {
  Tensor out = x;
  for (const IcsaParams& unit : units) out = icsa_forward(out, unit, direction);
  return out;
}

void require_channels(const Tensor& x, int expected, const char* what) {
  if (x.channels() != expected) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(expected) + " input channels, got " +
                     std::to_string(x.channels()));
  }
}

}  // namespace

TransformLayout TransformLayout::from_config(const NetworkConfig& c) {
  c.validate();
  TransformLayout layout;
  const auto& ch = c.main_channels;
  for (int i = 0; i < 4; ++i) {
    IcsaLayout u;
    u.prefix = stage_prefix("ga", i + 1);
    u.direction = IcsaDirection::kAnalysis;
    u.in_channels = i == 0 ? 3 : ch[i - 1];
    u.out_channels = ch[i];
    u.kernel = i == 0 ? c.first_kernel : c.inner_kernel;
    u.depth = c.main_depths[i];
    u.heads = c.main_heads[i];
    u.window = c.main_window;
    layout.analysis_main.push_back(u);
  }
  for (int i = 0; i < 4; ++i) {
    const int src = 3 - i;  // mirrors the encoder stage
    IcsaLayout u;
    u.prefix = stage_prefix("gs", i + 1);
    u.direction = IcsaDirection::kSynthesis;
    u.in_channels = ch[src];
    u.out_channels = src == 0 ? 3 : ch[src - 1];
    u.kernel = src == 0 ? c.first_kernel : c.inner_kernel;
    u.depth = c.main_depths[src];
    u.heads = c.main_heads[src];
    u.window = c.main_window;
    layout.synthesis_main.push_back(u);
  }
  const auto& hc = c.hyper_channels;
  for (int i = 0; i < 2; ++i) {
    IcsaLayout u;
    u.prefix = stage_prefix("ha", i + 1);
    u.direction = IcsaDirection::kAnalysis;
    u.in_channels = i == 0 ? ch[3] : hc[0];
    u.out_channels = hc[i];
    u.kernel = c.inner_kernel;
    u.depth = c.hyper_depths[i];
    u.heads = c.hyper_heads;
    u.window = c.hyper_window;
    layout.analysis_hyper.push_back(u);
  }
  for (int i = 0; i < 2; ++i) {
    const int src = 1 - i;
    IcsaLayout u;
    u.prefix = stage_prefix("hs", i + 1);
    u.direction = IcsaDirection::kSynthesis;
    u.in_channels = hc[src];
    u.out_channels = src == 0 ? c.prior_channels : hc[src - 1];
    u.kernel = c.inner_kernel;
    u.depth = c.hyper_depths[src];
    u.heads = c.hyper_heads;
    u.window = c.hyper_window;
    layout.synthesis_hyper.push_back(u);
  }
  return layout;
}

void append_transform_demands(const NetworkConfig& config, std::vector<ParamDemand>& out) {
  const TransformLayout layout = TransformLayout::from_config(config);
  for (const auto* net : {&layout.analysis_main, &layout.synthesis_main, &layout.analysis_hyper,
                          &layout.synthesis_hyper}) {
    for (const IcsaLayout& u : *net) demand_unit(u, out);
  }
}

TransformWeights TransformWeights::from_store(const WeightStore& store, const NetworkConfig& config) {
  const TransformLayout layout = TransformLayout::from_config(config);
  TransformWeights w;
  w.config = config;
  for (const auto& u : layout.analysis_main) w.analysis_main.push_back(load_unit(store, u));
  for (const auto& u : layout.synthesis_main) w.synthesis_main.push_back(load_unit(store, u));
  for (const auto& u : layout.analysis_hyper) w.analysis_hyper.push_back(load_unit(store, u));
  for (const auto& u : layout.synthesis_hyper) w.synthesis_hyper.push_back(load_unit(store, u));
  return w;
}

TransformWeights TransformWeights::zeros(const NetworkConfig& config) {
  const TransformLayout layout = TransformLayout::from_config(config);
  TransformWeights w;
  w.config = config;
  for (const auto& u : layout.analysis_main) w.analysis_main.push_back(zero_unit(u));
  for (const auto& u : layout.synthesis_main) w.synthesis_main.push_back(zero_unit(u));
  for (const auto& u : layout.analysis_hyper) w.analysis_hyper.push_back(zero_unit(u));
  for (const auto& u : layout.synthesis_hyper) w.synthesis_hyper.push_back(zero_unit(u));
  return w;
}

Tensor analysis_main(const Tensor& x, const TransformWeights& w) {
  require_channels(x, 3, "g_a");
  if (x.height() % kSpatialMultiple != 0 || x.width() % kSpatialMultiple != 0) {
    throw DimensionError("g_a: input " + std::to_string(x.height()) + "x" + std::to_string(x.width()) +
                         " is not a multiple of " + std::to_string(kSpatialMultiple));
  }
  return run(x, w.analysis_main, IcsaDirection::kAnalysis);
}

Tensor synthesis_main(const Tensor& y_hat, const TransformWeights& w) {
  require_channels(y_hat, w.config.main_channels[3], "g_s");
  Tensor x = run(y_hat, w.synthesis_main, IcsaDirection::kSynthesis);
  for (float& v : x.data()) v = std::clamp(v, 0.0f, 1.0f);
  return x;
}

Tensor analysis_hyper(const Tensor& y, const TransformWeights& w) {
  require_channels(y, w.config.main_channels[3], "h_a");
  return run(y, w.analysis_hyper, IcsaDirection::kAnalysis);
}

Tensor synthesis_hyper(const Tensor& z_hat, const TransformWeights& w) {
  require_channels(z_hat, w.config.hyper_channels[1], "h_s");
  return run(z_hat, w.synthesis_hyper, IcsaDirection::kSynthesis);
}

}  // namespace tinylic
