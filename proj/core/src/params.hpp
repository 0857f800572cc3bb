#pragma once

// Canonical parameter names. Each demand_* has a load_* twin reading the
// same names and dims, so seeded stores and loaders cannot drift apart.

#include <string>
#include <vector>

#include "tinylic/nn.hpp"
#include "tinylic/weights.hpp"

namespace tinylic::detail {

using Dims = std::vector<std::uint32_t>;

inline Dims dims(std::initializer_list<int> d) {
  Dims out;
  for (int v : d) out.push_back(static_cast<std::uint32_t>(v));
  return out;
}

inline void demand_conv(std::vector<ParamDemand>& out, const std::string& prefix, int cout, int cin, int k) {
  out.push_back({prefix + ".weight", dims({cout, cin, k, k}), InitKind::kUniform, cin * k * k});
  out.push_back({prefix + ".bias", dims({cout}), InitKind::kZero, 1});
}

inline ConvKernel load_conv(const WeightStore& s, const std::string& prefix, int cout, int cin, int k,
                            int stride) {
  ConvKernel kernel = ConvKernel::make(cout, cin, k, stride);
  kernel.weights = s.get(prefix + ".weight", dims({cout, cin, k, k})).data;
  kernel.bias = s.get(prefix + ".bias", dims({cout})).data;
  return kernel;
}

inline void demand_linear(std::vector<ParamDemand>& out, const std::string& prefix, int fout, int fin) {
  out.push_back({prefix + ".weight", dims({fout, fin}), InitKind::kUniform, fin});
  out.push_back({prefix + ".bias", dims({fout}), InitKind::kZero, 1});
}

inline Linear load_linear(const WeightStore& s, const std::string& prefix, int fout, int fin) {
  Linear fc = Linear::make(fout, fin);
  fc.weight = s.get(prefix + ".weight", dims({fout, fin})).data;
  fc.bias = s.get(prefix + ".bias", dims({fout})).data;
  return fc;
}

inline void demand_ln(std::vector<ParamDemand>& out, const std::string& prefix, int c) {
  out.push_back({prefix + ".weight", dims({c}), InitKind::kOne, 1});
  out.push_back({prefix + ".bias", dims({c}), InitKind::kZero, 1});
}

inline LayerNormParams load_ln(const WeightStore& s, const std::string& prefix, int c) {
  return {s.get(prefix + ".weight", dims({c})).data, s.get(prefix + ".bias", dims({c})).data};
}

inline void demand_rnab(std::vector<ParamDemand>& out, const std::string& prefix, int c, int heads, int window) {
  demand_ln(out, prefix + ".ln1", c);
  demand_linear(out, prefix + ".na.q", c, c);
  demand_linear(out, prefix + ".na.k", c, c);
  demand_linear(out, prefix + ".na.v", c, c);
  demand_linear(out, prefix + ".na.proj", c, c);
  const int side = 2 * window - 1;
  out.push_back({prefix + ".na.rpb", dims({heads, side, side}), InitKind::kUniform, 1});
  demand_ln(out, prefix + ".ln2", c);
  demand_linear(out, prefix + ".mlp.fc1", 2 * c, c);
  demand_linear(out, prefix + ".mlp.fc2", c, 2 * c);
}

inline RnabParams load_rnab(const WeightStore& s, const std::string& prefix, int c, int heads, int window) {
  RnabParams p = RnabParams::make(c, heads, window);
  p.ln1 = load_ln(s, prefix + ".ln1", c);
  p.na.q = load_linear(s, prefix + ".na.q", c, c);
  p.na.k = load_linear(s, prefix + ".na.k", c, c);
  p.na.v = load_linear(s, prefix + ".na.v", c, c);
  p.na.proj = load_linear(s, prefix + ".na.proj", c, c);
  const int side = 2 * window - 1;
  p.na.rel_bias = s.get(prefix + ".na.rpb", dims({heads, side, side})).data;
  p.ln2 = load_ln(s, prefix + ".ln2", c);
  p.mlp.fc1 = load_linear(s, prefix + ".mlp.fc1", 2 * c, c);
  p.mlp.fc2 = load_linear(s, prefix + ".mlp.fc2", c, 2 * c);
  return p;
}

}  // namespace tinylic::detail
