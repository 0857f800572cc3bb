#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tinylic/tensor.hpp"

namespace tinylic::testing {

inline Tensor random_tensor(std::mt19937_64& rng, int c, int h, int w, float lo = -1.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> dist(lo, hi);
  Tensor t(c, h, w);
  for (float& v : t.data()) v = dist(rng);
  return t;
}

inline void fill_random(std::mt19937_64& rng, std::vector<float>& v, float scale = 1.0f) {
  std::uniform_real_distribution<float> dist(-scale, scale);
  for (float& x : v) x = dist(rng);
}

inline double max_abs_diff(std::span<const float> a, std::span<const float> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  return m;
}

}  // namespace tinylic::testing
