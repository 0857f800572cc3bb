#pragma once

#include <array>
#include <string>
#include <vector>

namespace tinylic {

enum class SlicingMode { kCosine, kLinear };

// Width/depth profile of the four transforms and the context model.
struct NetworkConfig {
  std::array<int, 4> main_channels{128, 192, 256, 320};
  std::array<int, 4> main_depths{2, 2, 6, 2};
  std::array<int, 4> main_heads{8, 12, 16, 20};
  int main_window = 7;
  std::array<int, 2> hyper_channels{192, 192};
  std::array<int, 2> hyper_depths{2, 2};
  int hyper_heads = 12;
  int hyper_window = 3;
  int prior_channels = 384;
  int first_kernel = 5;
  int inner_kernel = 3;
  SlicingMode slicing = SlicingMode::kCosine;
  // Explicit channel-group sizes; when non-empty they take precedence over
  // the slicing rule.
  std::vector<int> group_sizes;

  static NetworkConfig default_profile();
  // Small profile for tests: channels [8, 12, 16, 20], one RNAB per stage.
  static NetworkConfig tiny();
  // Resolves "default" / "tiny"; throws ConfigError otherwise.
  static NetworkConfig named(const std::string& name);

  int latent_channels() const { return main_channels[3]; }

  // Throws ConfigError when an invariant is broken.
  void validate() const;

  std::string to_profile_text() const;
  static NetworkConfig from_profile_text(const std::string& text);

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

// Rate-distortion multipliers of the eight MSE-optimised quality levels.
inline constexpr std::array<double, 8> kLambdaGrid{0.0018, 0.0035, 0.0067, 0.013,
                                                   0.025,  0.0483, 0.0932, 0.18};

double lambda_for_index(int index);

// Padding granularity: six stride-2 resamplings between image and z.
inline constexpr int kSpatialMultiple = 64;

}  // namespace tinylic
