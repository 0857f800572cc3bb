#pragma once

#include <cstdint>
#include <optional>

#include "tinylic/bitstream.hpp"
#include "tinylic/config.hpp"
#include "tinylic/entropy.hpp"
#include "tinylic/image.hpp"
#include "tinylic/mcm.hpp"
#include "tinylic/transform.hpp"
#include "tinylic/weights.hpp"

namespace tinylic {

// Everything a codec invocation reads, resolved once from a WeightStore.
struct Model {
  NetworkConfig config;
  TransformWeights transforms;
  McmWeights mcm;
  FactorizedModel z_prior;
  std::uint64_t hash = 0;

  static Model from_store(const WeightStore& store);
};

void append_prior_demands(const NetworkConfig& config, std::vector<ParamDemand>& out);

// Intermediate tensors of one encode, for verification.
struct EncodeTrace {
  Tensor y;
  Tensor y_hat;
  Tensor z_hat;
  Tensor psi;
  double hyper_estimated_bits = 0.0;
  std::array<double, kStageCount> stage_estimated_bits{};
};

struct DecodeTrace {
  Tensor y_hat;
  Tensor z_hat;
  McmDecodeStats mcm;
};

// Codes a hyper latent under the per-channel prior, channel-major then
// row-major; returns the quantized reconstruction through z_hat.
std::vector<std::uint8_t> encode_hyper(const Tensor& z, const FactorizedModel& prior, Tensor& z_hat,
                                       double* estimated_bits = nullptr);
Tensor decode_hyper(std::span<const std::uint8_t> segment, const FactorizedModel& prior, int height, int width);

Container encode_image(const ImageBuffer& image, const Model& model, int lambda_index,
                       EncodeTrace* trace = nullptr);

// stages: number of latent groups to decode (1..4); nullopt decodes all.
// Throws ModelMismatch before any entropy decoding if the stream was made
// with different weights.
ImageBuffer decode_image(const Container& container, const Model& model, std::optional<int> stages = std::nullopt,
                         DecodeTrace* trace = nullptr);

}  // namespace tinylic
