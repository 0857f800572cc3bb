#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tinylic/tensor.hpp"

namespace tinylic {

// 8-bit RGB, interleaved, row-major.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  ImageBuffer() = default;
  ImageBuffer(int w, int h);

  std::uint8_t& at(int x, int y, int c) { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;
};

// Binary PPM (P6, maxval 255). Throws FormatError on malformed input.
ImageBuffer decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const ImageBuffer& image);
ImageBuffer read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const ImageBuffer& image);

// 3 x H x W tensor with samples / 255.
Tensor image_to_tensor(const ImageBuffer& image);
// round(clamp(v, 0, 1) * 255).
ImageBuffer tensor_to_image(const Tensor& x);

// Edge-replicating pad to (height, width) >= current dims.
Tensor pad_replicate(const Tensor& x, int height, int width);
Tensor crop(const Tensor& x, int height, int width);

int round_up(int value, int multiple);

// Deterministic smooth-plus-noise RGB pattern for self-tests and benchmarks.
ImageBuffer synthetic_image(int width, int height, std::uint64_t seed);

// FNV-1a over dims and samples; used to pin reconstructions in fixtures.
std::uint64_t image_hash(const ImageBuffer& image);

}  // namespace tinylic
