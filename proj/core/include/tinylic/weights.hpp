#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tinylic/config.hpp"

namespace tinylic {

struct WeightTensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const;
  friend bool operator==(const WeightTensor&, const WeightTensor&) = default;
};

// Ordered name -> tensor map plus the profile text of the network it feeds.
class WeightStore {
 public:
  WeightStore() = default;
  explicit WeightStore(std::string profile_text) : profile_text_(std::move(profile_text)) {}

  const std::string& profile_text() const { return profile_text_; }
  void set_profile_text(std::string text) { profile_text_ = std::move(text); }
  NetworkConfig config() const { return NetworkConfig::from_profile_text(profile_text_); }

  // Throws DuplicateName if the name is taken, FormatError if dims and data
  // disagree or the data is not finite.
  void add(const std::string& name, WeightTensor tensor);
  bool contains(const std::string& name) const { return index_.contains(name); }
  // Throws ConfigError naming the missing parameter.
  const WeightTensor& get(const std::string& name) const;
  // get() plus an exact dims check (ShapeError on mismatch).
  const WeightTensor& get(const std::string& name, std::span<const std::uint32_t> dims) const;

  const std::vector<std::pair<std::string, WeightTensor>>& tensors() const { return tensors_; }
  std::size_t size() const { return tensors_.size(); }
  std::size_t parameter_count() const;

  // CRC32 (IEEE) of the serialized tensor section.
  std::uint32_t checksum() const;

  friend bool operator==(const WeightStore& a, const WeightStore& b) {
    return a.profile_text_ == b.profile_text_ && a.tensors_ == b.tensors_;
  }

 private:
  std::string profile_text_;
  std::vector<std::pair<std::string, WeightTensor>> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::vector<std::uint8_t> save_weights(const WeightStore& store);
WeightStore load_weights(std::span<const std::uint8_t> bytes);

void write_weights_file(const std::filesystem::path& path, const WeightStore& store);
WeightStore read_weights_file(const std::filesystem::path& path);

// Binds a bitstream to (profile, weights).
std::uint64_t model_hash(const WeightStore& store);

std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes);
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL);

// How seeded_init fills a parameter.
enum class InitKind { kUniform, kZero, kOne };

struct ParamDemand {
  std::string name;
  std::vector<std::uint32_t> dims;
  InitKind init = InitKind::kUniform;
  int fan_in = 1;
};

// Every parameter the transforms, the context model and the hyper-latent
// prior read for this profile, in canonical order.
std::vector<ParamDemand> model_demands(const NetworkConfig& config);

struct InitOptions {
  double amplitude = 0.02;
};

// Deterministic weights: an independent SplitMix64 stream per tensor name,
// uniform(-amplitude, amplitude) / sqrt(fan_in); biases zero, layer-norm
// gains one.
WeightStore seeded_init(const NetworkConfig& config, std::uint64_t seed, InitOptions options = {});

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace tinylic
