#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tinylic/tensor.hpp"

namespace tinylic {

// Symbols are saturated to [-kMaxSymbol, kMaxSymbol]; the end symbols absorb
// the Gaussian tails.
inline constexpr int kMaxSymbol = 63;
inline constexpr int kAlphabetSize = 2 * kMaxSymbol + 1;
inline constexpr int kCdfPrecisionBits = 16;
inline constexpr std::uint32_t kCdfTotal = 1u << kCdfPrecisionBits;

inline constexpr double kScaleMin = 0.11;
inline constexpr double kScaleMax = 256.0;
inline constexpr int kScaleTableSize = 64;

struct Quantized {
  int symbol;
  float recon;
};

// symbol = round_half_away(y - mu) saturated to +-kMaxSymbol; recon = symbol + mu.
Quantized quantize_mixed(float y, float mu);

inline int symbol_index(int symbol) { return symbol + kMaxSymbol; }
inline int index_symbol(int index) { return index - kMaxSymbol; }

// Probability of a mean-removed symbol under N(0, sigma^2), discretised on
// unit bins; +-kMaxSymbol take the tail mass so the alphabet sums to one.
double gaussian_pmf(int symbol, double sigma);

double clamp_scale(double sigma);

// Cumulative frequencies over the kAlphabetSize symbols plus terminator:
// cdf[0] = 0, cdf[kAlphabetSize] = 2^16, strictly increasing.
using CdfTable = std::array<std::uint32_t, kAlphabetSize + 1>;

// Frequencies are 1 + floor(p * (2^16 - kAlphabetSize)); the leftover goes
// to the most probable symbol.
CdfTable build_cdf(double sigma);

// 64 log-spaced scales on [kScaleMin, kScaleMax] with one CDF each.
class ScaleTable {
 public:
  static const ScaleTable& instance();

  // Index of the smallest table scale >= clamp_scale(sigma).
  int lookup(double sigma) const;
  double scale(int index) const { return scales_[static_cast<std::size_t>(index)]; }
  const CdfTable& cdf(int index) const { return cdfs_[static_cast<std::size_t>(index)]; }
  const CdfTable& cdf_for(double sigma) const { return cdf(lookup(sigma)); }

 private:
  ScaleTable();
  std::array<double, kScaleTableSize> scales_{};
  std::vector<CdfTable> cdfs_;
};

// Probability the coder assigns to a symbol under a CDF table.
double cdf_probability(std::span<const std::uint32_t> cdf, int index);

// Ideal code length, in bits, of coding indices under the given CDFs.
double estimate_rate(std::span<const int> indices, std::span<const CdfTable* const> cdfs);

struct GaussianParams {
  Tensor mu;
  Tensor sigma;
};

// Rate of mean-removed symbols coded with the scale table (one sigma per symbol).
double estimate_rate(std::span<const int> symbols, std::span<const float> sigmas);

// Per-channel Gaussian prior for the hyper latent.
struct FactorizedModel {
  std::vector<float> mu;
  std::vector<float> sigma;

  int channels() const { return static_cast<int>(mu.size()); }
  void validate() const;
};

}  // namespace tinylic
