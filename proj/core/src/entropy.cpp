#include "tinylic/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "tinylic/error.hpp"

namespace tinylic {

Quantized quantize_mixed(float y, float mu) {
  const double centered = static_cast<double>(y) - static_cast<double>(mu);
  // std::round is half-away-from-zero regardless of the rounding mode.
  const double rounded = std::clamp(std::round(centered), static_cast<double>(-kMaxSymbol),
                                    static_cast<double>(kMaxSymbol));
  const int symbol = static_cast<int>(rounded);
  return {symbol, static_cast<float>(symbol) + mu};
}

double clamp_scale(double sigma) {
  if (!(sigma >= kScaleMin)) return kScaleMin;  // also catches NaN
  return std::min(sigma, kScaleMax);
}

double gaussian_pmf(int symbol, double sigma) {
  if (symbol < -kMaxSymbol || symbol > kMaxSymbol) return 0.0;
  const double s = clamp_scale(sigma);
  const int a = std::abs(symbol);
  const double k = 1.0 / (s * std::sqrt(2.0));
  // Upper-tail form: P(X > t) = erfc(t / (s sqrt 2)) / 2, accurate in the tails.
  const double upper_hi = 0.5 * std::erfc((a + 0.5) * k);
  if (a == kMaxSymbol) return 0.5 * std::erfc((a - 0.5) * k);
  if (a == 0) return 1.0 - 2.0 * upper_hi;
  return 0.5 * std::erfc((a - 0.5) * k) - upper_hi;
}

CdfTable build_cdf(double sigma) {
  const double s = clamp_scale(sigma);
  constexpr std::uint32_t spread = kCdfTotal - kAlphabetSize;
  std::array<std::uint32_t, kAlphabetSize> freq{};
  std::uint32_t total = 0;
  int mode = 0;
  for (int i = 0; i < kAlphabetSize; ++i) {
    const double p = gaussian_pmf(index_symbol(i), s);
    freq[i] = 1 + static_cast<std::uint32_t>(std::floor(p * spread));
    total += freq[i];
    if (freq[i] > freq[mode]) mode = i;
  }
  freq[mode] += kCdfTotal - total;
  CdfTable cdf{};
  for (int i = 0; i < kAlphabetSize; ++i) cdf[i + 1] = cdf[i] + freq[i];
  return cdf;
}

const ScaleTable& ScaleTable::instance() {
  static const ScaleTable table;
  return table;
}

ScaleTable::ScaleTable() {
  const double lo = std::log(kScaleMin);
  const double hi = std::log(kScaleMax);
  for (int i = 0; i < kScaleTableSize; ++i) {
    scales_[i] = std::exp(lo + (hi - lo) * i / (kScaleTableSize - 1));
  }
  scales_.front() = kScaleMin;
  scales_.back() = kScaleMax;
  cdfs_.reserve(kScaleTableSize);
  for (double s : scales_) cdfs_.push_back(build_cdf(s));
}

int ScaleTable::lookup(double sigma) const {
  const double s = clamp_scale(sigma);
  const auto it = std::lower_bound(scales_.begin(), scales_.end(), s);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - scales_.begin(), kScaleTableSize - 1));
}

double cdf_probability(std::span<const std::uint32_t> cdf, int index) {
  const auto i = static_cast<std::size_t>(index);
  return static_cast<double>(cdf[i + 1] - cdf[i]) / static_cast<double>(cdf.back());
}

double estimate_rate(std::span<const int> indices, std::span<const CdfTable* const> cdfs) {
  if (indices.size() != cdfs.size()) throw ConfigError("estimate_rate: one CDF per symbol required");
  double bits = 0.0;
  for (std::size_t i = 0; i < indices.size(); ++i) bits -= std::log2(cdf_probability(*cdfs[i], indices[i]));
  return bits;
}

double estimate_rate(std::span<const int> symbols, std::span<const float> sigmas) {
  if (symbols.size() != sigmas.size()) throw ConfigError("estimate_rate: one scale per symbol required");
  const ScaleTable& table = ScaleTable::instance();
  double bits = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    bits -= std::log2(cdf_probability(table.cdf_for(sigmas[i]), symbol_index(symbols[i])));
  }
  return bits;
}

void FactorizedModel::validate() const {
  if (mu.size() != sigma.size()) throw ShapeError("factorized model: mu/sigma length mismatch");
  for (float s : sigma) {
    if (!(s > 0.0f)) throw ConfigError("factorized model: scales must be positive");
  }
}

}  // namespace tinylic
