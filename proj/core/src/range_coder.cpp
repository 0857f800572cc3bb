#include "tinylic/range_coder.hpp"

#include <algorithm>
#include <string>

#include "tinylic/entropy.hpp"
#include "tinylic/error.hpp"

namespace tinylic {

namespace {

constexpr std::uint32_t kTop = 1u << 24;

void check_cdf(std::span<const std::uint32_t> cdf) {
  if (cdf.size() < 2 || cdf.front() != 0 || cdf.back() != kCdfTotal) {
    throw ConfigError("CDF table must start at 0 and end at 2^16");
  }
}

}  // namespace

void RangeEncoder::encode(std::uint32_t cum_low, std::uint32_t freq) {
  if (freq == 0 || cum_low + freq > kCdfTotal) throw ConfigError("range coder: invalid frequency interval");
  const std::uint32_t r = range_ >> kCdfPrecisionBits;
  low_ += static_cast<std::uint64_t>(r) * cum_low;
  // The top symbol also owns the rounding remainder of the range.
  if (cum_low + freq == kCdfTotal) {
    range_ -= r * cum_low;
  } else {
    range_ = r * freq;
  }
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::encode_symbol(int index, std::span<const std::uint32_t> cdf) {
  check_cdf(cdf);
  if (index < 0 || static_cast<std::size_t>(index) + 1 >= cdf.size()) {
    throw ConfigError("range coder: symbol index " + std::to_string(index) + " outside table");
  }
  const auto i = static_cast<std::size_t>(index);
  encode(cdf[i], cdf[i + 1] - cdf[i]);
}

void RangeEncoder::shift_low() {
  if (low_ < 0xFF000000ull || low_ >= (1ull << 32)) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t pending = cache_;
    do {
      out_.push_back(static_cast<std::uint8_t>(pending + carry));
      pending = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFull) << 8;
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> stream) : in_(stream) {
  if (in_.size() < 5) throw DecodeError("range coded segment shorter than its 5-byte preamble");
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  if (pos_ >= in_.size()) throw DecodeError("range decoder ran past the end of its segment");
  return in_[pos_++];
}

int RangeDecoder::decode_symbol(std::span<const std::uint32_t> cdf) {
  check_cdf(cdf);
  const std::uint32_t r = range_ >> kCdfPrecisionBits;
  const std::uint32_t value = std::min<std::uint32_t>(code_ / r, kCdfTotal - 1);
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), value);
  const auto index = static_cast<std::size_t>(it - cdf.begin()) - 1;
  const std::uint32_t lo = cdf[index];
  const std::uint32_t hi = cdf[index + 1];
  code_ -= r * lo;
  if (hi == kCdfTotal) {
    range_ -= r * lo;
  } else {
    range_ = r * (hi - lo);
  }
  if (code_ >= range_) throw DecodeError("range decoder state inconsistent with CDF (corrupt segment)");
  while (range_ < kTop) {
    range_ <<= 8;
    code_ = (code_ << 8) | next_byte();
  }
  return static_cast<int>(index);
}

std::vector<std::uint8_t> encode_stream(std::span<const int> indices,
                                        std::span<const std::span<const std::uint32_t>> cdfs) {
  if (indices.size() != cdfs.size()) throw ConfigError("encode_stream: one CDF per symbol required");
  RangeEncoder enc;
  for (std::size_t i = 0; i < indices.size(); ++i) enc.encode_symbol(indices[i], cdfs[i]);
  return enc.finish();
}

}  // namespace tinylic
