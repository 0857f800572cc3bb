#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tinylic {

// Byte-oriented range coder with 32-bit range and 16-bit frequencies.
// low is kept in 64 bits so a carry out of bit 32 can be propagated into the
// pending bytes (one cached byte plus a run of 0xFF).
//
// The encoder emits exactly 5 + (number of renormalisation shifts) bytes and
// the decoder consumes exactly the same count, so a decoder that needs a byte
// past the end of its input is looking at a truncated or corrupt stream.
class RangeEncoder {
 public:
  // Codes [cum_low, cum_low + freq) out of 2^16.
  void encode(std::uint32_t cum_low, std::uint32_t freq);
  // Codes symbol index `index` under cumulative table `cdf` (total 2^16).
  void encode_symbol(int index, std::span<const std::uint32_t> cdf);

  // Flushes and returns the stream. The encoder must not be used afterwards.
  std::vector<std::uint8_t> finish();

 private:
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  // Throws DecodeError if the stream is too short to hold the preamble.
  explicit RangeDecoder(std::span<const std::uint8_t> stream);

  // Decodes one symbol index under `cdf`; throws DecodeError when the stream
  // is exhausted or inconsistent with the table.
  int decode_symbol(std::span<const std::uint32_t> cdf);

  std::size_t bytes_consumed() const { return pos_; }
  std::size_t size() const { return in_.size(); }
  bool fully_consumed() const { return pos_ == in_.size(); }

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
};

// Codes a whole symbol sequence, one CDF per symbol, in order.
std::vector<std::uint8_t> encode_stream(std::span<const int> indices,
                                        std::span<const std::span<const std::uint32_t>> cdfs);

inline int decode_next(RangeDecoder& decoder, std::span<const std::uint32_t> cdf) {
  return decoder.decode_symbol(cdf);
}

}  // namespace tinylic
