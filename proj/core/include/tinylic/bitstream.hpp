#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tinylic {

inline constexpr std::uint8_t kBitstreamVersion = 1;
inline constexpr int kSegmentCount = 5;  // hyper, stage 1..4
inline constexpr std::size_t kHeaderSize = 52;

// Fixed little-endian layout, see docs/bitstream.md.
struct Header {
  std::uint8_t version = kBitstreamVersion;
  std::uint8_t flags = 0;
  std::uint32_t width = 0;   // original, pre-padding
  std::uint32_t height = 0;
  std::uint8_t lambda_index = 0;
  std::uint64_t model_hash = 0;
  std::array<std::uint16_t, 4> group_sizes{};
  std::array<std::uint32_t, kSegmentCount> segment_lengths{};

  // Byte offset of segment i from the start of the file.
  std::size_t segment_offset(int i) const;
  std::size_t file_size() const { return segment_offset(kSegmentCount); }

  friend bool operator==(const Header&, const Header&) = default;
};

struct Container {
  Header header;
  std::array<std::vector<std::uint8_t>, kSegmentCount> segments;

  const std::vector<std::uint8_t>& hyper_segment() const { return segments[0]; }
  std::span<const std::vector<std::uint8_t>> stage_segments() const { return {segments.data() + 1, 4}; }

  friend bool operator==(const Container&, const Container&) = default;
};

// segment_lengths are taken from the segments themselves.
std::vector<std::uint8_t> write_container(const Container& container);

// Throws BadMagic, UnsupportedVersion, TruncatedStream (declared lengths
// beyond the data) or FormatError (other inconsistencies).
Header read_header(std::span<const std::uint8_t> bytes);
Container read_container(std::span<const std::uint8_t> bytes);

struct SegmentReport {
  std::string name;
  std::size_t bytes = 0;
  double bpp = 0.0;
};

struct InspectReport {
  Header header;
  std::vector<SegmentReport> entries;  // header, hyper, stage1..stage4
  std::size_t total_bytes = 0;
  double total_bpp = 0.0;
};

InspectReport inspect(std::span<const std::uint8_t> bytes);
std::string format_report(const InspectReport& report);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace tinylic
