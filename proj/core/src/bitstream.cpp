#include "tinylic/bitstream.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "byte_io.hpp"
#include "tinylic/config.hpp"
#include "tinylic/error.hpp"

namespace tinylic {

namespace {

constexpr std::uint8_t kMagic[4] = {'T', 'L', 'I', 'C'};
constexpr std::uint8_t kGroupCount = 4;

}  // namespace

std::size_t Header::segment_offset(int i) const {
  std::size_t off = kHeaderSize;
  for (int s = 0; s < i; ++s) off += segment_lengths[static_cast<std::size_t>(s)];
  return off;
}

std::vector<std::uint8_t> write_container(const Container& container) {
  const Header& h = container.header;
  detail::ByteWriter w;
  w.bytes(kMagic);
  w.u8(h.version);
  w.u8(h.flags);
  w.u32(h.width);
  w.u32(h.height);
  w.u8(h.lambda_index);
  w.u64(h.model_hash);
  w.u8(kGroupCount);
  for (std::uint16_t g : h.group_sizes) w.u16(g);
  for (const auto& seg : container.segments) {
    if (seg.size() > 0xFFFFFFFFull) throw FormatError("segment longer than 4 GiB");
    w.u32(static_cast<std::uint32_t>(seg.size()));
  }
  for (const auto& seg : container.segments) w.bytes(seg);
  return w.take();
}

Header read_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw BadMagic("not a .tlic stream (bad magic)");
  }
  detail::ByteReader r(bytes);
  r.bytes(4);
  Header h;
  h.version = r.u8();
  if (h.version != kBitstreamVersion) {
    throw UnsupportedVersion("unsupported bitstream version " + std::to_string(h.version));
  }
  h.flags = r.u8();
  h.width = r.u32();
  h.height = r.u32();
  h.lambda_index = r.u8();
  h.model_hash = r.u64();
  const std::uint8_t groups = r.u8();
  if (groups != kGroupCount) throw FormatError("bitstream declares " + std::to_string(groups) + " groups, expected 4");
  for (auto& g : h.group_sizes) g = r.u16();
  for (auto& len : h.segment_lengths) len = r.u32();
  if (h.width == 0 || h.height == 0) throw FormatError("bitstream declares an empty image");
  if (h.lambda_index >= kLambdaGrid.size()) throw FormatError("lambda index out of range");
  return h;
}

Container read_container(std::span<const std::uint8_t> bytes) {
  Container c;
  c.header = read_header(bytes);
  const std::size_t expected = c.header.file_size();
  if (expected > bytes.size()) {
    throw TruncatedStream("declared segments need " + std::to_string(expected) + " bytes, stream has " +
                          std::to_string(bytes.size()));
  }
  if (expected < bytes.size()) {
    throw FormatError(std::to_string(bytes.size() - expected) + " trailing bytes after the last segment");
  }
  for (int i = 0; i < kSegmentCount; ++i) {
    const auto first = bytes.begin() + static_cast<std::ptrdiff_t>(c.header.segment_offset(i));
    c.segments[static_cast<std::size_t>(i)].assign(first, first + c.header.segment_lengths[static_cast<std::size_t>(i)]);
  }
  return c;
}

InspectReport inspect(std::span<const std::uint8_t> bytes) {
  const Container c = read_container(bytes);
  InspectReport report;
  report.header = c.header;
  const double pixels = static_cast<double>(c.header.width) * c.header.height;
  static const char* kNames[kSegmentCount] = {"hyper", "stage1", "stage2", "stage3", "stage4"};
  report.entries.push_back({"header", kHeaderSize, 8.0 * kHeaderSize / pixels});
  for (int i = 0; i < kSegmentCount; ++i) {
    const std::size_t n = c.segments[static_cast<std::size_t>(i)].size();
    report.entries.push_back({kNames[i], n, 8.0 * static_cast<double>(n) / pixels});
  }
  report.total_bytes = bytes.size();
  report.total_bpp = 8.0 * static_cast<double>(bytes.size()) / pixels;
  return report;
}

std::string format_report(const InspectReport& r) {
  std::ostringstream os;
  os << "image        " << r.header.width << "x" << r.header.height << "\n";
  os << "lambda index " << static_cast<int>(r.header.lambda_index) << " (lambda "
     << kLambdaGrid[r.header.lambda_index] << ")\n";
  os << "model hash   0x" << std::hex << std::setw(16) << std::setfill('0') << r.header.model_hash << std::dec
     << std::setfill(' ') << "\n";
  os << "groups       " << r.header.group_sizes[0] << "/" << r.header.group_sizes[1] << "/"
     << r.header.group_sizes[2] << "/" << r.header.group_sizes[3] << "\n";
  std::size_t stage_bytes = 0;
  for (const auto& e : r.entries) {
    os << std::left << std::setw(8) << e.name << std::right << std::setw(10) << e.bytes << " B  " << std::fixed
       << std::setprecision(6) << e.bpp << " bpp\n";
    if (e.name.rfind("stage", 0) == 0) stage_bytes += e.bytes;
  }
  os << std::left << std::setw(8) << "total" << std::right << std::setw(10) << r.total_bytes << " B  " << std::fixed
     << std::setprecision(6) << r.total_bpp << " bpp\n";
  const double stage1 = r.entries.size() > 2 ? static_cast<double>(r.entries[2].bytes) : 0.0;
  os << "stage1 share of latent bytes: " << std::setprecision(3)
     << (stage_bytes ? 100.0 * stage1 / static_cast<double>(stage_bytes) : 0.0) << "%\n";
  return os.str();
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace tinylic
