#include <doctest.h>

#include <cstring>
#include <random>

#include "tinylic/bitstream.hpp"
#include "tinylic/error.hpp"

using namespace tinylic;

namespace {

std::uint64_t le(const std::vector<std::uint8_t>& b, std::size_t off, int n) {
  std::uint64_t v = 0;
  for (int i = n - 1; i >= 0; --i) v = (v << 8) | b[off + static_cast<std::size_t>(i)];
  return v;
}

Container random_container(std::mt19937_64& rng) {
  Container c;
  c.header.width = static_cast<std::uint32_t>(1 + rng() % 5000);
  c.header.height = static_cast<std::uint32_t>(1 + rng() % 5000);
  c.header.lambda_index = static_cast<std::uint8_t>(rng() % 8);
  c.header.flags = 0;
  c.header.model_hash = rng();
  for (auto& g : c.header.group_sizes) g = static_cast<std::uint16_t>(1 + rng() % 200);
  for (int s = 0; s < kSegmentCount; ++s) {
    auto& seg = c.segments[static_cast<std::size_t>(s)];
    seg.resize(rng() % 300);
    for (auto& b : seg) b = static_cast<std::uint8_t>(rng());
    c.header.segment_lengths[static_cast<std::size_t>(s)] = static_cast<std::uint32_t>(seg.size());
  }
  return c;
}

}  // namespace

TEST_CASE("minimal container") {
  Container c;
  c.header.width = 1;
  c.header.height = 1;
  const auto bytes = write_container(c);
  CHECK(bytes.size() == kHeaderSize);
  const Container back = read_container(bytes);
  for (const auto& s : back.segments) CHECK(s.empty());
  const InspectReport r = inspect(bytes);
  CHECK(r.entries.size() == 6);
}

TEST_CASE("fixed header offsets") {
  Container c;
  c.header.width = 768;
  c.header.height = 512;
  c.header.lambda_index = 5;
  c.header.model_hash = 0x1122334455667788ULL;
  c.header.group_sizes = {24, 69, 104, 123};
  c.segments[0] = {1, 2, 3};
  c.segments[3] = {9};
  const auto b = write_container(c);
  CHECK(std::memcmp(b.data(), "TLIC", 4) == 0);
  CHECK(b[4] == kBitstreamVersion);
  CHECK(b[5] == 0);
  CHECK(le(b, 6, 4) == 768);
  CHECK(le(b, 10, 4) == 512);
  CHECK(b[14] == 5);
  CHECK(le(b, 15, 8) == 0x1122334455667788ULL);
  CHECK(b[23] == 4);
  CHECK(le(b, 24, 2) == 24);
  CHECK(le(b, 26, 2) == 69);
  CHECK(le(b, 28, 2) == 104);
  CHECK(le(b, 30, 2) == 123);
  CHECK(le(b, 32, 4) == 3);
  CHECK(le(b, 36, 4) == 0);
  CHECK(le(b, 44, 4) == 1);
  CHECK(b.size() == kHeaderSize + 4);
  CHECK(b[52] == 1);
  CHECK(b[55] == 9);
  const Header h = read_header(b);
  CHECK(h.segment_offset(3) == 55);
  CHECK(h.file_size() == b.size());
}

TEST_CASE("random containers roundtrip") {
  std::mt19937_64 rng(51);
  for (int i = 0; i < 300; ++i) {
    const Container c = random_container(rng);
    const auto bytes = write_container(c);
    const Container back = read_container(bytes);
    CHECK(back == c);
    CHECK(write_container(back) == bytes);
  }
}

TEST_CASE("format errors") {
  std::mt19937_64 rng(52);
  const auto good = write_container(random_container(rng));

  auto bad = good;
  bad[0] = 'X';
  CHECK_THROWS_AS(read_container(bad), BadMagic);

  bad = good;
  bad[4] = 9;
  CHECK_THROWS_AS(read_container(bad), UnsupportedVersion);

  bad = good;
  bad.pop_back();
  CHECK_THROWS_AS(read_container(bad), TruncatedStream);

  bad = good;
  bad[48] = 0xFF;
  bad[49] = 0xFF;
  CHECK_THROWS_AS(read_container(bad), TruncatedStream);

  const std::vector<std::uint8_t> stub(good.begin(), good.begin() + 20);
  CHECK_THROWS_AS(read_container(stub), TruncatedStream);

  bad = good;
  bad.push_back(0);
  CHECK_THROWS_AS(read_container(bad), FormatError);

  bad = good;
  bad[23] = 3;
  CHECK_THROWS_AS(read_container(bad), FormatError);
}

TEST_CASE("inspect accounting") {
  std::mt19937_64 rng(53);
  for (int i = 0; i < 50; ++i) {
    const Container c = random_container(rng);
    const auto bytes = write_container(c);
    const InspectReport r = inspect(bytes);
    REQUIRE(r.entries.size() == 6);
    CHECK(r.entries[0].name == "header");
    CHECK(r.entries[0].bytes == kHeaderSize);
    double sum = 0.0;
    std::size_t total = 0;
    for (const auto& e : r.entries) {
      sum += e.bpp;
      total += e.bytes;
      if (e.bytes == 0) CHECK(e.bpp == 0.0);
    }
    CHECK(total == bytes.size());
    CHECK(r.total_bytes == bytes.size());
    CHECK(std::abs(sum - r.total_bpp) < 1e-9);
    CHECK(r.total_bpp == doctest::Approx(8.0 * bytes.size() / (double(c.header.width) * c.header.height)));
    CHECK(format_report(r).find("stage1") != std::string::npos);
  }
}
