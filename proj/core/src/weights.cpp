#include "tinylic/weights.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "byte_io.hpp"
#include "tinylic/error.hpp"

namespace tinylic {

namespace {

constexpr char kMagic[4] = {'T', 'L', 'W', 'T'};
constexpr std::uint8_t kVersion = 1;

void write_records(detail::ByteWriter& w, const std::vector<std::pair<std::string, WeightTensor>>& tensors) {
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.text(name);
    w.u8(static_cast<std::uint8_t>(t.dims.size()));
    for (std::uint32_t d : t.dims) w.u32(d);
    for (float v : t.data) w.f32(v);
  }
}

}  // namespace

std::size_t WeightTensor::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

void WeightStore::add(const std::string& name, WeightTensor tensor) {
  if (name.empty() || name.size() > 0xFFFF) throw FormatError("parameter name length out of range");
  if (tensor.dims.size() > 0xFF) throw FormatError("too many dims for '" + name + "'");
  if (tensor.element_count() != tensor.data.size()) {
    throw FormatError("parameter '" + name + "': dims do not match data length");
  }
  for (float v : tensor.data) {
    if (!std::isfinite(v)) throw FormatError("parameter '" + name + "' contains a non-finite value");
  }
  if (index_.contains(name)) throw DuplicateName("duplicate parameter name '" + name + "'");
  index_.emplace(name, tensors_.size());
  tensors_.emplace_back(name, std::move(tensor));
}

const WeightTensor& WeightStore::get(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("missing parameter '" + name + "'");
  return tensors_[it->second].second;
}

const WeightTensor& WeightStore::get(const std::string& name, std::span<const std::uint32_t> dims) const {
  const WeightTensor& t = get(name);
  if (!std::equal(t.dims.begin(), t.dims.end(), dims.begin(), dims.end())) {
    std::string want;
    for (auto d : dims) want += (want.empty() ? "" : "x") + std::to_string(d);
    std::string have;
    for (auto d : t.dims) have += (have.empty() ? "" : "x") + std::to_string(d);
    throw ShapeError("parameter '" + name + "' has dims " + have + ", expected " + want);
  }
  return t;
}

std::size_t WeightStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.data.size();
  return n;
}

std::uint32_t WeightStore::checksum() const {
  detail::ByteWriter w;
  write_records(w, tensors_);
  return crc32_ieee(w.buffer());
}

std::vector<std::uint8_t> save_weights(const WeightStore& store) {
  detail::ByteWriter w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u8(kVersion);
  w.u32(static_cast<std::uint32_t>(store.profile_text().size()));
  w.text(store.profile_text());
  const std::size_t records_begin = w.buffer().size();
  write_records(w, store.tensors());
  const std::span<const std::uint8_t> records(w.buffer().data() + records_begin,
                                              w.buffer().size() - records_begin);
  w.u32(crc32_ieee(records));
  return w.take();
}

WeightStore load_weights(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw BadMagic("not a weight file (bad magic)");
  }
  r.bytes(4);
  const std::uint8_t version = r.u8();
  if (version != kVersion) throw UnsupportedVersion("unsupported weight file version " + std::to_string(version));
  const std::uint32_t profile_len = r.u32();
  WeightStore store(r.text(profile_len));

  const std::size_t records_begin = r.position();
  const std::uint32_t count = r.u32();
  std::vector<std::pair<std::string, WeightTensor>> records;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = r.u16();
    std::string name = r.text(name_len);
    WeightTensor t;
    const std::uint8_t ndim = r.u8();
    for (std::uint8_t d = 0; d < ndim; ++d) t.dims.push_back(r.u32());
    const std::size_t n = t.element_count();
    if (n > r.remaining() / 4) throw TruncatedStream("tensor '" + name + "' runs past end of file");
    t.data.resize(n);
    for (std::size_t j = 0; j < n; ++j) t.data[j] = r.f32();
    records.emplace_back(std::move(name), std::move(t));
  }
  const std::span<const std::uint8_t> section = bytes.subspan(records_begin, r.position() - records_begin);
  const std::uint32_t stored = r.u32();
  if (crc32_ieee(section) != stored) throw ChecksumMismatch("weight file checksum mismatch");
  if (r.remaining() != 0) throw FormatError("trailing bytes after weight file checksum");
  for (auto& [name, t] : records) store.add(name, std::move(t));
  return store;
}

void write_weights_file(const std::filesystem::path& path, const WeightStore& store) {
  const auto bytes = save_weights(store);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("failed writing '" + path.string() + "'");
}

WeightStore read_weights_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return load_weights(bytes);
}

std::uint64_t model_hash(const WeightStore& store) {
  std::uint64_t h = fnv1a64(store.profile_text());
  const std::uint32_t crc = store.checksum();
  const std::uint8_t le[4] = {static_cast<std::uint8_t>(crc), static_cast<std::uint8_t>(crc >> 8),
                              static_cast<std::uint8_t>(crc >> 16), static_cast<std::uint8_t>(crc >> 24)};
  return fnv1a64(le, h);
}

std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in bounded pieces.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = ::crc32(crc, bytes.data() + pos, static_cast<uInt>(n));
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t h) {
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s, std::uint64_t h) {
  return fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()), h);
}

WeightStore seeded_init(const NetworkConfig& config, std::uint64_t seed, InitOptions options) {
  config.validate();
  WeightStore store(config.to_profile_text());
  for (const ParamDemand& d : model_demands(config)) {
    WeightTensor t;
    t.dims = d.dims;
    t.data.assign(t.element_count(), 0.0f);
    switch (d.init) {
      case InitKind::kZero:
        break;
      case InitKind::kOne:
        std::fill(t.data.begin(), t.data.end(), 1.0f);
        break;
      case InitKind::kUniform: {
        SplitMix64 rng(seed ^ fnv1a64(d.name));
        const double bound = options.amplitude / std::sqrt(static_cast<double>(d.fan_in));
        for (float& v : t.data) v = static_cast<float>((2.0 * rng.uniform() - 1.0) * bound);
        break;
      }
    }
    store.add(d.name, std::move(t));
  }
  return store;
}

}  // namespace tinylic
