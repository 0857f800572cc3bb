#include "selftest.hpp"

#include <functional>
#include <map>
#include <string>

#include "tinylic/codec.hpp"
#include "tinylic/error.hpp"
#include "tinylic/range_coder.hpp"

namespace tinylic::cli {

namespace {

std::string check_causality(const Model& model, std::uint64_t seed) {
  const ImageBuffer img = synthetic_image(128, 64, seed);
  EncodeTrace et;
  std::map<std::pair<int, int>, GaussianParams> enc;
  const Container c = encode_image(img, model, 0, &et);
  mcm_encode(et.y, et.psi, model.mcm, [&](int s, int k, const GaussianParams& p) { enc[{s, k}] = p; });
  int mismatches = 0;
  mcm_decode(c.stage_segments(), et.psi, model.mcm, nullptr, [&](int s, int k, const GaussianParams& p) {
    if (!(enc[{s, k}].mu == p.mu) || !(enc[{s, k}].sigma == p.sigma)) ++mismatches;
  });
  if (mismatches) return std::to_string(mismatches) + " passes with differing parameters";
  return {};
}

std::string check_pipeline(const Model& model, std::uint64_t seed) {
  const ImageBuffer img = synthetic_image(100, 70, seed);
  EncodeTrace et;
  const auto a = write_container(encode_image(img, model, 3, &et));
  const auto b = write_container(encode_image(img, model, 3));
  if (a != b) return "containers differ between runs";
  DecodeTrace dt;
  const ImageBuffer rec = decode_image(read_container(a), model, std::nullopt, &dt);
  if (!(dt.y_hat == et.y_hat)) return "decoder y_hat differs from encoder";
  if (rec.width != img.width || rec.height != img.height) return "reconstruction dims differ";
  if (image_hash(rec) != image_hash(decode_image(read_container(b), model))) return "reconstruction not reproducible";
  return {};
}

std::string check_rate(const Model& model, std::uint64_t seed) {
  EncodeTrace et;
  const Container c = encode_image(synthetic_image(64, 128, seed), model, 5, &et);
  auto within = [](double bytes, double est) {
    const double d = 8.0 * bytes - est;
    return d >= -1.0 && d <= 256.0;
  };
  if (!within(static_cast<double>(c.segments[0].size()), et.hyper_estimated_bits)) return "hyper segment";
  for (int s = 0; s < kStageCount; ++s) {
    if (!within(static_cast<double>(c.segments[static_cast<std::size_t>(s + 1)].size()), et.stage_estimated_bits[s])) {
      return "stage " + std::to_string(s + 1);
    }
  }
  return {};
}

std::string check_progressive(const Model& model, std::uint64_t seed) {
  EncodeTrace et;
  const Container c = encode_image(synthetic_image(64, 64, seed), model, 1, &et);
  for (int k = 1; k < kStageCount; ++k) {
    McmDecodeStats stats;
    const Tensor part = progressive_decode(c.stage_segments().first(static_cast<std::size_t>(k)), et.psi, model.mcm, &stats);
    const int n = model.mcm.slice.offsets[k];
    if (!(slice_channels(part, 0, n) == slice_channels(et.y_hat, 0, n))) return "prefix differs at k=" + std::to_string(k);
    for (int s = 0; s < k; ++s)
      if (stats.bytes_consumed[s] != c.segments[static_cast<std::size_t>(s + 1)].size()) return "byte accounting";
  }
  return {};
}

std::string check_schedule(const Model&, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (int i = 0; i < 20; ++i) {
    const int h = 2 * (1 + static_cast<int>(rng.next() % 40));
    const int w = 2 * (1 + static_cast<int>(rng.next() % 40));
    if (GcpSchedule::make(h, w).pass_count() != 9) return std::to_string(h) + "x" + std::to_string(w);
  }
  return {};
}

std::string check_range_coder(const Model&, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const ScaleTable& table = ScaleTable::instance();
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(rng.next() % 500);
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::vector<std::span<const std::uint32_t>> cdfs;
    for (int i = 0; i < n; ++i) {
      cdfs.emplace_back(table.cdf(static_cast<int>(rng.next() % kScaleTableSize)));
      idx[static_cast<std::size_t>(i)] = static_cast<int>(rng.next() % kAlphabetSize);
    }
    const auto bytes = encode_stream(idx, cdfs);
    RangeDecoder dec(bytes);
    for (int i = 0; i < n; ++i)
      if (decode_next(dec, cdfs[static_cast<std::size_t>(i)]) != idx[static_cast<std::size_t>(i)]) return "symbol mismatch";
    if (!dec.fully_consumed()) return "unread bytes";
  }
  return {};
}

}  // namespace

int run_selftest(std::uint64_t seed, std::ostream& out) {
  const Model model = Model::from_store(seeded_init(NetworkConfig::tiny(), seed, {0.3}));
  const std::pair<const char*, std::function<std::string(const Model&, std::uint64_t)>> checks[] = {
      {"causality", check_causality},     {"pipeline-determinism", check_pipeline},
      {"rate-consistency", check_rate},   {"progressive-prefix", check_progressive},
      {"schedule-passes", check_schedule}, {"range-coder-roundtrip", check_range_coder},
  };
  int failures = 0;
  for (const auto& [name, fn] : checks) {
    std::string why;
    try {
      why = fn(model, seed);
    } catch (const std::exception& e) {
      why = std::string("threw: ") + e.what();
    }
    if (why.empty()) {
      out << "PASS " << name << "\n";
    } else {
      ++failures;
      out << "FAIL " << name << ": " << why << "\n";
    }
  }
  return failures;
}

}  // namespace tinylic::cli
