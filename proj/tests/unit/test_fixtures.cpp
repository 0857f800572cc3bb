#include <doctest.h>

#include <json.hpp>
#include <fstream>

#include "tinylic/codec.hpp"

using namespace tinylic;

namespace {

const std::filesystem::path kDir = TINYLIC_FIXTURE_DIR;

nlohmann::json manifest() {
  std::ifstream is(kDir / "manifest.json");
  return nlohmann::json::parse(is);
}

std::uint64_t hex(const std::string& s) { return std::stoull(s, nullptr, 16); }

Model fixture_model(const nlohmann::json& m) {
  const auto& w = m["weights"];
  return Model::from_store(seeded_init(NetworkConfig::named(w["profile"]), w["seed"], {w["amplitude"].get<double>()}));
}

}  // namespace

TEST_CASE("fixture header matches manifest") {
  const auto m = manifest();
  const auto bytes = read_file_bytes(kDir / m["stream"].get<std::string>());
  CHECK(bytes.size() == m["file_size"].get<std::size_t>());
  const Container c = read_container(bytes);
  CHECK(c.header.width == m["width"].get<std::uint32_t>());
  CHECK(c.header.height == m["height"].get<std::uint32_t>());
  CHECK(c.header.lambda_index == m["lambda_index"].get<int>());
  CHECK(c.header.model_hash == hex(m["model_hash"]));
  for (int g = 0; g < 4; ++g) CHECK(c.header.group_sizes[g] == m["group_sizes"][g].get<int>());
  for (int s = 0; s < kSegmentCount; ++s) CHECK(c.segments[static_cast<std::size_t>(s)].size() == m["segment_lengths"][s].get<std::size_t>());
  const InspectReport r = inspect(bytes);
  double sum = 0.0;
  for (const auto& e : r.entries) sum += e.bpp;
  CHECK(std::abs(sum - r.total_bpp) < 1e-9);
}

TEST_CASE("fixture stream decodes to the recorded reconstruction") {
  const auto m = manifest();
  const Model model = fixture_model(m);
  CHECK(model.hash == hex(m["model_hash"]));
  const Container c = read_container(read_file_bytes(kDir / m["stream"].get<std::string>()));
  CHECK(image_hash(decode_image(c, model)) == hex(m["reconstruction_hash"]));
}

TEST_CASE("fixture image re-encodes to the same bytes") {
  const auto m = manifest();
  const Model model = fixture_model(m);
  const ImageBuffer img = read_ppm(kDir / m["image"].get<std::string>());
  CHECK(write_container(encode_image(img, model, m["lambda_index"])) == read_file_bytes(kDir / m["stream"].get<std::string>()));
}
