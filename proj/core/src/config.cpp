#include "tinylic/config.hpp"

#include <charconv>
#include <numeric>
#include <sstream>

#include "tinylic/error.hpp"

namespace tinylic {

namespace {

std::string join(const auto& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<int> parse_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  if (value.empty()) return out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const std::size_t comma = value.find(',', pos);
    const std::string item = value.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    int v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw ConfigError("profile key '" + key + "': bad integer '" + item + "'");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

template <std::size_t N>
std::array<int, N> parse_array(const std::string& key, const std::string& value) {
  const std::vector<int> list = parse_list(key, value);
  if (list.size() != N) {
    throw ConfigError("profile key '" + key + "' expects " + std::to_string(N) + " values");
  }
  std::array<int, N> out{};
  std::copy(list.begin(), list.end(), out.begin());
  return out;
}

int parse_int(const std::string& key, const std::string& value) { return parse_array<1>(key, value)[0]; }

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

NetworkConfig NetworkConfig::default_profile() { return NetworkConfig{}; }

NetworkConfig NetworkConfig::tiny() {
  NetworkConfig c;
  c.main_channels = {8, 12, 16, 20};
  c.main_depths = {1, 1, 1, 1};
  c.main_heads = {2, 2, 4, 4};
  c.main_window = 3;
  c.hyper_channels = {12, 12};
  c.hyper_depths = {1, 1};
  c.hyper_heads = 2;
  c.hyper_window = 3;
  c.prior_channels = 2 * c.main_channels[3];
  return c;
}

NetworkConfig NetworkConfig::named(const std::string& name) {
  if (name == "default") return default_profile();
  if (name == "tiny") return tiny();
  throw ConfigError("unknown profile '" + name + "' (expected 'default' or 'tiny')");
}

void NetworkConfig::validate() const {
  for (int i = 0; i < 4; ++i) {
    require(main_channels[i] >= 1, "main channel widths must be >= 1");
    require(main_depths[i] >= 0, "main depths must be >= 0");
    require(main_heads[i] >= 1 && main_channels[i] % main_heads[i] == 0,
            "main head count " + std::to_string(main_heads[i]) + " must divide width " +
                std::to_string(main_channels[i]));
  }
  for (int i = 0; i < 2; ++i) {
    require(hyper_channels[i] >= 1, "hyper channel widths must be >= 1");
    require(hyper_depths[i] >= 0, "hyper depths must be >= 0");
    require(hyper_heads >= 1 && hyper_channels[i] % hyper_heads == 0,
            "hyper head count must divide hyper widths");
  }
  require(main_window >= 1 && main_window % 2 == 1, "main window must be odd");
  require(hyper_window >= 1 && hyper_window % 2 == 1, "hyper window must be odd");
  require(prior_channels >= 1, "prior channels must be >= 1");
  for (int k : {first_kernel, inner_kernel}) require(k == 1 || k == 3 || k == 5, "kernel sizes must be 1, 3 or 5");
  if (!group_sizes.empty()) {
    require(group_sizes.size() == 4, "explicit group_sizes must list 4 groups");
    for (std::size_t i = 0; i < 4; ++i) {
      require(group_sizes[i] >= 1, "channel groups must be non-empty");
      require(i == 0 || group_sizes[i] >= group_sizes[i - 1], "channel groups must be nondecreasing");
    }
    require(std::accumulate(group_sizes.begin(), group_sizes.end(), 0) == latent_channels(),
            "group_sizes must sum to the latent width");
  }
}

std::string NetworkConfig::to_profile_text() const {
  std::ostringstream os;
  os << "main_channels=" << join(main_channels) << '\n'
     << "main_depths=" << join(main_depths) << '\n'
     << "main_heads=" << join(main_heads) << '\n'
     << "main_window=" << main_window << '\n'
     << "hyper_channels=" << join(hyper_channels) << '\n'
     << "hyper_depths=" << join(hyper_depths) << '\n'
     << "hyper_heads=" << hyper_heads << '\n'
     << "hyper_window=" << hyper_window << '\n'
     << "prior_channels=" << prior_channels << '\n'
     << "first_kernel=" << first_kernel << '\n'
     << "inner_kernel=" << inner_kernel << '\n'
     << "slicing=" << (slicing == SlicingMode::kCosine ? "cosine" : "linear") << '\n'
     << "group_sizes=" << join(group_sizes) << '\n';
  return os.str();
}

NetworkConfig NetworkConfig::from_profile_text(const std::string& text) {
  NetworkConfig c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("profile line without '=': " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "main_channels") c.main_channels = parse_array<4>(key, value);
    else if (key == "main_depths") c.main_depths = parse_array<4>(key, value);
    else if (key == "main_heads") c.main_heads = parse_array<4>(key, value);
    else if (key == "main_window") c.main_window = parse_int(key, value);
    else if (key == "hyper_channels") c.hyper_channels = parse_array<2>(key, value);
    else if (key == "hyper_depths") c.hyper_depths = parse_array<2>(key, value);
    else if (key == "hyper_heads") c.hyper_heads = parse_int(key, value);
    else if (key == "hyper_window") c.hyper_window = parse_int(key, value);
    else if (key == "prior_channels") c.prior_channels = parse_int(key, value);
    else if (key == "first_kernel") c.first_kernel = parse_int(key, value);
    else if (key == "inner_kernel") c.inner_kernel = parse_int(key, value);
    else if (key == "slicing") {
      if (value == "cosine") c.slicing = SlicingMode::kCosine;
      else if (value == "linear") c.slicing = SlicingMode::kLinear;
      else throw ConfigError("unknown slicing mode '" + value + "'");
    } else if (key == "group_sizes") c.group_sizes = parse_list(key, value);
    else throw ConfigError("unknown profile key '" + key + "'");
  }
  c.validate();
  return c;
}

double lambda_for_index(int index) {
  if (index < 0 || index >= static_cast<int>(kLambdaGrid.size())) {
    throw ConfigError("lambda index must be in [0, 7]");
  }
  return kLambdaGrid[static_cast<std::size_t>(index)];
}

}  // namespace tinylic
