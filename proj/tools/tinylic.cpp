// tinylic command-line tool: encode, decode, inspect, metrics, selftest,
// plus helpers to write seeded weight files and list parameter demands.
#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <json.hpp>

#include "selftest.hpp"
#include "tinylic/codec.hpp"
#include "tinylic/error.hpp"
#include "tinylic/metrics.hpp"

namespace {

using namespace tinylic;

enum Exit : int { kOk = 0, kOther = 1, kFormat = 2, kMismatch = 3, kDecode = 4 };

Model load_model(const std::string& path) { return Model::from_store(read_weights_file(path)); }

int cmd_enc(const std::string& in, const std::string& weights, int q, const std::string& out) {
  const ImageBuffer img = read_ppm(in);
  const Model model = load_model(weights);
  const auto bytes = write_container(encode_image(img, model, q));
  write_file_bytes(out, bytes);
  std::cout << out << ": " << bytes.size() << " bytes, "
            << std::fixed << std::setprecision(4) << 8.0 * static_cast<double>(bytes.size()) / (double(img.width) * img.height)
            << " bpp\n";
  return kOk;
}

int cmd_dec(const std::string& in, const std::string& weights, std::optional<int> stages, const std::string& out) {
  const Container c = read_container(read_file_bytes(in));
  const Model model = load_model(weights);
  write_ppm(out, decode_image(c, model, stages));
  return kOk;
}

int cmd_inspect(const std::string& in, bool as_json) {
  const InspectReport r = inspect(read_file_bytes(in));
  if (!as_json) {
    std::cout << format_report(r);
    return kOk;
  }
  nlohmann::json j;
  j["width"] = r.header.width;
  j["height"] = r.header.height;
  j["lambda_index"] = r.header.lambda_index;
  j["model_hash"] = r.header.model_hash;
  j["group_sizes"] = r.header.group_sizes;
  for (const auto& e : r.entries) j["segments"].push_back({{"name", e.name}, {"bytes", e.bytes}, {"bpp", e.bpp}});
  j["total_bytes"] = r.total_bytes;
  j["total_bpp"] = r.total_bpp;
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int cmd_metrics(const std::string& ref_path, const std::string& test_path, std::optional<int> lambda_index,
                const std::string& stream) {
  const ImageBuffer ref = read_ppm(ref_path);
  const ImageBuffer test = read_ppm(test_path);
  double bpp = 0.0;
  if (!stream.empty()) bpp = inspect(read_file_bytes(stream)).total_bpp;
  const RdReport r = rd_report(ref, test, bpp);
  std::cout << std::fixed << std::setprecision(4);
  if (!stream.empty()) std::cout << "bpp      " << r.bpp << "\n";
  std::cout << "psnr     " << r.psnr << " dB\n";
  if (r.ms_ssim) {
    std::cout << "ms-ssim  " << std::setprecision(6) << *r.ms_ssim << "\n" << std::setprecision(4);
  } else {
    std::cout << "ms-ssim  n/a (needs " << kMsSsimMinSide << "x" << kMsSsimMinSide << ")\n";
  }
  if (lambda_index) {
    const double lambda = lambda_for_index(*lambda_index);
    std::cout << "j_cost   " << std::setprecision(6) << j_cost(r, lambda) << " (lambda " << lambda << ")\n";
  }
  return kOk;
}

int cmd_init(const std::string& profile, std::uint64_t seed, double amplitude, const std::string& out) {
  const WeightStore store = seeded_init(NetworkConfig::named(profile), seed, {amplitude});
  write_weights_file(out, store);
  std::cout << out << ": " << store.size() << " tensors, " << store.parameter_count() << " parameters, hash 0x"
            << std::hex << model_hash(store) << std::dec << "\n";
  return kOk;
}

int cmd_demands(const std::string& profile) {
  for (const ParamDemand& d : model_demands(NetworkConfig::named(profile))) {
    std::cout << d.name;
    for (std::size_t i = 0; i < d.dims.size(); ++i) std::cout << (i ? "x" : " ") << d.dims[i];
    std::cout << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tinylic: learned image codec with neighborhood-attention transforms"};
  app.require_subcommand(1);

  std::string in, out, weights, ref, test, stream, profile = "tiny";
  int quality = 0;
  std::optional<int> stages;
  std::optional<int> lambda_index;
  std::uint64_t seed = 0;
  double amplitude = InitOptions{}.amplitude;
  bool as_json = false;

  auto* enc = app.add_subcommand("enc", "encode a PPM image");
  enc->add_option("-i,--input", in, "input .ppm")->required()->check(CLI::ExistingFile);
  enc->add_option("-w,--weights", weights, "model .tlwt")->required()->check(CLI::ExistingFile);
  enc->add_option("-q,--quality", quality, "lambda index")->required()->check(CLI::Range(0, 7));
  enc->add_option("-o,--output", out, "output .tlic")->required();

  auto* dec = app.add_subcommand("dec", "decode a .tlic stream");
  dec->add_option("-i,--input", in, "input .tlic")->required()->check(CLI::ExistingFile);
  dec->add_option("-w,--weights", weights, "model .tlwt")->required()->check(CLI::ExistingFile);
  dec->add_option("-o,--output", out, "output .ppm")->required();
  dec->add_option("--stages", stages, "decode only the first k channel groups")->check(CLI::Range(1, 4));

  auto* ins = app.add_subcommand("inspect", "print header fields and per-segment rates");
  ins->add_option("-i,--input", in, "input .tlic")->required()->check(CLI::ExistingFile);
  ins->add_flag("--json", as_json, "machine-readable output");

  auto* met = app.add_subcommand("metrics", "PSNR / MS-SSIM / rate-distortion cost");
  met->add_option("--ref", ref, "reference .ppm")->required()->check(CLI::ExistingFile);
  met->add_option("--test", test, "test .ppm")->required()->check(CLI::ExistingFile);
  met->add_option("--lambda-index", lambda_index, "report J = bpp + lambda * MSE")->check(CLI::Range(0, 7));
  met->add_option("--stream", stream, ".tlic the test image came from (for bpp)")->check(CLI::ExistingFile);

  auto* self = app.add_subcommand("selftest", "run the seeded-model property checks");
  self->add_option("--seed", seed, "weight and input seed")->required();

  auto* init = app.add_subcommand("init", "write a seeded weight file");
  init->add_option("--profile", profile, "tiny or default");
  init->add_option("--seed", seed, "seed")->required();
  init->add_option("--amplitude", amplitude, "uniform init amplitude");
  init->add_option("-o,--output", out, "output .tlwt")->required();

  auto* dem = app.add_subcommand("demands", "list canonical parameter names and dims");
  dem->add_option("--profile", profile, "tiny or default");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*enc) return cmd_enc(in, weights, quality, out);
    if (*dec) return cmd_dec(in, weights, stages, out);
    if (*ins) return cmd_inspect(in, as_json);
    if (*met) return cmd_metrics(ref, test, lambda_index, stream);
    if (*self) return tinylic::cli::run_selftest(seed, std::cout) == 0 ? kOk : kOther;
    if (*init) return cmd_init(profile, seed, amplitude, out);
    if (*dem) return cmd_demands(profile);
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kFormat;
  } catch (const ModelMismatch& e) {
    std::cerr << "model mismatch: " << e.what() << "\n";
    return kMismatch;
  } catch (const DecodeError& e) {
    std::cerr << "decode error: " << e.what() << "\n";
    return kDecode;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}
