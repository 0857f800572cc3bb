#include "tinylic/codec.hpp"

#include <sstream>

#include "tinylic/error.hpp"
#include "tinylic/range_coder.hpp"

namespace tinylic {

namespace {

constexpr const char* kPriorMu = "entropy.z.mu";
constexpr const char* kPriorSigma = "entropy.z.sigma";

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

}  // namespace

void append_prior_demands(const NetworkConfig& config, std::vector<ParamDemand>& out) {
  const auto c = static_cast<std::uint32_t>(config.hyper_channels[1]);
  out.push_back({kPriorMu, {c}, InitKind::kZero, 1});
  out.push_back({kPriorSigma, {c}, InitKind::kOne, 1});
}

std::vector<ParamDemand> model_demands(const NetworkConfig& config) {
  std::vector<ParamDemand> out;
  append_transform_demands(config, out);
  append_mcm_demands(config, out);
  append_prior_demands(config, out);
  return out;
}

Model Model::from_store(const WeightStore& store) {
  Model m;
  m.config = store.config();
  m.transforms = TransformWeights::from_store(store, m.config);
  m.mcm = McmWeights::from_store(store, m.config);
  const std::vector<std::uint32_t> dims{static_cast<std::uint32_t>(m.config.hyper_channels[1])};
  m.z_prior.mu = store.get(kPriorMu, dims).data;
  m.z_prior.sigma = store.get(kPriorSigma, dims).data;
  m.z_prior.validate();
  m.hash = model_hash(store);
  return m;
}

std::vector<std::uint8_t> encode_hyper(const Tensor& z, const FactorizedModel& prior, Tensor& z_hat,
                                       double* estimated_bits) {
  if (z.channels() != prior.channels()) throw ShapeError("hyper latent width does not match its prior");
  const ScaleTable& table = ScaleTable::instance();
  z_hat = Tensor(z.channels(), z.height(), z.width());
  RangeEncoder enc;
  std::vector<int> symbols;
  std::vector<float> sigmas;
  for (int c = 0; c < z.channels(); ++c) {
    const CdfTable& cdf = table.cdf_for(prior.sigma[c]);
    for (int h = 0; h < z.height(); ++h) {
      for (int w = 0; w < z.width(); ++w) {
        const Quantized q = quantize_mixed(z(c, h, w), prior.mu[c]);
        z_hat(c, h, w) = q.recon;
        enc.encode_symbol(symbol_index(q.symbol), cdf);
        symbols.push_back(q.symbol);
        sigmas.push_back(prior.sigma[c]);
      }
    }
  }
  if (estimated_bits) *estimated_bits = estimate_rate(symbols, sigmas);
  return enc.finish();
}

Tensor decode_hyper(std::span<const std::uint8_t> segment, const FactorizedModel& prior, int height, int width) {
  const ScaleTable& table = ScaleTable::instance();
  Tensor z_hat(prior.channels(), height, width);
  RangeDecoder dec(segment);
  for (int c = 0; c < prior.channels(); ++c) {
    const CdfTable& cdf = table.cdf_for(prior.sigma[c]);
    for (int h = 0; h < height; ++h)
      for (int w = 0; w < width; ++w) z_hat(c, h, w) = static_cast<float>(index_symbol(dec.decode_symbol(cdf))) + prior.mu[c];
  }
  if (!dec.fully_consumed()) throw DecodeError("hyper segment has unread trailing bytes");
  return z_hat;
}

Container encode_image(const ImageBuffer& image, const Model& model, int lambda_index, EncodeTrace* trace) {
  lambda_for_index(lambda_index);
  const int padded_h = round_up(image.height, kSpatialMultiple);
  const int padded_w = round_up(image.width, kSpatialMultiple);
  const Tensor x = pad_replicate(image_to_tensor(image), padded_h, padded_w);

  const Tensor y = analysis_main(x, model.transforms);
  const Tensor z = analysis_hyper(y, model.transforms);
  Tensor z_hat;
  double hyper_bits = 0.0;
  Container c;
  c.segments[0] = encode_hyper(z, model.z_prior, z_hat, &hyper_bits);
  const Tensor psi = synthesis_hyper(z_hat, model.transforms);
  McmEncoded coded = mcm_encode(y, psi, model.mcm);
  for (int s = 0; s < kStageCount; ++s) c.segments[static_cast<std::size_t>(s + 1)] = std::move(coded.segments[s]);

  Header& h = c.header;
  h.width = static_cast<std::uint32_t>(image.width);
  h.height = static_cast<std::uint32_t>(image.height);
  h.lambda_index = static_cast<std::uint8_t>(lambda_index);
  h.model_hash = model.hash;
  for (int g = 0; g < kStageCount; ++g) h.group_sizes[g] = static_cast<std::uint16_t>(model.mcm.slice.sizes[g]);
  for (int s = 0; s < kSegmentCount; ++s) {
    h.segment_lengths[s] = static_cast<std::uint32_t>(c.segments[static_cast<std::size_t>(s)].size());
  }

  if (trace) {
    trace->y = y;
    trace->y_hat = coded.y_hat;
    trace->z_hat = z_hat;
    trace->psi = psi;
    trace->hyper_estimated_bits = hyper_bits;
    trace->stage_estimated_bits = coded.estimated_bits;
  }
  return c;
}

ImageBuffer decode_image(const Container& container, const Model& model, std::optional<int> stages,
                         DecodeTrace* trace) {
  const Header& h = container.header;
  if (h.model_hash != model.hash) {
    throw ModelMismatch("stream was encoded with model " + hex64(h.model_hash) + ", weights are " + hex64(model.hash));
  }
  for (int g = 0; g < kStageCount; ++g) {
    if (h.group_sizes[g] != model.mcm.slice.sizes[g]) throw ModelMismatch("stream channel groups differ from model");
  }
  const int groups = stages.value_or(kStageCount);
  if (groups < 1 || groups > kStageCount) throw ConfigError("--stages must be between 1 and 4");

  const int padded_h = round_up(static_cast<int>(h.height), kSpatialMultiple);
  const int padded_w = round_up(static_cast<int>(h.width), kSpatialMultiple);
  const int z_h = padded_h / kSpatialMultiple;
  const int z_w = padded_w / kSpatialMultiple;

  const Tensor z_hat = decode_hyper(container.hyper_segment(), model.z_prior, z_h, z_w);
  const Tensor psi = synthesis_hyper(z_hat, model.transforms);
  McmDecodeStats stats;
  const Tensor y_hat = progressive_decode(container.stage_segments().first(static_cast<std::size_t>(groups)), psi,
                                          model.mcm, &stats);
  const Tensor x_hat = synthesis_main(y_hat, model.transforms);
  if (trace) {
    trace->y_hat = y_hat;
    trace->z_hat = z_hat;
    trace->mcm = stats;
  }
  return tensor_to_image(crop(x_hat, static_cast<int>(h.height), static_cast<int>(h.width)));
}

}  // namespace tinylic
