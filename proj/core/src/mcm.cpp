#include "tinylic/mcm.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "params.hpp"
#include "tinylic/error.hpp"
#include "tinylic/range_coder.hpp"

namespace tinylic {

namespace {

std::string stage_name(int stage) { return "mcm.stage" + std::to_string(stage + 1); }

int context_width(const SliceSpec& slice, int prior_channels, int stage) {
  return prior_channels + slice.offsets[stage];
}

int ep_input_width(const SliceSpec& slice, int prior_channels, int stage) {
  const int n2 = 2 * slice.sizes[stage];
  return prior_channels + n2 + (stage + 1 < kStageCount ? n2 : 0);
}

double softplus(double x) { return x > 20.0 ? x : std::log1p(std::exp(x)); }

// Runs a 1x1/5x5 conv, optionally followed by GELU.
Tensor conv_act(const Tensor& x, const ConvKernel& k, bool act) {
  Tensor out = conv2d(x, k);
  if (act) gelu_inplace(out.data());
  return out;
}

void check_aligned(const Tensor& psi, int h, int w) {
  if (psi.height() != h || psi.width() != w) throw ShapeError("mcm: latent and prior are not spatially aligned");
}

// Positions of one step in canonical order (row-major).
std::vector<std::pair<int, int>> step_positions(const StepMask& m) {
  std::vector<std::pair<int, int>> out;
  for (int h = 0; h < m.height; ++h)
    for (int w = 0; w < m.width; ++w)
      if (m.at(h, w)) out.emplace_back(h, w);
  return out;
}

}  // namespace

SliceSpec SliceSpec::from_sizes(std::span<const int> sizes) {
  if (sizes.size() != kStageCount) throw ConfigError("slice needs exactly 4 groups");
  SliceSpec s;
  int offset = 0;
  for (int g = 0; g < kStageCount; ++g) {
    if (sizes[g] < 1) throw ConfigError("channel group " + std::to_string(g + 1) + " would be empty");
    if (g > 0 && sizes[g] < sizes[g - 1]) throw ConfigError("channel groups must be nondecreasing");
    s.sizes[g] = sizes[g];
    s.offsets[g] = offset;
    offset += sizes[g];
  }
  return s;
}

SliceSpec cosine_slice(int channels, int groups) {
  if (groups != kStageCount) throw ConfigError("cosine slicing supports exactly 4 groups");
  std::array<int, kStageCount + 1> cum{};
  for (int i = 1; i < groups; ++i) {
    const double frac = 1.0 - std::cos(std::numbers::pi * i / (2.0 * groups));
    cum[i] = static_cast<int>(std::floor(channels * frac));
  }
  cum[groups] = channels;
  std::array<int, kStageCount> sizes{};
  for (int i = 0; i < groups; ++i) sizes[i] = cum[i + 1] - cum[i];
  return SliceSpec::from_sizes(sizes);
}

SliceSpec linear_slice(int channels, int groups) {
  if (groups != kStageCount) throw ConfigError("linear slicing supports exactly 4 groups");
  const int base = channels / groups;
  const int rem = channels % groups;
  std::array<int, kStageCount> sizes{};
  for (int i = 0; i < groups; ++i) sizes[i] = base + (i >= groups - rem ? 1 : 0);
  return SliceSpec::from_sizes(sizes);
}

SliceSpec slice_for(const NetworkConfig& config) {
  if (!config.group_sizes.empty()) return SliceSpec::from_sizes(config.group_sizes);
  return config.slicing == SlicingMode::kCosine ? cosine_slice(config.latent_channels())
                                                : linear_slice(config.latent_channels());
}

int StepMask::count() const {
  int n = 0;
  for (auto b : bits) n += b;
  return n;
}

std::vector<StepMask> gcp_masks(int height, int width, int steps, bool complementary) {
  if (height < 1 || width < 1) throw ConfigError("gcp_masks: dims must be >= 1");
  if (steps == 1) return {StepMask(height, width, true)};
  if (steps != 2 && steps != 4) throw ConfigError("gcp_masks: steps must be 1, 2 or 4");
  if (height % 2 != 0 || width % 2 != 0) throw ConfigError("gcp_masks: latent dims must be even");
  std::vector<StepMask> masks(static_cast<std::size_t>(steps), StepMask(height, width));
  for (int h = 0; h < height; ++h) {
    for (int w = 0; w < width; ++w) {
      int step;
      if (steps == 4) {
        static constexpr int kTile[2][2] = {{0, 2}, {3, 1}};  // [row parity][col parity]
        step = kTile[h % 2][w % 2];
      } else {
        step = (h + w) % 2;
        if (complementary) step = 1 - step;
      }
      masks[static_cast<std::size_t>(step)].set(h, w);
    }
  }
  return masks;
}

GcpSchedule GcpSchedule::make(int height, int width) {
  GcpSchedule s;
  s.stages[0] = gcp_masks(height, width, 4);
  s.stages[1] = gcp_masks(height, width, 2, false);
  s.stages[2] = gcp_masks(height, width, 2, true);
  s.stages[3] = gcp_masks(height, width, 1);
  return s;
}

int GcpSchedule::pass_count() const {
  int n = 0;
  for (const auto& st : stages) n += static_cast<int>(st.size());
  return n;
}

StepMask GcpSchedule::available(int stage, int step) const {
  const auto& masks = stages[static_cast<std::size_t>(stage)];
  StepMask avail(masks.front().height, masks.front().width);
  for (int k = 0; k < step; ++k) {
    for (std::size_t i = 0; i < avail.bits.size(); ++i) avail.bits[i] |= masks[static_cast<std::size_t>(k)].bits[i];
  }
  return avail;
}

void append_mcm_demands(const NetworkConfig& config, std::vector<ParamDemand>& out) {
  const SliceSpec slice = slice_for(config);
  const int p = config.prior_channels;
  for (int s = 0; s < kStageCount; ++s) {
    const std::string pre = stage_name(s);
    const int n2 = 2 * slice.sizes[s];
    detail::demand_conv(out, pre + ".cc.conv1", n2, context_width(slice, p, s), 5);
    detail::demand_conv(out, pre + ".cc.conv2", n2, n2, 5);
    if (s + 1 < kStageCount) detail::demand_conv(out, pre + ".sc.conv", n2, slice.sizes[s], 3);
    detail::demand_conv(out, pre + ".ep.conv1", n2, ep_input_width(slice, p, s), 1);
    detail::demand_conv(out, pre + ".ep.conv2", n2, n2, 1);
    detail::demand_conv(out, pre + ".ep.conv3", n2, n2, 1);
  }
}

McmWeights McmWeights::from_store(const WeightStore& store, const NetworkConfig& config) {
  McmWeights w;
  w.slice = slice_for(config);
  w.prior_channels = config.prior_channels;
  const int p = config.prior_channels;
  auto hidden = [&](const std::string& name) {
    const WeightTensor& t = store.get(name);
    if (t.dims.size() != 4) throw ShapeError("parameter '" + name + "' must be rank 4");
    return static_cast<int>(t.dims[0]);
  };
  for (int s = 0; s < kStageCount; ++s) {
    const std::string pre = stage_name(s);
    const int n = w.slice.sizes[s];
    StageWeights& st = w.stages[s];
    const int cc_hidden = hidden(pre + ".cc.conv1.weight");
    st.cc1 = detail::load_conv(store, pre + ".cc.conv1", cc_hidden, context_width(w.slice, p, s), 5, 1);
    st.cc2 = detail::load_conv(store, pre + ".cc.conv2", 2 * n, cc_hidden, 5, 1);
    if (s + 1 < kStageCount) st.sc = detail::load_conv(store, pre + ".sc.conv", 2 * n, n, 3, 1);
    const int cc_out = 2 * n;
    const int ep_in = p + cc_out + (st.sc ? 2 * n : 0);
    const int h1 = hidden(pre + ".ep.conv1.weight");
    const int h2 = hidden(pre + ".ep.conv2.weight");
    st.ep1 = detail::load_conv(store, pre + ".ep.conv1", h1, ep_in, 1, 1);
    st.ep2 = detail::load_conv(store, pre + ".ep.conv2", h2, h1, 1, 1);
    st.ep3 = detail::load_conv(store, pre + ".ep.conv3", 2 * n, h2, 1, 1);
  }
  return w;
}

McmWeights McmWeights::zeros(const NetworkConfig& config) {
  McmWeights w;
  w.slice = slice_for(config);
  w.prior_channels = config.prior_channels;
  for (int s = 0; s < kStageCount; ++s) {
    const int n2 = 2 * w.slice.sizes[s];
    StageWeights& st = w.stages[s];
    st.cc1 = ConvKernel::make(n2, context_width(w.slice, w.prior_channels, s), 5, 1);
    st.cc2 = ConvKernel::make(n2, n2, 5, 1);
    if (s + 1 < kStageCount) st.sc = ConvKernel::make(n2, w.slice.sizes[s], 3, 1);
    st.ep1 = ConvKernel::make(n2, ep_input_width(w.slice, w.prior_channels, s), 1, 1);
    st.ep2 = ConvKernel::make(n2, n2, 1, 1);
    st.ep3 = ConvKernel::make(n2, n2, 1, 1);
  }
  return w;
}

Tensor apply_mask(const Tensor& group, const StepMask& mask) {
  if (group.height() != mask.height || group.width() != mask.width) throw ShapeError("apply_mask: dims differ");
  Tensor out = group;
  for (int c = 0; c < out.channels(); ++c) {
    auto plane = out.plane(c);
    for (std::size_t i = 0; i < plane.size(); ++i) {
      if (!mask.bits[i]) plane[i] = 0.0f;
    }
  }
  return out;
}

Tensor channel_context(int stage, const Tensor& psi, std::span<const Tensor> earlier_groups, const McmWeights& w) {
  if (static_cast<int>(earlier_groups.size()) != stage) {
    throw ShapeError("channel_context: stage " + std::to_string(stage + 1) + " needs " + std::to_string(stage) +
                     " earlier groups");
  }
  std::vector<const Tensor*> parts{&psi};
  for (const Tensor& g : earlier_groups) parts.push_back(&g);
  const Tensor input = concat_channels(parts);
  const StageWeights& st = w.stages[static_cast<std::size_t>(stage)];
  return conv_act(conv_act(input, st.cc1, true), st.cc2, false);
}

GaussianParams entropy_params(int stage, const Tensor& psi, const Tensor& channel_ctx, const Tensor& masked_group,
                              const McmWeights& w) {
  const StageWeights& st = w.stages[static_cast<std::size_t>(stage)];
  const int n = w.slice.sizes[static_cast<std::size_t>(stage)];
  Tensor input;
  if (st.sc) {
    if (masked_group.channels() != n) throw ShapeError("entropy_params: spatial input has wrong channel count");
    const Tensor spatial = conv2d(masked_group, *st.sc);
    const Tensor* parts[] = {&psi, &channel_ctx, &spatial};
    input = concat_channels(parts);
  } else {
    const Tensor* parts[] = {&psi, &channel_ctx};
    input = concat_channels(parts);
  }
  const Tensor raw = conv_act(conv_act(conv_act(input, st.ep1, true), st.ep2, true), st.ep3, false);
  GaussianParams params{slice_channels(raw, 0, n), slice_channels(raw, n, n)};
  for (float& s : params.sigma.data()) s = static_cast<float>(clamp_scale(softplus(s)));
  return params;
}

GaussianParams stage_entropy_params(int stage, const Tensor& psi, std::span<const Tensor> earlier_groups,
                                    const Tensor& masked_group, const McmWeights& w) {
  return entropy_params(stage, psi, channel_context(stage, psi, earlier_groups, w), masked_group, w);
}

McmEncoded mcm_encode(const Tensor& y, const Tensor& psi, const McmWeights& w, const McmObserver& observer) {
  if (y.channels() != w.slice.channels()) throw ShapeError("mcm_encode: latent width does not match slicing");
  if (psi.channels() != w.prior_channels) throw ShapeError("mcm_encode: prior width mismatch");
  check_aligned(psi, y.height(), y.width());
  const GcpSchedule sched = GcpSchedule::make(y.height(), y.width());
  const ScaleTable& table = ScaleTable::instance();

  McmEncoded result;
  std::vector<Tensor> groups_hat;
  for (int s = 0; s < kStageCount; ++s) {
    const int n = w.slice.sizes[s];
    const Tensor group = slice_channels(y, w.slice.offsets[s], n);
    const Tensor cc = channel_context(s, psi, groups_hat, w);
    Tensor group_hat(n, y.height(), y.width());
    RangeEncoder enc;
    std::vector<int> symbols;
    std::vector<float> sigmas;
    const auto& steps = sched.stages[s];
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const StepMask avail = sched.available(s, static_cast<int>(k));
      const GaussianParams params = entropy_params(s, psi, cc, apply_mask(group_hat, avail), w);
      if (observer) observer(s, static_cast<int>(k), params);
      const auto positions = step_positions(steps[k]);
      for (int c = 0; c < n; ++c) {
        for (const auto& [h, x] : positions) {
          const Quantized q = quantize_mixed(group(c, h, x), params.mu(c, h, x));
          group_hat(c, h, x) = q.recon;
          const float sigma = params.sigma(c, h, x);
          enc.encode_symbol(symbol_index(q.symbol), table.cdf_for(sigma));
          symbols.push_back(q.symbol);
          sigmas.push_back(sigma);
        }
      }
    }
    result.segments[s] = enc.finish();
    result.estimated_bits[s] = estimate_rate(symbols, sigmas);
    result.symbol_counts[s] = symbols.size();
    groups_hat.push_back(std::move(group_hat));
  }
  std::vector<const Tensor*> parts;
  for (const Tensor& g : groups_hat) parts.push_back(&g);
  result.y_hat = concat_channels(parts);
  return result;
}

std::vector<GaussianParams> one_shot_stage_params(int stage, const Tensor& psi, const Tensor& y_hat,
                                                  const McmWeights& w) {
  const GcpSchedule sched = GcpSchedule::make(y_hat.height(), y_hat.width());
  std::vector<Tensor> earlier;
  for (int g = 0; g < stage; ++g) earlier.push_back(slice_channels(y_hat, w.slice.offsets[g], w.slice.sizes[g]));
  const Tensor current = slice_channels(y_hat, w.slice.offsets[stage], w.slice.sizes[stage]);
  const Tensor cc = channel_context(stage, psi, earlier, w);
  std::vector<GaussianParams> out;
  const auto& steps = sched.stages[static_cast<std::size_t>(stage)];
  for (std::size_t k = 0; k < steps.size(); ++k) {
    out.push_back(entropy_params(stage, psi, cc, apply_mask(current, sched.available(stage, static_cast<int>(k))), w));
  }
  return out;
}

Tensor progressive_decode(std::span<const std::vector<std::uint8_t>> segments, const Tensor& psi,
                          const McmWeights& w, McmDecodeStats* stats, const McmObserver& observer) {
  const int available = static_cast<int>(segments.size());
  if (available < 1 || available > kStageCount) throw ConfigError("progressive decode needs 1 to 4 segments");
  if (psi.channels() != w.prior_channels) throw ShapeError("mcm_decode: prior width mismatch");
  const int height = psi.height();
  const int width = psi.width();
  const GcpSchedule sched = GcpSchedule::make(height, width);
  const ScaleTable& table = ScaleTable::instance();

  McmDecodeStats local;
  std::vector<Tensor> groups_hat;
  for (int s = 0; s < kStageCount; ++s) {
    const int n = w.slice.sizes[s];
    const Tensor cc = channel_context(s, psi, groups_hat, w);
    Tensor group_hat(n, height, width);
    if (s >= available) {
      // No segment: fill with the mean predicted without spatial context.
      group_hat = entropy_params(s, psi, cc, group_hat, w).mu;
      groups_hat.push_back(std::move(group_hat));
      continue;
    }
    RangeDecoder dec(segments[static_cast<std::size_t>(s)]);
    const auto& steps = sched.stages[s];
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const StepMask avail = sched.available(s, static_cast<int>(k));
      const GaussianParams params = entropy_params(s, psi, cc, apply_mask(group_hat, avail), w);
      if (observer) observer(s, static_cast<int>(k), params);
      ++local.passes;
      const auto positions = step_positions(steps[k]);
      for (int c = 0; c < n; ++c) {
        for (const auto& [h, x] : positions) {
          const int index = dec.decode_symbol(table.cdf_for(params.sigma(c, h, x)));
          group_hat(c, h, x) = static_cast<float>(index_symbol(index)) + params.mu(c, h, x);
        }
      }
    }
    if (!dec.fully_consumed()) {
      throw DecodeError("stage " + std::to_string(s + 1) + " segment has " +
                        std::to_string(dec.size() - dec.bytes_consumed()) + " unread trailing bytes");
    }
    local.bytes_consumed[s] = dec.bytes_consumed();
    local.stages_decoded = s + 1;
    groups_hat.push_back(std::move(group_hat));
  }
  if (stats) *stats = local;
  std::vector<const Tensor*> parts;
  for (const Tensor& g : groups_hat) parts.push_back(&g);
  return concat_channels(parts);
}

Tensor mcm_decode(std::span<const std::vector<std::uint8_t>> segments, const Tensor& psi, const McmWeights& w,
                  McmDecodeStats* stats, const McmObserver& observer) {
  if (segments.size() != kStageCount) throw ConfigError("mcm_decode needs all 4 stage segments");
  return progressive_decode(segments, psi, w, stats, observer);
}

}  // namespace tinylic
