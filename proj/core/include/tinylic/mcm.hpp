#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tinylic/config.hpp"
#include "tinylic/entropy.hpp"
#include "tinylic/tensor.hpp"
#include "tinylic/weights.hpp"

namespace tinylic {

inline constexpr int kStageCount = 4;

// Channel grouping of the latent: group g covers
// [offsets[g], offsets[g] + sizes[g]).
struct SliceSpec {
  std::array<int, kStageCount> sizes{};
  std::array<int, kStageCount> offsets{};

  int channels() const { return offsets[kStageCount - 1] + sizes[kStageCount - 1]; }

  // Throws ConfigError on an empty or decreasing group.
  static SliceSpec from_sizes(std::span<const int> sizes);
};

// Cumulative boundary i is floor(C * (1 - cos(pi * i / 2K))).
SliceSpec cosine_slice(int channels, int groups = kStageCount);
// Equal groups; the remainder goes one channel each to the last groups.
SliceSpec linear_slice(int channels, int groups = kStageCount);
SliceSpec slice_for(const NetworkConfig& config);

struct StepMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;

  StepMask() = default;
  StepMask(int h, int w, bool fill = false)
      : height(h), width(w), bits(static_cast<std::size_t>(h) * w, fill ? 1 : 0) {}

  bool at(int h, int w) const { return bits[static_cast<std::size_t>(h) * width + w] != 0; }
  void set(int h, int w, bool v = true) { bits[static_cast<std::size_t>(h) * width + w] = v ? 1 : 0; }
  int count() const;

  friend bool operator==(const StepMask&, const StepMask&) = default;
};

// steps == 4: 2x2 tiling, step 0 at block offset (0,0), 1 at (1,1), 2 at
// (0,1), 3 at (1,0). steps == 2: parity checkerboard, step 0 where h + w is
// even; `complementary` swaps the two steps. steps == 1: all positions.
// Throws ConfigError on odd dims (steps > 1) or an unsupported step count.
std::vector<StepMask> gcp_masks(int height, int width, int steps, bool complementary = false);

// Per-stage step masks: 4-step, 2-step, complementary 2-step, 1 step.
struct GcpSchedule {
  std::array<std::vector<StepMask>, kStageCount> stages;

  static GcpSchedule make(int height, int width);

  int pass_count() const;
  // Union of steps 0 .. step-1 of a stage.
  StepMask available(int stage, int step) const;
};

struct StageWeights {
  ConvKernel cc1;  // 5x5, concat(psi, earlier groups) -> hidden
  ConvKernel cc2;  // 5x5, hidden -> 2n
  std::optional<ConvKernel> sc;  // 3x3, n -> 2n; absent at the last stage
  ConvKernel ep1;  // 1x1
  ConvKernel ep2;  // 1x1
  ConvKernel ep3;  // 1x1, -> 2n split into (mu, raw scale)
};

struct McmWeights {
  SliceSpec slice;
  int prior_channels = 0;
  std::array<StageWeights, kStageCount> stages;

  // Hidden widths are taken from the stored tensors, so a weight file may
  // override the seeded defaults.
  static McmWeights from_store(const WeightStore& store, const NetworkConfig& config);
  static McmWeights zeros(const NetworkConfig& config);
};

void append_mcm_demands(const NetworkConfig& config, std::vector<ParamDemand>& out);

Tensor apply_mask(const Tensor& group, const StepMask& mask);

// g_cc: channel context of a stage from psi and the already coded groups.
Tensor channel_context(int stage, const Tensor& psi, std::span<const Tensor> earlier_groups, const McmWeights& w);

// g_ep(concat(psi, channel context, g_sc(masked current group))). The masked
// group is ignored at the last stage. Scales go through softplus and are
// clamped to the scale-table range.
GaussianParams entropy_params(int stage, const Tensor& psi, const Tensor& channel_ctx,
                              const Tensor& masked_group, const McmWeights& w);

// Full per-stage parameter computation from scratch.
GaussianParams stage_entropy_params(int stage, const Tensor& psi, std::span<const Tensor> earlier_groups,
                                    const Tensor& masked_group, const McmWeights& w);

// Called once per coding pass with the parameters that pass used.
using McmObserver = std::function<void(int stage, int step, const GaussianParams&)>;

struct McmEncoded {
  std::array<std::vector<std::uint8_t>, kStageCount> segments;
  std::array<double, kStageCount> estimated_bits{};
  std::array<std::size_t, kStageCount> symbol_counts{};
  Tensor y_hat;
};

// Codes each stage into its own segment. Symbol order inside a segment:
// step, then channel, then row, then column.
McmEncoded mcm_encode(const Tensor& y, const Tensor& psi, const McmWeights& w,
                      const McmObserver& observer = {});

// Parameters of every step of a stage computed at once from the final
// quantized latent (the parallel encoder view).
std::vector<GaussianParams> one_shot_stage_params(int stage, const Tensor& psi, const Tensor& y_hat,
                                                  const McmWeights& w);

struct McmDecodeStats {
  int passes = 0;
  std::array<std::size_t, kStageCount> bytes_consumed{};
  int stages_decoded = 0;
};

// Decodes the first segments.size() stages (1..4); later groups are filled
// with the mean predicted from the decoded prefix with no spatial context.
Tensor progressive_decode(std::span<const std::vector<std::uint8_t>> segments, const Tensor& psi,
                          const McmWeights& w, McmDecodeStats* stats = nullptr,
                          const McmObserver& observer = {});

Tensor mcm_decode(std::span<const std::vector<std::uint8_t>> segments, const Tensor& psi, const McmWeights& w,
                  McmDecodeStats* stats = nullptr, const McmObserver& observer = {});

}  // namespace tinylic
