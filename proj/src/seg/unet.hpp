#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tensor/ops.hpp"
#include "tensor/tensor.hpp"

namespace slab {

struct UNetConfig {
    int in_channels = 1;
    int depth = 3;           // encoder levels (one 2x pool per level)
    int base_channels = 16;  // doubled per level
    PaddingMode padding_mode = PaddingMode::Zeros;
    int kernel_size = 3;
};

// Named parameter set. Parameter order is creation order and is stable across
// save/load; forward is deterministic given params and input.
struct SegModel {
    UNetConfig config;
    std::vector<std::pair<std::string, Tensor>> params;

    Tensor& param(const std::string& name);
    const Tensor& param(const std::string& name) const;
};

// Input region covered by the network output. Full frame for padded modes;
// an interior window in Valid mode.
struct Footprint {
    int y0 = 0, x0 = 0, h = 0, w = 0;
};

// Kaiming-uniform weights scaled by fan-in, zero biases; deterministic per
// seed.
SegModel init_unet(const UNetConfig& config, std::uint64_t seed);

// Encoder channel plan, e.g. depth 3 / base 16 -> {16, 32, 64}.
std::vector<int> encoder_channel_plan(const UNetConfig& config);

// Probabilities in (0,1), shape [B,1,H,W] for padded modes; Valid mode yields
// the smaller centered footprint reported by output_footprint().
Tensor forward(const SegModel& model, const Tensor& batch);

struct ForwardTrace {
    Tensor logits;      // pre-sigmoid output
    Tensor bottleneck;  // deepest encoder activation, used by cam-style saliency
};
ForwardTrace forward_trace(const SegModel& model, const Tensor& batch);

// Validates the layer-by-layer shape arithmetic for an HxW input and returns
// the covered footprint. Throws UsageError when the plan is infeasible
// (odd size at a pooling stage, or a level annihilated in Valid mode).
Footprint output_footprint(const UNetConfig& config, int h, int w);

struct PredictedMask {
    Tensor mask;     // [H,W] in {0,1}, full input frame
    Footprint covered;
    bool full_coverage = true;  // false when uncovered border pixels were
                                // labeled background by convention
};

// Thresholded prediction (probs >= threshold). In Valid mode the prediction
// is embedded at its covered footprint and the outside is background.
PredictedMask predict_mask(const SegModel& model, const Tensor& image, float threshold = 0.5f);

}  // namespace slab
