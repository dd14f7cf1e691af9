#pragma once

#include "data/sample.hpp"
#include "phantom/scene.hpp"
#include "probes/reports.hpp"
#include "seg/unet.hpp"

namespace slab::probes {

// Per-image dice under marked and clean conditions for the same underlying
// scenes, paired by sample id.
PairedEvalReport paired_shortcut_eval(const SegModel& model, const Dataset& marked,
                                      const Dataset& clean, float threshold = 0.5f);

struct FrameSequence {
    std::string id;
    std::vector<Tensor> frames;  // [C,H,W] each; the scene underneath is frozen
    std::optional<Tensor> gt_mask;
};

// Dice of every frame's prediction against the final frame's prediction; the
// endpoint score is the curve at t=0 and the aggregate runs over sequences.
StabilityReport frame_stability(const SegModel& model, const std::vector<FrameSequence>& sequences,
                                float threshold = 0.5f);

// Renders one frozen lesion at n_steps positions from the frame center to a
// border-touching position along the diagonal ray toward the bottom-right
// corner (background stays put) and records foreground recall and dice per
// step.
SweepReport translation_sweep(const SegModel& model, const phantom::SceneSpec& spec, int n_steps,
                              std::uint64_t seed, float threshold = 0.5f);

// Input-gradient saliency: per-pixel L2 norm over channels of
// d(sum of foreground logits)/d(input). Nonnegative, input-sized.
Tensor saliency_map(const SegModel& model, const Tensor& image);

// Channel-weighted encoder variant: bottleneck activations weighted by their
// spatially averaged gradients, rectified, upsampled to the input size.
Tensor saliency_cam(const SegModel& model, const Tensor& image);

}  // namespace slab::probes
