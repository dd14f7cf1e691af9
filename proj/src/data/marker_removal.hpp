#pragma once

#include <array>

#include "tensor/tensor.hpp"

namespace slab {

// Color key for burned-in annotations: match all channels within a tolerance
// on RGB images; fall back to a brightness threshold on grayscale.
struct MarkerColorSpec {
    std::array<float, 3> color = {1.0f, 0.85f, 0.1f};
    float tolerance = 0.15f;       // per channel, must be < 0.5
    float gray_threshold = 0.98f;  // 1-channel fallback: intensity >= threshold
};

// Flags keyed pixels, then dilates by one pixel (3x3) to catch anti-aliased
// fringes. Returns an [H,W] mask in {0,1}.
Tensor detect_markers(const Tensor& image, const MarkerColorSpec& spec = {});

// Iterative neighborhood diffusion: each masked pixel with at least one
// unmasked 4-neighbor takes the mean of those neighbors, wavefront by
// wavefront, until the mask empties. Unmasked pixels are untouched.
Tensor inpaint_markers(const Tensor& image, const Tensor& marker_mask);

}  // namespace slab
