#pragma once

#include <array>
#include <vector>

#include "core/rng.hpp"
#include "phantom/scene.hpp"
#include "tensor/tensor.hpp"

namespace slab::phantom {

// Burned-in annotation geometry: two "x" calipers just outside the lesion's
// major-axis endpoints and a pseudo-text block at the nearest image corner.
// Yellow on 3-channel images, full intensity on grayscale. Markers touch the
// image only; the ground-truth mask is never modified.
struct MarkerSpec {
    int caliper_arm = 4;  // arm length in px, thickness 1
    int text_h = 6;
    int text_w = 10;
    std::array<float, 3> color = {1.0f, 0.85f, 0.1f};
    float rho = 1.0f;  // co-occurrence probability
};

struct MarkerResult {
    Tensor image;          // annotated copy (input returned unchanged when not stamped)
    bool markers_present = false;
    Tensor stamp;          // [H,W] {0,1} footprint of stamped pixels
};

// With probability rho stamps all marker elements. Consumes exactly one rng
// draw regardless of the outcome; the geometry itself is deterministic given
// the mask.
MarkerResult inject_markers(const Tensor& image, const Tensor& mask, const MarkerSpec& spec,
                            Rng& rng);

// Frame 0 is clean; caliper 1, caliper 2 and the text block appear
// cumulatively at evenly spaced frames; the underlying scene stays frozen.
// Frames are quantized like PNG output; all frames share the scene mask.
std::vector<Tensor> make_frozen_sequence(const Scene& scene, const MarkerSpec& spec, int t_frames);

}  // namespace slab::phantom
