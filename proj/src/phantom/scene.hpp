#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "core/rng.hpp"
#include "tensor/tensor.hpp"

namespace slab::phantom {

enum class Placement { Centered, Uniform, QuarterCrop };

const char* placement_name(Placement p);
Placement placement_from_name(const std::string& name);

// One elliptical lesion on a textured background. Axes are semi-axes as a
// fraction of the frame size; the lesion adds `contrast` on top of the
// background and everything is clipped to [0,1].
struct SceneSpec {
    int size = 64;
    int channels = 1;
    Placement placement = Placement::Centered;
    float center_sigma_frac = 0.05f;  // Centered: std-dev of the center, as a fraction of size
    float axis_min_frac = 0.10f;
    float axis_max_frac = 0.30f;
    float contrast_min = 0.30f;
    float contrast_max = 0.60f;
    float base_gray_min = 0.20f;
    float base_gray_max = 0.50f;
    float noise_amp = 0.10f;
    // 0 = crisp edge. Positive values fade the lesion's contrast to zero over
    // the outer fraction of the visible core, leaving the boundary ambiguous
    // in the image while the mask keeps the exact ellipse.
    float edge_soft_frac = 0.0f;
    // The visibly shaded core covers this random fraction of the true radius;
    // 1 = the whole lesion is shaded (the image then fully determines the
    // mask). Smaller cores leave the outer extent observable only through
    // burned-in annotations, mirroring structures whose boundary a reader
    // infers rather than sees.
    float core_scale_min = 1.0f;
    float core_scale_max = 1.0f;
    // Sparse bright speckle dots (ultrasound-like). Density is the fraction
    // of pixels hit; intensities stay below typical marker-detection
    // thresholds so cleanup pipelines leave them alone.
    float speckle_density = 0.0f;
    float speckle_min = 0.85f;
    float speckle_max = 0.95f;
};

// Scene content drawn once; rendering can then place the lesion anywhere.
struct SceneParams {
    int size = 0;
    int channels = 0;
    double base_gray = 0;
    double contrast = 0;
    double axis_a = 0;  // semi-axes in pixels
    double axis_b = 0;
    double theta = 0;   // rotation of axis_a against +x
    Tensor noise;       // [H,W], in [-1,1] before amplitude scaling
    float noise_amp = 0;
    float edge_soft_frac = 0;
    double core_scale = 1.0;
    std::vector<std::pair<int, float>> speckle;  // (flat index, intensity)
};

struct Scene {
    Tensor image;  // [C,H,W] in [0,1], not yet quantized
    Tensor mask;   // [H,W] in {0,1}
    double centroid_x = -1;  // rasterized-mask centroid, pixel coords
    double centroid_y = -1;
    double center_x = 0;  // ellipse center as placed
    double center_y = 0;
};

// Draw order: base gray, noise field, axis_a, axis_b, theta, contrast.
SceneParams draw_scene_params(const SceneSpec& spec, Rng& rng);

// Rasterizes the lesion at an explicit center (pixel-center inclusion test).
Scene render_scene(const SceneParams& params, double cx, double cy);

// Applies the placement policy. Centered rejects positions until the lesion
// fits fully inside the frame (error after 1000 tries); Uniform clips at the
// borders. QuarterCrop scenes are placed like Centered; the crop itself
// happens at dataset level.
Scene generate_scene(const SceneSpec& spec, Rng& rng);
Scene generate_scene(const SceneSpec& spec, std::uint64_t seed);

}  // namespace slab::phantom
