#pragma once

#include "core/rng.hpp"
#include "data/sample.hpp"

namespace slab {

// Square random crop: side = s * min(H,W) with s ~ U[s_min, s_max], top-left
// uniform over valid positions, applied identically to image and mask, then
// resized to out_size (bilinear / nearest).
struct CropSpec {
    float s_min = 0.5f;
    float s_max = 1.0f;
    int out_size = 64;
};

Sample random_crop_augment(const Sample& sample, const CropSpec& spec, Rng& rng);

}  // namespace slab
