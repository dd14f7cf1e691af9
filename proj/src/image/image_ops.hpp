#pragma once

#include "tensor/tensor.hpp"

namespace slab {

// Resampling with half-pixel-center alignment. Inputs are [H,W] or [C,H,W];
// outputs keep the rank. Bilinear is for images, nearest for masks.
Tensor resize_bilinear(const Tensor& image, int out_h, int out_w);
Tensor resize_nearest(const Tensor& image, int out_h, int out_w);

// round(v*255)/255 per element: the value a PNG round-trip would give.
Tensor quantize8(const Tensor& image);

// Forces values to {0,1} with a 0.5 threshold.
Tensor binarize(const Tensor& mask, float threshold = 0.5f);

}  // namespace slab
