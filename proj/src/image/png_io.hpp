#pragma once

#include <string>

#include "tensor/tensor.hpp"

namespace slab {

// 8-bit PNG, non-interlaced. Readable color types: gray, gray+alpha, RGB,
// RGBA, palette (alpha is dropped, palette expanded). Values map to [0,1]
// floats; returned shape is [1,H,W] or [3,H,W].
Tensor read_png(const std::string& path);

// Writes [H,W] / [1,H,W] as grayscale or [3,H,W] as RGB. Values are clamped
// to [0,1] and quantized by round(v*255). Output bytes are deterministic.
void write_png(const std::string& path, const Tensor& image);

}  // namespace slab
