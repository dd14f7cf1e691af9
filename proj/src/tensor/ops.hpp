#pragma once

#include "tensor/tape.hpp"
#include "tensor/tensor.hpp"

namespace slab {

// Spatial ops accept rank-3 [C,H,W] or rank-4 [B,C,H,W] tensors; rank-3 is
// treated as a batch of one. All ops are pure, record onto the active tape
// when an input is tracked, and use fixed loop orders with 64-bit accumulation
// in convolution and reduction inner loops, so results are reproducible
// bit-for-bit on one machine.

// Border padding of `width` on both spatial axes. Valid mode (or width 0)
// returns the input unchanged. Reflect mirrors about the edge pixel,
// excluding it, and requires width < H and width < W.
Tensor pad2d(const Tensor& t, PaddingMode mode, int width);

// Cross-correlation (no kernel flip). weight is [Cout,Cin,k,k] with odd k,
// bias is [Cout]. Output H' = (H + 2*pad - k)/stride + 1, where pad is
// forced to 0 in Valid mode.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              PaddingMode mode, int pad, int stride = 1);

// 2x2 max pooling / nearest-neighbor upsampling. Pooling requires even H, W.
Tensor maxpool2d(const Tensor& t, int factor = 2);
Tensor upsample_nearest(const Tensor& t, int factor = 2);

Tensor relu(const Tensor& t);
Tensor sigmoid(const Tensor& t);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& t, float c);
Tensor mul_scalar(const Tensor& t, float c);

// Concatenation along the channel axis (dim 0 for rank-3, dim 1 for rank-4).
Tensor concat_channels(const Tensor& a, const Tensor& b);

// Spatial crop: keeps rows [y0, y0+h) and cols [x0, x0+w).
Tensor crop2d(const Tensor& t, int y0, int x0, int h, int w);

// Full reductions to a scalar tensor of shape [1].
Tensor sum(const Tensor& t);
Tensor mean(const Tensor& t);

bool all_finite(const Tensor& t);

}  // namespace slab
