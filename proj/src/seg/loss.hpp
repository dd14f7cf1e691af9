#pragma once

#include "tensor/tensor.hpp"

namespace slab {

// Soft Dice loss, joint over the whole batch:
//   1 - (2*sum(p*t) + eps) / (sum(p) + sum(t) + eps)
// eps = 1 makes empty-vs-empty a perfect score and keeps gradients finite.
Tensor dice_loss(const Tensor& probs, const Tensor& targets, float eps = 1.0f);

}  // namespace slab
