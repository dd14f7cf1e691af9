#include "seg/loss.hpp"

#include "tensor/ops.hpp"

namespace slab {

Tensor dice_loss(const Tensor& probs, const Tensor& targets, float eps) {
    if (!probs.same_shape(targets)) {
        throw DomainError("dice_loss: shape mismatch " + shape_to_string(probs.shape()) + " vs " +
                          shape_to_string(targets.shape()));
    }
    Tensor inter = sum(mul(probs, targets));
    Tensor denom = add_scalar(add(sum(probs), sum(targets)), eps);
    Tensor ratio = div(add_scalar(mul_scalar(inter, 2.0f), eps), denom);
    return add_scalar(mul_scalar(ratio, -1.0f), 1.0f);
}

}  // namespace slab
