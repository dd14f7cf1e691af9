#pragma once

#include <cstdint>
#include <vector>

#include "seg/unet.hpp"

namespace slab {

struct AdamConfig {
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
    float weight_decay = 0.0f;  // decoupled (AdamW-style) when nonzero
};

// First/second moments plus the shared step counter.
class AdamState {
public:
    explicit AdamState(const SegModel& model);

    std::int64_t step_count() const { return t_; }

    // Standard bias-corrected update. `grads` aligns with model.params order.
    // A NaN gradient aborts with a diagnostic naming the parameter.
    void step(SegModel& model, const std::vector<Tensor>& grads, float lr,
              const AdamConfig& cfg = {});

private:
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    std::int64_t t_ = 0;
};

}  // namespace slab
