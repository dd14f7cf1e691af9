#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tensor/tensor.hpp"

namespace slab {

enum class TriState { Yes, No, Unknown };

// One image/mask pair plus provenance. Image is [C,H,W] in [0,1], mask is
// [H,W] with values {0,1}.
struct Sample {
    Tensor image;
    Tensor mask;
    std::string id;
    TriState markers_present = TriState::Unknown;
    std::optional<std::array<double, 2>> centroid;  // (x, y), source pixel coords
};

using Dataset = std::vector<Sample>;

}  // namespace slab
