#pragma once

#include <array>
#include <string>

#include "data/sample.hpp"

namespace slab {

// Reads an images/ + masks/ directory with matching filename stems (the
// generator layout, or any ISIC-style pairing). Images resize bilinearly to
// target_size x target_size, masks nearest-neighbor and re-binarized. When a
// manifest.csv is present its metadata is attached to the samples.
Dataset load_dataset(const std::string& dir, int target_size);

// Seeded shuffle then contiguous slices; disjoint and exhaustive.
std::array<Dataset, 3> split(const Dataset& dataset, std::array<double, 3> ratios,
                             std::uint64_t seed);

}  // namespace slab
