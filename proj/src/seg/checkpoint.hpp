#pragma once

#include <string>

#include "seg/unet.hpp"

namespace slab {

// Checkpoint file: magic "SSCK", version u32, config block (in_channels,
// depth, base_channels, padding_mode, kernel_size as u32), parameter count,
// then per parameter: name length + name + dims + little-endian f32 payload.
// Round-trips are bit-exact.
void save_checkpoint(const SegModel& model, const std::string& path);
SegModel load_checkpoint(const std::string& path);

}  // namespace slab
