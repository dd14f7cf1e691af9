#pragma once

#include <cstddef>

// 8x6 RGB PNG whose six rows use filter types 0,1,2,3,4,0 in that order;
// pixel (x,y,c) = (37x + 11y + 5c) mod 256. Exercises every scanline filter
// of the decoder.
namespace slab::testing {

inline constexpr unsigned char kFilteredPng[] = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52,
    0x00, 0x00, 0x00, 0x08, 0x00, 0x00, 0x00, 0x06, 0x08, 0x02, 0x00, 0x00, 0x00, 0x71, 0x67, 0x48,
    0xac, 0x00, 0x00, 0x00, 0x56, 0x49, 0x44, 0x41, 0x54, 0x78, 0xda, 0x63, 0x60, 0x60, 0xe5, 0x52,
    0xd5, 0xd2, 0xf7, 0xf2, 0x0f, 0xc9, 0x2f, 0xa9, 0x9c, 0x32, 0x73, 0xde, 0xce, 0x7d, 0x87, 0xef,
    0x3d, 0x7e, 0xc1, 0xcc, 0xc1, 0xcb, 0xc8, 0x2d, 0x20, 0xaa, 0x8a, 0x0d, 0x30, 0x71, 0xe3, 0x00,
    0xcc, 0x62, 0x92, 0xd2, 0x12, 0x18, 0x60, 0x86, 0x84, 0x04, 0x0b, 0x56, 0xe5, 0xaa, 0xdc, 0xdc,
    0x0c, 0xe6, 0x36, 0x8e, 0x31, 0x89, 0x69, 0x8d, 0x6d, 0xdd, 0xcb, 0x56, 0x6f, 0x38, 0x7d, 0xe1,
    0xea, 0x87, 0xaf, 0xbf, 0x44, 0xa5, 0xe4, 0xad, 0xec, 0x5d, 0x00, 0x3b, 0x4e, 0x1d, 0x90, 0xe4,
    0x21, 0x12, 0x79, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82
};
inline constexpr std::size_t kFilteredPngLen = sizeof(kFilteredPng);
inline constexpr int kFilteredPngW = 8;
inline constexpr int kFilteredPngH = 6;

}  // namespace slab::testing
