#include "data/augment.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "image/image_ops.hpp"

namespace slab {

Sample random_crop_augment(const Sample& sample, const CropSpec& spec, Rng& rng) {
    if (spec.s_min <= 0.0f || spec.s_max > 1.0f || spec.s_min > spec.s_max) {
        throw UsageError("random_crop_augment: scale range must satisfy 0 < s_min <= s_max <= 1");
    }
    if (spec.out_size < 1) throw UsageError("random_crop_augment: bad output size");
    const int h = sample.image.dim(1), w = sample.image.dim(2);
    const int base = std::min(h, w);

    const double s = rng.uniform(spec.s_min, spec.s_max);
    const int side = std::clamp(static_cast<int>(std::lround(s * base)), 1, base);
    const int top = rng.uniform_int(h - side + 1);
    const int left = rng.uniform_int(w - side + 1);

    const int c = sample.image.dim(0);
    Tensor crop_img = Tensor::zeros({c, side, side});
    Tensor crop_mask = Tensor::zeros({side, side});
    auto src_i = sample.image.data();
    auto src_m = sample.mask.data();
    auto dst_i = crop_img.mut_data();
    auto dst_m = crop_mask.mut_data();
    for (int ci = 0; ci < c; ++ci) {
        for (int y = 0; y < side; ++y) {
            std::copy(src_i.begin() + (static_cast<std::int64_t>(ci) * h + top + y) * w + left,
                      src_i.begin() + (static_cast<std::int64_t>(ci) * h + top + y) * w + left + side,
                      dst_i.begin() + (static_cast<std::int64_t>(ci) * side + y) * side);
        }
    }
    for (int y = 0; y < side; ++y) {
        std::copy(src_m.begin() + static_cast<std::int64_t>(top + y) * w + left,
                  src_m.begin() + static_cast<std::int64_t>(top + y) * w + left + side,
                  dst_m.begin() + static_cast<std::int64_t>(y) * side);
    }

    Sample out;
    out.id = sample.id;
    out.markers_present = sample.markers_present;
    out.image = (side == spec.out_size) ? crop_img
                                        : resize_bilinear(crop_img, spec.out_size, spec.out_size);
    out.mask = (side == spec.out_size)
                   ? crop_mask
                   : binarize(resize_nearest(crop_mask, spec.out_size, spec.out_size));

    // Centroid of the cropped mask, in the new pixel frame.
    auto m = out.mask.data();
    double sx = 0, sy = 0;
    std::int64_t count = 0;
    for (int y = 0; y < spec.out_size; ++y) {
        for (int x = 0; x < spec.out_size; ++x) {
            if (m[static_cast<std::size_t>(y) * spec.out_size + x] != 0.0f) {
                sx += x + 0.5;
                sy += y + 0.5;
                ++count;
            }
        }
    }
    if (count > 0) out.centroid = {{sx / count, sy / count}};
    return out;
}

}  // namespace slab
