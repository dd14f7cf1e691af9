#include "image/image_ops.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace slab {

namespace {

struct Dims {
    int c, h, w;
    bool has_channels;
};

Dims dims_of(const Tensor& t, const char* op) {
    if (t.rank() == 2) return {1, t.dim(0), t.dim(1), false};
    if (t.rank() == 3) return {t.dim(0), t.dim(1), t.dim(2), true};
    throw DomainError(std::string(op) + ": expected [H,W] or [C,H,W], got " +
                      shape_to_string(t.shape()));
}

std::vector<int> out_shape(const Dims& d, int h, int w) {
    if (d.has_channels) return {d.c, h, w};
    return {h, w};
}

}  // namespace

Tensor resize_bilinear(const Tensor& image, int out_h, int out_w) {
    Dims d = dims_of(image, "resize_bilinear");
    if (out_h < 1 || out_w < 1) throw DomainError("resize_bilinear: bad output size");
    Tensor out = Tensor::zeros(out_shape(d, out_h, out_w));
    auto src = image.data();
    auto dst = out.mut_data();
    const double sy = static_cast<double>(d.h) / out_h;
    const double sx = static_cast<double>(d.w) / out_w;
    for (int c = 0; c < d.c; ++c) {
        const float* plane = src.data() + static_cast<std::int64_t>(c) * d.h * d.w;
        float* oplane = dst.data() + static_cast<std::int64_t>(c) * out_h * out_w;
        for (int y = 0; y < out_h; ++y) {
            double fy = (y + 0.5) * sy - 0.5;
            int y0 = static_cast<int>(std::floor(fy));
            double wy = fy - y0;
            int ya = std::clamp(y0, 0, d.h - 1);
            int yb = std::clamp(y0 + 1, 0, d.h - 1);
            for (int x = 0; x < out_w; ++x) {
                double fx = (x + 0.5) * sx - 0.5;
                int x0 = static_cast<int>(std::floor(fx));
                double wx = fx - x0;
                int xa = std::clamp(x0, 0, d.w - 1);
                int xb = std::clamp(x0 + 1, 0, d.w - 1);
                double top = plane[ya * d.w + xa] * (1.0 - wx) + plane[ya * d.w + xb] * wx;
                double bot = plane[yb * d.w + xa] * (1.0 - wx) + plane[yb * d.w + xb] * wx;
                oplane[y * out_w + x] = static_cast<float>(top * (1.0 - wy) + bot * wy);
            }
        }
    }
    return out;
}

Tensor resize_nearest(const Tensor& image, int out_h, int out_w) {
    Dims d = dims_of(image, "resize_nearest");
    if (out_h < 1 || out_w < 1) throw DomainError("resize_nearest: bad output size");
    Tensor out = Tensor::zeros(out_shape(d, out_h, out_w));
    auto src = image.data();
    auto dst = out.mut_data();
    const double sy = static_cast<double>(d.h) / out_h;
    const double sx = static_cast<double>(d.w) / out_w;
    for (int c = 0; c < d.c; ++c) {
        const float* plane = src.data() + static_cast<std::int64_t>(c) * d.h * d.w;
        float* oplane = dst.data() + static_cast<std::int64_t>(c) * out_h * out_w;
        for (int y = 0; y < out_h; ++y) {
            int iy = std::clamp(static_cast<int>((y + 0.5) * sy), 0, d.h - 1);
            for (int x = 0; x < out_w; ++x) {
                int ix = std::clamp(static_cast<int>((x + 0.5) * sx), 0, d.w - 1);
                oplane[y * out_w + x] = plane[iy * d.w + ix];
            }
        }
    }
    return out;
}

Tensor quantize8(const Tensor& image) {
    Tensor out = image.clone();
    for (float& v : out.mut_data()) {
        float clamped = std::min(1.0f, std::max(0.0f, v));
        v = static_cast<float>(std::lround(clamped * 255.0f)) / 255.0f;
    }
    return out;
}

Tensor binarize(const Tensor& mask, float threshold) {
    Tensor out = mask.clone();
    for (float& v : out.mut_data()) v = (v >= threshold) ? 1.0f : 0.0f;
    return out;
}

}  // namespace slab
