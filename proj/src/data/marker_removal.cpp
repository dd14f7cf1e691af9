#include "data/marker_removal.hpp"

#include <cmath>
#include <vector>

#include "core/error.hpp"

namespace slab {

Tensor detect_markers(const Tensor& image, const MarkerColorSpec& spec) {
    if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3)) {
        throw DomainError("detect_markers: expected [1,H,W] or [3,H,W], got " +
                          shape_to_string(image.shape()));
    }
    if (spec.tolerance < 0.0f || spec.tolerance >= 0.5f) {
        throw UsageError("detect_markers: tolerance must lie in [0, 0.5)");
    }
    const int c = image.dim(0), h = image.dim(1), w = image.dim(2);
    const std::int64_t plane = static_cast<std::int64_t>(h) * w;
    auto px = image.data();

    std::vector<unsigned char> keyed(static_cast<std::size_t>(plane), 0);
    for (std::int64_t i = 0; i < plane; ++i) {
        bool hit;
        if (c == 3) {
            hit = std::abs(px[i] - spec.color[0]) <= spec.tolerance &&
                  std::abs(px[plane + i] - spec.color[1]) <= spec.tolerance &&
                  std::abs(px[2 * plane + i] - spec.color[2]) <= spec.tolerance;
        } else {
            hit = px[i] >= spec.gray_threshold;
        }
        keyed[static_cast<std::size_t>(i)] = hit;
    }

    Tensor out = Tensor::zeros({h, w});
    auto po = out.mut_data();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool any = false;
            for (int dy = -1; dy <= 1 && !any; ++dy) {
                for (int dx = -1; dx <= 1 && !any; ++dx) {
                    int yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                    any = keyed[static_cast<std::size_t>(yy) * w + xx] != 0;
                }
            }
            po[static_cast<std::size_t>(y) * w + x] = any ? 1.0f : 0.0f;
        }
    }
    return out;
}

Tensor inpaint_markers(const Tensor& image, const Tensor& marker_mask) {
    if (image.rank() != 3) throw DomainError("inpaint_markers: expected [C,H,W] image");
    const int c = image.dim(0), h = image.dim(1), w = image.dim(2);
    if (marker_mask.rank() != 2 || marker_mask.dim(0) != h || marker_mask.dim(1) != w) {
        throw DomainError("inpaint_markers: mask dims do not match image");
    }

    std::vector<unsigned char> masked(static_cast<std::size_t>(h) * w, 0);
    std::int64_t remaining = 0;
    auto mm = marker_mask.data();
    for (std::size_t i = 0; i < masked.size(); ++i) {
        masked[i] = mm[i] != 0.0f;
        remaining += masked[i];
    }
    if (remaining == 0) return image;
    if (remaining == static_cast<std::int64_t>(masked.size())) {
        throw DomainError("inpaint_markers: the whole image is masked, nothing to diffuse from");
    }

    Tensor out = image.clone();
    auto px = out.mut_data();
    const std::int64_t plane = static_cast<std::int64_t>(h) * w;
    const int dy[4] = {-1, 1, 0, 0};
    const int dx[4] = {0, 0, -1, 1};

    std::vector<std::int64_t> frontier;
    while (remaining > 0) {
        frontier.clear();
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                std::int64_t at = static_cast<std::int64_t>(y) * w + x;
                if (!masked[static_cast<std::size_t>(at)]) continue;
                for (int k = 0; k < 4; ++k) {
                    int yy = y + dy[k], xx = x + dx[k];
                    if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                    if (!masked[static_cast<std::size_t>(yy) * w + xx]) {
                        frontier.push_back(at);
                        break;
                    }
                }
            }
        }
        // One synchronized wavefront: all reads see the previous state.
        std::vector<float> values(frontier.size() * static_cast<std::size_t>(c));
        for (std::size_t f = 0; f < frontier.size(); ++f) {
            std::int64_t at = frontier[f];
            int y = static_cast<int>(at / w), x = static_cast<int>(at % w);
            for (int ci = 0; ci < c; ++ci) {
                double acc = 0.0;
                int n = 0;
                for (int k = 0; k < 4; ++k) {
                    int yy = y + dy[k], xx = x + dx[k];
                    if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                    std::int64_t nat = static_cast<std::int64_t>(yy) * w + xx;
                    if (!masked[static_cast<std::size_t>(nat)]) {
                        acc += px[ci * plane + nat];
                        ++n;
                    }
                }
                values[f * static_cast<std::size_t>(c) + static_cast<std::size_t>(ci)] =
                    static_cast<float>(acc / n);
            }
        }
        for (std::size_t f = 0; f < frontier.size(); ++f) {
            std::int64_t at = frontier[f];
            for (int ci = 0; ci < c; ++ci) {
                px[ci * plane + at] = values[f * static_cast<std::size_t>(c) + static_cast<std::size_t>(ci)];
            }
            masked[static_cast<std::size_t>(at)] = 0;
        }
        remaining -= static_cast<std::int64_t>(frontier.size());
    }
    return out;
}

}  // namespace slab
