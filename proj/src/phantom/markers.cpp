#include "phantom/markers.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "image/image_ops.hpp"

namespace slab::phantom {

namespace {

using Pixels = std::vector<std::pair<int, int>>;  // (y, x)

Pixels cross_glyph(int cy, int cx, int arm, int n) {
    Pixels px;
    for (int i = -arm; i <= arm; ++i) {
        int y = cy + i;
        if (y < 0 || y >= n) continue;
        int x1 = cx + i, x2 = cx - i;
        if (x1 >= 0 && x1 < n) px.emplace_back(y, x1);
        if (x2 >= 0 && x2 < n && x2 != x1) px.emplace_back(y, x2);
    }
    return px;
}

int overlap_count(const Pixels& px, const Tensor& mask) {
    int n = mask.dim(1);
    int count = 0;
    auto m = mask.data();
    for (auto [y, x] : px) count += m[static_cast<std::size_t>(y) * n + x] != 0.0f;
    return count;
}

// Caliper center just outside an axis endpoint, nudged further out if the
// glyph would eat into the lesion beyond its overlap budget.
Pixels place_caliper(const Tensor& mask, double ey, double ex, double dy, double dx, int arm,
                     std::int64_t lesion_px) {
    const int n = mask.dim(1);
    const int budget = std::max<std::int64_t>(1, lesion_px / 200);
    Pixels best;
    int best_overlap = -1;
    for (int extra = 2; extra <= 8; extra += 2) {
        double off = arm + extra;
        int cy = std::clamp(static_cast<int>(std::lround(ey + dy * off)), arm, n - 1 - arm);
        int cx = std::clamp(static_cast<int>(std::lround(ex + dx * off)), arm, n - 1 - arm);
        Pixels px = cross_glyph(cy, cx, arm, n);
        int ov = overlap_count(px, mask);
        if (ov <= budget) return px;
        if (best_overlap < 0 || ov < best_overlap) {
            best_overlap = ov;
            best = px;
        }
    }
    return best;
}

struct GlyphPlan {
    Pixels caliper1, caliper2, text;
};

GlyphPlan plan_markers(const Tensor& mask, const MarkerSpec& spec) {
    if (mask.rank() != 2) throw DomainError("markers: mask must be [H,W]");
    const int n = mask.dim(1);
    auto m = mask.data();

    double sx = 0, sy = 0;
    std::int64_t count = 0;
    for (int y = 0; y < mask.dim(0); ++y) {
        for (int x = 0; x < n; ++x) {
            if (m[static_cast<std::size_t>(y) * n + x] != 0.0f) {
                sx += x + 0.5;
                sy += y + 0.5;
                ++count;
            }
        }
    }
    if (count == 0) throw DomainError("markers: lesion mask is empty");
    const double mx = sx / count, my = sy / count;

    // Principal axis from second moments; x-axis fallback for round lesions.
    double sxx = 0, syy = 0, sxy = 0;
    for (int y = 0; y < mask.dim(0); ++y) {
        for (int x = 0; x < n; ++x) {
            if (m[static_cast<std::size_t>(y) * n + x] != 0.0f) {
                double dx = x + 0.5 - mx, dy = y + 0.5 - my;
                sxx += dx * dx;
                syy += dy * dy;
                sxy += dx * dy;
            }
        }
    }
    double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    double dx = std::cos(theta), dy = std::sin(theta);

    double tmin = 1e300, tmax = -1e300;
    double min_x = mx, min_y = my, max_x = mx, max_y = my;
    for (int y = 0; y < mask.dim(0); ++y) {
        for (int x = 0; x < n; ++x) {
            if (m[static_cast<std::size_t>(y) * n + x] == 0.0f) continue;
            double t = (x + 0.5 - mx) * dx + (y + 0.5 - my) * dy;
            if (t < tmin) {
                tmin = t;
                min_x = x + 0.5;
                min_y = y + 0.5;
            }
            if (t > tmax) {
                tmax = t;
                max_x = x + 0.5;
                max_y = y + 0.5;
            }
        }
    }

    GlyphPlan plan;
    plan.caliper1 = place_caliper(mask, max_y, max_x, dy, dx, spec.caliper_arm, count);
    plan.caliper2 = place_caliper(mask, min_y, min_x, -dy, -dx, spec.caliper_arm, count);

    // Text block at the image corner nearest the lesion centroid, inset 2 px.
    // Falls back to the opposite corner if a large lesion reaches under the
    // block; the marker footprint must stay within 2% of the lesion pixels.
    const int h = mask.dim(0);
    auto block_at = [&](bool right, bool bottom) {
        Pixels px;
        int oy = std::max(0, bottom ? h - 2 - spec.text_h : 2);
        int ox = std::max(0, right ? n - 2 - spec.text_w : 2);
        for (int y = 0; y < spec.text_h && oy + y < h; ++y) {
            for (int x = 0; x < spec.text_w && ox + x < n; ++x) {
                if ((y + x) % 2 == 0) px.emplace_back(oy + y, ox + x);
            }
        }
        return px;
    };
    bool right = mx > n / 2.0;
    bool bottom = my > h / 2.0;
    plan.text = block_at(right, bottom);
    if (overlap_count(plan.text, mask) > std::max<std::int64_t>(1, count / 200)) {
        plan.text = block_at(!right, !bottom);
    }
    return plan;
}

void stamp(Tensor& image, Tensor& stamp_mask, const Pixels& px, const MarkerSpec& spec) {
    const int channels = image.dim(0);
    const int h = image.dim(1), w = image.dim(2);
    auto img = image.mut_data();
    auto sm = stamp_mask.mut_data();
    const std::int64_t plane = static_cast<std::int64_t>(h) * w;
    for (auto [y, x] : px) {
        std::int64_t at = static_cast<std::int64_t>(y) * w + x;
        if (channels == 3) {
            img[at] = spec.color[0];
            img[plane + at] = spec.color[1];
            img[2 * plane + at] = spec.color[2];
        } else {
            img[at] = 1.0f;
        }
        sm[at] = 1.0f;
    }
}

}  // namespace

MarkerResult inject_markers(const Tensor& image, const Tensor& mask, const MarkerSpec& spec,
                            Rng& rng) {
    if (image.rank() != 3) throw DomainError("inject_markers: image must be [C,H,W]");
    MarkerResult out;
    const bool present = rng.uniform() < spec.rho;
    if (!present) {
        out.image = image;
        out.stamp = Tensor::zeros({image.dim(1), image.dim(2)});
        return out;
    }
    GlyphPlan plan = plan_markers(mask, spec);
    out.image = image.clone();
    out.stamp = Tensor::zeros({image.dim(1), image.dim(2)});
    out.markers_present = true;
    stamp(out.image, out.stamp, plan.caliper1, spec);
    stamp(out.image, out.stamp, plan.caliper2, spec);
    stamp(out.image, out.stamp, plan.text, spec);
    return out;
}

std::vector<Tensor> make_frozen_sequence(const Scene& scene, const MarkerSpec& spec, int t_frames) {
    if (t_frames < 2) throw UsageError("make_frozen_sequence: need at least 2 frames");
    GlyphPlan plan = plan_markers(scene.mask, spec);
    const Pixels* elements[3] = {&plan.caliper1, &plan.caliper2, &plan.text};

    std::vector<Tensor> frames;
    frames.reserve(static_cast<std::size_t>(t_frames));
    for (int t = 0; t < t_frames; ++t) {
        int n_elems = 3 * t / (t_frames - 1);
        Tensor frame = scene.image.clone();
        Tensor scratch = Tensor::zeros({frame.dim(1), frame.dim(2)});
        for (int e = 0; e < n_elems; ++e) stamp(frame, scratch, *elements[e], spec);
        frames.push_back(quantize8(frame));
    }
    return frames;
}

}  // namespace slab::phantom
