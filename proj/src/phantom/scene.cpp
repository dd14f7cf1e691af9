#include "phantom/scene.hpp"

#include <cmath>

#include "core/error.hpp"

namespace slab::phantom {

const char* placement_name(Placement p) {
    switch (p) {
        case Placement::Centered: return "centered";
        case Placement::Uniform: return "uniform";
        case Placement::QuarterCrop: return "quarter_crop";
    }
    return "?";
}

Placement placement_from_name(const std::string& name) {
    if (name == "centered") return Placement::Centered;
    if (name == "uniform") return Placement::Uniform;
    if (name == "quarter_crop") return Placement::QuarterCrop;
    throw UsageError("unknown placement '" + name + "'");
}

namespace {

// Bilinearly interpolated lattice noise at one spatial frequency.
void add_value_noise(Tensor& field, int cell, double weight, Rng& rng) {
    const int h = field.dim(0), w = field.dim(1);
    const int gy = h / cell + 2, gx = w / cell + 2;
    std::vector<double> lattice(static_cast<std::size_t>(gy) * gx);
    for (double& v : lattice) v = rng.uniform(-1.0, 1.0);
    auto f = field.mut_data();
    for (int y = 0; y < h; ++y) {
        double fy = static_cast<double>(y) / cell;
        int y0 = static_cast<int>(fy);
        double wy = fy - y0;
        for (int x = 0; x < w; ++x) {
            double fx = static_cast<double>(x) / cell;
            int x0 = static_cast<int>(fx);
            double wx = fx - x0;
            double top = lattice[y0 * gx + x0] * (1 - wx) + lattice[y0 * gx + x0 + 1] * wx;
            double bot = lattice[(y0 + 1) * gx + x0] * (1 - wx) + lattice[(y0 + 1) * gx + x0 + 1] * wx;
            f[static_cast<std::size_t>(y) * w + x] +=
                static_cast<float>(weight * (top * (1 - wy) + bot * wy));
        }
    }
}

struct Extents {
    double ex, ey;
};

Extents ellipse_extents(const SceneParams& p) {
    double c = std::cos(p.theta), s = std::sin(p.theta);
    return {std::sqrt(p.axis_a * p.axis_a * c * c + p.axis_b * p.axis_b * s * s),
            std::sqrt(p.axis_a * p.axis_a * s * s + p.axis_b * p.axis_b * c * c)};
}

}  // namespace

SceneParams draw_scene_params(const SceneSpec& spec, Rng& rng) {
    if (spec.size < 8) throw UsageError("scene: size too small");
    if (spec.channels != 1 && spec.channels != 3) throw UsageError("scene: channels must be 1 or 3");
    SceneParams p;
    p.size = spec.size;
    p.channels = spec.channels;
    p.noise_amp = spec.noise_amp;
    p.base_gray = rng.uniform(spec.base_gray_min, spec.base_gray_max);
    p.noise = Tensor::zeros({spec.size, spec.size});
    add_value_noise(p.noise, 16, 0.6, rng);
    add_value_noise(p.noise, 8, 0.4, rng);
    p.axis_a = rng.uniform(spec.axis_min_frac, spec.axis_max_frac) * spec.size;
    p.axis_b = rng.uniform(spec.axis_min_frac, spec.axis_max_frac) * spec.size;
    p.theta = rng.uniform(0.0, 3.14159265358979323846);
    p.contrast = rng.uniform(spec.contrast_min, spec.contrast_max);
    p.edge_soft_frac = spec.edge_soft_frac;
    if (spec.core_scale_min > spec.core_scale_max || spec.core_scale_min <= 0.0f) {
        throw UsageError("scene: invalid core scale range");
    }
    p.core_scale = rng.uniform(spec.core_scale_min, spec.core_scale_max);
    if (spec.speckle_density > 0.0f) {
        const int count = static_cast<int>(
            std::lround(static_cast<double>(spec.speckle_density) * spec.size * spec.size));
        p.speckle.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            int at = rng.uniform_int(spec.size * spec.size);
            float v = static_cast<float>(rng.uniform(spec.speckle_min, spec.speckle_max));
            p.speckle.emplace_back(at, v);
        }
    }
    return p;
}

Scene render_scene(const SceneParams& p, double cx, double cy) {
    const int n = p.size;
    Scene scene;
    scene.center_x = cx;
    scene.center_y = cy;
    scene.mask = Tensor::zeros({n, n});
    scene.image = Tensor::zeros({p.channels, n, n});

    const double ct = std::cos(p.theta), st = std::sin(p.theta);
    auto mask = scene.mask.mut_data();
    auto img = scene.image.mut_data();
    auto noise = p.noise.data();
    const std::int64_t plane = static_cast<std::int64_t>(n) * n;

    double sum_x = 0, sum_y = 0;
    std::int64_t count = 0;
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            const double dx = px - cx, dy = py - cy;
            const double u = (dx * ct + dy * st) / p.axis_a;
            const double v = (-dx * st + dy * ct) / p.axis_b;
            const double r2 = u * u + v * v;
            const bool inside = r2 <= 1.0;
            double val = p.base_gray + p.noise_amp * noise[static_cast<std::size_t>(y) * n + x];
            const double r = std::sqrt(r2);
            if (r < p.core_scale) {
                // Shading covers the core only; the mask keeps the full ellipse.
                double strength = 1.0;
                if (p.edge_soft_frac > 0.0f) {
                    strength = std::min(1.0, (p.core_scale - r) / (p.edge_soft_frac * p.core_scale));
                }
                val += p.contrast * strength;
            }
            if (inside) {
                mask[static_cast<std::size_t>(y) * n + x] = 1.0f;
                sum_x += px;
                sum_y += py;
                ++count;
            }
            val = std::min(1.0, std::max(0.0, val));
            for (int c = 0; c < p.channels; ++c) {
                img[c * plane + static_cast<std::int64_t>(y) * n + x] = static_cast<float>(val);
            }
        }
    }
    for (auto [at, v] : p.speckle) {
        for (int c = 0; c < p.channels; ++c) img[c * plane + at] = v;
    }
    if (count > 0) {
        scene.centroid_x = sum_x / count;
        scene.centroid_y = sum_y / count;
    }
    return scene;
}

Scene generate_scene(const SceneSpec& spec, Rng& rng) {
    SceneParams p = draw_scene_params(spec, rng);
    const double mid = spec.size / 2.0;
    Extents ext = ellipse_extents(p);

    switch (spec.placement) {
        case Placement::Centered:
        case Placement::QuarterCrop: {
            if (spec.center_sigma_frac == 0.0f) {
                if (ext.ex > mid || ext.ey > mid) {
                    throw UsageError("scene: lesion axes too large for the frame");
                }
                return render_scene(p, mid, mid);
            }
            for (int attempt = 0; attempt < 1000; ++attempt) {
                double cx = rng.normal(mid, spec.center_sigma_frac * spec.size);
                double cy = rng.normal(mid, spec.center_sigma_frac * spec.size);
                if (cx - ext.ex >= 0.0 && cx + ext.ex <= spec.size && cy - ext.ey >= 0.0 &&
                    cy + ext.ey <= spec.size) {
                    return render_scene(p, cx, cy);
                }
            }
            throw UsageError("scene: no centered placement fits after 1000 draws "
                             "(lesion too large for the sigma)");
        }
        case Placement::Uniform: {
            for (int attempt = 0; attempt < 1000; ++attempt) {
                double cx = rng.uniform(0.0, spec.size);
                double cy = rng.uniform(0.0, spec.size);
                Scene s = render_scene(p, cx, cy);
                if (s.centroid_x >= 0.0) return s;
            }
            throw UsageError("scene: uniform placement produced an empty mask 1000 times");
        }
    }
    throw UsageError("scene: bad placement");
}

Scene generate_scene(const SceneSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    return generate_scene(spec, rng);
}

}  // namespace slab::phantom
