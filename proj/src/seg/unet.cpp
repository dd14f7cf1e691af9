#include "seg/unet.hpp"

#include <cmath>

#include "core/rng.hpp"

namespace slab {

namespace {

void validate_config(const UNetConfig& c) {
    if (c.in_channels != 1 && c.in_channels != 3) {
        throw UsageError("unet: in_channels must be 1 or 3, got " + std::to_string(c.in_channels));
    }
    if (c.depth < 1) throw UsageError("unet: depth must be >= 1");
    if (c.base_channels < 1) throw UsageError("unet: base_channels must be >= 1");
    if (c.kernel_size < 1 || c.kernel_size % 2 == 0) {
        throw UsageError("unet: kernel_size must be odd and positive");
    }
}

// Per-axis layer plan. Offsets are tracked in input coordinates so the Valid
// footprint and the skip-connection crops come out exact.
struct AxisPlan {
    std::vector<int> skip_size;
    std::vector<int> crop_left;
    int out_size = 0;
    int out_offset = 0;
};

AxisPlan plan_axis(const UNetConfig& c, int size, const char* axis) {
    AxisPlan plan;
    plan.skip_size.resize(static_cast<std::size_t>(c.depth));
    plan.crop_left.assign(static_cast<std::size_t>(c.depth), 0);

    if (c.padding_mode != PaddingMode::Valid) {
        if (size % (1 << c.depth) != 0) {
            throw UsageError(std::string("unet: input ") + axis + " = " + std::to_string(size) +
                             " must be divisible by 2^depth = " + std::to_string(1 << c.depth));
        }
        int s = size;
        for (int l = 0; l < c.depth; ++l) {
            plan.skip_size[static_cast<std::size_t>(l)] = s;
            s /= 2;
        }
        plan.out_size = size;
        plan.out_offset = 0;
        return plan;
    }

    const int shrink = c.kernel_size - 1;  // per conv pair: 2 * (k-1)/2 each side
    std::vector<int> skip_offset(static_cast<std::size_t>(c.depth));
    int f = 1;
    int o = 0;
    int s = size;
    for (int l = 0; l < c.depth; ++l) {
        s -= 2 * shrink;
        o += shrink * f;
        if (s < 2) {
            throw UsageError("unet: valid-mode encoder level " + std::to_string(l) +
                             " leaves no spatial extent on " + axis + " = " + std::to_string(size));
        }
        plan.skip_size[static_cast<std::size_t>(l)] = s;
        skip_offset[static_cast<std::size_t>(l)] = o;
        if (s % 2 != 0) {
            throw UsageError("unet: valid-mode pooling at level " + std::to_string(l) +
                             " needs an even size, got " + std::to_string(s) + " on " + axis);
        }
        s /= 2;
        f *= 2;
    }
    s -= 2 * shrink;
    o += shrink * f;
    if (s < 1) {
        throw UsageError("unet: valid-mode bottleneck annihilates the feature map on " +
                         std::string(axis) + " = " + std::to_string(size));
    }
    for (int l = c.depth - 1; l >= 0; --l) {
        f /= 2;
        s *= 2;
        int delta = o - skip_offset[static_cast<std::size_t>(l)];
        if (delta % f != 0) {
            throw UsageError("unet: internal alignment failure at decoder level " + std::to_string(l));
        }
        int left = delta / f;
        int right = plan.skip_size[static_cast<std::size_t>(l)] - s - left;
        if (left < 0 || right < 0) {
            throw UsageError("unet: valid-mode skip smaller than decoder feature at level " +
                             std::to_string(l) + " on " + axis);
        }
        plan.crop_left[static_cast<std::size_t>(l)] = left;
        s -= 2 * shrink;
        o += shrink * f;
        if (s < 1) {
            throw UsageError("unet: valid-mode decoder level " + std::to_string(l) +
                             " annihilates the feature map on " + std::string(axis));
        }
    }
    plan.out_size = s;
    plan.out_offset = o;
    return plan;
}

struct LayerSpec {
    std::string name;
    int cin, cout, k;
};

std::vector<LayerSpec> layer_specs(const UNetConfig& c) {
    std::vector<LayerSpec> specs;
    int base = c.base_channels;
    for (int l = 0; l < c.depth; ++l) {
        int cin = (l == 0) ? c.in_channels : base << (l - 1);
        int cout = base << l;
        specs.push_back({"enc" + std::to_string(l) + ".conv1", cin, cout, c.kernel_size});
        specs.push_back({"enc" + std::to_string(l) + ".conv2", cout, cout, c.kernel_size});
    }
    {
        int cin = base << (c.depth - 1);
        int cout = base << c.depth;
        specs.push_back({"bottleneck.conv1", cin, cout, c.kernel_size});
        specs.push_back({"bottleneck.conv2", cout, cout, c.kernel_size});
    }
    for (int l = c.depth - 1; l >= 0; --l) {
        int skip = base << l;
        int up = base << (l + 1);
        specs.push_back({"dec" + std::to_string(l) + ".conv1", skip + up, skip, c.kernel_size});
        specs.push_back({"dec" + std::to_string(l) + ".conv2", skip, skip, c.kernel_size});
    }
    specs.push_back({"head", base, 1, 1});
    return specs;
}

}  // namespace

Tensor& SegModel::param(const std::string& name) {
    for (auto& [n, t] : params) {
        if (n == name) return t;
    }
    throw UsageError("unknown parameter '" + name + "'");
}

const Tensor& SegModel::param(const std::string& name) const {
    for (const auto& [n, t] : params) {
        if (n == name) return t;
    }
    throw UsageError("unknown parameter '" + name + "'");
}

std::vector<int> encoder_channel_plan(const UNetConfig& c) {
    std::vector<int> plan;
    for (int l = 0; l < c.depth; ++l) plan.push_back(c.base_channels << l);
    return plan;
}

SegModel init_unet(const UNetConfig& config, std::uint64_t seed) {
    validate_config(config);
    SegModel model;
    model.config = config;
    Rng rng(seed);
    for (const LayerSpec& spec : layer_specs(config)) {
        Tensor w = Tensor::zeros({spec.cout, spec.cin, spec.k, spec.k});
        const double fan_in = static_cast<double>(spec.cin) * spec.k * spec.k;
        const double bound = std::sqrt(6.0 / fan_in);
        for (float& v : w.mut_data()) v = static_cast<float>(rng.uniform(-bound, bound));
        model.params.emplace_back(spec.name + ".weight", std::move(w));
        model.params.emplace_back(spec.name + ".bias", Tensor::zeros({spec.cout}));
    }
    return model;
}

Footprint output_footprint(const UNetConfig& config, int h, int w) {
    validate_config(config);
    AxisPlan py = plan_axis(config, h, "H");
    AxisPlan px = plan_axis(config, w, "W");
    return Footprint{py.out_offset, px.out_offset, py.out_size, px.out_size};
}

ForwardTrace forward_trace(const SegModel& model, const Tensor& batch) {
    const UNetConfig& c = model.config;
    validate_config(c);
    if (batch.rank() != 4) {
        throw UsageError("unet forward: expected [B,C,H,W], got " + shape_to_string(batch.shape()));
    }
    if (batch.dim(1) != c.in_channels) {
        throw UsageError("unet forward: expected " + std::to_string(c.in_channels) +
                         " input channels, got " + std::to_string(batch.dim(1)));
    }
    AxisPlan py = plan_axis(c, batch.dim(2), "H");
    AxisPlan px = plan_axis(c, batch.dim(3), "W");

    const int pad = (c.padding_mode == PaddingMode::Valid) ? 0 : (c.kernel_size - 1) / 2;
    auto conv_block = [&](const Tensor& in, const std::string& name) {
        Tensor h = relu(conv2d(in, model.param(name + ".conv1.weight"), model.param(name + ".conv1.bias"),
                               c.padding_mode, pad));
        return relu(conv2d(h, model.param(name + ".conv2.weight"), model.param(name + ".conv2.bias"),
                           c.padding_mode, pad));
    };

    Tensor x = batch;
    std::vector<Tensor> skips;
    for (int l = 0; l < c.depth; ++l) {
        x = conv_block(x, "enc" + std::to_string(l));
        skips.push_back(x);
        x = maxpool2d(x);
    }
    x = conv_block(x, "bottleneck");
    Tensor bottleneck = x;
    for (int l = c.depth - 1; l >= 0; --l) {
        x = upsample_nearest(x);
        Tensor skip = skips[static_cast<std::size_t>(l)];
        if (skip.dim(2) != x.dim(2) || skip.dim(3) != x.dim(3)) {
            skip = crop2d(skip, py.crop_left[static_cast<std::size_t>(l)],
                          px.crop_left[static_cast<std::size_t>(l)], x.dim(2), x.dim(3));
        }
        x = concat_channels(skip, x);
        x = conv_block(x, "dec" + std::to_string(l));
    }
    Tensor logits = conv2d(x, model.param("head.weight"), model.param("head.bias"), PaddingMode::Valid, 0);
    return ForwardTrace{logits, bottleneck};
}

Tensor forward(const SegModel& model, const Tensor& batch) {
    return sigmoid(forward_trace(model, batch).logits);
}

PredictedMask predict_mask(const SegModel& model, const Tensor& image, float threshold) {
    if (image.rank() != 3) {
        throw UsageError("predict_mask: expected [C,H,W], got " + shape_to_string(image.shape()));
    }
    const int h = image.dim(1), w = image.dim(2);
    Tensor batch = Tensor::zeros({1, image.dim(0), h, w});
    std::copy(image.data().begin(), image.data().end(), batch.mut_data().begin());
    Tensor probs = forward(model, batch);

    Footprint fp = output_footprint(model.config, h, w);
    PredictedMask out;
    out.covered = fp;
    out.full_coverage = (fp.y0 == 0 && fp.x0 == 0 && fp.h == h && fp.w == w);
    out.mask = Tensor::zeros({h, w});
    auto pm = out.mask.mut_data();
    for (int y = 0; y < fp.h; ++y) {
        for (int x = 0; x < fp.w; ++x) {
            if (probs.at(0, 0, y, x) >= threshold) {
                pm[static_cast<std::size_t>(fp.y0 + y) * w + fp.x0 + x] = 1.0f;
            }
        }
    }
    return out;
}

}  // namespace slab
