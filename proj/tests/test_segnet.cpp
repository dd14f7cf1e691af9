#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "seg/checkpoint.hpp"
#include "seg/loss.hpp"
#include "seg/optim.hpp"
#include "seg/train.hpp"
#include "seg/unet.hpp"
#include "support/gradcheck.hpp"
#include "support/ref_unet.hpp"
#include "support/test_util.hpp"

using namespace slab;
using namespace slab::testing;

namespace {

bool params_bit_equal(const SegModel& a, const SegModel& b) {
    if (a.params.size() != b.params.size()) return false;
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        if (a.params[i].first != b.params[i].first) return false;
        if (!bit_equal(a.params[i].second, b.params[i].second)) return false;
    }
    return true;
}

Dataset disk_dataset(int n, int size, int channels, std::uint64_t seed) {
    // Bright centered disks on a dark background; trivially separable.
    Rng rng(seed);
    Dataset out;
    for (int i = 0; i < n; ++i) {
        Sample s;
        s.id = "disk" + std::to_string(i);
        s.image = Tensor::zeros({channels, size, size});
        s.mask = Tensor::zeros({size, size});
        double cx = size / 2.0 + rng.uniform(-2.0, 2.0);
        double cy = size / 2.0 + rng.uniform(-2.0, 2.0);
        double r = size * rng.uniform(0.18, 0.28);
        auto im = s.image.mut_data();
        auto mk = s.mask.mut_data();
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                double d2 = (x + 0.5 - cx) * (x + 0.5 - cx) + (y + 0.5 - cy) * (y + 0.5 - cy);
                float noise = static_cast<float>(rng.uniform(0.0, 0.1));
                bool inside = d2 <= r * r;
                for (int c = 0; c < channels; ++c) {
                    im[(static_cast<std::size_t>(c) * size + y) * size + x] =
                        (inside ? 0.8f : 0.2f) + noise;
                }
                if (inside) mk[static_cast<std::size_t>(y) * size + x] = 1.0f;
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

TEST_CASE("init_unet is deterministic per (config, seed)") {
    UNetConfig cfg;
    cfg.depth = 2;
    cfg.base_channels = 4;
    SegModel a = init_unet(cfg, 99);
    SegModel b = init_unet(cfg, 99);
    CHECK(params_bit_equal(a, b));
    SegModel c = init_unet(cfg, 100);
    CHECK_FALSE(params_bit_equal(a, c));
}

TEST_CASE("encoder channel plan doubles from base") {
    UNetConfig cfg;
    cfg.depth = 3;
    cfg.base_channels = 16;
    CHECK(encoder_channel_plan(cfg) == std::vector<int>{16, 32, 64});
}

TEST_CASE("zero weights give all-0.5 probabilities") {
    UNetConfig cfg;
    cfg.depth = 2;
    cfg.base_channels = 4;
    SegModel m = init_unet(cfg, 1);
    for (auto& [name, p] : m.params) {
        for (float& v : p.mut_data()) v = 0.0f;
    }
    Tensor x = Tensor::zeros({1, 1, 16, 16});
    Tensor probs = forward(m, x);
    for (float v : probs.data()) CHECK(v == 0.5f);
}

TEST_CASE("forward output lies in (0,1) and keeps the input shape for padded modes") {
    Rng rng(3);
    for (PaddingMode mode : {PaddingMode::Zeros, PaddingMode::Reflect, PaddingMode::Replicate}) {
        UNetConfig cfg;
        cfg.depth = 2;
        cfg.base_channels = 4;
        cfg.padding_mode = mode;
        SegModel m = init_unet(cfg, 7);
        Tensor x = random_tensor({2, 1, 16, 16}, rng);
        Tensor probs = forward(m, x);
        CHECK(probs.shape() == std::vector<int>{2, 1, 16, 16});
        for (float v : probs.data()) {
            CHECK(v > 0.0f);
            CHECK(v < 1.0f);
        }
    }
}

TEST_CASE("forward rejects dims not divisible by 2^depth") {
    UNetConfig cfg;
    cfg.depth = 3;
    cfg.base_channels = 4;
    SegModel m = init_unet(cfg, 7);
    Tensor x = Tensor::zeros({1, 1, 20, 20});
    CHECK_THROWS_AS(forward(m, x), UsageError);
}

TEST_CASE("valid-mode shape arithmetic composed per layer") {
    // depth 2, k=3, 64x64: 64 ->(convs) 60 ->pool 30 ->(convs) 26 ->pool 13
    // ->bottleneck 9 ->up 18, skip 26 cropped by 4 ->(convs) 14 ->up 28,
    // skip 60 cropped by 16 ->(convs) 24. Offset 20 on both axes.
    UNetConfig cfg;
    cfg.depth = 2;
    cfg.base_channels = 4;
    cfg.padding_mode = PaddingMode::Valid;
    Footprint fp = output_footprint(cfg, 64, 64);
    CHECK(fp.h == 24);
    CHECK(fp.w == 24);
    CHECK(fp.y0 == 20);
    CHECK(fp.x0 == 20);

    SegModel m = init_unet(cfg, 5);
    Rng rng(4);
    Tensor x = random_tensor({1, 1, 64, 64}, rng);
    Tensor probs = forward(m, x);
    CHECK(probs.shape() == std::vector<int>{1, 1, 24, 24});

    // Same composition at depth 3 pools an odd 9-wide map: infeasible.
    UNetConfig deep = cfg;
    deep.depth = 3;
    CHECK_THROWS_AS(output_footprint(deep, 64, 64), UsageError);
}

TEST_CASE("padding-mode contract: valid output equals the zeros output on its footprint") {
    // Depth 1 keeps the pooling grids of the two variants phase-aligned, so
    // the valid-mode prediction is exactly the restriction of the zeros-mode
    // prediction to the covered footprint.
    UNetConfig zcfg;
    zcfg.depth = 1;
    zcfg.base_channels = 4;
    zcfg.padding_mode = PaddingMode::Zeros;
    UNetConfig vcfg = zcfg;
    vcfg.padding_mode = PaddingMode::Valid;

    SegModel zm = init_unet(zcfg, 11);
    SegModel vm = init_unet(vcfg, 11);
    CHECK(params_bit_equal(zm, vm));

    Rng rng(12);
    Tensor x = random_tensor({1, 1, 32, 32}, rng);
    Tensor zp = forward(zm, x);
    Tensor vp = forward(vm, x);
    Footprint fp = output_footprint(vcfg, 32, 32);
    CHECK(vp.dim(2) == fp.h);
    CHECK(vp.dim(3) == fp.w);
    for (int y = 0; y < fp.h; ++y) {
        for (int xx = 0; xx < fp.w; ++xx) {
            REQUIRE(vp.at(0, 0, y, xx) == zp.at(0, 0, fp.y0 + y, fp.x0 + xx));
        }
    }
    // And the zeros model does produce different values somewhere on the
    // border band it alone covers.
    bool border_nontrivial = false;
    for (int xx = 0; xx < 32 && !border_nontrivial; ++xx) {
        border_nontrivial = zp.at(0, 0, 0, xx) != 0.5f;
    }
    CHECK(border_nontrivial);
}

TEST_CASE("dice_loss matches the closed form") {
    Tensor ones = Tensor::full({1, 1, 4, 4}, 1.0f);
    Tensor zeros = Tensor::zeros({1, 1, 4, 4});

    // Perfect nonempty match: loss <= eps / (2*sum(t) + eps).
    double perfect = dice_loss(ones, ones).item64();
    CHECK(perfect == doctest::Approx(1.0 - 33.0 / 33.0).epsilon(1e-9));
    CHECK(perfect <= 1.0 / (2.0 * 16.0 + 1.0));

    // Empty-empty is exactly 0 under the eps smoothing.
    CHECK(dice_loss(zeros, zeros).item64() == 0.0);

    // All-ones prediction against empty target: 1 - eps/(N + eps).
    CHECK(dice_loss(ones, zeros).item64() == doctest::Approx(1.0 - 1.0 / 17.0).epsilon(1e-9));

    CHECK_THROWS_AS(dice_loss(ones, Tensor::zeros({1, 1, 2, 2})), DomainError);
}

TEST_CASE("dice_loss stays within [0,1] for random inputs") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        Tensor p = random_tensor({1, 1, 6, 6}, rng);
        Tensor t = Tensor::zeros({1, 1, 6, 6});
        for (float& v : t.mut_data()) v = rng.bernoulli(0.3) ? 1.0f : 0.0f;
        double loss = dice_loss(p, t).item64();
        CHECK(loss >= 0.0);
        CHECK(loss <= 1.0);
    }
}

TEST_CASE("adam first step moves by about -lr when g=1") {
    UNetConfig cfg;
    cfg.depth = 1;
    cfg.base_channels = 2;
    SegModel m = init_unet(cfg, 3);
    SegModel before = init_unet(cfg, 3);
    AdamState state(m);
    std::vector<Tensor> grads;
    for (auto& [n, p] : m.params) grads.push_back(Tensor::full(p.shape(), 1.0f));
    state.step(m, grads, 0.001f);
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        auto now = m.params[i].second.data();
        auto was = before.params[i].second.data();
        for (std::size_t j = 0; j < now.size(); ++j) {
            CHECK(static_cast<double>(was[j]) - now[j] == doctest::Approx(0.001).epsilon(1e-4));
        }
    }
}

TEST_CASE("adam with zero gradients leaves parameters unchanged") {
    UNetConfig cfg;
    cfg.depth = 1;
    cfg.base_channels = 2;
    SegModel m = init_unet(cfg, 3);
    SegModel before = init_unet(cfg, 3);
    AdamState state(m);
    std::vector<Tensor> grads;
    for (auto& [n, p] : m.params) grads.push_back(Tensor::zeros(p.shape()));
    state.step(m, grads, 0.001f);
    CHECK(params_bit_equal(m, before));
}

TEST_CASE("adam aborts on NaN gradients naming the parameter") {
    UNetConfig cfg;
    cfg.depth = 1;
    cfg.base_channels = 2;
    SegModel m = init_unet(cfg, 3);
    AdamState state(m);
    std::vector<Tensor> grads;
    for (auto& [n, p] : m.params) grads.push_back(Tensor::zeros(p.shape()));
    grads[2].mut_data()[0] = std::numeric_limits<float>::quiet_NaN();
    try {
        state.step(m, grads, 0.001f);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find(m.params[2].first) != std::string::npos);
    }
}

TEST_CASE("end-to-end gradient check: dice of a 1-level unet on 16x16") {
    // Zero-initialized biases would park whole dead regions exactly on the
    // relu kink, where the derivative is one-sided; random instances draw
    // nonzero biases so finite differences probe differentiable points.
    for (std::uint64_t seed : {4u, 5u, 11u}) {
        UNetConfig cfg;
        cfg.depth = 1;
        cfg.base_channels = 2;
        SegModel proto = init_unet(cfg, seed);
        Rng rng(seed + 500);
        for (auto& [name, p] : proto.params) {
            if (name.ends_with(".bias")) {
                for (float& v : p.mut_data()) v = static_cast<float>(rng.uniform(0.02, 0.15));
            }
        }
        Tensor x = random_tensor({1, 1, 16, 16}, rng, 0.05f, 1.0f);
        Tensor target = Tensor::zeros({1, 1, 16, 16});
        for (float& v : target.mut_data()) v = rng.bernoulli(0.3) ? 1.0f : 0.0f;
        Tensor xb = Tensor::zeros({1, 1, 16, 16});
        std::copy(x.data().begin(), x.data().end(), xb.mut_data().begin());

        std::vector<Tensor> leaves;
        for (auto& [n, p] : proto.params) leaves.push_back(p);

        auto fwd = [&](const std::vector<Tensor>& params) {
            SegModel m = proto;
            for (std::size_t i = 0; i < params.size(); ++i) m.params[i].second = params[i];
            return dice_loss(forward(m, xb), target);
        };
        auto ref_fwd = [&](const std::vector<ref::RT>& params) {
            return ref_unet_dice_loss(cfg, params, ref::from_tensor(x), ref::from_tensor(target));
        };
        double err = gradcheck(leaves, fwd, ref_fwd, 1e-5);
        CAPTURE(seed);
        CHECK(err < 1e-3);
    }
}

TEST_CASE("train with zero epochs returns the model unchanged") {
    UNetConfig cfg;
    cfg.depth = 2;
    cfg.base_channels = 2;
    SegModel m = init_unet(cfg, 1);
    SegModel before = init_unet(cfg, 1);
    TrainSchedule sched;
    sched.epochs = 0;
    TrainHistory h = train(m, disk_dataset(2, 16, 1, 0), disk_dataset(1, 16, 1, 5), sched);
    CHECK(h.train_loss.empty());
    CHECK(h.val_dice.empty());
    CHECK(params_bit_equal(m, before));
}

TEST_CASE("train learns a tiny separable task") {
    UNetConfig cfg;
    cfg.depth = 2;
    cfg.base_channels = 4;
    SegModel m = init_unet(cfg, 21);
    Dataset train_set = disk_dataset(8, 32, 1, 7);
    TrainSchedule sched;
    sched.epochs = 30;
    sched.batch_size = 2;
    sched.learning_rate = 1e-3f;
    sched.shuffle_seed = 3;
    TrainHistory h = train(m, train_set, train_set, sched);
    REQUIRE(h.val_dice.size() == 30);
    CHECK(h.val_dice.back() > 0.9);
    CHECK(h.train_loss.back() < h.train_loss.front());
}

TEST_CASE("training is deterministic and seed-sensitive") {
    UNetConfig cfg;
    cfg.depth = 2;
    cfg.base_channels = 2;
    Dataset train_set = disk_dataset(6, 16, 1, 2);
    Dataset val_set = disk_dataset(2, 16, 1, 3);
    TrainSchedule sched;
    sched.epochs = 3;
    sched.batch_size = 2;
    sched.shuffle_seed = 10;

    SegModel a = init_unet(cfg, 5);
    TrainHistory ha = train(a, train_set, val_set, sched);
    SegModel b = init_unet(cfg, 5);
    TrainHistory hb = train(b, train_set, val_set, sched);
    CHECK(params_bit_equal(a, b));
    CHECK(ha.train_loss == hb.train_loss);
    CHECK(ha.val_dice == hb.val_dice);

    TrainSchedule other = sched;
    other.shuffle_seed = 11;
    SegModel c = init_unet(cfg, 5);
    train(c, train_set, val_set, other);
    CHECK_FALSE(params_bit_equal(a, c));
}

TEST_CASE("adamw applies decoupled weight decay and cosine decays the rate") {
    UNetConfig cfg;
    cfg.depth = 2;
    cfg.base_channels = 2;
    Dataset train_set = disk_dataset(4, 16, 1, 2);
    TrainSchedule sched;
    sched.optimizer = Optimizer::AdamW;
    sched.weight_decay = 0.1f;
    sched.cosine_lr = true;
    sched.epochs = 2;
    sched.batch_size = 2;
    SegModel m = init_unet(cfg, 5);
    SegModel before = init_unet(cfg, 5);
    TrainHistory h = train(m, train_set, train_set, sched);
    CHECK(h.train_loss.size() == 2);
    CHECK_FALSE(params_bit_equal(m, before));

    // Decoupled decay shrinks a parameter even when its gradient is zero.
    SegModel tiny = init_unet(cfg, 5);
    AdamState state(tiny);
    std::vector<Tensor> zero_grads;
    for (auto& [n, p] : tiny.params) zero_grads.push_back(Tensor::zeros(p.shape()));
    AdamConfig acfg;
    acfg.weight_decay = 0.5f;
    float w0 = tiny.params[0].second.at(0);
    state.step(tiny, zero_grads, 0.1f, acfg);
    CHECK(tiny.params[0].second.at(0) == doctest::Approx(w0 * (1.0f - 0.05f)));
}

TEST_CASE("predict_mask thresholding conventions") {
    UNetConfig cfg;
    cfg.depth = 1;
    cfg.base_channels = 2;
    SegModel m = init_unet(cfg, 1);
    for (auto& [n, p] : m.params) {
        for (float& v : p.mut_data()) v = 0.0f;
    }
    Tensor img = Tensor::zeros({1, 8, 8});
    // All probabilities are exactly 0.5: the >= convention makes everything
    // foreground.
    PredictedMask pm = predict_mask(m, img, 0.5f);
    CHECK(pm.full_coverage);
    for (float v : pm.mask.data()) CHECK(v == 1.0f);

    // Raising the threshold can only remove foreground.
    SegModel r = init_unet(cfg, 77);
    Rng rng(6);
    Tensor img2 = random_tensor({1, 8, 8}, rng);
    PredictedMask lo = predict_mask(r, img2, 0.3f);
    PredictedMask hi = predict_mask(r, img2, 0.7f);
    auto lo_d = lo.mask.data();
    auto hi_d = hi.mask.data();
    for (std::size_t i = 0; i < lo_d.size(); ++i) {
        if (hi_d[i] == 1.0f) CHECK(lo_d[i] == 1.0f);
    }
}

TEST_CASE("predict_mask embeds the valid footprint and flags partial coverage") {
    UNetConfig cfg;
    cfg.depth = 1;
    cfg.base_channels = 2;
    cfg.padding_mode = PaddingMode::Valid;
    SegModel m = init_unet(cfg, 1);
    for (auto& [n, p] : m.params) {
        for (float& v : p.mut_data()) v = 0.0f;
    }
    Tensor img = Tensor::zeros({1, 32, 32});
    PredictedMask pm = predict_mask(m, img, 0.5f);
    CHECK_FALSE(pm.full_coverage);
    Footprint fp = pm.covered;
    CHECK(fp.h < 32);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            bool inside =
                y >= fp.y0 && y < fp.y0 + fp.h && x >= fp.x0 && x < fp.x0 + fp.w;
            CHECK(pm.mask.at(y, x) == (inside ? 1.0f : 0.0f));
        }
    }
}

TEST_CASE("checkpoint round-trip is bit-exact") {
    TempDir dir("ckpt");
    UNetConfig cfg;
    cfg.depth = 2;
    cfg.base_channels = 4;
    cfg.padding_mode = PaddingMode::Reflect;
    SegModel m = init_unet(cfg, 33);
    std::string path = (dir.path / "model.ck").string();
    save_checkpoint(m, path);
    SegModel loaded = load_checkpoint(path);
    CHECK(loaded.config.depth == cfg.depth);
    CHECK(loaded.config.padding_mode == cfg.padding_mode);
    CHECK(params_bit_equal(m, loaded));

    // Save -> load -> save produces identical bytes.
    std::string path2 = (dir.path / "model2.ck").string();
    save_checkpoint(loaded, path2);
    CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("checkpoint rejects corruption, version skew and truncation") {
    TempDir dir("ckpt_bad");
    UNetConfig cfg;
    cfg.depth = 1;
    cfg.base_channels = 2;
    SegModel m = init_unet(cfg, 1);
    std::string path = (dir.path / "model.ck").string();
    save_checkpoint(m, path);
    std::string bytes = slurp(path);

    auto write_variant = [&](const std::string& name, const std::string& data) {
        std::string p = (dir.path / name).string();
        std::ofstream f(p, std::ios::binary);
        f.write(data.data(), static_cast<std::streamsize>(data.size()));
        return p;
    };

    std::string corrupt = bytes;
    corrupt[0] = 'X';
    CHECK_THROWS_AS(load_checkpoint(write_variant("magic.ck", corrupt)), FormatError);

    std::string version = bytes;
    version[4] = 9;  // version 9 instead of 1
    CHECK_THROWS_WITH_AS(load_checkpoint(write_variant("version.ck", version)),
                         doctest::Contains("version"), FormatError);

    std::string truncated = bytes.substr(0, bytes.size() / 2);
    CHECK_THROWS_AS(load_checkpoint(write_variant("trunc.ck", truncated)), FormatError);
}
