#include <doctest.h>

#include <filesystem>
#include <set>

#include "image/image_ops.hpp"
#include "image/png_io.hpp"
#include "phantom/dataset_gen.hpp"
#include "phantom/markers.hpp"
#include "phantom/scene.hpp"
#include "support/test_util.hpp"

using namespace slab;
using namespace slab::phantom;
using namespace slab::testing;

namespace {

std::int64_t count_fg(const Tensor& mask) {
    std::int64_t n = 0;
    for (float v : mask.data()) n += v != 0.0f;
    return n;
}

}  // namespace

TEST_CASE("centered placement with sigma 0 puts the centroid exactly at the frame center") {
    SceneSpec spec;
    spec.center_sigma_frac = 0.0f;
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        Scene s = generate_scene(spec, seed);
        CHECK(s.centroid_x == 32.0);
        CHECK(s.centroid_y == 32.0);
        CHECK(count_fg(s.mask) > 0);
    }
}

TEST_CASE("scene generation is deterministic per seed") {
    SceneSpec spec;
    Scene a = generate_scene(spec, 99);
    Scene b = generate_scene(spec, 99);
    CHECK(bit_equal(a.image, b.image));
    CHECK(bit_equal(a.mask, b.mask));
    Scene c = generate_scene(spec, 100);
    CHECK_FALSE(bit_equal(a.image, c.image));
}

TEST_CASE("scene images stay in [0,1] and masks stay binary") {
    SceneSpec spec;
    spec.placement = Placement::Uniform;
    for (std::uint64_t seed = 0; seed < 24; ++seed) {
        Scene s = generate_scene(spec, seed);
        for (float v : s.image.data()) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }
        for (float v : s.mask.data()) CHECK((v == 0.0f || v == 1.0f));
    }
}

TEST_CASE("uniform placement matches closed-form moments over 10k draws") {
    SceneSpec spec;
    spec.placement = Placement::Uniform;
    Rng rng(7);
    double sx = 0, sxx = 0, sy = 0, syy = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        Scene s = generate_scene(spec, rng);
        sx += s.centroid_x;
        sxx += s.centroid_x * s.centroid_x;
        sy += s.centroid_y;
        syy += s.centroid_y * s.centroid_y;
    }
    double mx = sx / n, my = sy / n;
    double vx = sxx / n - mx * mx, vy = syy / n - my * my;
    CHECK(std::abs(mx - 32.0) < 2.0);
    CHECK(std::abs(my - 32.0) < 2.0);
    // Uniform centers give Var = 64^2/12 = 341.3; border clipping pulls the
    // mask centroid inward, so accept a band below the closed form.
    CHECK(vx > 0.55 * 341.3);
    CHECK(vx < 1.05 * 341.3);
    CHECK(vy > 0.55 * 341.3);
    CHECK(vy < 1.05 * 341.3);
}

TEST_CASE("oversized lesions exhaust centered placement with a spec error") {
    SceneSpec spec;
    spec.axis_min_frac = 0.55f;
    spec.axis_max_frac = 0.6f;
    spec.center_sigma_frac = 0.05f;
    CHECK_THROWS_AS(generate_scene(spec, 1), UsageError);
}

TEST_CASE("inject_markers stamps every sample at rho=1 and none at rho=0") {
    SceneSpec spec;
    spec.channels = 3;
    MarkerSpec markers;
    Rng rng(11);
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
        Scene s = generate_scene(spec, seed);
        markers.rho = 1.0f;
        MarkerResult on = inject_markers(s.image, s.mask, markers, rng);
        CHECK(on.markers_present);
        CHECK(count_fg(on.stamp) > 0);
        markers.rho = 0.0f;
        MarkerResult off = inject_markers(s.image, s.mask, markers, rng);
        CHECK_FALSE(off.markers_present);
        CHECK(bit_equal(off.image, s.image));
        CHECK(count_fg(off.stamp) == 0);
    }
}

TEST_CASE("rho=0.5 presence rate lands within the binomial bound over 10k draws") {
    SceneSpec spec;
    spec.channels = 3;
    Scene s = generate_scene(spec, 5);
    MarkerSpec markers;
    markers.rho = 0.5f;
    Rng rng(13);
    int present = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        present += inject_markers(s.image, s.mask, markers, rng).markers_present;
    }
    double rate = static_cast<double>(present) / n;
    CHECK(rate > 0.48);
    CHECK(rate < 0.52);
}

TEST_CASE("markers never alter the mask and overwrite at most 2% of lesion pixels") {
    MarkerSpec markers;
    Rng rng(17);
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        SceneSpec spec;
        spec.channels = (seed % 2 == 0) ? 3 : 1;
        Scene s = generate_scene(spec, seed);
        Tensor mask_before = s.mask.clone();
        MarkerResult r = inject_markers(s.image, s.mask, markers, rng);
        REQUIRE(r.markers_present);
        CHECK(bit_equal(s.mask, mask_before));
        std::int64_t lesion = count_fg(s.mask);
        std::int64_t overwritten = 0;
        auto st = r.stamp.data();
        auto m = s.mask.data();
        for (std::size_t i = 0; i < st.size(); ++i) overwritten += (st[i] != 0.0f && m[i] != 0.0f);
        CAPTURE(seed);
        CHECK(static_cast<double>(overwritten) <= 0.02 * static_cast<double>(lesion));
    }
}

TEST_CASE("quarter_crop returns the chosen quadrant resized back to full size") {
    // Image with constant per-quadrant values: the bilinear upscale of a
    // constant region is constant, so the output identifies the quadrant.
    Tensor img = Tensor::zeros({1, 8, 8});
    Tensor mask = Tensor::zeros({8, 8});
    auto ip = img.mut_data();
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            ip[static_cast<std::size_t>(y) * 8 + x] =
                0.1f + 0.2f * static_cast<float>((y / 4) * 2 + (x / 4));
        }
    }
    mask.mut_data()[3 * 8 + 3] = 1.0f;  // single fg pixel in the top-left quadrant

    // Find a seed whose first draw picks quadrant 0.
    std::uint64_t seed = 0;
    while (true) {
        Rng probe(seed);
        if (probe.uniform_int(4) == 0) break;
        ++seed;
    }
    Rng rng(seed);
    QuarterCropResult r = quarter_crop(img, mask, rng);
    CHECK(r.quadrant == 0);
    for (float v : r.image.data()) CHECK(v == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(count_fg(r.mask) == 4);  // one source pixel becomes 2x2 under nearest upscale
    CHECK(r.mask.at(6, 6) == 1.0f);

    Tensor odd = Tensor::zeros({1, 7, 8});
    CHECK_THROWS_AS(quarter_crop(odd, Tensor::zeros({7, 8}), rng), DomainError);
}

TEST_CASE("a centered lesion leaves one corner of itself in every quadrant") {
    SceneSpec spec;
    spec.center_sigma_frac = 0.0f;
    Scene s = generate_scene(spec, 3);
    for (int quadrant = 0; quadrant < 4; ++quadrant) {
        std::uint64_t seed = 0;
        while (true) {
            Rng probe(seed);
            if (probe.uniform_int(4) == quadrant) break;
            ++seed;
        }
        Rng rng(seed);
        QuarterCropResult r = quarter_crop(s.image, s.mask, rng);
        // The original frame center maps to the crop corner diagonally
        // opposite the chosen quadrant's corner.
        int cy = (quadrant / 2 == 0) ? 63 : 0;
        int cx = (quadrant % 2 == 0) ? 63 : 0;
        CAPTURE(quadrant);
        CHECK(r.mask.at(cy, cx) == 1.0f);
    }
}

TEST_CASE("quadrant choice is uniform within 2% over 10k draws") {
    Rng rng(23);
    Tensor img = Tensor::zeros({1, 4, 4});
    Tensor mask = Tensor::zeros({4, 4});
    int counts[4] = {0, 0, 0, 0};
    const int n = 10000;
    for (int i = 0; i < n; ++i) counts[quarter_crop(img, mask, rng).quadrant]++;
    for (int q = 0; q < 4; ++q) {
        double frac = static_cast<double>(counts[q]) / n;
        CHECK(frac > 0.23);
        CHECK(frac < 0.27);
    }
}

TEST_CASE("frozen sequences start clean and annotate cumulatively") {
    SceneSpec spec;
    spec.channels = 3;
    Scene s = generate_scene(spec, 21);
    MarkerSpec markers;

    std::vector<Tensor> two = make_frozen_sequence(s, markers, 2);
    REQUIRE(two.size() == 2);
    CHECK(bit_equal(two[0], quantize8(s.image)));
    // The final frame of a T=2 sequence carries the full annotation set.
    Rng rng(1);
    markers.rho = 1.0f;
    MarkerResult full = inject_markers(s.image, s.mask, markers, rng);
    CHECK(bit_equal(two[1], quantize8(full.image)));

    std::vector<Tensor> five = make_frozen_sequence(s, markers, 5);
    REQUIRE(five.size() == 5);
    CHECK(bit_equal(five[0], quantize8(s.image)));
    CHECK(bit_equal(five[4], quantize8(full.image)));
    // Consecutive frames differ only at pixels carrying marker color in the
    // later frame.
    float qr = quantize8(Tensor::scalar(markers.color[0])).item();
    float qg = quantize8(Tensor::scalar(markers.color[1])).item();
    float qb = quantize8(Tensor::scalar(markers.color[2])).item();
    for (int t = 0; t + 1 < 5; ++t) {
        auto a = five[static_cast<std::size_t>(t)].data();
        auto b = five[static_cast<std::size_t>(t) + 1].data();
        const std::int64_t plane = 64 * 64;
        for (std::int64_t i = 0; i < plane; ++i) {
            bool differs = a[i] != b[i] || a[plane + i] != b[plane + i] ||
                           a[2 * plane + i] != b[2 * plane + i];
            if (differs) {
                REQUIRE(b[i] == qr);
                REQUIRE(b[plane + i] == qg);
                REQUIRE(b[2 * plane + i] == qb);
            }
        }
    }

    CHECK_THROWS_AS(make_frozen_sequence(s, markers, 1), UsageError);
}

TEST_CASE("generate_dataset writes n pairs plus manifest and is reproducible") {
    TempDir dir("dataset");
    SceneSpec spec;
    spec.channels = 3;
    MarkerSpec markers;
    DatasetManifest m1 = generate_dataset((dir.path / "a").string(), 10, spec, markers, 1000);
    REQUIRE(m1.rows.size() == 10);
    for (const auto& row : m1.rows) {
        CHECK(std::filesystem::exists(dir.path / "a" / row.image_path));
        CHECK(std::filesystem::exists(dir.path / "a" / row.mask_path));
        CHECK(row.markers_present);
    }

    DatasetManifest m2 = generate_dataset((dir.path / "b").string(), 10, spec, markers, 1000);
    CHECK(slurp(dir.path / "a" / "manifest.csv") == slurp(dir.path / "b" / "manifest.csv"));
    for (const auto& row : m1.rows) {
        CHECK(slurp(dir.path / "a" / row.image_path) == slurp(dir.path / "b" / row.image_path));
        CHECK(slurp(dir.path / "a" / row.mask_path) == slurp(dir.path / "b" / row.mask_path));
    }
}

TEST_CASE("split counts are exactly 80/10/10 for n=1000") {
    TempDir dir("split");
    SceneSpec spec;
    spec.size = 16;  // small frames keep this fast
    spec.axis_min_frac = 0.2f;
    spec.axis_max_frac = 0.3f;
    DatasetManifest m =
        generate_dataset((dir.path / "d").string(), 1000, spec, std::nullopt, 55);
    int train = 0, val = 0, test = 0;
    for (const auto& row : m.rows) {
        train += row.split == "train";
        val += row.split == "val";
        test += row.split == "test";
    }
    CHECK(train == 800);
    CHECK(val == 100);
    CHECK(test == 100);
}

TEST_CASE("manifest round-trips and regenerates samples bit-exactly") {
    TempDir dir("manifest");
    SceneSpec spec;
    spec.channels = 1;
    spec.placement = Placement::QuarterCrop;
    MarkerSpec markers;
    markers.rho = 0.7f;
    std::string root = (dir.path / "d").string();
    DatasetManifest written = generate_dataset(root, 12, spec, markers, 777);

    DatasetManifest loaded = read_manifest(root + "/manifest.csv");
    REQUIRE(loaded.rows.size() == written.rows.size());
    for (std::size_t i = 0; i < loaded.rows.size(); ++i) {
        CHECK(loaded.rows[i].seed == written.rows[i].seed);
        CHECK(loaded.rows[i].split == written.rows[i].split);
        CHECK(loaded.rows[i].markers_present == written.rows[i].markers_present);
        CHECK(loaded.rows[i].centroid_x ==
              doctest::Approx(written.rows[i].centroid_x).epsilon(1e-5));
    }

    // Regenerating from the manifest seed reproduces the stored bytes.
    for (const auto& row : loaded.rows) {
        GeneratedSample sample = generate_sample(spec, markers, row.seed);
        Tensor img = read_png((std::filesystem::path(root) / row.image_path).string());
        Tensor mask = read_png((std::filesystem::path(root) / row.mask_path).string());
        CHECK(bit_equal(img, sample.image));
        CHECK(count_fg(mask) == count_fg(sample.mask));
        CHECK(sample.markers_present == row.markers_present);
    }
}
