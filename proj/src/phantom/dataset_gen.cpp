#include "phantom/dataset_gen.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "core/error.hpp"
#include "image/image_ops.hpp"
#include "image/png_io.hpp"

namespace slab::phantom {

namespace {

Tensor crop_plane(const Tensor& t, int y0, int x0, int h, int w) {
    const bool has_c = t.rank() == 3;
    const int c = has_c ? t.dim(0) : 1;
    const int sw = has_c ? t.dim(2) : t.dim(1);
    const int sh = has_c ? t.dim(1) : t.dim(0);
    Tensor out = Tensor::zeros(has_c ? std::vector<int>{c, h, w} : std::vector<int>{h, w});
    auto src = t.data();
    auto dst = out.mut_data();
    for (int ci = 0; ci < c; ++ci) {
        const float* sp = src.data() + static_cast<std::int64_t>(ci) * sh * sw;
        float* dp = dst.data() + static_cast<std::int64_t>(ci) * h * w;
        for (int y = 0; y < h; ++y) {
            std::copy(sp + (y0 + y) * sw + x0, sp + (y0 + y) * sw + x0 + w, dp + y * w);
        }
    }
    return out;
}

void centroid_of(const Tensor& mask, double& cx, double& cy) {
    auto m = mask.data();
    const int h = mask.dim(0), w = mask.dim(1);
    double sx = 0, sy = 0;
    std::int64_t count = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (m[static_cast<std::size_t>(y) * w + x] != 0.0f) {
                sx += x + 0.5;
                sy += y + 0.5;
                ++count;
            }
        }
    }
    cx = count ? sx / count : -1.0;
    cy = count ? sy / count : -1.0;
}

std::string csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

bool mask_has_foreground(const Tensor& mask) {
    for (float v : mask.data()) {
        if (v != 0.0f) return true;
    }
    return false;
}

}  // namespace

QuarterCropResult quarter_crop(const Tensor& image, const Tensor& mask, Rng& rng) {
    if (image.rank() != 3 || mask.rank() != 2) {
        throw DomainError("quarter_crop: expected image [C,H,W] and mask [H,W]");
    }
    const int h = image.dim(1), w = image.dim(2);
    if (h % 2 != 0 || w % 2 != 0) throw DomainError("quarter_crop: dims must be even");
    if (mask.dim(0) != h || mask.dim(1) != w) throw DomainError("quarter_crop: image/mask mismatch");

    QuarterCropResult out;
    out.quadrant = rng.uniform_int(4);
    const int y0 = (out.quadrant / 2) * (h / 2);
    const int x0 = (out.quadrant % 2) * (w / 2);
    Tensor ci = crop_plane(image, y0, x0, h / 2, w / 2);
    Tensor cm = crop_plane(mask, y0, x0, h / 2, w / 2);
    out.image = resize_bilinear(ci, h, w);
    out.mask = binarize(resize_nearest(cm, h, w));
    return out;
}

GeneratedSample generate_sample(const SceneSpec& spec, const std::optional<MarkerSpec>& markers,
                                std::uint64_t seed) {
    Rng rng(seed);
    Scene scene = generate_scene(spec, rng);
    Tensor image = scene.image;
    Tensor mask = scene.mask;
    if (spec.placement == Placement::QuarterCrop) {
        QuarterCropResult crop = quarter_crop(image, mask, rng);
        image = crop.image;
        mask = crop.mask;
    }
    GeneratedSample out;
    if (markers && mask_has_foreground(mask)) {
        MarkerResult annotated = inject_markers(image, mask, *markers, rng);
        image = annotated.image;
        out.markers_present = annotated.markers_present;
    }
    out.image = quantize8(image);
    out.mask = mask;
    centroid_of(mask, out.centroid_x, out.centroid_y);
    return out;
}

DatasetManifest generate_dataset(const std::string& out_dir, int n, const SceneSpec& spec,
                                 const std::optional<MarkerSpec>& markers, std::uint64_t base_seed) {
    if (n < 1) throw UsageError("generate_dataset: n must be >= 1");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "images", ec);
    fs::create_directories(fs::path(out_dir) / "masks", ec);
    if (ec) throw IoError("cannot create dataset directories under " + out_dir + ": " + ec.message());

    // Exact 80/10/10 split: rank indices by hash, slice by largest-remainder
    // counts.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::uint64_t> hash(order.size());
    for (int i = 0; i < n; ++i) {
        hash[static_cast<std::size_t>(i)] = splitmix64(base_seed ^ (0x51ab0000ULL + i));
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::tie(hash[static_cast<std::size_t>(a)], a) <
               std::tie(hash[static_cast<std::size_t>(b)], b);
    });
    int n_train = static_cast<int>(0.8 * n);
    int n_val = static_cast<int>(0.1 * n);
    int n_test = static_cast<int>(0.1 * n);
    int rem = n - n_train - n_val - n_test;
    double fr_train = 0.8 * n - n_train, fr_val = 0.1 * n - n_val, fr_test = 0.1 * n - n_test;
    while (rem-- > 0) {
        if (fr_train >= fr_val && fr_train >= fr_test) {
            ++n_train;
            fr_train = -1;
        } else if (fr_val >= fr_test) {
            ++n_val;
            fr_val = -1;
        } else {
            ++n_test;
            fr_test = -1;
        }
    }
    std::vector<std::string> split(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
        split[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] =
            (r < n_train) ? "train" : (r < n_train + n_val) ? "val" : "test";
    }

    DatasetManifest manifest;
    manifest.rows.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
        GeneratedSample sample = generate_sample(spec, markers, seed);
        char name[32];
        std::snprintf(name, sizeof(name), "%04d.png", i);
        ManifestRow row;
        row.index = i;
        row.image_path = std::string("images/") + name;
        row.mask_path = std::string("masks/") + name;
        row.seed = seed;
        row.placement = placement_name(spec.placement);
        row.markers_present = sample.markers_present;
        row.centroid_x = sample.centroid_x;
        row.centroid_y = sample.centroid_y;
        row.split = split[static_cast<std::size_t>(i)];
        write_png((fs::path(out_dir) / row.image_path).string(), sample.image);
        write_png((fs::path(out_dir) / row.mask_path).string(), sample.mask);
        manifest.rows.push_back(std::move(row));
    }
    write_manifest((fs::path(out_dir) / "manifest.csv").string(), manifest);
    return manifest;
}

void write_manifest(const std::string& path, const DatasetManifest& manifest) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write manifest: " + path);
    f << "index,image_path,mask_path,seed,placement,markers_present,centroid_x,centroid_y,split\n";
    for (const ManifestRow& r : manifest.rows) {
        f << r.index << ',' << r.image_path << ',' << r.mask_path << ',' << r.seed << ','
          << r.placement << ',' << (r.markers_present ? 1 : 0) << ',' << csv_double(r.centroid_x)
          << ',' << csv_double(r.centroid_y) << ',' << r.split << '\n';
    }
    if (!f) throw IoError("failed writing manifest: " + path);
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open manifest: " + path);
    std::string line;
    if (!std::getline(f, line)) throw FormatError("manifest is empty: " + path);
    DatasetManifest manifest;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        if (cols.size() != 9) throw FormatError("bad manifest row in " + path + ": " + line);
        ManifestRow r;
        r.index = std::stoi(cols[0]);
        r.image_path = cols[1];
        r.mask_path = cols[2];
        r.seed = std::stoull(cols[3]);
        r.placement = cols[4];
        r.markers_present = cols[5] == "1";
        r.centroid_x = std::stod(cols[6]);
        r.centroid_y = std::stod(cols[7]);
        r.split = cols[8];
        manifest.rows.push_back(std::move(r));
    }
    return manifest;
}

}  // namespace slab::phantom
