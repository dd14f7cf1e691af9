#include "data/loader.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "image/image_ops.hpp"
#include "image/png_io.hpp"
#include "phantom/dataset_gen.hpp"

namespace slab {

namespace {

namespace fs = std::filesystem;

std::map<std::string, fs::path> stems_of(const fs::path& dir) {
    std::map<std::string, fs::path> out;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        out[entry.path().stem().string()] = entry.path();
    }
    return out;
}

}  // namespace

Dataset load_dataset(const std::string& dir, int target_size) {
    if (target_size < 1) throw UsageError("load_dataset: bad target size");
    fs::path root(dir);
    auto images = stems_of(root / "images");
    auto masks = stems_of(root / "masks");

    std::string unmatched;
    for (const auto& [stem, path] : images) {
        if (!masks.count(stem)) unmatched += " image:" + stem;
    }
    for (const auto& [stem, path] : masks) {
        if (!images.count(stem)) unmatched += " mask:" + stem;
    }
    if (!unmatched.empty()) {
        throw UsageError("load_dataset: unmatched stems in " + dir + ":" + unmatched);
    }

    // Optional generator manifest for provenance metadata.
    std::map<std::string, phantom::ManifestRow> meta;
    if (fs::exists(root / "manifest.csv")) {
        for (auto& row : phantom::read_manifest((root / "manifest.csv").string()).rows) {
            meta[fs::path(row.image_path).stem().string()] = row;
        }
    }

    Dataset out;
    out.reserve(images.size());
    for (const auto& [stem, path] : images) {  // std::map iterates stems in order
        Sample s;
        s.id = stem;
        Tensor img = read_png(path.string());
        const int orig_h = img.dim(1), orig_w = img.dim(2);
        s.image = (orig_h == target_size && orig_w == target_size)
                      ? img
                      : resize_bilinear(img, target_size, target_size);
        Tensor mask = read_png(masks[stem].string());
        // channel 0 regardless of whether the file was gray or RGB
        const std::size_t plane_len = static_cast<std::size_t>(mask.dim(1)) * mask.dim(2);
        Tensor plane = Tensor::from_data(
            {mask.dim(1), mask.dim(2)},
            std::vector<float>(mask.data().begin(), mask.data().begin() + plane_len));
        if (mask.dim(1) != target_size || mask.dim(2) != target_size) {
            plane = resize_nearest(plane, target_size, target_size);
        }
        s.mask = binarize(plane);

        auto it = meta.find(stem);
        if (it != meta.end()) {
            s.markers_present = it->second.markers_present ? TriState::Yes : TriState::No;
            if (it->second.centroid_x >= 0.0) {
                s.centroid = {{it->second.centroid_x * target_size / orig_w,
                               it->second.centroid_y * target_size / orig_h}};
            }
        }
        out.push_back(std::move(s));
    }
    if (out.empty()) throw UsageError("load_dataset: no samples in " + dir);
    return out;
}

std::array<Dataset, 3> split(const Dataset& dataset, std::array<double, 3> ratios,
                             std::uint64_t seed) {
    if (dataset.empty()) throw UsageError("split: empty dataset");
    double total = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(total - 1.0) > 1e-9) throw UsageError("split: ratios must sum to 1");

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    const std::size_t n = dataset.size();
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> fract{};
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        double exact = ratios[static_cast<std::size_t>(i)] * static_cast<double>(n);
        counts[static_cast<std::size_t>(i)] = static_cast<std::size_t>(exact);
        fract[static_cast<std::size_t>(i)] = exact - std::floor(exact);
        assigned += counts[static_cast<std::size_t>(i)];
    }
    while (assigned < n) {
        int best = 0;
        for (int i = 1; i < 3; ++i) {
            if (fract[static_cast<std::size_t>(i)] > fract[static_cast<std::size_t>(best)]) best = i;
        }
        counts[static_cast<std::size_t>(best)]++;
        fract[static_cast<std::size_t>(best)] = -1;
        ++assigned;
    }

    std::array<Dataset, 3> out;
    std::size_t cursor = 0;
    for (int part = 0; part < 3; ++part) {
        for (std::size_t i = 0; i < counts[static_cast<std::size_t>(part)]; ++i) {
            out[static_cast<std::size_t>(part)].push_back(dataset[order[cursor++]]);
        }
    }
    return out;
}

}  // namespace slab
