#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phantom/markers.hpp"
#include "phantom/scene.hpp"

namespace slab::phantom {

// One of the four H/2 x W/2 quadrants (uniform draw), applied identically to
// image and mask, then resized back to H x W (image bilinear, mask nearest).
struct QuarterCropResult {
    Tensor image;
    Tensor mask;
    int quadrant;  // 0 TL, 1 TR, 2 BL, 3 BR
};
QuarterCropResult quarter_crop(const Tensor& image, const Tensor& mask, Rng& rng);

struct ManifestRow {
    int index = 0;
    std::string image_path;
    std::string mask_path;
    std::uint64_t seed = 0;
    std::string placement;
    bool markers_present = false;
    double centroid_x = -1;
    double centroid_y = -1;
    std::string split;  // train | val | test
};

struct DatasetManifest {
    std::vector<ManifestRow> rows;
};

// Fully reproducible sample: rng draws happen in the order scene, quadrant
// (QuarterCrop only), marker presence. Image and mask come back quantized the
// way the PNG files store them.
struct GeneratedSample {
    Tensor image;
    Tensor mask;
    bool markers_present = false;
    double centroid_x = -1;
    double centroid_y = -1;
};
GeneratedSample generate_sample(const SceneSpec& spec, const std::optional<MarkerSpec>& markers,
                                std::uint64_t seed);

// Writes images/NNNN.png, masks/NNNN.png and manifest.csv under out_dir.
// Per-sample seed is base_seed + index; the 80/10/10 split is assigned by
// ranking a per-index hash, which gives exact counts.
DatasetManifest generate_dataset(const std::string& out_dir, int n, const SceneSpec& spec,
                                 const std::optional<MarkerSpec>& markers, std::uint64_t base_seed);

void write_manifest(const std::string& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::string& path);

}  // namespace slab::phantom
