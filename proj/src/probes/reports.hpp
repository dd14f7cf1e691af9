#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tensor/tensor.hpp"

namespace slab::probes {

// Square ring bands of normalized Chebyshev distance from the frame center:
// d(x,y) = max(|2x+1-W|/W, |2y+1-H|/H), band = floor(d * n_bands). Band 0 is
// innermost; the bands partition all pixels.
struct BandSpec {
    int n_bands = 5;
};

struct BandedDiceReport {
    struct Band {
        int index = 0;
        double d_lo = 0, d_hi = 0;
        bool defined = false;  // false when no image had foreground in this band
        double dice_mean = 0, dice_std = 0;
        int n_images = 0;          // images contributing to the average
        std::int64_t n_pixels = 0;  // band size in one frame
    };
    std::vector<Band> bands;
    double overall_mean = 0, overall_std = 0;
};

struct PairedEvalReport {
    struct Row {
        std::string id;
        double dice_marked = 0, dice_clean = 0, delta = 0;
    };
    std::vector<Row> rows;
    double marked_mean = 0, marked_std = 0;
    double clean_mean = 0, clean_std = 0;
    double delta_mean = 0, delta_std = 0;
};

// Aggregates the per-row statistics; exposed so report math is testable.
void finalize(PairedEvalReport& report);

struct StabilityReport {
    struct Video {
        std::string id;
        std::vector<double> dice_to_final;
        double endpoint = 0;  // dice(mask_0, mask_T)
    };
    std::vector<Video> videos;
    double endpoint_mean = 0, endpoint_std = 0;
};

void finalize(StabilityReport& report);

struct CentroidReport {
    int bins = 32;
    std::vector<std::int64_t> histogram;  // bins x bins, row-major (y, x)
    std::int64_t n_masks = 0;             // nonempty masks used
    std::int64_t n_empty = 0;             // skipped
    double central_box_fraction = 0;      // centroids inside the centered half-side box
};

struct SweepReport {
    struct Step {
        int index = 0;
        double offset_frac = 0;  // 0 = centered, 1 = border-touching
        double offset_px = 0;    // euclidean distance from the frame center
        double center_x = 0;     // rendered lesion center
        double center_y = 0;
        double recall = 0;  // |pred & gt| / |gt|
        double dice = 0;
    };
    std::vector<Step> steps;
};

struct SaliencyRow {
    std::string id;
    double marker_mean = 0;
    double background_mean = 0;
    double ratio = 0;
};

}  // namespace slab::probes
