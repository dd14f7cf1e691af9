#pragma once

#include "probes/reports.hpp"

namespace slab::probes {

// 2|a&b| / (|a|+|b|) over binary masks; both empty counts as a perfect 1.0.
double dice(const Tensor& a, const Tensor& b);

// Per-pixel band indices under the Chebyshev ring rule, computed in integer
// arithmetic so boundary pixels never suffer rounding.
std::vector<int> band_index_map(int h, int w, const BandSpec& spec);

// Dice per band, restricted to that band's pixels, averaged over the images
// that have ground-truth foreground there. Bands nobody populates are flagged
// undefined rather than averaged as zero.
BandedDiceReport banded_dice(const std::vector<Tensor>& preds, const std::vector<Tensor>& gts,
                             const BandSpec& spec);

// Histogram of normalized mask centroids plus the fraction inside the
// centered box of half side-length. Empty masks are skipped and counted.
CentroidReport centroid_distribution(const std::vector<Tensor>& masks, int bins = 32);

}  // namespace slab::probes
