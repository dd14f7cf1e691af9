#include "probes/metrics.hpp"

#include <cmath>

#include "core/error.hpp"

namespace slab::probes {

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& std_dev) {
    if (xs.empty()) {
        mean = 0;
        std_dev = 0;
        return;
    }
    double acc = 0;
    for (double x : xs) acc += x;
    mean = acc / static_cast<double>(xs.size());
    double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    std_dev = std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace

double dice(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw DomainError("dice: shape mismatch " + shape_to_string(a.shape()) + " vs " +
                          shape_to_string(b.shape()));
    }
    auto pa = a.data();
    auto pb = b.data();
    std::int64_t na = 0, nb = 0, ni = 0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const bool fa = pa[i] != 0.0f;
        const bool fb = pb[i] != 0.0f;
        na += fa;
        nb += fb;
        ni += fa && fb;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(ni) / static_cast<double>(na + nb);
}

std::vector<int> band_index_map(int h, int w, const BandSpec& spec) {
    if (spec.n_bands < 1) throw UsageError("band_index_map: n_bands must be >= 1");
    std::vector<int> map(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y) {
        const std::int64_t uy = std::abs(2LL * y + 1 - h);
        const std::int64_t by = uy * spec.n_bands / h;
        for (int x = 0; x < w; ++x) {
            const std::int64_t ux = std::abs(2LL * x + 1 - w);
            const std::int64_t bx = ux * spec.n_bands / w;
            map[static_cast<std::size_t>(y) * w + x] = static_cast<int>(std::max(bx, by));
        }
    }
    return map;
}

BandedDiceReport banded_dice(const std::vector<Tensor>& preds, const std::vector<Tensor>& gts,
                             const BandSpec& spec) {
    if (preds.empty() || preds.size() != gts.size()) {
        throw UsageError("banded_dice: need matched, nonempty prediction/ground-truth lists");
    }
    BandedDiceReport report;
    report.bands.resize(static_cast<std::size_t>(spec.n_bands));
    std::vector<std::vector<double>> per_band(static_cast<std::size_t>(spec.n_bands));
    std::vector<double> overall;

    std::vector<int> map;
    int map_h = -1, map_w = -1;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const Tensor& pred = preds[i];
        const Tensor& gt = gts[i];
        if (pred.shape() != gt.shape() || pred.rank() != 2) {
            throw DomainError("banded_dice: masks must be matching [H,W] pairs");
        }
        const int h = pred.dim(0), w = pred.dim(1);
        if (h != map_h || w != map_w) {
            map = band_index_map(h, w, spec);
            map_h = h;
            map_w = w;
            for (int b = 0; b < spec.n_bands; ++b) {
                report.bands[static_cast<std::size_t>(b)].n_pixels = 0;
            }
            for (int v : map) report.bands[static_cast<std::size_t>(v)].n_pixels++;
        }
        overall.push_back(dice(pred, gt));

        std::vector<std::int64_t> np(static_cast<std::size_t>(spec.n_bands), 0);
        std::vector<std::int64_t> ng(np), ni(np);
        auto pp = pred.data();
        auto pg = gt.data();
        for (std::size_t k = 0; k < pp.size(); ++k) {
            const int b = map[k];
            const bool fp = pp[k] != 0.0f;
            const bool fg = pg[k] != 0.0f;
            np[static_cast<std::size_t>(b)] += fp;
            ng[static_cast<std::size_t>(b)] += fg;
            ni[static_cast<std::size_t>(b)] += fp && fg;
        }
        for (int b = 0; b < spec.n_bands; ++b) {
            if (ng[static_cast<std::size_t>(b)] == 0) continue;  // no gt foreground here
            double d = 2.0 * static_cast<double>(ni[static_cast<std::size_t>(b)]) /
                       static_cast<double>(np[static_cast<std::size_t>(b)] +
                                           ng[static_cast<std::size_t>(b)]);
            per_band[static_cast<std::size_t>(b)].push_back(d);
        }
    }

    for (int b = 0; b < spec.n_bands; ++b) {
        BandedDiceReport::Band& band = report.bands[static_cast<std::size_t>(b)];
        band.index = b;
        band.d_lo = static_cast<double>(b) / spec.n_bands;
        band.d_hi = static_cast<double>(b + 1) / spec.n_bands;
        const auto& xs = per_band[static_cast<std::size_t>(b)];
        band.n_images = static_cast<int>(xs.size());
        band.defined = !xs.empty();
        if (band.defined) mean_std(xs, band.dice_mean, band.dice_std);
    }
    mean_std(overall, report.overall_mean, report.overall_std);
    return report;
}

CentroidReport centroid_distribution(const std::vector<Tensor>& masks, int bins) {
    if (masks.empty()) throw UsageError("centroid_distribution: no masks");
    if (bins < 1) throw UsageError("centroid_distribution: bins must be >= 1");
    CentroidReport report;
    report.bins = bins;
    report.histogram.assign(static_cast<std::size_t>(bins) * bins, 0);
    std::int64_t inside_box = 0;
    for (const Tensor& mask : masks) {
        if (mask.rank() != 2) throw DomainError("centroid_distribution: masks must be [H,W]");
        const int h = mask.dim(0), w = mask.dim(1);
        auto m = mask.data();
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
        if (count == 0) {
            report.n_empty++;
            continue;
        }
        const double cx = sx / count / w;
        const double cy = sy / count / h;
        const int bx = std::min(static_cast<int>(cx * bins), bins - 1);
        const int by = std::min(static_cast<int>(cy * bins), bins - 1);
        report.histogram[static_cast<std::size_t>(by) * bins + bx]++;
        report.n_masks++;
        if (cx >= 0.25 && cx < 0.75 && cy >= 0.25 && cy < 0.75) ++inside_box;
    }
    if (report.n_masks == 0) throw UsageError("centroid_distribution: all masks are empty");
    report.central_box_fraction =
        static_cast<double>(inside_box) / static_cast<double>(report.n_masks);
    return report;
}

void finalize(PairedEvalReport& report) {
    std::vector<double> marked, clean, delta;
    for (auto& row : report.rows) {
        row.delta = row.dice_marked - row.dice_clean;
        marked.push_back(row.dice_marked);
        clean.push_back(row.dice_clean);
        delta.push_back(row.delta);
    }
    mean_std(marked, report.marked_mean, report.marked_std);
    mean_std(clean, report.clean_mean, report.clean_std);
    mean_std(delta, report.delta_mean, report.delta_std);
}

void finalize(StabilityReport& report) {
    std::vector<double> endpoints;
    for (auto& video : report.videos) {
        if (!video.dice_to_final.empty()) video.endpoint = video.dice_to_final.front();
        endpoints.push_back(video.endpoint);
    }
    mean_std(endpoints, report.endpoint_mean, report.endpoint_std);
}

}  // namespace slab::probes
