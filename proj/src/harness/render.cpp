#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "core/error.hpp"
#include "harness/bundle.hpp"

namespace slab::harness {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string svgnum(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

class Artifacts {
public:
    explicit Artifacts(const fs::path& dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create report dir " + dir.string() + ": " + ec.message());
    }

    void write(const std::string& name, const std::string& kind, const std::string& content) {
        std::ofstream f(dir_ / name, std::ios::trunc);
        if (!f) throw IoError("cannot write report file: " + (dir_ / name).string());
        f << content;
        if (!f) throw IoError("failed writing report file: " + (dir_ / name).string());
        index_.emplace_back(name, kind);
    }

    void finish() {
        std::sort(index_.begin(), index_.end());
        std::string content = "file,kind\n";
        for (const auto& [name, kind] : index_) content += name + "," + kind + "\n";
        std::ofstream f(dir_ / "index.csv", std::ios::trunc);
        if (!f) throw IoError("cannot write index.csv in " + dir_.string());
        f << content;
    }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> index_;
};

// --- svg helpers -----------------------------------------------------------

constexpr int kW = 480, kH = 320, kPad = 40;

std::string svg_open() {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kW) +
           "\" height=\"" + std::to_string(kH) + "\" viewBox=\"0 0 " + std::to_string(kW) + " " +
           std::to_string(kH) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string svg_axes() {
    std::string s;
    s += "<line x1=\"" + std::to_string(kPad) + "\" y1=\"" + std::to_string(kH - kPad) + "\" x2=\"" +
         std::to_string(kW - kPad) + "\" y2=\"" + std::to_string(kH - kPad) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + std::to_string(kPad) + "\" y1=\"" + std::to_string(kPad) + "\" x2=\"" +
         std::to_string(kPad) + "\" y2=\"" + std::to_string(kH - kPad) + "\" stroke=\"black\"/>\n";
    return s;
}

double plot_y(double v) {  // v in [0,1]
    return kH - kPad - v * (kH - 2 * kPad);
}

std::string polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color) {
    std::string s = "<polyline fill=\"none\" stroke=\"" + color + "\" points=\"";
    for (const auto& [x, y] : pts) s += svgnum(x) + "," + svgnum(y) + " ";
    s += "\"/>\n";
    return s;
}

std::string banded_svg(const probes::BandedDiceReport& r, const std::string& title) {
    std::string s = svg_open() + svg_axes();
    const int n = static_cast<int>(r.bands.size());
    const double bw = static_cast<double>(kW - 2 * kPad) / std::max(1, n);
    for (int i = 0; i < n; ++i) {
        const auto& band = r.bands[static_cast<std::size_t>(i)];
        double x = kPad + i * bw + 4;
        if (band.defined) {
            double top = plot_y(band.dice_mean);
            s += "<rect x=\"" + svgnum(x) + "\" y=\"" + svgnum(top) + "\" width=\"" +
                 svgnum(bw - 8) + "\" height=\"" + svgnum(kH - kPad - top) +
                 "\" fill=\"#4477aa\"/>\n";
            double lo = plot_y(std::max(0.0, band.dice_mean - band.dice_std));
            double hi = plot_y(std::min(1.0, band.dice_mean + band.dice_std));
            s += "<line x1=\"" + svgnum(x + (bw - 8) / 2) + "\" y1=\"" + svgnum(hi) + "\" x2=\"" +
                 svgnum(x + (bw - 8) / 2) + "\" y2=\"" + svgnum(lo) + "\" stroke=\"black\"/>\n";
        } else {
            s += "<text x=\"" + svgnum(x) + "\" y=\"" + svgnum(plot_y(0.5)) +
                 "\" font-size=\"10\">n/a</text>\n";
        }
        s += "<text x=\"" + svgnum(x) + "\" y=\"" + std::to_string(kH - kPad + 14) +
             "\" font-size=\"10\">" + std::to_string(band.index) + "</text>\n";
    }
    s += "<text x=\"" + std::to_string(kPad) + "\" y=\"20\" font-size=\"12\">" + title +
         " (dice by ring band)</text>\n</svg>\n";
    return s;
}

std::string stability_svg(const probes::StabilityReport& r, const std::string& title) {
    std::string s = svg_open() + svg_axes();
    for (const auto& video : r.videos) {
        std::vector<std::pair<double, double>> pts;
        const int t_max = static_cast<int>(video.dice_to_final.size()) - 1;
        for (int t = 0; t <= t_max; ++t) {
            double x = kPad + (t_max ? static_cast<double>(t) / t_max : 0.0) * (kW - 2 * kPad);
            pts.emplace_back(x, plot_y(video.dice_to_final[static_cast<std::size_t>(t)]));
        }
        s += polyline(pts, "#4477aa");
    }
    s += "<text x=\"" + std::to_string(kPad) + "\" y=\"20\" font-size=\"12\">" + title +
         " (dice to final frame)</text>\n</svg>\n";
    return s;
}

std::string sweep_svg(const probes::SweepReport& r, const std::string& title) {
    std::string s = svg_open() + svg_axes();
    std::vector<std::pair<double, double>> recall, dice;
    for (const auto& step : r.steps) {
        double x = kPad + step.offset_frac * (kW - 2 * kPad);
        recall.emplace_back(x, plot_y(step.recall));
        dice.emplace_back(x, plot_y(step.dice));
    }
    s += polyline(recall, "#4477aa");
    s += polyline(dice, "#cc6677");
    s += "<text x=\"" + std::to_string(kPad) + "\" y=\"20\" font-size=\"12\">" + title +
         " (recall blue, dice red; center to border)</text>\n</svg>\n";
    return s;
}

std::string centroid_svg(const probes::CentroidReport& r) {
    std::string s = svg_open();
    std::int64_t peak = 1;
    for (std::int64_t c : r.histogram) peak = std::max(peak, c);
    const double cell = static_cast<double>(std::min(kW, kH) - 2 * kPad) / r.bins;
    for (int y = 0; y < r.bins; ++y) {
        for (int x = 0; x < r.bins; ++x) {
            std::int64_t c = r.histogram[static_cast<std::size_t>(y) * r.bins + x];
            if (c == 0) continue;
            int shade = 255 - static_cast<int>(215.0 * static_cast<double>(c) / static_cast<double>(peak));
            char color[16];
            std::snprintf(color, sizeof(color), "#%02x%02x%02x", shade, shade, 255);
            s += "<rect x=\"" + svgnum(kPad + x * cell) + "\" y=\"" + svgnum(kPad + y * cell) +
                 "\" width=\"" + svgnum(cell) + "\" height=\"" + svgnum(cell) + "\" fill=\"" + color +
                 "\"/>\n";
        }
    }
    s += "<text x=\"" + std::to_string(kPad) + "\" y=\"20\" font-size=\"12\">mask centroid heatmap"
         "</text>\n</svg>\n";
    return s;
}

}  // namespace

void render_reports(const ReportBundle& bundle, const std::string& out_dir) {
    Artifacts art{fs::path(out_dir)};

    for (const auto& m : bundle.models) {
        std::string csv = "epoch,train_loss,val_dice\n";
        for (std::size_t e = 0; e < m.history.train_loss.size(); ++e) {
            csv += std::to_string(e) + "," + num(m.history.train_loss[e]) + "," +
                   num(m.history.val_dice[e]) + "\n";
        }
        art.write("history_" + m.name + ".csv", "history", csv);
    }

    for (const auto& [name, r] : bundle.banded) {
        std::string csv = "band,d_lo,d_hi,dice_mean,dice_std,n_images\n";
        for (const auto& b : r.bands) {
            csv += std::to_string(b.index) + "," + num(b.d_lo) + "," + num(b.d_hi) + ",";
            if (b.defined) {
                csv += num(b.dice_mean) + "," + num(b.dice_std);
            } else {
                csv += ",";
            }
            csv += "," + std::to_string(b.n_images) + "\n";
        }
        art.write("band_dice_" + name + ".csv", "band_dice", csv);
        art.write("band_dice_" + name + ".svg", "plot", banded_svg(r, name));
    }

    for (const auto& [name, r] : bundle.sweeps) {
        std::string csv = "step,offset_frac,offset_px,center_x,center_y,recall,dice\n";
        for (const auto& s : r.steps) {
            csv += std::to_string(s.index) + "," + num(s.offset_frac) + "," + num(s.offset_px) + "," +
                   num(s.center_x) + "," + num(s.center_y) + "," + num(s.recall) + "," +
                   num(s.dice) + "\n";
        }
        art.write("sweep_" + name + ".csv", "sweep", csv);
        art.write("sweep_" + name + ".svg", "plot", sweep_svg(r, name));
    }

    if (!bundle.paired.empty()) {
        std::string summary = "model,condition,dice_mean,dice_std\n";
        for (const auto& [name, r] : bundle.paired) {
            std::string csv = "image_id,dice_marked,dice_clean,delta\n";
            for (const auto& row : r.rows) {
                csv += row.id + "," + num(row.dice_marked) + "," + num(row.dice_clean) + "," +
                       num(row.delta) + "\n";
            }
            art.write("paired_eval_" + name + ".csv", "paired_eval", csv);
            summary += name + ",marked," + num(r.marked_mean) + "," + num(r.marked_std) + "\n";
            summary += name + ",clean," + num(r.clean_mean) + "," + num(r.clean_std) + "\n";
        }
        art.write("paired_summary.csv", "paired_summary", summary);
    }

    if (!bundle.stability.empty()) {
        std::string summary = "model,endpoint_mean,endpoint_std\n";
        for (const auto& [name, r] : bundle.stability) {
            std::string csv = "video_id,t,dice_to_final\n";
            for (const auto& video : r.videos) {
                for (std::size_t t = 0; t < video.dice_to_final.size(); ++t) {
                    csv += video.id + "," + std::to_string(t) + "," + num(video.dice_to_final[t]) + "\n";
                }
            }
            art.write("stability_" + name + ".csv", "stability", csv);
            art.write("stability_" + name + ".svg", "plot", stability_svg(r, name));
            summary += name + "," + num(r.endpoint_mean) + "," + num(r.endpoint_std) + "\n";
        }
        art.write("stability_summary.csv", "stability_summary", summary);
    }

    for (const auto& [name, rows] : bundle.saliency) {
        std::string csv = "image_id,marker_mean,background_mean,ratio\n";
        for (const auto& row : rows) {
            csv += row.id + "," + num(row.marker_mean) + "," + num(row.background_mean) + "," +
                   num(row.ratio) + "\n";
        }
        art.write("saliency_" + name + ".csv", "saliency", csv);
    }

    if (bundle.centroid) {
        const auto& r = *bundle.centroid;
        std::string stats = "n_masks,n_empty,bins,central_box_fraction\n";
        stats += std::to_string(r.n_masks) + "," + std::to_string(r.n_empty) + "," +
                 std::to_string(r.bins) + "," + num(r.central_box_fraction) + "\n";
        art.write("centroid_stats.csv", "centroid_stats", stats);
        std::string hist = "bin_y,bin_x,count\n";
        for (int y = 0; y < r.bins; ++y) {
            for (int x = 0; x < r.bins; ++x) {
                std::int64_t c = r.histogram[static_cast<std::size_t>(y) * r.bins + x];
                if (c != 0) {
                    hist += std::to_string(y) + "," + std::to_string(x) + "," + std::to_string(c) + "\n";
                }
            }
        }
        art.write("centroid_hist.csv", "centroid_hist", hist);
        art.write("centroid.svg", "plot", centroid_svg(r));
    }

    art.finish();
}

}  // namespace slab::harness
