#include "harness/bundle.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "core/error.hpp"

namespace slab::harness {

using nlohmann::json;

namespace {

json to_json(const probes::BandedDiceReport& r) {
    json bands = json::array();
    for (const auto& b : r.bands) {
        bands.push_back({{"index", b.index},
                         {"d_lo", b.d_lo},
                         {"d_hi", b.d_hi},
                         {"defined", b.defined},
                         {"dice_mean", b.dice_mean},
                         {"dice_std", b.dice_std},
                         {"n_images", b.n_images},
                         {"n_pixels", b.n_pixels}});
    }
    return {{"bands", bands}, {"overall_mean", r.overall_mean}, {"overall_std", r.overall_std}};
}

probes::BandedDiceReport banded_from_json(const json& j) {
    probes::BandedDiceReport r;
    for (const auto& b : j.at("bands")) {
        probes::BandedDiceReport::Band band;
        band.index = b.at("index");
        band.d_lo = b.at("d_lo");
        band.d_hi = b.at("d_hi");
        band.defined = b.at("defined");
        band.dice_mean = b.at("dice_mean");
        band.dice_std = b.at("dice_std");
        band.n_images = b.at("n_images");
        band.n_pixels = b.at("n_pixels");
        r.bands.push_back(band);
    }
    r.overall_mean = j.at("overall_mean");
    r.overall_std = j.at("overall_std");
    return r;
}

json to_json(const probes::SweepReport& r) {
    json steps = json::array();
    for (const auto& s : r.steps) {
        steps.push_back({{"index", s.index},
                         {"offset_frac", s.offset_frac},
                         {"offset_px", s.offset_px},
                         {"center_x", s.center_x},
                         {"center_y", s.center_y},
                         {"recall", s.recall},
                         {"dice", s.dice}});
    }
    return {{"steps", steps}};
}

probes::SweepReport sweep_from_json(const json& j) {
    probes::SweepReport r;
    for (const auto& s : j.at("steps")) {
        r.steps.push_back({s.at("index"), s.at("offset_frac"), s.at("offset_px"), s.at("center_x"),
                           s.at("center_y"), s.at("recall"), s.at("dice")});
    }
    return r;
}

json to_json(const probes::PairedEvalReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"id", row.id},
                        {"dice_marked", row.dice_marked},
                        {"dice_clean", row.dice_clean},
                        {"delta", row.delta}});
    }
    return {{"rows", rows},
            {"marked_mean", r.marked_mean},
            {"marked_std", r.marked_std},
            {"clean_mean", r.clean_mean},
            {"clean_std", r.clean_std},
            {"delta_mean", r.delta_mean},
            {"delta_std", r.delta_std}};
}

probes::PairedEvalReport paired_from_json(const json& j) {
    probes::PairedEvalReport r;
    for (const auto& row : j.at("rows")) {
        r.rows.push_back({row.at("id"), row.at("dice_marked"), row.at("dice_clean"), row.at("delta")});
    }
    r.marked_mean = j.at("marked_mean");
    r.marked_std = j.at("marked_std");
    r.clean_mean = j.at("clean_mean");
    r.clean_std = j.at("clean_std");
    r.delta_mean = j.at("delta_mean");
    r.delta_std = j.at("delta_std");
    return r;
}

json to_json(const probes::StabilityReport& r) {
    json videos = json::array();
    for (const auto& v : r.videos) {
        videos.push_back({{"id", v.id}, {"dice_to_final", v.dice_to_final}, {"endpoint", v.endpoint}});
    }
    return {{"videos", videos},
            {"endpoint_mean", r.endpoint_mean},
            {"endpoint_std", r.endpoint_std}};
}

probes::StabilityReport stability_from_json(const json& j) {
    probes::StabilityReport r;
    for (const auto& v : j.at("videos")) {
        probes::StabilityReport::Video video;
        video.id = v.at("id");
        video.dice_to_final = v.at("dice_to_final").get<std::vector<double>>();
        video.endpoint = v.at("endpoint");
        r.videos.push_back(std::move(video));
    }
    r.endpoint_mean = j.at("endpoint_mean");
    r.endpoint_std = j.at("endpoint_std");
    return r;
}

json to_json(const probes::CentroidReport& r) {
    return {{"bins", r.bins},
            {"histogram", r.histogram},
            {"n_masks", r.n_masks},
            {"n_empty", r.n_empty},
            {"central_box_fraction", r.central_box_fraction}};
}

probes::CentroidReport centroid_from_json(const json& j) {
    probes::CentroidReport r;
    r.bins = j.at("bins");
    r.histogram = j.at("histogram").get<std::vector<std::int64_t>>();
    r.n_masks = j.at("n_masks");
    r.n_empty = j.at("n_empty");
    r.central_box_fraction = j.at("central_box_fraction");
    return r;
}

}  // namespace

void save_bundle(const ReportBundle& bundle, const std::string& path) {
    json j;
    j["kind"] = bundle.kind;
    j["seed"] = bundle.seed;
    j["config_text"] = bundle.config_text;
    j["started_at"] = bundle.started_at;
    j["finished_at"] = bundle.finished_at;
    json models = json::array();
    for (const auto& m : bundle.models) {
        models.push_back({{"name", m.name},
                          {"checkpoint_path", m.checkpoint_path},
                          {"train_loss", m.history.train_loss},
                          {"val_dice", m.history.val_dice}});
    }
    j["models"] = models;
    for (const auto& [name, r] : bundle.banded) j["banded"][name] = to_json(r);
    for (const auto& [name, r] : bundle.sweeps) j["sweeps"][name] = to_json(r);
    for (const auto& [name, r] : bundle.paired) j["paired"][name] = to_json(r);
    for (const auto& [name, r] : bundle.stability) j["stability"][name] = to_json(r);
    for (const auto& [name, rows] : bundle.saliency) {
        json arr = json::array();
        for (const auto& row : rows) {
            arr.push_back({{"id", row.id},
                           {"marker_mean", row.marker_mean},
                           {"background_mean", row.background_mean},
                           {"ratio", row.ratio}});
        }
        j["saliency"][name] = arr;
    }
    if (bundle.centroid) j["centroid"] = to_json(*bundle.centroid);

    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write bundle: " + path);
    f << j.dump(2) << "\n";
    if (!f) throw IoError("failed writing bundle: " + path);
}

ReportBundle load_bundle(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open bundle: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw FormatError("bad bundle json in " + path + ": " + e.what());
    }
    try {
        ReportBundle b;
        b.kind = j.at("kind");
        b.seed = j.at("seed");
        b.config_text = j.at("config_text");
        b.started_at = j.value("started_at", "");
        b.finished_at = j.value("finished_at", "");
        for (const auto& m : j.at("models")) {
            ModelArtifacts art;
            art.name = m.at("name");
            art.checkpoint_path = m.at("checkpoint_path");
            art.history.train_loss = m.at("train_loss").get<std::vector<double>>();
            art.history.val_dice = m.at("val_dice").get<std::vector<double>>();
            b.models.push_back(std::move(art));
        }
        if (j.contains("banded")) {
            for (auto& [name, r] : j.at("banded").items()) b.banded[name] = banded_from_json(r);
        }
        if (j.contains("sweeps")) {
            for (auto& [name, r] : j.at("sweeps").items()) b.sweeps[name] = sweep_from_json(r);
        }
        if (j.contains("paired")) {
            for (auto& [name, r] : j.at("paired").items()) b.paired[name] = paired_from_json(r);
        }
        if (j.contains("stability")) {
            for (auto& [name, r] : j.at("stability").items()) {
                b.stability[name] = stability_from_json(r);
            }
        }
        if (j.contains("saliency")) {
            for (auto& [name, arr] : j.at("saliency").items()) {
                std::vector<probes::SaliencyRow> rows;
                for (const auto& row : arr) {
                    rows.push_back(
                        {row.at("id"), row.at("marker_mean"), row.at("background_mean"), row.at("ratio")});
                }
                b.saliency[name] = std::move(rows);
            }
        }
        if (j.contains("centroid")) b.centroid = centroid_from_json(j.at("centroid"));
        return b;
    } catch (const json::exception& e) {
        throw FormatError("bundle json missing fields in " + path + ": " + e.what());
    }
}

}  // namespace slab::harness
