#include "harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "core/error.hpp"

namespace slab::harness {

const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::MarkerShortcut: return "marker_shortcut";
        case ExperimentKind::PaddingShortcut: return "padding_shortcut";
        case ExperimentKind::Audit: return "audit";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Parser {
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::vector<std::string> errors;
    std::map<std::string, std::vector<std::string>> consumed;

    void fail(const std::string& msg) { errors.push_back(msg); }

    bool has(const std::string& sec, const std::string& key) {
        auto s = sections.find(sec);
        return s != sections.end() && s->second.count(key);
    }

    std::string raw(const std::string& sec, const std::string& key) {
        consumed[sec].push_back(key);
        return sections[sec][key];
    }

    template <class T, class Fn>
    void get(const std::string& sec, const std::string& key, T& out, Fn parse) {
        if (!has(sec, key)) return;
        std::string v = raw(sec, key);
        try {
            out = parse(v);
        } catch (const std::exception&) {
            fail("[" + sec + "] " + key + ": cannot parse '" + v + "'");
        }
    }

    void get_int(const std::string& sec, const std::string& key, int& out) {
        get(sec, key, out, [](const std::string& v) { return std::stoi(v); });
    }
    void get_u64(const std::string& sec, const std::string& key, std::uint64_t& out) {
        get(sec, key, out, [](const std::string& v) { return std::stoull(v); });
    }
    void get_float(const std::string& sec, const std::string& key, float& out) {
        get(sec, key, out, [](const std::string& v) { return std::stof(v); });
    }
    void get_string(const std::string& sec, const std::string& key, std::string& out) {
        if (!has(sec, key)) return;
        out = raw(sec, key);
    }
    void get_bool(const std::string& sec, const std::string& key, bool& out) {
        get(sec, key, out, [](const std::string& v) {
            if (v == "true" || v == "1" || v == "yes") return true;
            if (v == "false" || v == "0" || v == "no") return false;
            throw std::runtime_error("bad bool");
        });
    }

    void check_unknown() {
        static const std::map<std::string, bool> known_sections = {
            {"experiment", true}, {"dataset", true}, {"model", true},
            {"schedule", true},   {"probes", true}};
        for (const auto& [sec, kv] : sections) {
            if (!known_sections.count(sec)) {
                fail("unknown section [" + sec + "]");
                continue;
            }
            for (const auto& [key, value] : kv) {
                const auto& used = consumed[sec];
                if (std::find(used.begin(), used.end(), key) == used.end()) {
                    fail("unknown key '" + key + "' in section [" + sec + "]");
                }
            }
        }
    }
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    Parser p;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                p.fail("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            section = trim(t.substr(1, t.size() - 2));
            p.sections[section];
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            p.fail("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        if (section.empty()) {
            p.fail("line " + std::to_string(lineno) + ": key outside any section");
            continue;
        }
        p.sections[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }

    ExperimentConfig cfg;
    cfg.source_text = text;

    std::string kind = "marker_shortcut";
    p.get_string("experiment", "kind", kind);
    if (kind == "marker_shortcut") cfg.kind = ExperimentKind::MarkerShortcut;
    else if (kind == "padding_shortcut") cfg.kind = ExperimentKind::PaddingShortcut;
    else if (kind == "audit") cfg.kind = ExperimentKind::Audit;
    else p.fail("[experiment] kind: expected marker_shortcut|padding_shortcut|audit, got '" + kind + "'");
    p.get_u64("experiment", "seed", cfg.seed);
    p.get_string("experiment", "out_dir", cfg.out_dir);
    p.get_bool("experiment", "quiet", cfg.quiet);

    DatasetBlock& d = cfg.dataset;
    p.get_int("dataset", "n_train", d.n_train);
    p.get_int("dataset", "n_val", d.n_val);
    p.get_int("dataset", "n_test", d.n_test);
    p.get_int("dataset", "size", d.scene.size);
    p.get_int("dataset", "channels", d.scene.channels);
    std::string placement = placement_name(d.scene.placement);
    p.get_string("dataset", "placement", placement);
    try {
        d.scene.placement = phantom::placement_from_name(placement);
    } catch (const UsageError&) {
        p.fail("[dataset] placement: unknown value '" + placement + "'");
    }
    p.get_float("dataset", "center_sigma", d.scene.center_sigma_frac);
    p.get_float("dataset", "axis_min", d.scene.axis_min_frac);
    p.get_float("dataset", "axis_max", d.scene.axis_max_frac);
    p.get_float("dataset", "contrast_min", d.scene.contrast_min);
    p.get_float("dataset", "contrast_max", d.scene.contrast_max);
    p.get_float("dataset", "base_gray_min", d.scene.base_gray_min);
    p.get_float("dataset", "base_gray_max", d.scene.base_gray_max);
    p.get_float("dataset", "noise_amp", d.scene.noise_amp);
    p.get_float("dataset", "edge_soft", d.scene.edge_soft_frac);
    p.get_float("dataset", "core_min", d.scene.core_scale_min);
    p.get_float("dataset", "core_max", d.scene.core_scale_max);
    p.get_float("dataset", "speckle_density", d.scene.speckle_density);
    p.get_float("dataset", "speckle_min", d.scene.speckle_min);
    p.get_float("dataset", "speckle_max", d.scene.speckle_max);
    p.get_float("dataset", "rho", d.markers.rho);
    p.get_int("dataset", "caliper_arm", d.markers.caliper_arm);
    p.get_string("dataset", "ingest_path", d.ingest_path);
    p.get_int("dataset", "target_size", d.target_size);
    p.get_string("dataset", "pred_path", d.pred_path);

    ModelBlock& m = cfg.model;
    p.get_int("model", "depth", m.depth);
    p.get_int("model", "base_channels", m.base_channels);
    std::string padding = "zeros";
    p.get_string("model", "padding", padding);
    if (padding == "zeros") m.padding = PaddingMode::Zeros;
    else if (padding == "reflect") m.padding = PaddingMode::Reflect;
    else if (padding == "replicate") m.padding = PaddingMode::Replicate;
    else if (padding == "valid") m.padding = PaddingMode::Valid;
    else p.fail("[model] padding: expected zeros|reflect|replicate|valid, got '" + padding + "'");

    ScheduleBlock& s = cfg.schedule;
    std::string optimizer = "adam";
    p.get_string("schedule", "optimizer", optimizer);
    if (optimizer == "adam") s.optimizer = Optimizer::Adam;
    else if (optimizer == "adamw") s.optimizer = Optimizer::AdamW;
    else p.fail("[schedule] optimizer: expected adam|adamw, got '" + optimizer + "'");
    p.get_float("schedule", "lr", s.learning_rate);
    p.get_float("schedule", "weight_decay", s.weight_decay);
    p.get_bool("schedule", "cosine", s.cosine);
    p.get_int("schedule", "epochs", s.epochs);
    p.get_int("schedule", "batch_size", s.batch_size);
    std::string augment = "none";
    p.get_string("schedule", "augment", augment);
    if (augment == "none") s.augment = AugmentKind::None;
    else if (augment == "random_crop") s.augment = AugmentKind::RandomCrop;
    else if (augment == "quarter_crop") s.augment = AugmentKind::QuarterCrop;
    else p.fail("[schedule] augment: expected none|random_crop|quarter_crop, got '" + augment + "'");
    p.get_float("schedule", "crop_min", s.crop_min);
    p.get_float("schedule", "crop_max", s.crop_max);

    ProbeBlock& pr = cfg.probes;
    p.get_int("probes", "n_bands", pr.n_bands);
    p.get_int("probes", "sweep_steps", pr.sweep_steps);
    p.get_float("probes", "sweep_axis_min", pr.sweep_axis_min);
    p.get_float("probes", "sweep_axis_max", pr.sweep_axis_max);
    p.get_int("probes", "frozen_sequences", pr.frozen_sequences);
    p.get_int("probes", "frozen_frames", pr.frozen_frames);
    p.get_int("probes", "saliency_images", pr.saliency_images);
    p.get_int("probes", "centroid_bins", pr.centroid_bins);

    p.check_unknown();

    // Cross-field validation, all collected before reporting.
    if (cfg.out_dir.empty()) p.fail("[experiment] out_dir is required");
    if (cfg.kind == ExperimentKind::Audit) {
        if (d.ingest_path.empty()) p.fail("[dataset] ingest_path is required for audit runs");
        if (d.target_size < 8) p.fail("[dataset] target_size must be >= 8");
    } else {
        if (d.n_train < 1) p.fail("[dataset] n_train must be >= 1");
        if (d.n_val < 1) p.fail("[dataset] n_val must be >= 1");
        if (d.n_test < 1) p.fail("[dataset] n_test must be >= 1");
        if (d.scene.size < 8) p.fail("[dataset] size must be >= 8");
        if (d.scene.channels != 1 && d.scene.channels != 3) {
            p.fail("[dataset] channels must be 1 or 3");
        }
        if (d.markers.rho < 0.0f || d.markers.rho > 1.0f) p.fail("[dataset] rho must lie in [0,1]");
        if (d.scene.axis_min_frac <= 0.0f || d.scene.axis_max_frac < d.scene.axis_min_frac) {
            p.fail("[dataset] axis range is invalid");
        }
        if (m.depth < 1) p.fail("[model] depth must be >= 1");
        if (m.base_channels < 1) p.fail("[model] base_channels must be >= 1");
        if (s.epochs < 0) p.fail("[schedule] epochs must be >= 0");
        if (s.batch_size < 1) p.fail("[schedule] batch_size must be >= 1");
        if (s.learning_rate <= 0.0f) p.fail("[schedule] lr must be positive");
        if (s.augment == AugmentKind::RandomCrop &&
            (s.crop_min <= 0.0f || s.crop_max > 1.0f || s.crop_min > s.crop_max)) {
            p.fail("[schedule] crop range must satisfy 0 < crop_min <= crop_max <= 1");
        }
        if (pr.n_bands < 1) p.fail("[probes] n_bands must be >= 1");
        if (pr.sweep_steps < 2) p.fail("[probes] sweep_steps must be >= 2");
        if (pr.frozen_sequences < 1) p.fail("[probes] frozen_sequences must be >= 1");
        if (pr.frozen_frames < 2) p.fail("[probes] frozen_frames must be >= 2");
        if (cfg.kind == ExperimentKind::PaddingShortcut && d.scene.size % 2 != 0) {
            p.fail("[dataset] size must be even for the quarter-crop test set");
        }
    }

    if (!p.errors.empty()) {
        std::string msg = "config validation failed:";
        for (const std::string& e : p.errors) msg += "\n  - " + e;
        throw UsageError(msg);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

}  // namespace slab::harness
