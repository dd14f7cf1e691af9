#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "probes/reports.hpp"
#include "seg/train.hpp"

namespace slab::harness {

struct ModelArtifacts {
    std::string name;  // baseline | mitigated | m_ori | m_crop
    TrainHistory history;
    std::string checkpoint_path;  // relative to the bundle directory
};

// Everything one experiment produced. Self-describing: re-running from the
// embedded config text reproduces all numeric content bit-exactly on one
// machine (wall-clock fields excluded).
struct ReportBundle {
    std::string kind;
    std::uint64_t seed = 0;
    std::string config_text;
    std::vector<ModelArtifacts> models;

    std::map<std::string, probes::BandedDiceReport> banded;
    std::map<std::string, probes::SweepReport> sweeps;
    std::map<std::string, probes::PairedEvalReport> paired;
    std::map<std::string, probes::StabilityReport> stability;
    std::map<std::string, std::vector<probes::SaliencyRow>> saliency;
    std::optional<probes::CentroidReport> centroid;

    std::string started_at;
    std::string finished_at;
};

void save_bundle(const ReportBundle& bundle, const std::string& path);
ReportBundle load_bundle(const std::string& path);

// Writes the per-probe CSV and SVG artifacts plus index.csv into out_dir.
// Rendering the same bundle twice produces identical bytes.
void render_reports(const ReportBundle& bundle, const std::string& out_dir);

}  // namespace slab::harness
