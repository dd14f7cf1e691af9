#pragma once

#include <string>

#include "data/augment.hpp"
#include "phantom/markers.hpp"
#include "phantom/scene.hpp"
#include "seg/train.hpp"
#include "seg/unet.hpp"

namespace slab::harness {

enum class ExperimentKind { MarkerShortcut, PaddingShortcut, Audit };

const char* kind_name(ExperimentKind k);

enum class AugmentKind { None, RandomCrop, QuarterCrop };

struct DatasetBlock {
    // generator-backed experiments
    int n_train = 512;
    int n_val = 64;
    int n_test = 128;
    phantom::SceneSpec scene;
    phantom::MarkerSpec markers;  // rho lives inside
    // ingest-backed (audit, external data)
    std::string ingest_path;
    int target_size = 64;
    std::string pred_path;  // optional external predictions for the audit
};

struct ModelBlock {
    int depth = 3;
    int base_channels = 16;
    PaddingMode padding = PaddingMode::Zeros;
};

struct ScheduleBlock {
    Optimizer optimizer = Optimizer::Adam;
    float learning_rate = 1e-3f;
    float weight_decay = 0.0f;
    bool cosine = false;
    int epochs = 30;
    int batch_size = 16;
    AugmentKind augment = AugmentKind::None;
    float crop_min = 0.5f;
    float crop_max = 1.0f;
};

struct ProbeBlock {
    int n_bands = 5;
    int sweep_steps = 6;
    // Sweep lesions can be sized independently of the training distribution;
    // negative means inherit the dataset's axis range.
    float sweep_axis_min = -1.0f;
    float sweep_axis_max = -1.0f;
    int frozen_sequences = 16;
    int frozen_frames = 5;
    int saliency_images = 16;
    int centroid_bins = 32;
};

// Every random stream derives from the global seed with a fixed role offset,
// so ablations change exactly one stream:
//   dataset +1, model init +2, shuffle +3, augmentation +4, markers/probe +5.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::MarkerShortcut;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool quiet = false;
    DatasetBlock dataset;
    ModelBlock model;
    ScheduleBlock schedule;
    ProbeBlock probes;
    std::string source_text;

    std::uint64_t dataset_seed() const { return seed + 1; }
    std::uint64_t init_seed() const { return seed + 2; }
    std::uint64_t shuffle_seed() const { return seed + 3; }
    std::uint64_t augment_seed() const { return seed + 4; }
    std::uint64_t marker_seed() const { return seed + 5; }
};

// INI-style key/value sections. Collects *all* problems (unknown keys, bad
// values, missing requirements) into a single UsageError so nothing is
// half-configured.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace slab::harness
