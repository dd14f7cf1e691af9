#include "harness/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "core/error.hpp"
#include "data/loader.hpp"
#include "data/marker_removal.hpp"
#include "image/image_ops.hpp"
#include "image/png_io.hpp"
#include "phantom/dataset_gen.hpp"
#include "probes/metrics.hpp"
#include "probes/model_probes.hpp"
#include "seg/checkpoint.hpp"

namespace slab::harness {

namespace {

namespace fs = std::filesystem;

std::string timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void log_line(const ExperimentConfig& cfg, const std::string& msg) {
    if (!cfg.quiet) std::fprintf(stderr, "[%s] %s\n", kind_name(cfg.kind), msg.c_str());
}

EpochLogger epoch_logger(const ExperimentConfig& cfg, const std::string& model_name, int epochs) {
    if (cfg.quiet) return {};
    return [model_name, epochs, kind = cfg.kind](int epoch, double loss, double vdice) {
        std::fprintf(stderr, "[%s] %s epoch %d/%d loss=%.4f val_dice=%.4f\n", kind_name(kind),
                     model_name.c_str(), epoch + 1, epochs, loss, vdice);
    };
}

TrainSchedule schedule_of(const ExperimentConfig& cfg, AugmentKind augment) {
    TrainSchedule s;
    s.optimizer = cfg.schedule.optimizer;
    s.learning_rate = cfg.schedule.learning_rate;
    s.weight_decay = cfg.schedule.weight_decay;
    s.cosine_lr = cfg.schedule.cosine;
    s.epochs = cfg.schedule.epochs;
    s.batch_size = cfg.schedule.batch_size;
    s.shuffle_seed = cfg.shuffle_seed();
    s.augment_seed = cfg.augment_seed();
    switch (augment) {
        case AugmentKind::None:
            break;
        case AugmentKind::RandomCrop: {
            CropSpec crop;
            crop.s_min = cfg.schedule.crop_min;
            crop.s_max = cfg.schedule.crop_max;
            crop.out_size = cfg.dataset.scene.size;
            s.augment = [crop](const Sample& sample, Rng& rng) {
                return random_crop_augment(sample, crop, rng);
            };
            break;
        }
        case AugmentKind::QuarterCrop:
            s.augment = [](const Sample& sample, Rng& rng) {
                phantom::QuarterCropResult r = phantom::quarter_crop(sample.image, sample.mask, rng);
                Sample out = sample;
                out.image = r.image;
                out.mask = r.mask;
                return out;
            };
            break;
    }
    return s;
}

UNetConfig model_config(const ExperimentConfig& cfg) {
    UNetConfig u;
    u.in_channels = cfg.dataset.scene.channels;
    u.depth = cfg.model.depth;
    u.base_channels = cfg.model.base_channels;
    u.padding_mode = cfg.model.padding;
    return u;
}

std::string data_dir(const ExperimentConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / "data" / name).string();
}

Dataset generate_and_load(const ExperimentConfig& cfg, const std::string& name, int n,
                          const phantom::SceneSpec& scene,
                          const std::optional<phantom::MarkerSpec>& markers, std::uint64_t seed) {
    std::string dir = data_dir(cfg, name);
    phantom::generate_dataset(dir, n, scene, markers, seed);
    return load_dataset(dir, scene.size);
}

// Group seed offsets within the dataset stream keep the sample seeds of the
// different splits disjoint.
constexpr std::uint64_t kValOffset = 1'000'000;
constexpr std::uint64_t kTestOffset = 2'000'000;
constexpr std::uint64_t kFrozenOffset = 3'000'000;
constexpr std::uint64_t kSweepOffset = 4'000'000;

struct MarkerData {
    Dataset train, val, test_marked, test_clean;
};

MarkerData marker_data(const ExperimentConfig& cfg) {
    const phantom::SceneSpec& scene = cfg.dataset.scene;
    const phantom::MarkerSpec& markers = cfg.dataset.markers;
    const std::uint64_t base = cfg.dataset_seed();
    MarkerData d;
    log_line(cfg, "generating datasets");
    d.train = generate_and_load(cfg, "train", cfg.dataset.n_train, scene, markers, base);
    d.val = generate_and_load(cfg, "val", cfg.dataset.n_val, scene, markers, base + kValOffset);
    d.test_marked =
        generate_and_load(cfg, "test_marked", cfg.dataset.n_test, scene, markers, base + kTestOffset);
    // Same scene seeds, markers never injected: the paired clean condition.
    d.test_clean = generate_and_load(cfg, "test_clean", cfg.dataset.n_test, scene, std::nullopt,
                                     base + kTestOffset);
    return d;
}

Dataset cleaned_copy(const Dataset& in) {
    Dataset out;
    out.reserve(in.size());
    for (const Sample& s : in) {
        Sample c = s;
        Tensor detected = detect_markers(s.image);
        bool any = false;
        for (float v : detected.data()) any = any || v != 0.0f;
        if (any) c.image = inpaint_markers(s.image, detected);
        c.markers_present = TriState::No;
        out.push_back(std::move(c));
    }
    return out;
}

struct PaddingData {
    Dataset train, val, test;
};

PaddingData padding_data(const ExperimentConfig& cfg) {
    phantom::SceneSpec scene = cfg.dataset.scene;
    const std::uint64_t base = cfg.dataset_seed();
    PaddingData d;
    log_line(cfg, "generating datasets");
    d.train = generate_and_load(cfg, "train", cfg.dataset.n_train, scene, std::nullopt, base);
    d.val = generate_and_load(cfg, "val", cfg.dataset.n_val, scene, std::nullopt, base + kValOffset);
    phantom::SceneSpec crop_scene = scene;
    crop_scene.placement = phantom::Placement::QuarterCrop;
    d.test = generate_and_load(cfg, "test_crop", cfg.dataset.n_test, crop_scene, std::nullopt,
                               base + kTestOffset);
    return d;
}

SegModel train_one(const ExperimentConfig& cfg, const std::string& name, const Dataset& train_set,
                   const Dataset& val_set, AugmentKind augment, ReportBundle& bundle) {
    SegModel model = init_unet(model_config(cfg), cfg.init_seed());
    log_line(cfg, "training " + name);
    TrainHistory history = train(model, train_set, val_set, schedule_of(cfg, augment),
                                 epoch_logger(cfg, name, cfg.schedule.epochs));
    fs::create_directories(fs::path(cfg.out_dir) / "checkpoints");
    std::string rel = "checkpoints/" + name + ".ck";
    save_checkpoint(model, (fs::path(cfg.out_dir) / rel).string());
    bundle.models.push_back(ModelArtifacts{name, std::move(history), rel});
    return model;
}

SegModel load_one(const ExperimentConfig& cfg, const std::string& name, ReportBundle& bundle) {
    std::string rel = "checkpoints/" + name + ".ck";
    SegModel model = load_checkpoint((fs::path(cfg.out_dir) / rel).string());
    bundle.models.push_back(ModelArtifacts{name, {}, rel});
    return model;
}

std::vector<probes::FrameSequence> frozen_sequences(const ExperimentConfig& cfg) {
    std::vector<probes::FrameSequence> seqs;
    for (int i = 0; i < cfg.probes.frozen_sequences; ++i) {
        phantom::Scene scene = phantom::generate_scene(
            cfg.dataset.scene, cfg.dataset_seed() + kFrozenOffset + static_cast<std::uint64_t>(i));
        probes::FrameSequence seq;
        char id[16];
        std::snprintf(id, sizeof(id), "seq%03d", i);
        seq.id = id;
        seq.frames = phantom::make_frozen_sequence(scene, cfg.dataset.markers, cfg.probes.frozen_frames);
        seq.gt_mask = scene.mask;
        seqs.push_back(std::move(seq));
    }
    return seqs;
}

std::vector<probes::SaliencyRow> saliency_rows(const ExperimentConfig& cfg, const SegModel& model,
                                               const Dataset& marked_test) {
    Rng rng(cfg.marker_seed());
    std::vector<probes::SaliencyRow> rows;
    const int n = std::min<int>(cfg.probes.saliency_images, static_cast<int>(marked_test.size()));
    for (int i = 0; i < n; ++i) {
        const Sample& s = marked_test[static_cast<std::size_t>(i)];
        Tensor sal = probes::saliency_map(model, s.image);
        Tensor markers = detect_markers(s.image);

        std::vector<std::int64_t> marker_px, background_px;
        auto mk = markers.data();
        auto lesion = s.mask.data();
        for (std::int64_t k = 0; k < markers.numel(); ++k) {
            if (mk[static_cast<std::size_t>(k)] != 0.0f) {
                marker_px.push_back(k);
            } else if (lesion[static_cast<std::size_t>(k)] == 0.0f) {
                background_px.push_back(k);
            }
        }
        if (marker_px.empty() || background_px.empty()) continue;

        auto sal_mean = [&](const std::vector<std::int64_t>& px) {
            double acc = 0;
            auto sv = sal.data();
            for (std::int64_t k : px) acc += sv[static_cast<std::size_t>(k)];
            return acc / static_cast<double>(px.size());
        };
        // Equal-count random background sample.
        std::vector<std::int64_t> sampled;
        sampled.reserve(marker_px.size());
        for (std::size_t k = 0; k < marker_px.size(); ++k) {
            sampled.push_back(
                background_px[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(background_px.size())))]);
        }
        probes::SaliencyRow row;
        row.id = s.id;
        row.marker_mean = sal_mean(marker_px);
        row.background_mean = sal_mean(sampled);
        row.ratio = row.marker_mean / std::max(row.background_mean, 1e-12);
        rows.push_back(std::move(row));
    }
    return rows;
}

// The mitigated side is a pipeline: detect+inpaint cleanup in front of the
// model, at training time and at the point of use alike. Its probes therefore
// see cleaned inputs, while the baseline consumes raw frames.
std::vector<probes::FrameSequence> cleaned_sequences(const std::vector<probes::FrameSequence>& seqs) {
    std::vector<probes::FrameSequence> out;
    out.reserve(seqs.size());
    for (const probes::FrameSequence& seq : seqs) {
        probes::FrameSequence c;
        c.id = seq.id;
        c.gt_mask = seq.gt_mask;
        for (const Tensor& frame : seq.frames) {
            Tensor detected = detect_markers(frame);
            bool any = false;
            for (float v : detected.data()) any = any || v != 0.0f;
            c.frames.push_back(any ? inpaint_markers(frame, detected) : frame);
        }
        out.push_back(std::move(c));
    }
    return out;
}

void probe_marker(const ExperimentConfig& cfg, const MarkerData& data, const SegModel& baseline,
                  const SegModel& mitigated, ReportBundle& bundle) {
    log_line(cfg, "running probes");
    bundle.paired["baseline"] = probes::paired_shortcut_eval(baseline, data.test_marked, data.test_clean);
    bundle.paired["mitigated"] = probes::paired_shortcut_eval(
        mitigated, cleaned_copy(data.test_marked), cleaned_copy(data.test_clean));

    std::vector<probes::FrameSequence> seqs = frozen_sequences(cfg);
    bundle.stability["baseline"] = probes::frame_stability(baseline, seqs);
    bundle.stability["mitigated"] = probes::frame_stability(mitigated, cleaned_sequences(seqs));

    bundle.saliency["baseline"] = saliency_rows(cfg, baseline, data.test_marked);
    bundle.saliency["mitigated"] = saliency_rows(cfg, mitigated, data.test_marked);
}

void probe_padding(const ExperimentConfig& cfg, const PaddingData& data, const SegModel& m_ori,
                   const SegModel& m_crop, ReportBundle& bundle) {
    log_line(cfg, "running probes");
    probes::BandSpec bands{cfg.probes.n_bands};
    auto banded_of = [&](const SegModel& model) {
        std::vector<Tensor> preds, gts;
        preds.reserve(data.test.size());
        for (const Sample& s : data.test) {
            preds.push_back(predict_mask(model, s.image).mask);
            gts.push_back(s.mask);
        }
        return probes::banded_dice(preds, gts, bands);
    };
    bundle.banded["m_ori"] = banded_of(m_ori);
    bundle.banded["m_crop"] = banded_of(m_crop);

    const std::uint64_t sweep_seed = cfg.dataset_seed() + kSweepOffset;
    phantom::SceneSpec sweep_scene = cfg.dataset.scene;
    if (cfg.probes.sweep_axis_min > 0.0f) sweep_scene.axis_min_frac = cfg.probes.sweep_axis_min;
    if (cfg.probes.sweep_axis_max > 0.0f) sweep_scene.axis_max_frac = cfg.probes.sweep_axis_max;
    bundle.sweeps["m_ori"] =
        probes::translation_sweep(m_ori, sweep_scene, cfg.probes.sweep_steps, sweep_seed);
    bundle.sweeps["m_crop"] =
        probes::translation_sweep(m_crop, sweep_scene, cfg.probes.sweep_steps, sweep_seed);

    std::vector<Tensor> train_masks;
    train_masks.reserve(data.train.size());
    for (const Sample& s : data.train) train_masks.push_back(s.mask);
    bundle.centroid = probes::centroid_distribution(train_masks, cfg.probes.centroid_bins);
}

ReportBundle new_bundle(const ExperimentConfig& cfg) {
    ReportBundle b;
    b.kind = kind_name(cfg.kind);
    b.seed = cfg.seed;
    b.config_text = cfg.source_text;
    b.started_at = timestamp();
    return b;
}

void finish_bundle(const ExperimentConfig& cfg, ReportBundle& bundle) {
    bundle.finished_at = timestamp();
    fs::create_directories(cfg.out_dir);
    std::ofstream snapshot(fs::path(cfg.out_dir) / "config_snapshot.ini", std::ios::trunc);
    snapshot << cfg.source_text;
    save_bundle(bundle, (fs::path(cfg.out_dir) / "bundle.json").string());
    render_reports(bundle, (fs::path(cfg.out_dir) / "reports").string());
    log_line(cfg, "bundle written to " + cfg.out_dir);
}

void require_kind(const ExperimentConfig& cfg, ExperimentKind kind, const char* fn) {
    if (cfg.kind != kind) {
        throw UsageError(std::string(fn) + ": config kind is " + kind_name(cfg.kind));
    }
}

AugmentKind crop_augment_kind(const ExperimentConfig& cfg) {
    // M_crop always trains crop-diversified; an explicit augment choice in the
    // schedule picks the flavor.
    return cfg.schedule.augment == AugmentKind::None ? AugmentKind::RandomCrop : cfg.schedule.augment;
}

}  // namespace

ReportBundle run_marker_experiment(const ExperimentConfig& cfg) {
    require_kind(cfg, ExperimentKind::MarkerShortcut, "run_marker_experiment");
    ReportBundle bundle = new_bundle(cfg);
    MarkerData data = marker_data(cfg);
    SegModel baseline = train_one(cfg, "baseline", data.train, data.val, cfg.schedule.augment, bundle);
    log_line(cfg, "cleaning training data for the mitigated model");
    Dataset clean_train = cleaned_copy(data.train);
    Dataset clean_val = cleaned_copy(data.val);
    SegModel mitigated =
        train_one(cfg, "mitigated", clean_train, clean_val, cfg.schedule.augment, bundle);
    probe_marker(cfg, data, baseline, mitigated, bundle);
    finish_bundle(cfg, bundle);
    return bundle;
}

ReportBundle run_padding_experiment(const ExperimentConfig& cfg) {
    require_kind(cfg, ExperimentKind::PaddingShortcut, "run_padding_experiment");
    ReportBundle bundle = new_bundle(cfg);
    PaddingData data = padding_data(cfg);
    SegModel m_ori = train_one(cfg, "m_ori", data.train, data.val, AugmentKind::None, bundle);
    SegModel m_crop = train_one(cfg, "m_crop", data.train, data.val, crop_augment_kind(cfg), bundle);
    probe_padding(cfg, data, m_ori, m_crop, bundle);
    finish_bundle(cfg, bundle);
    return bundle;
}

ReportBundle run_audit(const ExperimentConfig& cfg) {
    require_kind(cfg, ExperimentKind::Audit, "run_audit");
    ReportBundle bundle = new_bundle(cfg);
    log_line(cfg, "loading " + cfg.dataset.ingest_path);
    Dataset ds = load_dataset(cfg.dataset.ingest_path, cfg.dataset.target_size);

    std::vector<Tensor> masks;
    masks.reserve(ds.size());
    for (const Sample& s : ds) masks.push_back(s.mask);
    bundle.centroid = probes::centroid_distribution(masks, cfg.probes.centroid_bins);

    if (!cfg.dataset.pred_path.empty()) {
        std::vector<Tensor> preds, gts;
        std::string missing;
        for (const Sample& s : ds) {
            fs::path p = fs::path(cfg.dataset.pred_path) / (s.id + ".png");
            if (!fs::exists(p)) {
                missing += " " + s.id;
                continue;
            }
            Tensor raw = read_png(p.string());
            const std::size_t plane = static_cast<std::size_t>(raw.dim(1)) * raw.dim(2);
            Tensor mask = Tensor::from_data(
                {raw.dim(1), raw.dim(2)},
                std::vector<float>(raw.data().begin(), raw.data().begin() + plane));
            if (mask.dim(0) != cfg.dataset.target_size || mask.dim(1) != cfg.dataset.target_size) {
                mask = resize_nearest(mask, cfg.dataset.target_size, cfg.dataset.target_size);
            }
            preds.push_back(binarize(mask));
            gts.push_back(s.mask);
        }
        if (!missing.empty()) {
            throw IoError("audit: missing prediction masks for:" + missing);
        }
        bundle.banded["external"] = probes::banded_dice(preds, gts, probes::BandSpec{cfg.probes.n_bands});
    }
    finish_bundle(cfg, bundle);
    return bundle;
}

ReportBundle run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::MarkerShortcut: return run_marker_experiment(cfg);
        case ExperimentKind::PaddingShortcut: return run_padding_experiment(cfg);
        case ExperimentKind::Audit: return run_audit(cfg);
    }
    throw UsageError("run_experiment: bad kind");
}

void generate_datasets(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::MarkerShortcut:
            marker_data(cfg);
            return;
        case ExperimentKind::PaddingShortcut:
            padding_data(cfg);
            return;
        case ExperimentKind::Audit:
            throw UsageError("generate: audit runs ingest existing data, nothing to generate");
    }
}

ReportBundle train_models(const ExperimentConfig& cfg) {
    ReportBundle bundle = new_bundle(cfg);
    switch (cfg.kind) {
        case ExperimentKind::MarkerShortcut: {
            MarkerData data = marker_data(cfg);
            train_one(cfg, "baseline", data.train, data.val, cfg.schedule.augment, bundle);
            Dataset clean_train = cleaned_copy(data.train);
            Dataset clean_val = cleaned_copy(data.val);
            train_one(cfg, "mitigated", clean_train, clean_val, cfg.schedule.augment, bundle);
            break;
        }
        case ExperimentKind::PaddingShortcut: {
            PaddingData data = padding_data(cfg);
            train_one(cfg, "m_ori", data.train, data.val, AugmentKind::None, bundle);
            train_one(cfg, "m_crop", data.train, data.val, crop_augment_kind(cfg), bundle);
            break;
        }
        case ExperimentKind::Audit:
            throw UsageError("train: audit runs have no models to train");
    }
    finish_bundle(cfg, bundle);
    return bundle;
}

ReportBundle probe_models(const ExperimentConfig& cfg) {
    ReportBundle bundle = new_bundle(cfg);
    switch (cfg.kind) {
        case ExperimentKind::MarkerShortcut: {
            MarkerData data = marker_data(cfg);
            SegModel baseline = load_one(cfg, "baseline", bundle);
            SegModel mitigated = load_one(cfg, "mitigated", bundle);
            probe_marker(cfg, data, baseline, mitigated, bundle);
            break;
        }
        case ExperimentKind::PaddingShortcut: {
            PaddingData data = padding_data(cfg);
            SegModel m_ori = load_one(cfg, "m_ori", bundle);
            SegModel m_crop = load_one(cfg, "m_crop", bundle);
            probe_padding(cfg, data, m_ori, m_crop, bundle);
            break;
        }
        case ExperimentKind::Audit:
            return run_audit(cfg);
    }
    finish_bundle(cfg, bundle);
    return bundle;
}

}  // namespace slab::harness
