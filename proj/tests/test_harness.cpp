#include <doctest.h>

#include <filesystem>

#include "harness/config.hpp"
#include "phantom/dataset_gen.hpp"
#include "harness/experiments.hpp"
#include "support/test_util.hpp"

using namespace slab;
using namespace slab::harness;
using namespace slab::testing;

namespace {

std::string tiny_marker_config(const std::string& out_dir, double rho = 1.0) {
    return "[experiment]\n"
           "kind = marker_shortcut\n"
           "seed = 11\n"
           "out_dir = " + out_dir + "\n"
           "quiet = true\n"
           "[dataset]\n"
           "n_train = 24\nn_val = 6\nn_test = 6\nsize = 32\nchannels = 3\n"
           "rho = " + std::to_string(rho) + "\n"
           "[model]\ndepth = 2\nbase_channels = 4\n"
           "[schedule]\nepochs = 2\nbatch_size = 8\n"
           "[probes]\nfrozen_sequences = 2\nfrozen_frames = 3\nsaliency_images = 2\n";
}

}  // namespace

TEST_CASE("config parser applies defaults and reads every section") {
    ExperimentConfig cfg = parse_config(
        "[experiment]\nkind = padding_shortcut\nseed = 9\nout_dir = /tmp/x\n"
        "[dataset]\nn_train = 100\nsize = 32\nplacement = uniform\n"
        "[model]\ndepth = 2\nbase_channels = 8\npadding = reflect\n"
        "[schedule]\nepochs = 5\naugment = random_crop\ncrop_min = 0.6\n"
        "[probes]\nn_bands = 4\n");
    CHECK(cfg.kind == ExperimentKind::PaddingShortcut);
    CHECK(cfg.seed == 9);
    CHECK(cfg.dataset.n_train == 100);
    CHECK(cfg.dataset.n_val == 64);  // default
    CHECK(cfg.dataset.scene.placement == phantom::Placement::Uniform);
    CHECK(cfg.model.padding == PaddingMode::Reflect);
    CHECK(cfg.schedule.augment == AugmentKind::RandomCrop);
    CHECK(cfg.schedule.crop_min == doctest::Approx(0.6f));
    CHECK(cfg.probes.n_bands == 4);

    // Seed role offsets.
    CHECK(cfg.dataset_seed() == 10);
    CHECK(cfg.init_seed() == 11);
    CHECK(cfg.shuffle_seed() == 12);
    CHECK(cfg.augment_seed() == 13);
    CHECK(cfg.marker_seed() == 14);
}

TEST_CASE("config parser aggregates every problem into one rejection") {
    try {
        parse_config(
            "[experiment]\nkind = bogus\n"
            "[dataset]\nn_train = -3\nwhatever = 1\n"
            "[nonsense]\nx = 1\n"
            "[schedule]\nepochs = notanumber\n");
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        std::string msg = e.what();
        CHECK(msg.find("kind") != std::string::npos);
        CHECK(msg.find("n_train") != std::string::npos);
        CHECK(msg.find("whatever") != std::string::npos);
        CHECK(msg.find("nonsense") != std::string::npos);
        CHECK(msg.find("epochs") != std::string::npos);
        CHECK(msg.find("out_dir") != std::string::npos);
    }
}

TEST_CASE("audit configs require an ingest path") {
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = audit\nout_dir = /tmp/x\n"), UsageError);
    ExperimentConfig ok = parse_config(
        "[experiment]\nkind = audit\nout_dir = /tmp/x\n[dataset]\ningest_path = /data\n");
    CHECK(ok.dataset.ingest_path == "/data");
}

TEST_CASE("runners reject mismatched kinds before touching the filesystem") {
    TempDir dir("kind");
    std::string out = (dir.path / "never").string();
    ExperimentConfig cfg = parse_config(tiny_marker_config(out));
    CHECK_THROWS_AS(run_padding_experiment(cfg), UsageError);
    CHECK_FALSE(std::filesystem::exists(out));
}

TEST_CASE("rho=0 gives identical marked and clean conditions, delta exactly zero") {
    TempDir dir("rho0");
    ExperimentConfig cfg = parse_config(tiny_marker_config((dir.path / "run").string(), 0.0));
    REQUIRE(cfg.dataset.markers.rho == 0.0f);
    ReportBundle bundle = run_marker_experiment(cfg);
    REQUIRE(bundle.paired.count("baseline"));
    for (const auto& row : bundle.paired.at("baseline").rows) {
        CHECK(row.delta == 0.0);
    }
    CHECK(bundle.paired.at("baseline").delta_mean == 0.0);
}

TEST_CASE("equal configs produce bit-identical checkpoints and reports") {
    TempDir dir("det");
    std::string out_a = (dir.path / "a").string();
    std::string out_b = (dir.path / "b").string();
    ReportBundle ba = run_marker_experiment(parse_config(tiny_marker_config(out_a)));
    ReportBundle bb = run_marker_experiment(parse_config(tiny_marker_config(out_b)));

    namespace fs = std::filesystem;
    for (const char* name : {"baseline", "mitigated"}) {
        std::string rel = std::string("checkpoints/") + name + ".ck";
        CHECK(slurp(fs::path(out_a) / rel) == slurp(fs::path(out_b) / rel));
    }
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(fs::path(out_a) / "reports")) {
        std::string fname = entry.path().filename().string();
        CHECK(slurp(entry.path()) == slurp(fs::path(out_b) / "reports" / fname));
        ++compared;
    }
    CHECK(compared > 5);
}

TEST_CASE("report rendering is idempotent and follows the documented schemas") {
    TempDir dir("render");
    std::string out = (dir.path / "run").string();
    ExperimentConfig cfg = parse_config(
        "[experiment]\nkind = padding_shortcut\nseed = 3\nout_dir = " + out + "\nquiet = true\n"
        "[dataset]\nn_train = 16\nn_val = 4\nn_test = 4\nsize = 32\n"
        "[model]\ndepth = 2\nbase_channels = 4\n"
        "[schedule]\nepochs = 1\nbatch_size = 8\n"
        "[probes]\nn_bands = 3\nsweep_steps = 3\n");
    ReportBundle bundle = run_padding_experiment(cfg);

    namespace fs = std::filesystem;
    std::string band_csv = slurp(fs::path(out) / "reports" / "band_dice_m_ori.csv");
    CHECK(band_csv.rfind("band,d_lo,d_hi,dice_mean,dice_std,n_images\n", 0) == 0);
    std::string stab_path = (fs::path(out) / "reports" / "sweep_m_crop.csv").string();
    CHECK(slurp(stab_path).rfind("step,offset_frac,offset_px,center_x,center_y,recall,dice\n", 0) == 0);
    CHECK(fs::exists(fs::path(out) / "reports" / "index.csv"));
    CHECK(fs::exists(fs::path(out) / "reports" / "centroid.svg"));

    // Re-render from the saved bundle: identical bytes for every artifact.
    ReportBundle loaded = load_bundle((fs::path(out) / "bundle.json").string());
    std::string again = (dir.path / "again").string();
    render_reports(loaded, again);
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(fs::path(out) / "reports")) {
        std::string fname = entry.path().filename().string();
        CHECK(slurp(entry.path()) == slurp(fs::path(again) / fname));
        ++compared;
    }
    CHECK(compared >= 10);
}

TEST_CASE("bundle json round-trips the numeric content exactly") {
    TempDir dir("bundle");
    std::string out = (dir.path / "run").string();
    ExperimentConfig cfg = parse_config(tiny_marker_config(out));
    ReportBundle bundle = run_marker_experiment(cfg);
    ReportBundle loaded = load_bundle((std::filesystem::path(out) / "bundle.json").string());

    CHECK(loaded.kind == bundle.kind);
    CHECK(loaded.seed == bundle.seed);
    CHECK(loaded.config_text == bundle.config_text);
    REQUIRE(loaded.models.size() == bundle.models.size());
    CHECK(loaded.models[0].history.train_loss == bundle.models[0].history.train_loss);
    const auto& pa = bundle.paired.at("baseline");
    const auto& pb = loaded.paired.at("baseline");
    CHECK(pa.delta_mean == pb.delta_mean);
    REQUIRE(pa.rows.size() == pb.rows.size());
    for (std::size_t i = 0; i < pa.rows.size(); ++i) {
        CHECK(pa.rows[i].dice_marked == pb.rows[i].dice_marked);
    }
    const auto& sa = bundle.stability.at("baseline");
    const auto& sb = loaded.stability.at("baseline");
    CHECK(sa.endpoint_mean == sb.endpoint_mean);
}

TEST_CASE("probe stage reproduces the full run's numbers from checkpoints") {
    TempDir dir("stage");
    std::string out = (dir.path / "run").string();
    ExperimentConfig cfg = parse_config(tiny_marker_config(out));
    ReportBundle full = run_marker_experiment(cfg);

    ReportBundle probed = probe_models(cfg);
    const auto& a = full.paired.at("baseline");
    const auto& b = probed.paired.at("baseline");
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].dice_marked == b.rows[i].dice_marked);
        CHECK(a.rows[i].dice_clean == b.rows[i].dice_clean);
    }
    CHECK(full.stability.at("mitigated").endpoint_mean ==
          probed.stability.at("mitigated").endpoint_mean);
}

TEST_CASE("generate stage writes datasets without training anything") {
    TempDir dir("gen");
    std::string out = (dir.path / "run").string();
    ExperimentConfig cfg = parse_config(tiny_marker_config(out));
    generate_datasets(cfg);
    namespace fs = std::filesystem;
    CHECK(fs::exists(fs::path(out) / "data" / "train" / "manifest.csv"));
    CHECK(fs::exists(fs::path(out) / "data" / "test_clean" / "manifest.csv"));
    CHECK_FALSE(fs::exists(fs::path(out) / "checkpoints"));
}

TEST_CASE("valid-padding experiment configs run end to end") {
    TempDir dir("validrun");
    std::string out = (dir.path / "run").string();
    ExperimentConfig cfg = parse_config(
        "[experiment]\nkind = padding_shortcut\nseed = 4\nout_dir = " + out + "\nquiet = true\n"
        "[dataset]\nn_train = 12\nn_val = 4\nn_test = 4\nsize = 32\n"
        "[model]\ndepth = 1\nbase_channels = 4\npadding = valid\n"
        "[schedule]\nepochs = 1\nbatch_size = 4\n"
        "[probes]\nn_bands = 3\nsweep_steps = 3\n");
    ReportBundle bundle = run_padding_experiment(cfg);
    CHECK(bundle.banded.count("m_ori"));
    CHECK(bundle.sweeps.count("m_crop"));
}

TEST_CASE("audit rejects unusable ingest paths without writing a partial bundle") {
    TempDir dir("audit_bad");
    std::string out = (dir.path / "run").string();
    ExperimentConfig cfg = parse_config(
        "[experiment]\nkind = audit\nseed = 1\nout_dir = " + out + "\nquiet = true\n"
        "[dataset]\ningest_path = " + (dir.path / "empty").string() + "\n");
    std::filesystem::create_directories(dir.path / "empty");
    CHECK_THROWS_AS(run_audit(cfg), IoError);
    CHECK_FALSE(std::filesystem::exists(std::filesystem::path(out) / "bundle.json"));
}

TEST_CASE("audit scores external predictions with banded dice") {
    TempDir dir("audit_pred");
    phantom::SceneSpec spec;
    spec.size = 32;
    std::string data = (dir.path / "d").string();
    phantom::generate_dataset(data, 12, spec, std::nullopt, 9);

    std::string out = (dir.path / "run").string();
    // The dataset's own masks act as perfect predictions.
    ExperimentConfig cfg = parse_config(
        "[experiment]\nkind = audit\nseed = 1\nout_dir = " + out + "\nquiet = true\n"
        "[dataset]\ningest_path = " + data + "\ntarget_size = 32\npred_path = " + data +
        "/masks\n[probes]\nn_bands = 3\n");
    ReportBundle bundle = run_audit(cfg);
    REQUIRE(bundle.banded.count("external"));
    for (const auto& band : bundle.banded.at("external").bands) {
        if (band.defined) CHECK(band.dice_mean == 1.0);
    }
    CHECK(bundle.banded.at("external").overall_mean == 1.0);

    // A missing prediction mask surfaces as an IO error listing the stem.
    std::filesystem::remove(std::filesystem::path(data) / "masks" / "0003.png");
    ExperimentConfig cfg2 = parse_config(
        "[experiment]\nkind = audit\nseed = 1\nout_dir = " + (dir.path / "run2").string() +
        "\nquiet = true\n"
        "[dataset]\ningest_path = " + data + "\ntarget_size = 32\npred_path = " +
        (dir.path / "nopreds").string() + "\n");
    std::filesystem::create_directories(dir.path / "nopreds");
    CHECK_THROWS_AS(run_audit(cfg2), UsageError);  // masks dir now unmatched
}

TEST_CASE("audit of generated datasets reports the expected center fractions") {
    TempDir dir("audit");
    phantom::SceneSpec centered;
    centered.center_sigma_frac = 0.05f;
    phantom::generate_dataset((dir.path / "centered").string(), 100, centered, std::nullopt, 5);

    std::string out = (dir.path / "run").string();
    ExperimentConfig cfg = parse_config(
        "[experiment]\nkind = audit\nseed = 1\nout_dir = " + out + "\nquiet = true\n"
        "[dataset]\ningest_path = " + (dir.path / "centered").string() + "\ntarget_size = 64\n");
    ReportBundle bundle = run_audit(cfg);
    REQUIRE(bundle.centroid.has_value());
    CHECK(bundle.centroid->n_masks == 100);
    CHECK(bundle.centroid->central_box_fraction >= 0.9);
}
