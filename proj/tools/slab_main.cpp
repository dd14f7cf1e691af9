// CLI for the shortcut-learning segmentation lab. Talks to the core strictly
// through the C API; status codes pass through as exit codes.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>

#include "shortcutlab.h"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
    auto* c = cmd->add_option("--config", opts.config_path, "experiment config file (INI)");
    if (config_required) c->required();
    cmd->add_option("--out", opts.out_dir, "override the config's output directory");
    cmd->add_option("--seed", opts.seed, "override the config's global seed");
    cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
}

int fail(int rc) {
    std::fprintf(stderr, "error: %s\n", slab_last_error());
    return rc;
}

int load_config(const CommonOpts& opts, slab_config** cfg) {
    int rc = slab_config_load(opts.config_path.c_str(), cfg);
    if (rc != SLAB_OK) return rc;
    if (!opts.out_dir.empty()) {
        rc = slab_config_set_out_dir(*cfg, opts.out_dir.c_str());
        if (rc != SLAB_OK) return rc;
    }
    if (opts.seed >= 0) {
        rc = slab_config_set_seed(*cfg, static_cast<unsigned long long>(opts.seed));
        if (rc != SLAB_OK) return rc;
    }
    return slab_config_set_quiet(*cfg, opts.quiet ? 1 : 0);
}

int finish_with_bundle(slab_bundle* bundle, bool quiet) {
    if (bundle) {
        if (!quiet) {
            char summary[512];
            if (slab_bundle_summary(bundle, summary, sizeof(summary)) == SLAB_OK) {
                std::printf("%s\n", summary);
            }
        }
        slab_bundle_free(bundle);
    }
    return SLAB_OK;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shortcut-learning segmentation lab"};
    app.require_subcommand(1);

    CommonOpts generate_opts, train_opts, probe_opts, audit_opts, run_opts;
    std::string report_dir;

    CLI::App* cmd_generate =
        app.add_subcommand("generate", "write the experiment's datasets under out_dir/data");
    add_common(cmd_generate, generate_opts);

    CLI::App* cmd_train =
        app.add_subcommand("train", "generate data and train the experiment's models");
    add_common(cmd_train, train_opts);

    CLI::App* cmd_probe =
        app.add_subcommand("probe", "run the probes against previously trained checkpoints");
    add_common(cmd_probe, probe_opts);

    CLI::App* cmd_audit =
        app.add_subcommand("audit", "centroid / banded-dice audit of an ingested dataset");
    add_common(cmd_audit, audit_opts);

    CLI::App* cmd_run = app.add_subcommand("run", "full pipeline: generate, train, probe, report");
    add_common(cmd_run, run_opts);

    CLI::App* cmd_report =
        app.add_subcommand("report", "re-render CSV/SVG reports from an existing bundle");
    cmd_report->add_option("--out", report_dir, "run directory containing bundle.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints help or the parse problem
        return e.get_exit_code() == 0 ? 0 : SLAB_E_CONFIG;
    }

    slab_config* cfg = nullptr;
    int rc = SLAB_OK;

    if (cmd_generate->parsed()) {
        if ((rc = load_config(generate_opts, &cfg)) != SLAB_OK) return fail(rc);
        if ((rc = slab_generate(cfg)) != SLAB_OK) rc = fail(rc);
        slab_config_free(cfg);
        return rc;
    }
    if (cmd_train->parsed()) {
        if ((rc = load_config(train_opts, &cfg)) != SLAB_OK) return fail(rc);
        slab_bundle* bundle = nullptr;
        rc = slab_train(cfg, &bundle);
        if (rc != SLAB_OK) rc = fail(rc);
        else rc = finish_with_bundle(bundle, train_opts.quiet);
        slab_config_free(cfg);
        return rc;
    }
    if (cmd_probe->parsed()) {
        if ((rc = load_config(probe_opts, &cfg)) != SLAB_OK) return fail(rc);
        slab_bundle* bundle = nullptr;
        rc = slab_probe(cfg, &bundle);
        if (rc != SLAB_OK) rc = fail(rc);
        else rc = finish_with_bundle(bundle, probe_opts.quiet);
        slab_config_free(cfg);
        return rc;
    }
    if (cmd_audit->parsed()) {
        if ((rc = load_config(audit_opts, &cfg)) != SLAB_OK) return fail(rc);
        if (std::string(slab_config_kind(cfg)) != "audit") {
            std::fprintf(stderr, "error: 'audit' needs a config with kind = audit\n");
            slab_config_free(cfg);
            return SLAB_E_CONFIG;
        }
        slab_bundle* bundle = nullptr;
        rc = slab_run(cfg, &bundle);
        if (rc != SLAB_OK) rc = fail(rc);
        else rc = finish_with_bundle(bundle, audit_opts.quiet);
        slab_config_free(cfg);
        return rc;
    }
    if (cmd_run->parsed()) {
        if ((rc = load_config(run_opts, &cfg)) != SLAB_OK) return fail(rc);
        slab_bundle* bundle = nullptr;
        rc = slab_run(cfg, &bundle);
        if (rc != SLAB_OK) rc = fail(rc);
        else rc = finish_with_bundle(bundle, run_opts.quiet);
        slab_config_free(cfg);
        return rc;
    }
    if (cmd_report->parsed()) {
        namespace fs = std::filesystem;
        slab_bundle* bundle = nullptr;
        std::string bundle_path = (fs::path(report_dir) / "bundle.json").string();
        if ((rc = slab_bundle_load(bundle_path.c_str(), &bundle)) != SLAB_OK) return fail(rc);
        std::string reports_dir = (fs::path(report_dir) / "reports").string();
        rc = slab_bundle_render(bundle, reports_dir.c_str());
        slab_bundle_free(bundle);
        return rc == SLAB_OK ? SLAB_OK : fail(rc);
    }
    return SLAB_E_CONFIG;
}
