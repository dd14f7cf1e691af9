#include "shortcutlab.h"

#include <cstdio>
#include <cstring>
#include <string>

#include "core/error.hpp"
#include "harness/experiments.hpp"

struct slab_config {
    slab::harness::ExperimentConfig cfg;
};

struct slab_bundle {
    slab::harness::ReportBundle bundle;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) {
    g_last_error = msg;
}

// Exceptions cross the C boundary as status codes.
template <class Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return SLAB_OK;
    } catch (const slab::NumericError& e) {
        set_error(e.what());
        return SLAB_E_NUMERIC;
    } catch (const slab::IoError& e) {
        set_error(e.what());
        return SLAB_E_IO;
    } catch (const slab::FormatError& e) {
        set_error(e.what());
        return SLAB_E_IO;
    } catch (const slab::UsageError& e) {
        set_error(e.what());
        return SLAB_E_CONFIG;
    } catch (const slab::DomainError& e) {
        set_error(e.what());
        return SLAB_E_CONFIG;
    } catch (const std::exception& e) {
        set_error(e.what());
        return SLAB_E_INTERNAL;
    }
}

int require(bool ok, const char* msg) {
    if (!ok) {
        set_error(msg);
        return SLAB_E_CONFIG;
    }
    return SLAB_OK;
}

}  // namespace

extern "C" {

const char* slab_version(void) {
    return "0.1.0";
}

const char* slab_last_error(void) {
    return g_last_error.c_str();
}

int slab_config_load(const char* path, slab_config** out_config) {
    if (int rc = require(path && out_config, "slab_config_load: null argument")) return rc;
    *out_config = nullptr;
    return guarded([&] {
        auto* handle = new slab_config{slab::harness::load_config(path)};
        *out_config = handle;
    });
}

int slab_config_set_seed(slab_config* config, unsigned long long seed) {
    if (int rc = require(config != nullptr, "slab_config_set_seed: null config")) return rc;
    config->cfg.seed = seed;
    return SLAB_OK;
}

int slab_config_set_out_dir(slab_config* config, const char* out_dir) {
    if (int rc = require(config && out_dir && *out_dir, "slab_config_set_out_dir: empty path")) {
        return rc;
    }
    config->cfg.out_dir = out_dir;
    return SLAB_OK;
}

int slab_config_set_quiet(slab_config* config, int quiet) {
    if (int rc = require(config != nullptr, "slab_config_set_quiet: null config")) return rc;
    config->cfg.quiet = quiet != 0;
    return SLAB_OK;
}

const char* slab_config_kind(const slab_config* config) {
    if (!config) return "";
    return slab::harness::kind_name(config->cfg.kind);
}

void slab_config_free(slab_config* config) {
    delete config;
}

int slab_generate(const slab_config* config) {
    if (int rc = require(config != nullptr, "slab_generate: null config")) return rc;
    return guarded([&] { slab::harness::generate_datasets(config->cfg); });
}

int slab_train(const slab_config* config, slab_bundle** out_bundle) {
    if (int rc = require(config && out_bundle, "slab_train: null argument")) return rc;
    *out_bundle = nullptr;
    return guarded([&] {
        *out_bundle = new slab_bundle{slab::harness::train_models(config->cfg)};
    });
}

int slab_probe(const slab_config* config, slab_bundle** out_bundle) {
    if (int rc = require(config && out_bundle, "slab_probe: null argument")) return rc;
    *out_bundle = nullptr;
    return guarded([&] {
        *out_bundle = new slab_bundle{slab::harness::probe_models(config->cfg)};
    });
}

int slab_run(const slab_config* config, slab_bundle** out_bundle) {
    if (int rc = require(config && out_bundle, "slab_run: null argument")) return rc;
    *out_bundle = nullptr;
    return guarded([&] {
        *out_bundle = new slab_bundle{slab::harness::run_experiment(config->cfg)};
    });
}

int slab_bundle_load(const char* path, slab_bundle** out_bundle) {
    if (int rc = require(path && out_bundle, "slab_bundle_load: null argument")) return rc;
    *out_bundle = nullptr;
    return guarded([&] {
        *out_bundle = new slab_bundle{slab::harness::load_bundle(path)};
    });
}

int slab_bundle_save(const slab_bundle* bundle, const char* path) {
    if (int rc = require(bundle && path, "slab_bundle_save: null argument")) return rc;
    return guarded([&] { slab::harness::save_bundle(bundle->bundle, path); });
}

int slab_bundle_render(const slab_bundle* bundle, const char* out_dir) {
    if (int rc = require(bundle && out_dir, "slab_bundle_render: null argument")) return rc;
    return guarded([&] { slab::harness::render_reports(bundle->bundle, out_dir); });
}

int slab_bundle_summary(const slab_bundle* bundle, char* buffer, size_t buffer_len) {
    if (int rc = require(bundle && buffer && buffer_len > 0, "slab_bundle_summary: null argument")) {
        return rc;
    }
    const auto& b = bundle->bundle;
    std::string s = b.kind + " seed=" + std::to_string(b.seed);
    for (const auto& [name, r] : b.paired) {
        char line[96];
        std::snprintf(line, sizeof(line), " | %s marked=%.4f clean=%.4f delta=%+.4f", name.c_str(),
                      r.marked_mean, r.clean_mean, r.delta_mean);
        s += line;
    }
    for (const auto& [name, r] : b.banded) {
        double lo = 2.0, hi = -1.0;
        for (const auto& band : r.bands) {
            if (!band.defined) continue;
            lo = std::min(lo, band.dice_mean);
            hi = std::max(hi, band.dice_mean);
        }
        char line[96];
        std::snprintf(line, sizeof(line), " | %s dice=%.4f band_spread=%.4f", name.c_str(),
                      r.overall_mean, hi >= lo ? hi - lo : 0.0);
        s += line;
    }
    if (b.centroid) {
        char line[64];
        std::snprintf(line, sizeof(line), " | central_box=%.4f", b.centroid->central_box_fraction);
        s += line;
    }
    std::snprintf(buffer, buffer_len, "%s", s.c_str());
    return SLAB_OK;
}

void slab_bundle_free(slab_bundle* bundle) {
    delete bundle;
}

}  // extern "C"
