/* C API for the shortcut-learning segmentation lab. The core is C++; this
 * header is the stable surface for CLIs and language bindings. All functions
 * return a status code from the SLAB_* set below, which the bundled CLI also
 * uses as its exit codes. On failure, slab_last_error() carries a
 * human-readable message for the calling thread. */
#ifndef SHORTCUTLAB_H
#define SHORTCUTLAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define SLAB_OK 0
#define SLAB_E_INTERNAL 1 /* unexpected failure */
#define SLAB_E_CONFIG 2   /* config or usage validation error */
#define SLAB_E_IO 3       /* filesystem or file-format error */
#define SLAB_E_NUMERIC 4  /* NaN abort during training */

typedef struct slab_config slab_config;
typedef struct slab_bundle slab_bundle;

const char* slab_version(void);
const char* slab_last_error(void);

/* Parses and fully validates an experiment config file. Every validation
 * problem is reported at once; nothing is created on disk. */
int slab_config_load(const char* path, slab_config** out_config);
int slab_config_set_seed(slab_config* config, unsigned long long seed);
int slab_config_set_out_dir(slab_config* config, const char* out_dir);
int slab_config_set_quiet(slab_config* config, int quiet);
/* "marker_shortcut", "padding_shortcut" or "audit". */
const char* slab_config_kind(const slab_config* config);
void slab_config_free(slab_config* config);

/* Pipeline stages. Artifacts land under the config's out_dir:
 *   data/<split>/{images,masks,manifest.csv}, checkpoints/<model>.ck,
 *   bundle.json, config_snapshot.ini and reports/ (CSV + SVG + index.csv).
 * Stages are deterministic per config, so later stages regenerate earlier
 * inputs bit-exactly. Bundles handed back must be freed by the caller. */
int slab_generate(const slab_config* config);
int slab_train(const slab_config* config, slab_bundle** out_bundle);
int slab_probe(const slab_config* config, slab_bundle** out_bundle);
int slab_run(const slab_config* config, slab_bundle** out_bundle);

int slab_bundle_load(const char* path, slab_bundle** out_bundle);
int slab_bundle_save(const slab_bundle* bundle, const char* path);
int slab_bundle_render(const slab_bundle* bundle, const char* out_dir);
/* Short human-readable result line, truncated to buffer_len - 1 chars. */
int slab_bundle_summary(const slab_bundle* bundle, char* buffer, size_t buffer_len);
void slab_bundle_free(slab_bundle* bundle);

#ifdef __cplusplus
}
#endif

#endif /* SHORTCUTLAB_H */
