#pragma once

#include "harness/bundle.hpp"
#include "harness/config.hpp"

namespace slab::harness {

// Full pipelines: generate data, train, probe, then write bundle.json plus
// rendered reports under the config's out_dir. Config validation happens in
// parse/load; the runners only check that the kind matches the entry point.
ReportBundle run_experiment(const ExperimentConfig& config);
ReportBundle run_marker_experiment(const ExperimentConfig& config);
ReportBundle run_padding_experiment(const ExperimentConfig& config);
ReportBundle run_audit(const ExperimentConfig& config);

// Verb-level stages. All of them are deterministic per config, so a later
// stage can regenerate earlier artifacts bit-exactly.
void generate_datasets(const ExperimentConfig& config);
ReportBundle train_models(const ExperimentConfig& config);  // datasets + training + checkpoints
ReportBundle probe_models(const ExperimentConfig& config);  // loads checkpoints, runs probes

}  // namespace slab::harness
