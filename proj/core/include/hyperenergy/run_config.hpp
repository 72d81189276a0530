#pragma once

#include "hyperenergy/data.hpp"
#include "hyperenergy/grid_search.hpp"
#include "hyperenergy/model.hpp"
#include "hyperenergy/training.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hyperenergy {

/// One experiment definition loaded from a JSON config file. Unknown keys
/// anywhere in the file are rejected; every field is validated before any
/// work starts. The config hash is recorded in all outputs.
struct RunConfig {
    std::uint64_t seed = 42;

    // data
    std::string csv_path;
    CsvColumnMap columns;
    GapPolicy gap_policy = GapPolicy::reject;
    std::size_t max_fill_hours = 3;
    PipelineConfig pipeline;
    bool cache_datasets = false;

    // model + training
    ModelVariant variant = ModelVariant::hyperenergy_full;
    ModelConfig model;
    TrainConfig training;

    // gridsearch / ablate sections
    GridSpace grid;
    std::vector<ModelVariant> ablation_variants;
    std::vector<std::uint64_t> ablation_seeds;

    std::string output_dir = "out";
    std::size_t jobs = 1;

    std::string config_hash; // hex of the canonical config serialization
};

RunConfig load_run_config(const std::string& path);
/// Parses a config from a JSON string (used by tests and load_run_config).
RunConfig parse_run_config(const std::string& json_text);

/// "<tool> <version> config_hash=<hex>" line embedded in output files.
std::string output_header_comment(const RunConfig& config);

} // namespace hyperenergy
