#pragma once

#include "hyperenergy/data.hpp"
#include "hyperenergy/model.hpp"
#include "hyperenergy/training.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace hyperenergy {

/// Everything a model file carries besides the tensors themselves.
struct CheckpointMeta {
    std::uint64_t seed = 0;
    std::string config_hash; // hex
    std::string version;
    MinMaxScaler scaler;
    std::vector<FeatureKind> features;
};

struct LoadedCheckpoint {
    std::unique_ptr<ForecastModel> model;
    CheckpointMeta meta;
};

/// Versioned JSON container: variant tag, structural config, kernel
/// hyperparameters, parameter layout inputs, scaler, config hash and every
/// state tensor at full precision. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const ForecastModel& model,
                     const CheckpointMeta& meta);
LoadedCheckpoint load_checkpoint(const std::string& path);

/// Training session persistence (model + optimizer + counters + history)
/// for resumable runs.
void save_session(const std::string& path, const ForecastModel& model,
                  const TrainSession& session, const CheckpointMeta& meta);
bool load_session(const std::string& path, ForecastModel& model, TrainSession& session,
                  std::string* config_hash = nullptr);

} // namespace hyperenergy
