#include "hyperenergy/checkpoint.hpp"

#include "hyperenergy/errors.hpp"
#include "hyperenergy/version.hpp"

#include <json.hpp>

#include <fstream>

namespace hyperenergy {

using nlohmann::json;

namespace {

constexpr int kCheckpointFormat = 1;

json model_config_to_json(const ModelConfig& cfg) {
    json j;
    j["input_features"] = cfg.input_features;
    j["window_length"] = cfg.window_length;
    j["horizon"] = cfg.horizon;
    j["hidden_units"] = cfg.hidden_units;
    j["num_lstm_layers"] = cfg.num_lstm_layers;
    j["num_reference_points"] = cfg.num_reference_points;
    j["degree"] = cfg.degree;
    j["gamma"] = cfg.gamma;
    j["hypernet_hidden"] = cfg.hypernet_hidden;
    j["activation"] = activation_name(cfg.activation);
    j["theta_batch_mean"] = cfg.theta_batch_mean;
    j["theta_init_scale"] = cfg.theta_init_scale;
    j["reference_init"] = cfg.reference_init;
    j["mlp_hidden"] = cfg.mlp_hidden;
    return j;
}

ModelConfig model_config_from_json(const json& j) {
    ModelConfig cfg;
    cfg.input_features = j.at("input_features").get<std::size_t>();
    cfg.window_length = j.at("window_length").get<std::size_t>();
    cfg.horizon = j.at("horizon").get<std::size_t>();
    cfg.hidden_units = j.at("hidden_units").get<std::size_t>();
    cfg.num_lstm_layers = j.at("num_lstm_layers").get<std::size_t>();
    cfg.num_reference_points = j.at("num_reference_points").get<std::size_t>();
    cfg.degree = j.at("degree").get<int>();
    cfg.gamma = j.at("gamma").get<double>();
    cfg.hypernet_hidden = j.at("hypernet_hidden").get<std::vector<std::size_t>>();
    cfg.activation = activation_from_name(j.at("activation").get<std::string>());
    cfg.theta_batch_mean = j.at("theta_batch_mean").get<bool>();
    cfg.theta_init_scale = j.at("theta_init_scale").get<double>();
    cfg.reference_init = j.at("reference_init").get<std::string>();
    cfg.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
    return cfg;
}

json scaler_to_json(const MinMaxScaler& scaler) {
    return json{{"mins", scaler.mins}, {"maxs", scaler.maxs}};
}

MinMaxScaler scaler_from_json(const json& j) {
    MinMaxScaler scaler;
    scaler.mins = j.at("mins").get<std::vector<double>>();
    scaler.maxs = j.at("maxs").get<std::vector<double>>();
    return scaler;
}

json state_to_json(const ForecastModel& model) {
    json state = json::object();
    for (const NamedParam& p : model.state_tensors()) {
        auto v = p.tensor.values();
        state[p.name] = std::vector<double>(v.begin(), v.end());
    }
    return state;
}

void state_from_json(ForecastModel& model, const json& state) {
    for (NamedParam& p : model.state_tensors()) {
        if (!state.contains(p.name)) {
            throw IoError("checkpoint is missing tensor '" + p.name + "'");
        }
        const auto values = state.at(p.name).get<std::vector<double>>();
        auto dst = p.tensor.values();
        if (values.size() != dst.size()) {
            throw IoError("checkpoint tensor '" + p.name + "' has " +
                          std::to_string(values.size()) + " values, expected " +
                          std::to_string(dst.size()));
        }
        std::copy(values.begin(), values.end(), dst.begin());
    }
}

json meta_to_json(const CheckpointMeta& meta) {
    json j;
    j["seed"] = meta.seed;
    j["config_hash"] = meta.config_hash;
    j["version"] = kVersion;
    j["scaler"] = scaler_to_json(meta.scaler);
    json feats = json::array();
    for (FeatureKind f : meta.features) feats.push_back(feature_name(f));
    j["features"] = feats;
    return j;
}

CheckpointMeta meta_from_json(const json& j) {
    CheckpointMeta meta;
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.config_hash = j.at("config_hash").get<std::string>();
    meta.version = j.at("version").get<std::string>();
    meta.scaler = scaler_from_json(j.at("scaler"));
    for (const auto& f : j.at("features")) {
        meta.features.push_back(feature_from_name(f.get<std::string>()));
    }
    return meta;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("cannot parse '" + path + "': " + e.what());
    }
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << j.dump(1, '\t') << "\n";
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::unique_ptr<ForecastModel> rebuild_model(const json& j) {
    const ModelVariant variant = variant_from_name(j.at("variant").get<std::string>());
    const ModelConfig cfg = model_config_from_json(j.at("model_config"));
    // Construction values are placeholders; the state overwrite that follows
    // makes the result exact. No reference source is needed: without one the
    // draw falls back to the normal init.
    return build_variant(variant, cfg, 0);
}

} // namespace

void save_checkpoint(const std::string& path, const ForecastModel& model,
                     const CheckpointMeta& meta) {
    json j;
    j["format"] = kCheckpointFormat;
    j["kind"] = "checkpoint";
    j["variant"] = variant_name(model.variant());
    j["model_config"] = model_config_to_json(model.config());
    j["meta"] = meta_to_json(meta);
    j["state"] = state_to_json(model);
    write_json_file(path, j);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    const json j = read_json_file(path);
    if (!j.contains("format") || j.at("format").get<int>() != kCheckpointFormat) {
        throw IoError("'" + path + "' is not a supported checkpoint file");
    }
    LoadedCheckpoint loaded;
    loaded.model = rebuild_model(j);
    state_from_json(*loaded.model, j.at("state"));
    loaded.meta = meta_from_json(j.at("meta"));
    return loaded;
}

void save_session(const std::string& path, const ForecastModel& model,
                  const TrainSession& session, const CheckpointMeta& meta) {
    json j;
    j["format"] = kCheckpointFormat;
    j["kind"] = "session";
    j["variant"] = variant_name(model.variant());
    j["model_config"] = model_config_to_json(model.config());
    j["meta"] = meta_to_json(meta);

    json s;
    s["epochs_completed"] = session.epochs_completed;
    s["lr"] = session.lr;
    s["best_val_loss"] = session.best_val_loss;
    s["best_epoch"] = session.best_epoch;
    s["stale_epochs"] = session.stale_epochs;
    s["plateau_best"] = session.plateau_best;
    s["plateau_stale"] = session.plateau_stale;
    s["stopped"] = session.stopped;
    s["opt_m"] = session.opt_state.m;
    s["opt_v"] = session.opt_state.v;
    s["opt_step_count"] = session.opt_state.step_count;
    s["current_params"] = session.current_params;
    s["best_params"] = session.best_params;

    json hist;
    hist["stop_reason"] = session.history.stop_reason;
    hist["best_epoch"] = session.history.best_epoch;
    hist["best_val_loss"] = session.history.best_val_loss;
    json epochs = json::array();
    for (const EpochRecord& e : session.history.epochs) {
        epochs.push_back({{"epoch", e.epoch},
                          {"train_loss", e.train_loss},
                          {"val_loss", e.val_loss},
                          {"val_smape", e.val_smape},
                          {"learning_rate", e.learning_rate},
                          {"seconds", e.seconds}});
    }
    hist["epochs"] = epochs;
    s["history"] = hist;
    j["session"] = s;
    write_json_file(path, j);
}

bool load_session(const std::string& path, ForecastModel& model, TrainSession& session,
                  std::string* config_hash) {
    std::ifstream probe(path);
    if (!probe) return false;
    probe.close();

    const json j = read_json_file(path);
    if (!j.contains("kind") || j.at("kind").get<std::string>() != "session") {
        throw IoError("'" + path + "' is not a training session file");
    }
    if (j.at("variant").get<std::string>() != variant_name(model.variant())) {
        throw ConfigError("session variant '" + j.at("variant").get<std::string>() +
                          "' does not match the configured variant");
    }
    const json& s = j.at("session");
    session.epochs_completed = s.at("epochs_completed").get<std::size_t>();
    session.lr = s.at("lr").get<double>();
    session.best_val_loss = s.at("best_val_loss").get<double>();
    session.best_epoch = s.at("best_epoch").get<std::size_t>();
    session.stale_epochs = s.at("stale_epochs").get<std::size_t>();
    session.plateau_best = s.at("plateau_best").get<double>();
    session.plateau_stale = s.at("plateau_stale").get<std::size_t>();
    session.stopped = s.at("stopped").get<bool>();
    session.opt_state.m = s.at("opt_m").get<std::vector<std::vector<double>>>();
    session.opt_state.v = s.at("opt_v").get<std::vector<std::vector<double>>>();
    session.opt_state.step_count = s.at("opt_step_count").get<std::int64_t>();
    session.current_params = s.at("current_params").get<std::vector<std::vector<double>>>();
    session.best_params = s.at("best_params").get<std::vector<std::vector<double>>>();

    const json& hist = s.at("history");
    session.history = TrainHistory{};
    session.history.stop_reason = hist.at("stop_reason").get<std::string>();
    session.history.best_epoch = hist.at("best_epoch").get<std::size_t>();
    session.history.best_val_loss = hist.at("best_val_loss").get<double>();
    for (const auto& e : hist.at("epochs")) {
        EpochRecord rec;
        rec.epoch = e.at("epoch").get<std::size_t>();
        rec.train_loss = e.at("train_loss").get<double>();
        rec.val_loss = e.at("val_loss").get<double>();
        rec.val_smape = e.at("val_smape").get<double>();
        rec.learning_rate = e.at("learning_rate").get<double>();
        rec.seconds = e.at("seconds").get<double>();
        session.history.epochs.push_back(rec);
    }
    if (config_hash) *config_hash = j.at("meta").at("config_hash").get<std::string>();
    return true;
}

} // namespace hyperenergy
