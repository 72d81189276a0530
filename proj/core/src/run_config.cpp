#include "hyperenergy/run_config.hpp"

#include "hyperenergy/errors.hpp"
#include "hyperenergy/rng.hpp"
#include "hyperenergy/version.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>

namespace hyperenergy {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown config key '" + where + key + "'");
        }
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return obj.at(key).get<T>();
}

void parse_data_section(const json& j, RunConfig& cfg) {
    require_keys(j, "data.",
                 {"csv", "timestamp_column", "consumption_column", "temperature_column",
                  "timestamp_format", "gap_policy", "max_fill_hours", "cache_datasets"});
    cfg.csv_path = get_or<std::string>(j, "csv", "");
    cfg.columns.timestamp = get_or<std::string>(j, "timestamp_column", cfg.columns.timestamp);
    cfg.columns.consumption =
        get_or<std::string>(j, "consumption_column", cfg.columns.consumption);
    cfg.columns.temperature =
        get_or<std::string>(j, "temperature_column", cfg.columns.temperature);
    cfg.columns.timestamp_format =
        get_or<std::string>(j, "timestamp_format", cfg.columns.timestamp_format);
    const std::string policy = get_or<std::string>(j, "gap_policy", "reject");
    if (policy == "reject") {
        cfg.gap_policy = GapPolicy::reject;
    } else if (policy == "forward_fill") {
        cfg.gap_policy = GapPolicy::forward_fill;
    } else {
        throw ConfigError("data.gap_policy must be 'reject' or 'forward_fill', got '" +
                          policy + "'");
    }
    cfg.max_fill_hours = get_or<std::size_t>(j, "max_fill_hours", cfg.max_fill_hours);
    cfg.cache_datasets = get_or<bool>(j, "cache_datasets", cfg.cache_datasets);
}

void parse_window_section(const json& j, RunConfig& cfg) {
    require_keys(j, "window.", {"length", "horizon", "stride"});
    cfg.pipeline.window_length = get_or<std::size_t>(j, "length", 24);
    cfg.pipeline.horizon = get_or<std::size_t>(j, "horizon", 24);
    cfg.pipeline.stride = get_or<std::size_t>(j, "stride", 1);
    if (cfg.pipeline.window_length == 0 || cfg.pipeline.horizon == 0 ||
        cfg.pipeline.stride == 0) {
        throw ConfigError("window.length, window.horizon and window.stride must be >= 1");
    }
}

void parse_split_section(const json& j, RunConfig& cfg) {
    require_keys(j, "split.", {"train", "val", "test"});
    cfg.pipeline.split.train = get_or<double>(j, "train", 0.6);
    cfg.pipeline.split.val = get_or<double>(j, "val", 0.2);
    cfg.pipeline.split.test = get_or<double>(j, "test", 0.2);
}

void parse_kernel_section(const json& j, RunConfig& cfg) {
    require_keys(j, "model.kernel.",
                 {"num_reference_points", "degree", "gamma", "reference_init"});
    cfg.model.num_reference_points =
        get_or<std::size_t>(j, "num_reference_points", cfg.model.num_reference_points);
    cfg.model.degree = get_or<int>(j, "degree", cfg.model.degree);
    cfg.model.gamma = get_or<double>(j, "gamma", cfg.model.gamma);
    cfg.model.reference_init =
        get_or<std::string>(j, "reference_init", cfg.model.reference_init);
    if (cfg.model.num_reference_points == 0) {
        throw ConfigError("model.kernel.num_reference_points must be >= 1");
    }
    if (cfg.model.degree < 1) throw ConfigError("model.kernel.degree must be >= 1");
    if (cfg.model.gamma <= 0.0) throw ConfigError("model.kernel.gamma must be > 0");
    if (cfg.model.reference_init != "auto" && cfg.model.reference_init != "data" &&
        cfg.model.reference_init != "normal") {
        throw ConfigError("model.kernel.reference_init must be 'auto', 'data' or 'normal'");
    }
}

void parse_model_section(const json& j, RunConfig& cfg) {
    require_keys(j, "model.",
                 {"variant", "hidden_units", "num_lstm_layers", "kernel", "hypernet",
                  "theta_batch_mean", "theta_init_scale", "mlp_hidden"});
    if (j.contains("variant")) {
        cfg.variant = variant_from_name(j.at("variant").get<std::string>());
    }
    cfg.model.hidden_units = get_or<std::size_t>(j, "hidden_units", cfg.model.hidden_units);
    cfg.model.num_lstm_layers =
        get_or<std::size_t>(j, "num_lstm_layers", cfg.model.num_lstm_layers);
    if (cfg.model.hidden_units == 0 || cfg.model.num_lstm_layers == 0) {
        throw ConfigError("model.hidden_units and model.num_lstm_layers must be >= 1");
    }
    if (j.contains("kernel")) parse_kernel_section(j.at("kernel"), cfg);
    if (j.contains("hypernet")) {
        const json& h = j.at("hypernet");
        require_keys(h, "model.hypernet.", {"hidden_sizes", "activation"});
        cfg.model.hypernet_hidden =
            get_or<std::vector<std::size_t>>(h, "hidden_sizes", cfg.model.hypernet_hidden);
        if (cfg.model.hypernet_hidden.empty()) {
            throw ConfigError("model.hypernet.hidden_sizes must be non-empty");
        }
        if (h.contains("activation")) {
            cfg.model.activation = activation_from_name(h.at("activation").get<std::string>());
        }
    }
    cfg.model.theta_batch_mean = get_or<bool>(j, "theta_batch_mean", cfg.model.theta_batch_mean);
    cfg.model.theta_init_scale =
        get_or<double>(j, "theta_init_scale", cfg.model.theta_init_scale);
    if (cfg.model.theta_init_scale <= 0.0) {
        throw ConfigError("model.theta_init_scale must be > 0");
    }
    cfg.model.mlp_hidden = get_or<std::size_t>(j, "mlp_hidden", cfg.model.mlp_hidden);
}

void parse_training_section(const json& j, RunConfig& cfg) {
    require_keys(j, "training.",
                 {"loss", "optimizer", "learning_rate", "batch_size", "max_epochs",
                  "early_stop_patience", "plateau", "weight_decay"});
    if (j.contains("loss")) cfg.training.loss = loss_from_name(j.at("loss").get<std::string>());
    if (j.contains("optimizer")) {
        cfg.training.optimizer = optimizer_from_name(j.at("optimizer").get<std::string>());
    }
    cfg.training.learning_rate = get_or<double>(j, "learning_rate", -1.0);
    if (j.contains("learning_rate") && cfg.training.learning_rate < 0.0) {
        throw ConfigError("training.learning_rate must be >= 0");
    }
    cfg.training.batch_size = get_or<std::size_t>(j, "batch_size", cfg.training.batch_size);
    cfg.training.max_epochs = get_or<std::size_t>(j, "max_epochs", cfg.training.max_epochs);
    cfg.training.early_stop_patience =
        get_or<std::size_t>(j, "early_stop_patience", cfg.training.early_stop_patience);
    if (cfg.training.batch_size == 0 || cfg.training.max_epochs == 0 ||
        cfg.training.early_stop_patience == 0) {
        throw ConfigError("training.batch_size, max_epochs and early_stop_patience must be >= 1");
    }
    if (j.contains("plateau")) {
        const json& p = j.at("plateau");
        require_keys(p, "training.plateau.", {"factor", "patience", "min_lr", "threshold"});
        cfg.training.plateau.factor = get_or<double>(p, "factor", cfg.training.plateau.factor);
        cfg.training.plateau.patience =
            get_or<std::size_t>(p, "patience", cfg.training.plateau.patience);
        cfg.training.plateau.min_lr = get_or<double>(p, "min_lr", cfg.training.plateau.min_lr);
        cfg.training.plateau.threshold =
            get_or<double>(p, "threshold", cfg.training.plateau.threshold);
        if (cfg.training.plateau.factor <= 0.0 || cfg.training.plateau.factor >= 1.0) {
            throw ConfigError("training.plateau.factor must be in (0, 1)");
        }
        if (cfg.training.plateau.patience == 0) {
            throw ConfigError("training.plateau.patience must be >= 1");
        }
    }
    cfg.training.weight_decay = get_or<double>(j, "weight_decay", cfg.training.weight_decay);
}

void parse_grid_section(const json& j, RunConfig& cfg) {
    require_keys(j, "grid.",
                 {"hidden_units", "optimizer", "loss", "degree", "gamma", "activation"});
    if (j.contains("hidden_units")) {
        cfg.grid.hidden_units = j.at("hidden_units").get<std::vector<std::size_t>>();
    }
    if (j.contains("optimizer")) {
        cfg.grid.optimizers.clear();
        for (const auto& o : j.at("optimizer")) {
            cfg.grid.optimizers.push_back(optimizer_from_name(o.get<std::string>()));
        }
    }
    if (j.contains("loss")) {
        cfg.grid.losses.clear();
        for (const auto& l : j.at("loss")) {
            cfg.grid.losses.push_back(loss_from_name(l.get<std::string>()));
        }
    }
    if (j.contains("degree")) cfg.grid.degrees = j.at("degree").get<std::vector<int>>();
    if (j.contains("gamma")) cfg.grid.gammas = j.at("gamma").get<std::vector<double>>();
    if (j.contains("activation")) {
        cfg.grid.activations.clear();
        for (const auto& a : j.at("activation")) {
            cfg.grid.activations.push_back(activation_from_name(a.get<std::string>()));
        }
    }
    if (cfg.grid.size() == 0) throw ConfigError("grid space is empty");
}

void parse_ablation_section(const json& j, RunConfig& cfg) {
    require_keys(j, "ablation.", {"variants", "seeds"});
    if (j.contains("variants")) {
        for (const auto& v : j.at("variants")) {
            cfg.ablation_variants.push_back(variant_from_name(v.get<std::string>()));
        }
    }
    if (j.contains("seeds")) {
        cfg.ablation_seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    }
}

} // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");

    require_keys(j, "",
                 {"seed", "data", "features", "window", "split", "model", "training",
                  "grid", "ablation", "output_dir", "jobs"});

    RunConfig cfg;
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    if (j.contains("data")) parse_data_section(j.at("data"), cfg);
    if (j.contains("features")) {
        cfg.pipeline.features.clear();
        for (const auto& f : j.at("features")) {
            cfg.pipeline.features.push_back(feature_from_name(f.get<std::string>()));
        }
        if (cfg.pipeline.features.empty()) throw ConfigError("features must be non-empty");
    }
    if (j.contains("window")) parse_window_section(j.at("window"), cfg);
    if (j.contains("split")) parse_split_section(j.at("split"), cfg);
    if (j.contains("model")) parse_model_section(j.at("model"), cfg);
    if (j.contains("training")) parse_training_section(j.at("training"), cfg);
    if (j.contains("grid")) parse_grid_section(j.at("grid"), cfg);
    if (j.contains("ablation")) parse_ablation_section(j.at("ablation"), cfg);
    cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
    cfg.jobs = get_or<std::size_t>(j, "jobs", cfg.jobs);
    if (cfg.jobs == 0) throw ConfigError("jobs must be >= 1");

    // Structural fields the model derives from the pipeline.
    cfg.model.input_features = cfg.pipeline.features.size();
    cfg.model.window_length = cfg.pipeline.window_length;
    cfg.model.horizon = cfg.pipeline.horizon;
    cfg.training.seed = cfg.seed;

    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016" PRIx64, fnv1a64(j.dump()));
    cfg.config_hash = hex;
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_run_config(text);
}

std::string output_header_comment(const RunConfig& config) {
    return std::string("hyperenergy ") + kVersion + " config_hash=" + config.config_hash;
}

} // namespace hyperenergy
