#include "hyperenergy/errors.hpp"
#include "hyperenergy/run_config.hpp"
#include "hyperenergy/version.hpp"

#include <doctest.h>

#include <string>

using namespace hyperenergy;

namespace {

const char* kFullConfig = R"json({
  "seed": 7,
  "data": {
    "csv": "series.csv",
    "timestamp_column": "timestamp",
    "consumption_column": "consumption_kwh",
    "temperature_column": "temperature_c",
    "gap_policy": "forward_fill",
    "max_fill_hours": 2,
    "cache_datasets": true
  },
  "features": ["consumption", "temperature", "hour_of_day", "day_of_week", "day_of_year"],
  "window": {"length": 24, "horizon": 24, "stride": 2},
  "split": {"train": 0.6, "val": 0.2, "test": 0.2},
  "model": {
    "variant": "hyperenergy_full",
    "hidden_units": 16,
    "num_lstm_layers": 2,
    "kernel": {"num_reference_points": 32, "degree": 3, "gamma": 5.0, "reference_init": "data"},
    "hypernet": {"hidden_sizes": [64, 64], "activation": "swish"},
    "theta_init_scale": 0.05
  },
  "training": {
    "loss": "mae",
    "optimizer": "adam",
    "learning_rate": 0.001,
    "batch_size": 16,
    "max_epochs": 50,
    "early_stop_patience": 5,
    "plateau": {"factor": 0.5, "patience": 3, "min_lr": 1e-6}
  },
  "grid": {
    "hidden_units": [64, 128, 256],
    "optimizer": ["adam", "sgd", "adamw"],
    "loss": ["mae", "mse"],
    "degree": [2, 3, 4, 5],
    "gamma": [2, 5, 6, 8, 10],
    "activation": ["relu", "swish"]
  },
  "ablation": {
    "variants": ["hyperenergy_full", "hyperenergy_no_kernel", "plain_lstm"],
    "seeds": [1, 2, 3, 4, 5]
  },
  "output_dir": "out",
  "jobs": 2
})json";

} // namespace

TEST_CASE("a complete config parses into every section") {
    RunConfig cfg = parse_run_config(kFullConfig);
    CHECK(cfg.seed == 7);
    CHECK(cfg.csv_path == "series.csv");
    CHECK(cfg.gap_policy == GapPolicy::forward_fill);
    CHECK(cfg.max_fill_hours == 2);
    CHECK(cfg.cache_datasets);
    CHECK(cfg.pipeline.features.size() == 5);
    CHECK(cfg.pipeline.stride == 2);
    CHECK(cfg.variant == ModelVariant::hyperenergy_full);
    CHECK(cfg.model.hidden_units == 16);
    CHECK(cfg.model.num_reference_points == 32);
    CHECK(cfg.model.degree == 3);
    CHECK(cfg.model.gamma == 5.0);
    CHECK(cfg.model.hypernet_hidden == std::vector<std::size_t>{64, 64});
    CHECK(cfg.model.input_features == 5);
    CHECK(cfg.model.window_length == 24);
    CHECK(cfg.model.horizon == 24);
    CHECK(cfg.training.loss == LossKind::mae);
    CHECK(cfg.training.optimizer == OptimizerKind::adam);
    CHECK(cfg.training.learning_rate == 0.001);
    CHECK(cfg.training.seed == 7);
    CHECK(cfg.grid.size() == 720);
    CHECK(cfg.ablation_variants.size() == 3);
    CHECK(cfg.ablation_seeds.size() == 5);
    CHECK(cfg.jobs == 2);
    CHECK(cfg.config_hash.size() == 16);
}

TEST_CASE("unknown keys are rejected, naming the key") {
    try {
        parse_run_config(R"({"seeed": 7})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("seeed") != std::string::npos);
    }

    try {
        parse_run_config(R"({"training": {"learning_rte": 0.1}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("training.learning_rte") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_run_config(R"({"model": {"kernel": {"gama": 1}}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"window": {"len": 24}})"), ConfigError);
}

TEST_CASE("invalid values are rejected before any work starts") {
    CHECK_THROWS_AS(parse_run_config("not json at all"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"([1,2,3])"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"window": {"length": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"model": {"kernel": {"gamma": -1}}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"model": {"kernel": {"degree": 0}}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"training": {"max_epochs": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"training": {"learning_rate": -0.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"data": {"gap_policy": "ignore"}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"features": []})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"features": ["watts"]})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"model": {"variant": "transformer"}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"jobs": 0})"), ConfigError);
}

TEST_CASE("defaults fill every unspecified field") {
    RunConfig cfg = parse_run_config("{}");
    CHECK(cfg.seed == 42);
    CHECK(cfg.pipeline.window_length == 24);
    CHECK(cfg.pipeline.horizon == 24);
    CHECK(cfg.pipeline.stride == 1);
    CHECK(cfg.pipeline.features.size() == 5);
    CHECK(cfg.variant == ModelVariant::hyperenergy_full);
    CHECK(cfg.training.max_epochs == 300);
    CHECK(cfg.training.early_stop_patience == 5);
    CHECK(cfg.training.plateau.factor == 0.5);
    CHECK(cfg.training.plateau.patience == 3);
    CHECK(cfg.training.plateau.min_lr == 1e-6);
    CHECK(cfg.training.batch_size == 32);
    CHECK(cfg.training.effective_lr() == 1e-3); // adam default
    CHECK(cfg.model.num_reference_points == 64);
    CHECK(cfg.model.theta_batch_mean == false);
    CHECK(cfg.jobs == 1);

    RunConfig sgd = parse_run_config(R"({"training": {"optimizer": "sgd"}})");
    CHECK(sgd.training.effective_lr() == 1e-2);
}

TEST_CASE("config hash is stable for identical content and differs otherwise") {
    RunConfig a = parse_run_config(kFullConfig);
    RunConfig b = parse_run_config(kFullConfig);
    CHECK(a.config_hash == b.config_hash);

    RunConfig c = parse_run_config(R"({"seed": 8})");
    RunConfig d = parse_run_config(R"({"seed": 9})");
    CHECK(c.config_hash != d.config_hash);

    // whitespace-insensitive: the hash covers the canonical serialization
    RunConfig e = parse_run_config("{\"seed\":   8\n}");
    CHECK(c.config_hash == e.config_hash);

    const std::string header = output_header_comment(a);
    CHECK(header.find(kVersion) != std::string::npos);
    CHECK(header.find(a.config_hash) != std::string::npos);
}
