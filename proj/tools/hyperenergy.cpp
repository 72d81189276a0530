// Command-line front end: synthesizes data, trains, evaluates, sweeps and
// ablates forecasting models defined by a JSON run config.

#include "hyperenergy/checkpoint.hpp"
#include "hyperenergy/errors.hpp"
#include "hyperenergy/evaluation.hpp"
#include "hyperenergy/grid_search.hpp"
#include "hyperenergy/rng.hpp"
#include "hyperenergy/run_config.hpp"
#include "hyperenergy/synth.hpp"
#include "hyperenergy/version.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace hyperenergy;

namespace {

// 0 success; CLI11 reports its own parse-error codes; the rest map exception
// families to stable values.
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitIo = 5;
constexpr int kExitOther = 1;

struct SynthArgs {
    std::string profile = "residence";
    std::size_t days = 365;
    std::uint64_t seed = 0;
    double noise = 1.0;
    std::string out = "synth.csv";
};

struct ConfigArgs {
    std::string config_path;
    std::string data_override;
    std::string out_override;
    std::size_t jobs_override = 0;
    bool resume = false;
    bool dry_run = false;
};

struct CheckpointArgs {
    std::string checkpoint_path;
    std::string data_path;
    std::string out = ".";
    std::string split = "test";
};

RunConfig load_config(const ConfigArgs& args) {
    RunConfig cfg = load_run_config(args.config_path);
    if (!args.data_override.empty()) cfg.csv_path = args.data_override;
    if (!args.out_override.empty()) cfg.output_dir = args.out_override;
    if (args.jobs_override > 0) cfg.jobs = args.jobs_override;
    if (cfg.csv_path.empty()) {
        throw ConfigError("no input data: set data.csv in the config or pass --data");
    }
    return cfg;
}

DatasetBundle load_datasets(const RunConfig& cfg) {
    const std::string cache_path =
        (fs::path(cfg.output_dir) / ("dataset_cache_" + cfg.config_hash + ".bin")).string();
    const std::uint64_t hash_key = fnv1a64(cfg.config_hash);
    if (cfg.cache_datasets) {
        if (auto cached = load_dataset_cache(cache_path, hash_key)) {
            std::cout << "loaded dataset cache " << cache_path << "\n";
            return std::move(*cached);
        }
    }
    TimeSeries series =
        ingest_csv(cfg.csv_path, cfg.columns, cfg.gap_policy, cfg.max_fill_hours);
    DatasetBundle bundle = build_datasets(series, cfg.pipeline);
    if (cfg.cache_datasets) {
        fs::create_directories(cfg.output_dir);
        save_dataset_cache(cache_path, bundle, hash_key);
    }
    return bundle;
}

CheckpointMeta make_meta(const RunConfig& cfg, const DatasetBundle& data) {
    CheckpointMeta meta;
    meta.seed = cfg.seed;
    meta.config_hash = cfg.config_hash;
    meta.scaler = data.scaler;
    meta.features = data.features;
    return meta;
}

void write_history_csv(const std::string& path, const TrainHistory& history,
                       const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "# " << header_comment << "\n";
    out << "epoch,train_loss,val_loss,val_smape,learning_rate,seconds\n";
    out.precision(12);
    for (const EpochRecord& e : history.epochs) {
        out << e.epoch << "," << e.train_loss << "," << e.val_loss << "," << e.val_smape
            << "," << e.learning_rate << "," << e.seconds << "\n";
    }
    out << "# stop_reason=" << history.stop_reason << " best_epoch=" << history.best_epoch
        << " best_val_loss=" << history.best_val_loss << "\n";
}

int cmd_synth(const SynthArgs& args) {
    SynthOptions opt;
    opt.profile = synth_profile_from_name(args.profile);
    opt.days = args.days;
    opt.seed = args.seed;
    opt.noise = args.noise;
    TimeSeries series = synth_generate(opt);
    char comment[160];
    std::snprintf(comment, sizeof(comment),
                  "hyperenergy %s synth profile=%s days=%zu seed=%llu noise=%g", kVersion,
                  args.profile.c_str(), args.days,
                  static_cast<unsigned long long>(args.seed), args.noise);
    write_series_csv(args.out, series, comment);
    std::cout << "wrote " << series.size() << " hourly rows to " << args.out << "\n";
    return 0;
}

int cmd_train(const ConfigArgs& args) {
    RunConfig cfg = load_config(args);
    fs::create_directories(cfg.output_dir);
    DatasetBundle data = load_datasets(cfg);

    auto model = build_variant(cfg.variant, cfg.model, cfg.seed, &data.train.inputs);
    const std::string session_path = (fs::path(cfg.output_dir) / "session.json").string();

    TrainSession session;
    if (args.resume) {
        std::string saved_hash;
        if (load_session(session_path, *model, session, &saved_hash)) {
            if (saved_hash != cfg.config_hash) {
                throw ConfigError("session at '" + session_path +
                                  "' was produced under a different config (hash " +
                                  saved_hash + ")");
            }
            std::cout << "resuming after epoch " << session.epochs_completed << "\n";
        }
    }

    TrainHistory history = train(*model, data.train, data.val, cfg.training, &session);

    const CheckpointMeta meta = make_meta(cfg, data);
    save_session(session_path, *model, session, meta);
    const std::string ckpt_path = (fs::path(cfg.output_dir) / "checkpoint.json").string();
    save_checkpoint(ckpt_path, *model, meta);
    write_history_csv((fs::path(cfg.output_dir) / "history.csv").string(), history,
                      output_header_comment(cfg));

    MetricsReport test_metrics = evaluate(*model, data.test, data.scaler);
    std::vector<MetricsReport> reports = {test_metrics};
    write_metrics_csv((fs::path(cfg.output_dir) / "metrics.csv").string(), reports,
                      output_header_comment(cfg));

    std::cout << "trained " << variant_name(cfg.variant) << " for " << history.epochs.size()
              << " epoch(s), stop=" << history.stop_reason
              << ", best_val=" << history.best_val_loss << "\n"
              << "test MAE=" << test_metrics.mae << " RMSE=" << test_metrics.rmse
              << " SMAPE=" << test_metrics.smape << "%\n"
              << "checkpoint: " << ckpt_path << "\n";
    return 0;
}

WindowedDataset dataset_for_split(const LoadedCheckpoint& ckpt, const std::string& csv,
                                  const std::string& split) {
    CsvColumnMap columns; // canonical synth/export column names
    TimeSeries series = ingest_csv(csv, columns);
    FeatureTable table = extract_calendar_features(series, ckpt.meta.features);
    const ModelConfig& mc = ckpt.model->config();
    if (split == "all") {
        FeatureTable scaled = apply_scaler(ckpt.meta.scaler, table);
        return make_windows(scaled, mc.window_length, 1, mc.horizon, ckpt.meta.scaler, "all");
    }
    SplitTables splits =
        chronological_split(table, SplitRatios{}, mc.window_length + mc.horizon);
    const FeatureTable* chosen = &splits.test;
    if (split == "train") chosen = &splits.train;
    else if (split == "val") chosen = &splits.val;
    else if (split != "test") throw ConfigError("unknown split '" + split + "'");
    FeatureTable scaled = apply_scaler(ckpt.meta.scaler, *chosen);
    return make_windows(scaled, mc.window_length, 1, mc.horizon, ckpt.meta.scaler, split);
}

int cmd_evaluate(const CheckpointArgs& args) {
    LoadedCheckpoint ckpt = load_checkpoint(args.checkpoint_path);
    WindowedDataset ds = dataset_for_split(ckpt, args.data_path, args.split);
    fs::create_directories(args.out);

    const std::string comment = std::string("hyperenergy ") + kVersion +
                                " config_hash=" + ckpt.meta.config_hash;
    MetricsReport metrics = evaluate(*ckpt.model, ds, ckpt.meta.scaler);
    std::vector<MetricsReport> reports = {metrics};
    write_metrics_csv((fs::path(args.out) / "metrics.csv").string(), reports, comment);

    auto rows = predict_rows(*ckpt.model, ds, ckpt.meta.scaler);
    write_predictions_csv((fs::path(args.out) / "predictions.csv").string(), rows,
                          variant_name(ckpt.model->variant()), comment);

    std::cout << "split=" << metrics.split << " samples=" << metrics.samples
              << " MAE=" << metrics.mae << " RMSE=" << metrics.rmse
              << " SMAPE=" << metrics.smape << "%\n";
    return 0;
}

int cmd_predict(const CheckpointArgs& args) {
    LoadedCheckpoint ckpt = load_checkpoint(args.checkpoint_path);
    const ModelConfig& mc = ckpt.model->config();

    CsvColumnMap columns;
    TimeSeries series = ingest_csv(args.data_path, columns);
    if (series.size() < mc.window_length) {
        throw DataError("need at least " + std::to_string(mc.window_length) +
                        " hourly rows for one input window, got " +
                        std::to_string(series.size()));
    }
    FeatureTable table = extract_calendar_features(series, ckpt.meta.features);
    FeatureTable scaled = apply_scaler(ckpt.meta.scaler, table);

    // last n rows form the window; forecast the following h hours
    const std::size_t n = mc.window_length;
    const std::size_t k = scaled.cols();
    const std::size_t begin = scaled.rows() - n;
    std::vector<double> values(scaled.values.begin() +
                                   static_cast<std::ptrdiff_t>(begin * k),
                               scaled.values.end());
    Tensor window = Tensor::from_values({1, n, k}, std::move(values));
    NoGradGuard guard;
    Tensor pred = ckpt.model->forward(window);

    std::ofstream out(args.out);
    if (!out) throw IoError("cannot write '" + args.out + "'");
    out << "# hyperenergy " << kVersion << " config_hash=" << ckpt.meta.config_hash << "\n";
    out << "timestamp,predicted_kwh\n";
    out.precision(10);
    const std::size_t kwh_col = *scaled.column_of(FeatureKind::consumption);
    const HourStamp start = series.timestamps.back() + 1;
    for (std::size_t j = 0; j < mc.horizon; ++j) {
        const double kwh = ckpt.meta.scaler.invert_value(pred.values()[j], kwh_col);
        out << format_timestamp(start + static_cast<HourStamp>(j)) << "," << kwh << "\n";
    }
    std::cout << "wrote " << mc.horizon << " forecast rows to " << args.out << "\n";
    return 0;
}

int cmd_gridsearch(const ConfigArgs& args) {
    RunConfig cfg = load_config(args);
    fs::create_directories(cfg.output_dir);

    if (args.dry_run) {
        const auto combos = enumerate_grid(cfg.grid);
        std::ofstream out((fs::path(cfg.output_dir) / "grid_enumeration.csv").string());
        out << "# " << output_header_comment(cfg) << "\n";
        out << "combo,hidden_units,optimizer,loss,degree,gamma,activation\n";
        for (const GridCombo& c : combos) {
            out << c.index << "," << c.hidden_units << "," << optimizer_name(c.optimizer)
                << "," << loss_name(c.loss) << "," << c.degree << "," << c.gamma << ","
                << activation_name(c.activation) << "\n";
        }
        std::cout << "grid combinations: " << combos.size() << "\n";
        return 0;
    }

    DatasetBundle data = load_datasets(cfg);
    const std::string journal = (fs::path(cfg.output_dir) / "grid_progress.csv").string();
    GridSearchReport report = grid_search(data, cfg.model, cfg.variant, cfg.training,
                                          cfg.grid, cfg.jobs, journal,
                                          output_header_comment(cfg));
    write_grid_results_csv((fs::path(cfg.output_dir) / "grid_results.csv").string(), report,
                           output_header_comment(cfg));

    const GridRunResult& best = report.results[report.ranking.front()];
    std::cout << "ran " << report.results.size() << " combinations; best combo #"
              << best.combo.index << " val_smape=" << best.val_smape << "%\n";
    return 0;
}

int cmd_ablate(const ConfigArgs& args) {
    RunConfig cfg = load_config(args);
    fs::create_directories(cfg.output_dir);
    DatasetBundle data = load_datasets(cfg);

    std::vector<ModelVariant> variants = cfg.ablation_variants;
    if (variants.empty()) {
        variants = {ModelVariant::hyperenergy_full, ModelVariant::hyperenergy_no_kernel,
                    ModelVariant::plain_lstm};
    }
    std::vector<std::uint64_t> seeds = cfg.ablation_seeds;
    if (seeds.empty()) seeds = {1, 2, 3, 4, 5};

    AblationReport report =
        ablation_run(data, cfg.model, cfg.training, variants, seeds, cfg.jobs);
    write_ablation_csv((fs::path(cfg.output_dir) / "ablation_runs.csv").string(),
                       (fs::path(cfg.output_dir) / "ablation_summary.csv").string(), report,
                       output_header_comment(cfg));

    std::cout << "variant,median_mae,median_rmse,median_smape,ok,failed\n";
    for (const AblationSummaryRow& row : report.summary) {
        std::cout << variant_name(row.variant) << "," << row.median_mae << ","
                  << row.median_rmse << "," << row.median_smape << "," << row.runs_ok << ","
                  << row.runs_failed << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyperenergy: kernelized-hypernetwork LSTM forecasting toolkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic consumption CSV");
    synth->add_option("--profile", synth_args.profile,
                      "residence|detached|ev_home|townhouse|office");
    synth->add_option("--days", synth_args.days, "Number of days to generate");
    synth->add_option("--seed", synth_args.seed, "Generator seed");
    synth->add_option("--noise", synth_args.noise, "Noise scale (0 disables)");
    synth->add_option("--out", synth_args.out, "Output CSV path");

    ConfigArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train a model from a run config");
    train_cmd->add_option("--config", train_args.config_path, "Run config JSON")->required();
    train_cmd->add_option("--data", train_args.data_override, "Override data.csv");
    train_cmd->add_option("--out", train_args.out_override, "Override output_dir");
    train_cmd->add_flag("--resume", train_args.resume, "Continue from <out>/session.json");

    CheckpointArgs eval_args;
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint on a CSV");
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint_path, "Checkpoint JSON")
        ->required();
    eval_cmd->add_option("--data", eval_args.data_path, "Input CSV")->required();
    eval_cmd->add_option("--out", eval_args.out, "Output directory");
    eval_cmd->add_option("--split", eval_args.split, "train|val|test|all (default test)");

    CheckpointArgs predict_args;
    predict_args.out = "forecast.csv";
    auto* predict_cmd =
        app.add_subcommand("predict", "Forecast the next horizon from the latest window");
    predict_cmd->add_option("--checkpoint", predict_args.checkpoint_path, "Checkpoint JSON")
        ->required();
    predict_cmd->add_option("--data", predict_args.data_path, "Input CSV")->required();
    predict_cmd->add_option("--out", predict_args.out, "Output CSV path");

    ConfigArgs grid_args;
    auto* grid_cmd = app.add_subcommand("gridsearch", "Sweep the hyperparameter grid");
    grid_cmd->add_option("--config", grid_args.config_path, "Run config JSON")->required();
    grid_cmd->add_option("--data", grid_args.data_override, "Override data.csv");
    grid_cmd->add_option("--out", grid_args.out_override, "Override output_dir");
    grid_cmd->add_option("--jobs", grid_args.jobs_override, "Concurrent trials");
    grid_cmd->add_flag("--dry-run", grid_args.dry_run, "Enumerate combinations only");

    ConfigArgs ablate_args;
    auto* ablate_cmd = app.add_subcommand("ablate", "Run the variant comparison study");
    ablate_cmd->add_option("--config", ablate_args.config_path, "Run config JSON")->required();
    ablate_cmd->add_option("--data", ablate_args.data_override, "Override data.csv");
    ablate_cmd->add_option("--out", ablate_args.out_override, "Override output_dir");
    ablate_cmd->add_option("--jobs", ablate_args.jobs_override, "Concurrent trials");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_args);
        if (train_cmd->parsed()) return cmd_train(train_args);
        if (eval_cmd->parsed()) return cmd_evaluate(eval_args);
        if (predict_cmd->parsed()) return cmd_predict(predict_args);
        if (grid_cmd->parsed()) return cmd_gridsearch(grid_args);
        if (ablate_cmd->parsed()) return cmd_ablate(ablate_args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
    return kExitOther;
}
