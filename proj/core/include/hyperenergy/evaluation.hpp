#pragma once

#include "hyperenergy/data.hpp"
#include "hyperenergy/model.hpp"
#include "hyperenergy/training.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hyperenergy {

struct MetricsReport {
    double mae = 0.0;   // kWh
    double rmse = 0.0;  // kWh
    double smape = 0.0; // percent, in [0, 200]
    std::size_t samples = 0;
    std::string split;
    std::string variant;
};

double metric_mae(std::span<const double> y, std::span<const double> y_hat);
double metric_rmse(std::span<const double> y, std::span<const double> y_hat);
/// 100 * mean(2|y - y_hat| / (|y| + |y_hat|)), a term being 0 when its
/// denominator is 0.
double metric_smape(std::span<const double> y, std::span<const double> y_hat);

/// Predictions and targets are inverted through the training scaler before
/// metric computation; all horizon positions pool into one flat comparison.
MetricsReport evaluate(ForecastModel& model, const WindowedDataset& test,
                       const MinMaxScaler& scaler);

/// Plot-ready long format: one row per (window, horizon step).
struct PredictionRow {
    std::size_t window = 0;
    std::size_t step = 0;
    HourStamp timestamp = 0;
    double actual = 0.0;    // kWh
    double predicted = 0.0; // kWh
};

std::vector<PredictionRow> predict_rows(ForecastModel& model, const WindowedDataset& ds,
                                        const MinMaxScaler& scaler);

// ---- ablation studies ------------------------------------------------------------

struct AblationRunRecord {
    ModelVariant variant = ModelVariant::hyperenergy_full;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    MetricsReport test_metrics;
    std::size_t epochs_run = 0;
    std::string stop_reason;
};

struct AblationSummaryRow {
    ModelVariant variant = ModelVariant::hyperenergy_full;
    std::size_t runs_ok = 0;
    std::size_t runs_failed = 0;
    double median_mae = 0.0;
    double median_rmse = 0.0;
    double median_smape = 0.0;
    double min_smape = 0.0;
    double max_smape = 0.0;
};

struct AblationReport {
    std::vector<AblationRunRecord> runs;      // variant-major, seed order
    std::vector<AblationSummaryRow> summary;  // variant order as requested
};

double median(std::vector<double> values);

/// Trains each (variant, seed) pair on identical data and config apart from
/// the variant delta, evaluates on the test split, and aggregates medians.
/// Failed runs are recorded, excluded from medians and flagged. Trials run
/// on up to `jobs` concurrent workers; results are deterministic per seed
/// regardless of the worker count.
AblationReport ablation_run(const DatasetBundle& data, const ModelConfig& model_config,
                            const TrainConfig& train_config,
                            const std::vector<ModelVariant>& variants,
                            const std::vector<std::uint64_t>& seeds, std::size_t jobs = 1);

void write_metrics_csv(const std::string& path, std::span<const MetricsReport> reports,
                       const std::string& header_comment);
void write_predictions_csv(const std::string& path, std::span<const PredictionRow> rows,
                           const std::string& variant, const std::string& header_comment);
void write_ablation_csv(const std::string& runs_path, const std::string& summary_path,
                        const AblationReport& report, const std::string& header_comment);

} // namespace hyperenergy
