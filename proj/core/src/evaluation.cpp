#include "hyperenergy/evaluation.hpp"

#include "hyperenergy/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

namespace hyperenergy {

namespace {

void check_metric_inputs(std::span<const double> y, std::span<const double> y_hat,
                         const char* name) {
    if (y.empty()) throw DataError(std::string(name) + ": empty input");
    if (y.size() != y_hat.size()) {
        throw DataError(std::string(name) + ": length mismatch " + std::to_string(y.size()) +
                        " vs " + std::to_string(y_hat.size()));
    }
}

} // namespace

double metric_mae(std::span<const double> y, std::span<const double> y_hat) {
    check_metric_inputs(y, y_hat, "mae");
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += std::fabs(y[i] - y_hat[i]);
    return acc / static_cast<double>(y.size());
}

double metric_rmse(std::span<const double> y, std::span<const double> y_hat) {
    check_metric_inputs(y, y_hat, "rmse");
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - y_hat[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(y.size()));
}

double metric_smape(std::span<const double> y, std::span<const double> y_hat) {
    check_metric_inputs(y, y_hat, "smape");
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double denom = std::fabs(y[i]) + std::fabs(y_hat[i]);
        if (denom > 0.0) acc += 2.0 * std::fabs(y[i] - y_hat[i]) / denom;
    }
    return 100.0 * acc / static_cast<double>(y.size());
}

MetricsReport evaluate(ForecastModel& model, const WindowedDataset& test,
                       const MinMaxScaler& scaler) {
    if (test.size() == 0) throw DataError("evaluate: empty dataset");
    std::vector<double> pred = predict_all(model, test);
    auto target = test.targets.values();
    std::vector<double> pred_kwh(pred.size()), target_kwh(pred.size());
    const std::size_t col = test.consumption_column;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pred_kwh[i] = scaler.invert_value(pred[i], col);
        target_kwh[i] = scaler.invert_value(target[i], col);
    }
    MetricsReport report;
    report.mae = metric_mae(target_kwh, pred_kwh);
    report.rmse = metric_rmse(target_kwh, pred_kwh);
    report.smape = metric_smape(target_kwh, pred_kwh);
    report.samples = test.size();
    report.split = test.split_tag;
    report.variant = variant_name(model.variant());
    return report;
}

std::vector<PredictionRow> predict_rows(ForecastModel& model, const WindowedDataset& ds,
                                        const MinMaxScaler& scaler) {
    std::vector<double> pred = predict_all(model, ds);
    auto target = ds.targets.values();
    const std::size_t h = ds.horizon;
    const std::size_t col = ds.consumption_column;
    std::vector<PredictionRow> rows;
    rows.reserve(pred.size());
    for (std::size_t w = 0; w < ds.size(); ++w) {
        for (std::size_t s = 0; s < h; ++s) {
            PredictionRow row;
            row.window = w;
            row.step = s;
            row.timestamp = ds.target_start[w] + static_cast<HourStamp>(s);
            row.actual = scaler.invert_value(target[w * h + s], col);
            row.predicted = scaler.invert_value(pred[w * h + s], col);
            rows.push_back(row);
        }
    }
    return rows;
}

// ---- ablation -----------------------------------------------------------------------

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

AblationReport ablation_run(const DatasetBundle& data, const ModelConfig& model_config,
                            const TrainConfig& train_config,
                            const std::vector<ModelVariant>& variants,
                            const std::vector<std::uint64_t>& seeds, std::size_t jobs) {
    if (variants.empty() || seeds.empty()) {
        throw ConfigError("ablation needs at least one variant and one seed");
    }

    struct Task {
        std::size_t index;
        ModelVariant variant;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (ModelVariant v : variants) {
        for (std::uint64_t s : seeds) tasks.push_back({tasks.size(), v, s});
    }

    AblationReport report;
    report.runs.resize(tasks.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            const Task& task = tasks[i];
            AblationRunRecord rec;
            rec.variant = task.variant;
            rec.seed = task.seed;
            try {
                TrainConfig cfg = train_config;
                cfg.seed = task.seed;
                auto model = build_variant(task.variant, model_config, task.seed,
                                           &data.train.inputs);
                TrainHistory hist = train(*model, data.train, data.val, cfg);
                rec.test_metrics = evaluate(*model, data.test, data.scaler);
                rec.epochs_run = hist.epochs.size();
                rec.stop_reason = hist.stop_reason;
                rec.ok = true;
            } catch (const std::exception& e) {
                rec.ok = false;
                rec.error = e.what();
            }
            report.runs[task.index] = std::move(rec);
        }
    };

    const std::size_t worker_count = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
    if (worker_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(worker_count);
        for (std::size_t i = 0; i < worker_count; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    for (ModelVariant v : variants) {
        AblationSummaryRow row;
        row.variant = v;
        std::vector<double> maes, rmses, smapes;
        for (const AblationRunRecord& rec : report.runs) {
            if (rec.variant != v) continue;
            if (!rec.ok) {
                ++row.runs_failed;
                continue;
            }
            ++row.runs_ok;
            maes.push_back(rec.test_metrics.mae);
            rmses.push_back(rec.test_metrics.rmse);
            smapes.push_back(rec.test_metrics.smape);
        }
        if (!smapes.empty()) {
            row.median_mae = median(maes);
            row.median_rmse = median(rmses);
            row.median_smape = median(smapes);
            row.min_smape = *std::min_element(smapes.begin(), smapes.end());
            row.max_smape = *std::max_element(smapes.begin(), smapes.end());
        }
        report.summary.push_back(row);
    }
    return report;
}

// ---- CSV emission ----------------------------------------------------------------------

namespace {

std::ofstream open_csv(const std::string& path, const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write CSV file '" + path + "'");
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    out.precision(10);
    return out;
}

} // namespace

void write_metrics_csv(const std::string& path, std::span<const MetricsReport> reports,
                       const std::string& header_comment) {
    auto out = open_csv(path, header_comment);
    out << "variant,split,samples,mae,rmse,smape\n";
    for (const MetricsReport& r : reports) {
        out << r.variant << "," << r.split << "," << r.samples << "," << r.mae << ","
            << r.rmse << "," << r.smape << "\n";
    }
    if (!out) throw IoError("failed writing CSV file '" + path + "'");
}

void write_predictions_csv(const std::string& path, std::span<const PredictionRow> rows,
                           const std::string& variant, const std::string& header_comment) {
    auto out = open_csv(path, header_comment);
    out << "window,step,timestamp,actual_kwh,predicted_kwh,variant\n";
    for (const PredictionRow& r : rows) {
        out << r.window << "," << r.step << "," << format_timestamp(r.timestamp) << ","
            << r.actual << "," << r.predicted << "," << variant << "\n";
    }
    if (!out) throw IoError("failed writing CSV file '" + path + "'");
}

void write_ablation_csv(const std::string& runs_path, const std::string& summary_path,
                        const AblationReport& report, const std::string& header_comment) {
    {
        auto out = open_csv(runs_path, header_comment);
        out << "variant,seed,status,error,mae,rmse,smape,epochs_run,stop_reason\n";
        for (const AblationRunRecord& r : report.runs) {
            std::string err = r.error;
            std::replace(err.begin(), err.end(), ',', ';');
            std::replace(err.begin(), err.end(), '\n', ' ');
            out << variant_name(r.variant) << "," << r.seed << ","
                << (r.ok ? "ok" : "failed") << "," << err << "," << r.test_metrics.mae
                << "," << r.test_metrics.rmse << "," << r.test_metrics.smape << ","
                << r.epochs_run << "," << r.stop_reason << "\n";
        }
        if (!out) throw IoError("failed writing CSV file '" + runs_path + "'");
    }
    {
        auto out = open_csv(summary_path, header_comment);
        out << "variant,runs_ok,runs_failed,median_mae,median_rmse,median_smape,"
               "min_smape,max_smape\n";
        for (const AblationSummaryRow& r : report.summary) {
            out << variant_name(r.variant) << "," << r.runs_ok << "," << r.runs_failed << ","
                << r.median_mae << "," << r.median_rmse << "," << r.median_smape << ","
                << r.min_smape << "," << r.max_smape << "\n";
        }
        if (!out) throw IoError("failed writing CSV file '" + summary_path + "'");
    }
}

} // namespace hyperenergy
