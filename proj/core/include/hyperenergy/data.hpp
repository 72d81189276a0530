#pragma once

#include "hyperenergy/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hyperenergy {

/// Hours since 1970-01-01 00:00, proleptic Gregorian calendar, no time zone.
using HourStamp = std::int64_t;

struct CivilTime {
    int year = 1970;
    unsigned month = 1; // 1..12
    unsigned day = 1;   // 1..31
    unsigned hour = 0;  // 0..23
};

std::int64_t days_from_civil(int year, unsigned month, unsigned day);
CivilTime civil_from_hours(HourStamp hours);
HourStamp hours_from_civil(const CivilTime& ct);

/// "YYYY-MM-DD HH:00:00"
std::string format_timestamp(HourStamp hours);
/// Accepts "YYYY-MM-DD HH:MM[:SS]" and the ISO-8601 'T' separator when
/// format_tag is "iso8601"; otherwise format_tag is a std::get_time format.
/// Minutes and seconds must be zero (hourly data).
HourStamp parse_timestamp(const std::string& text, const std::string& format_tag = "iso8601");

int day_of_week_monday0(HourStamp hours); // 0 = Monday .. 6 = Sunday
int day_of_year(HourStamp hours);         // 1..366

/// Hourly consumption series with optional temperature.
struct TimeSeries {
    std::vector<HourStamp> timestamps; // strictly increasing, hourly spacing
    std::vector<double> consumption;   // kWh, >= 0
    std::vector<double> temperature;   // degrees C; empty when absent

    std::size_t size() const { return timestamps.size(); }
    bool has_temperature() const { return !temperature.empty(); }
};

enum class GapPolicy { reject, forward_fill };

struct CsvColumnMap {
    std::string timestamp = "timestamp";
    std::string consumption = "consumption_kwh";
    std::string temperature = "temperature_c"; // empty string disables the column
    std::string timestamp_format = "iso8601";
};

/// Reads, validates and sorts an hourly CSV. Duplicate timestamps and
/// negative consumption are rejected; gaps follow the policy (forward_fill
/// copies the previous row for up to max_fill_hours missing hours).
TimeSeries ingest_csv(const std::string& path, const CsvColumnMap& columns,
                      GapPolicy gap_policy = GapPolicy::reject,
                      std::size_t max_fill_hours = 3);

/// Writes the canonical CSV format (header: timestamp,consumption_kwh[,temperature_c]).
void write_series_csv(const std::string& path, const TimeSeries& series,
                      const std::string& comment = "");

enum class FeatureKind {
    consumption,
    temperature,
    hour_of_day,
    day_of_week,
    day_of_year,
    day_of_month,
};

std::string feature_name(FeatureKind f);
FeatureKind feature_from_name(const std::string& name);
const std::vector<FeatureKind>& default_feature_set(); // k = 5, day_of_month excluded

/// Row-per-hour matrix of the selected features, in feature-set order.
struct FeatureTable {
    std::vector<HourStamp> timestamps;
    std::vector<FeatureKind> features;
    std::vector<double> values; // row-major [rows() x cols()]

    std::size_t rows() const { return timestamps.size(); }
    std::size_t cols() const { return features.size(); }
    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
    std::optional<std::size_t> column_of(FeatureKind f) const;
};

FeatureTable extract_calendar_features(const TimeSeries& series,
                                       const std::vector<FeatureKind>& feature_set);

struct SplitRatios {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
};

struct SplitTables {
    FeatureTable train;
    FeatureTable val;
    FeatureTable test;
};

/// Contiguous, ordered, non-shuffled partition at floor(train*L) and
/// floor((train+val)*L). Each split must keep at least min_rows_per_split rows.
SplitTables chronological_split(const FeatureTable& table, SplitRatios ratios,
                                std::size_t min_rows_per_split = 1);

/// Per-feature min/max from the training split only. Constant features map
/// to 0 under transform.
struct MinMaxScaler {
    std::vector<double> mins;
    std::vector<double> maxs;

    std::size_t cols() const { return mins.size(); }
    double transform_value(double x, std::size_t col) const;
    double invert_value(double x, std::size_t col) const;
};

MinMaxScaler fit_scaler(const FeatureTable& train);
FeatureTable apply_scaler(const MinMaxScaler& scaler, const FeatureTable& table);

/// Normalized (input window, target horizon) pairs plus the metadata needed
/// to map predictions back to physical units and timestamps.
struct WindowedDataset {
    Tensor inputs;  // [M x n x k]
    Tensor targets; // [M x h], scaled consumption
    std::vector<HourStamp> target_start; // first target hour per sample
    std::string split_tag;
    std::size_t window_length = 24;
    std::size_t horizon = 24;
    std::size_t stride = 1;
    std::size_t consumption_column = 0;
    MinMaxScaler scaler;

    std::size_t size() const { return inputs.defined() ? inputs.dim(0) : 0; }
};

/// M = floor((L - n - h) / stride) + 1 samples; the target window follows the
/// input window immediately, with no overlap.
WindowedDataset make_windows(const FeatureTable& scaled, std::size_t window_length,
                             std::size_t stride, std::size_t horizon,
                             const MinMaxScaler& scaler, const std::string& split_tag);

struct PipelineConfig {
    std::vector<FeatureKind> features = default_feature_set();
    std::size_t window_length = 24;
    std::size_t horizon = 24;
    std::size_t stride = 1;
    SplitRatios split;
};

struct DatasetBundle {
    WindowedDataset train;
    WindowedDataset val;
    WindowedDataset test;
    MinMaxScaler scaler;
    std::vector<FeatureKind> features;
};

/// split -> fit scaler on train -> scale all -> window each split
/// independently (windows never cross split boundaries).
DatasetBundle build_datasets(const TimeSeries& series, const PipelineConfig& config);

/// Binary dataset cache keyed by config hash; load returns nothing when the
/// file is absent or was produced under a different hash.
void save_dataset_cache(const std::string& path, const DatasetBundle& bundle,
                        std::uint64_t config_hash);
std::optional<DatasetBundle> load_dataset_cache(const std::string& path,
                                                std::uint64_t config_hash);

} // namespace hyperenergy
