#include "hyperenergy/data.hpp"

#include "hyperenergy/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace hyperenergy {

// ---- calendar ----------------------------------------------------------------

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

namespace {

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yy + (m <= 2));
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

} // namespace

CivilTime civil_from_hours(HourStamp hours) {
    const std::int64_t days = floor_div(hours, 24);
    CivilTime ct;
    civil_from_days(days, ct.year, ct.month, ct.day);
    ct.hour = static_cast<unsigned>(floor_mod(hours, 24));
    return ct;
}

HourStamp hours_from_civil(const CivilTime& ct) {
    return days_from_civil(ct.year, ct.month, ct.day) * 24 + ct.hour;
}

std::string format_timestamp(HourStamp hours) {
    const CivilTime ct = civil_from_hours(hours);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02u:00:00", ct.year, ct.month,
                  ct.day, ct.hour);
    return buf;
}

namespace {

bool parse_int_field(const std::string& s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = 0; i < len; ++i) {
        const char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

} // namespace

HourStamp parse_timestamp(const std::string& text, const std::string& format_tag) {
    if (format_tag != "iso8601") {
        std::tm tm = {};
        std::istringstream is(text);
        is >> std::get_time(&tm, format_tag.c_str());
        if (is.fail()) {
            throw DataError("cannot parse timestamp '" + text + "' with format '" +
                            format_tag + "'");
        }
        if (tm.tm_min != 0 || tm.tm_sec != 0) {
            throw DataError("timestamp '" + text + "' is not on an hour boundary");
        }
        CivilTime ct{tm.tm_year + 1900, static_cast<unsigned>(tm.tm_mon + 1),
                     static_cast<unsigned>(tm.tm_mday), static_cast<unsigned>(tm.tm_hour)};
        return hours_from_civil(ct);
    }

    // YYYY-MM-DD[T ]HH[:MM[:SS]]
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    const bool shape_ok =
        text.size() >= 13 && parse_int_field(text, 0, 4, y) && text[4] == '-' &&
        parse_int_field(text, 5, 2, mo) && text[7] == '-' && parse_int_field(text, 8, 2, d) &&
        (text[10] == ' ' || text[10] == 'T') && parse_int_field(text, 11, 2, h);
    if (!shape_ok) throw DataError("cannot parse timestamp '" + text + "'");
    if (text.size() > 13) {
        if (text.size() < 16 || text[13] != ':' || !parse_int_field(text, 14, 2, mi)) {
            throw DataError("cannot parse timestamp '" + text + "'");
        }
        if (text.size() > 16) {
            if (text.size() != 19 || text[16] != ':' || !parse_int_field(text, 17, 2, se)) {
                throw DataError("cannot parse timestamp '" + text + "'");
            }
        }
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23) {
        throw DataError("timestamp '" + text + "' has out-of-range fields");
    }
    if (mi != 0 || se != 0) {
        throw DataError("timestamp '" + text + "' is not on an hour boundary");
    }
    return hours_from_civil(CivilTime{y, static_cast<unsigned>(mo),
                                      static_cast<unsigned>(d), static_cast<unsigned>(h)});
}

int day_of_week_monday0(HourStamp hours) {
    const std::int64_t days = floor_div(hours, 24);
    return static_cast<int>(floor_mod(days + 3, 7)); // 1970-01-01 was a Thursday
}

int day_of_year(HourStamp hours) {
    const CivilTime ct = civil_from_hours(hours);
    return static_cast<int>(days_from_civil(ct.year, ct.month, ct.day) -
                            days_from_civil(ct.year, 1, 1)) +
           1;
}

// ---- CSV ingestion --------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

} // namespace

TimeSeries ingest_csv(const std::string& path, const CsvColumnMap& columns,
                      GapPolicy gap_policy, std::size_t max_fill_hours) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV file '" + path + "'");

    std::string line;
    std::size_t line_no = 0;
    // skip leading comment lines ('#'), as written by the CSV emitters
    do {
        if (!std::getline(in, line)) throw DataError("CSV file '" + path + "' is empty");
        ++line_no;
    } while (!line.empty() && line[0] == '#');
    const auto header = split_csv_line(line);

    auto find_column = [&](const std::string& name) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) return static_cast<std::ptrdiff_t>(i);
        }
        return -1;
    };
    const std::ptrdiff_t ts_col = find_column(columns.timestamp);
    if (ts_col < 0) throw DataError("missing timestamp column '" + columns.timestamp + "'");
    const std::ptrdiff_t kwh_col = find_column(columns.consumption);
    if (kwh_col < 0) throw DataError("missing consumption column '" + columns.consumption + "'");
    std::ptrdiff_t temp_col = -1;
    if (!columns.temperature.empty()) temp_col = find_column(columns.temperature);

    struct Row {
        HourStamp ts;
        double kwh;
        double temp;
    };
    std::vector<Row> raw;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < header.size()) {
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        Row row{};
        row.ts = parse_timestamp(trim(fields[static_cast<std::size_t>(ts_col)]),
                                 columns.timestamp_format);
        try {
            row.kwh = std::stod(fields[static_cast<std::size_t>(kwh_col)]);
        } catch (const std::exception&) {
            throw DataError("line " + std::to_string(line_no) + ": non-numeric consumption '" +
                            trim(fields[static_cast<std::size_t>(kwh_col)]) + "'");
        }
        if (!(row.kwh >= 0.0)) {
            throw DataError("line " + std::to_string(line_no) + ": negative consumption " +
                            std::to_string(row.kwh));
        }
        if (temp_col >= 0) {
            try {
                row.temp = std::stod(fields[static_cast<std::size_t>(temp_col)]);
            } catch (const std::exception&) {
                throw DataError("line " + std::to_string(line_no) + ": non-numeric temperature");
            }
        }
        raw.push_back(row);
    }
    if (raw.empty()) throw DataError("CSV file '" + path + "' has no data rows");

    std::stable_sort(raw.begin(), raw.end(),
                     [](const Row& a, const Row& b) { return a.ts < b.ts; });

    TimeSeries series;
    const bool has_temp = temp_col >= 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (i > 0) {
            const HourStamp prev = series.timestamps.back();
            if (raw[i].ts == prev) {
                throw DataError("duplicate timestamp " + format_timestamp(raw[i].ts));
            }
            const HourStamp gap = raw[i].ts - prev;
            if (gap != 1) {
                if (gap < 1) {
                    throw DataError("non-hourly spacing before " + format_timestamp(raw[i].ts));
                }
                const std::size_t missing = static_cast<std::size_t>(gap - 1);
                if (gap_policy == GapPolicy::reject || missing > max_fill_hours) {
                    throw DataError("gap of " + std::to_string(missing) + " hour(s) before " +
                                    format_timestamp(raw[i].ts));
                }
                for (std::size_t f = 1; f <= missing; ++f) {
                    series.timestamps.push_back(prev + static_cast<HourStamp>(f));
                    series.consumption.push_back(series.consumption.back());
                    if (has_temp) series.temperature.push_back(series.temperature.back());
                }
            }
        }
        series.timestamps.push_back(raw[i].ts);
        series.consumption.push_back(raw[i].kwh);
        if (has_temp) series.temperature.push_back(raw[i].temp);
    }
    return series;
}

void write_series_csv(const std::string& path, const TimeSeries& series,
                      const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write CSV file '" + path + "'");
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "timestamp,consumption_kwh";
    if (series.has_temperature()) out << ",temperature_c";
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << format_timestamp(series.timestamps[i]);
        std::snprintf(buf, sizeof(buf), ",%.6f", series.consumption[i]);
        out << buf;
        if (series.has_temperature()) {
            std::snprintf(buf, sizeof(buf), ",%.3f", series.temperature[i]);
            out << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError("failed writing CSV file '" + path + "'");
}

// ---- features -------------------------------------------------------------------

std::string feature_name(FeatureKind f) {
    switch (f) {
        case FeatureKind::consumption: return "consumption";
        case FeatureKind::temperature: return "temperature";
        case FeatureKind::hour_of_day: return "hour_of_day";
        case FeatureKind::day_of_week: return "day_of_week";
        case FeatureKind::day_of_year: return "day_of_year";
        case FeatureKind::day_of_month: return "day_of_month";
    }
    return "consumption";
}

FeatureKind feature_from_name(const std::string& name) {
    for (FeatureKind f :
         {FeatureKind::consumption, FeatureKind::temperature, FeatureKind::hour_of_day,
          FeatureKind::day_of_week, FeatureKind::day_of_year, FeatureKind::day_of_month}) {
        if (feature_name(f) == name) return f;
    }
    throw ConfigError("unknown feature '" + name + "'");
}

const std::vector<FeatureKind>& default_feature_set() {
    static const std::vector<FeatureKind> set = {
        FeatureKind::consumption, FeatureKind::temperature, FeatureKind::hour_of_day,
        FeatureKind::day_of_week, FeatureKind::day_of_year};
    return set;
}

std::optional<std::size_t> FeatureTable::column_of(FeatureKind f) const {
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i] == f) return i;
    }
    return std::nullopt;
}

FeatureTable extract_calendar_features(const TimeSeries& series,
                                       const std::vector<FeatureKind>& feature_set) {
    if (series.size() == 0) throw DataError("cannot extract features from an empty series");
    if (feature_set.empty()) throw ConfigError("feature set must not be empty");
    for (FeatureKind f : feature_set) {
        if (f == FeatureKind::temperature && !series.has_temperature()) {
            throw DataError("feature set requests temperature but the series has none");
        }
    }
    FeatureTable table;
    table.timestamps = series.timestamps;
    table.features = feature_set;
    table.values.resize(series.size() * feature_set.size());
    for (std::size_t r = 0; r < series.size(); ++r) {
        const HourStamp ts = series.timestamps[r];
        const CivilTime ct = civil_from_hours(ts);
        for (std::size_t c = 0; c < feature_set.size(); ++c) {
            double v = 0.0;
            switch (feature_set[c]) {
                case FeatureKind::consumption: v = series.consumption[r]; break;
                case FeatureKind::temperature: v = series.temperature[r]; break;
                case FeatureKind::hour_of_day: v = static_cast<double>(ct.hour); break;
                case FeatureKind::day_of_week:
                    v = static_cast<double>(day_of_week_monday0(ts));
                    break;
                case FeatureKind::day_of_year: v = static_cast<double>(day_of_year(ts)); break;
                case FeatureKind::day_of_month: v = static_cast<double>(ct.day); break;
            }
            table.values[r * feature_set.size() + c] = v;
        }
    }
    return table;
}

// ---- split ----------------------------------------------------------------------

namespace {

FeatureTable table_slice(const FeatureTable& t, std::size_t begin, std::size_t end) {
    FeatureTable out;
    out.features = t.features;
    out.timestamps.assign(t.timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
                          t.timestamps.begin() + static_cast<std::ptrdiff_t>(end));
    out.values.assign(t.values.begin() + static_cast<std::ptrdiff_t>(begin * t.cols()),
                      t.values.begin() + static_cast<std::ptrdiff_t>(end * t.cols()));
    return out;
}

} // namespace

SplitTables chronological_split(const FeatureTable& table, SplitRatios ratios,
                                std::size_t min_rows_per_split) {
    const double total = ratios.train + ratios.val + ratios.test;
    if (std::fabs(total - 1.0) > 1e-9) {
        throw ConfigError("split ratios must sum to 1, got " + std::to_string(total));
    }
    const std::size_t L = table.rows();
    const std::size_t b1 = static_cast<std::size_t>(std::floor(ratios.train * static_cast<double>(L)));
    const std::size_t b2 = static_cast<std::size_t>(
        std::floor((ratios.train + ratios.val) * static_cast<double>(L)));
    if (b1 < min_rows_per_split || (b2 - b1) < min_rows_per_split ||
        (L - b2) < min_rows_per_split) {
        throw DataError("insufficient length: " + std::to_string(L) +
                        " rows cannot give every split at least " +
                        std::to_string(min_rows_per_split) + " rows");
    }
    SplitTables out;
    out.train = table_slice(table, 0, b1);
    out.val = table_slice(table, b1, b2);
    out.test = table_slice(table, b2, L);
    return out;
}

// ---- scaler ---------------------------------------------------------------------

double MinMaxScaler::transform_value(double x, std::size_t col) const {
    const double lo = mins[col], hi = maxs[col];
    if (hi == lo) return 0.0;
    return (x - lo) / (hi - lo);
}

double MinMaxScaler::invert_value(double x, std::size_t col) const {
    const double lo = mins[col], hi = maxs[col];
    if (hi == lo) return lo;
    return x * (hi - lo) + lo;
}

MinMaxScaler fit_scaler(const FeatureTable& train) {
    if (train.rows() == 0) throw DataError("cannot fit scaler on an empty training split");
    MinMaxScaler scaler;
    const std::size_t k = train.cols();
    scaler.mins.assign(k, 0.0);
    scaler.maxs.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        double lo = train.at(0, c), hi = train.at(0, c);
        for (std::size_t r = 1; r < train.rows(); ++r) {
            lo = std::min(lo, train.at(r, c));
            hi = std::max(hi, train.at(r, c));
        }
        scaler.mins[c] = lo;
        scaler.maxs[c] = hi;
    }
    return scaler;
}

FeatureTable apply_scaler(const MinMaxScaler& scaler, const FeatureTable& table) {
    if (scaler.cols() != table.cols()) {
        throw ShapeError("scaler was fitted on " + std::to_string(scaler.cols()) +
                         " features, table has " + std::to_string(table.cols()));
    }
    FeatureTable out = table;
    const std::size_t k = table.cols();
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            out.values[r * k + c] = scaler.transform_value(table.at(r, c), c);
        }
    }
    return out;
}

// ---- windows --------------------------------------------------------------------

WindowedDataset make_windows(const FeatureTable& scaled, std::size_t window_length,
                             std::size_t stride, std::size_t horizon,
                             const MinMaxScaler& scaler, const std::string& split_tag) {
    if (window_length == 0 || horizon == 0 || stride == 0) {
        throw ConfigError("window length, horizon and stride must be >= 1");
    }
    const std::size_t L = scaled.rows();
    if (L < window_length + horizon) {
        throw DataError("table of " + std::to_string(L) + " rows is too short for window " +
                        std::to_string(window_length) + " + horizon " + std::to_string(horizon));
    }
    const auto kwh_col = scaled.column_of(FeatureKind::consumption);
    if (!kwh_col) throw ConfigError("feature set must include consumption to build targets");

    const std::size_t k = scaled.cols();
    const std::size_t M = (L - window_length - horizon) / stride + 1;
    std::vector<double> inputs;
    inputs.reserve(M * window_length * k);
    std::vector<double> targets;
    targets.reserve(M * horizon);
    std::vector<HourStamp> target_start;
    target_start.reserve(M);
    for (std::size_t i = 0; i < M; ++i) {
        const std::size_t begin = i * stride;
        const std::size_t t0 = begin + window_length;
        inputs.insert(inputs.end(),
                      scaled.values.begin() + static_cast<std::ptrdiff_t>(begin * k),
                      scaled.values.begin() + static_cast<std::ptrdiff_t>(t0 * k));
        for (std::size_t j = 0; j < horizon; ++j) {
            targets.push_back(scaled.at(t0 + j, *kwh_col));
        }
        target_start.push_back(scaled.timestamps[t0]);
    }

    WindowedDataset ds;
    ds.inputs = Tensor::from_values({M, window_length, k}, std::move(inputs));
    ds.targets = Tensor::from_values({M, horizon}, std::move(targets));
    ds.target_start = std::move(target_start);
    ds.split_tag = split_tag;
    ds.window_length = window_length;
    ds.horizon = horizon;
    ds.stride = stride;
    ds.consumption_column = *kwh_col;
    ds.scaler = scaler;
    return ds;
}

DatasetBundle build_datasets(const TimeSeries& series, const PipelineConfig& config) {
    FeatureTable table = extract_calendar_features(series, config.features);
    SplitTables splits = chronological_split(table, config.split,
                                             config.window_length + config.horizon);
    MinMaxScaler scaler = fit_scaler(splits.train);

    DatasetBundle bundle;
    bundle.scaler = scaler;
    bundle.features = config.features;
    bundle.train = make_windows(apply_scaler(scaler, splits.train), config.window_length,
                                config.stride, config.horizon, scaler, "train");
    bundle.val = make_windows(apply_scaler(scaler, splits.val), config.window_length,
                              config.stride, config.horizon, scaler, "val");
    bundle.test = make_windows(apply_scaler(scaler, splits.test), config.window_length,
                               config.stride, config.horizon, scaler, "test");
    return bundle;
}

// ---- dataset cache -----------------------------------------------------------------

namespace {

constexpr std::uint64_t kCacheMagic = 0x4859454e43414348ull; // "HYENCACH"
constexpr std::uint32_t kCacheVersion = 1;

void put_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_doubles(std::ofstream& out, std::span<const double> v) {
    put_u64(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

bool get_u64(std::ifstream& in, std::uint64_t& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return static_cast<bool>(in);
}

bool get_doubles(std::ifstream& in, std::vector<double>& v) {
    std::uint64_t n = 0;
    if (!get_u64(in, n)) return false;
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    return static_cast<bool>(in);
}

void put_dataset(std::ofstream& out, const WindowedDataset& ds) {
    put_u64(out, ds.size());
    put_u64(out, ds.window_length);
    put_u64(out, ds.horizon);
    put_u64(out, ds.stride);
    put_u64(out, ds.consumption_column);
    put_u64(out, ds.inputs.dim(2));
    put_doubles(out, ds.inputs.values());
    put_doubles(out, ds.targets.values());
    put_u64(out, ds.target_start.size());
    out.write(reinterpret_cast<const char*>(ds.target_start.data()),
              static_cast<std::streamsize>(ds.target_start.size() * sizeof(HourStamp)));
}

bool get_dataset(std::ifstream& in, const MinMaxScaler& scaler, const std::string& tag,
                 WindowedDataset& ds) {
    std::uint64_t M = 0, n = 0, h = 0, stride = 0, kwh = 0, k = 0;
    if (!get_u64(in, M) || !get_u64(in, n) || !get_u64(in, h) || !get_u64(in, stride) ||
        !get_u64(in, kwh) || !get_u64(in, k)) {
        return false;
    }
    std::vector<double> inputs, targets;
    if (!get_doubles(in, inputs) || !get_doubles(in, targets)) return false;
    std::uint64_t ts_count = 0;
    if (!get_u64(in, ts_count)) return false;
    std::vector<HourStamp> ts(ts_count);
    in.read(reinterpret_cast<char*>(ts.data()),
            static_cast<std::streamsize>(ts_count * sizeof(HourStamp)));
    if (!in) return false;
    ds.inputs = Tensor::from_values({M, n, k}, std::move(inputs));
    ds.targets = Tensor::from_values({M, h}, std::move(targets));
    ds.target_start = std::move(ts);
    ds.split_tag = tag;
    ds.window_length = n;
    ds.horizon = h;
    ds.stride = stride;
    ds.consumption_column = kwh;
    ds.scaler = scaler;
    return true;
}

} // namespace

void save_dataset_cache(const std::string& path, const DatasetBundle& bundle,
                        std::uint64_t config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write dataset cache '" + path + "'");
    put_u64(out, kCacheMagic);
    put_u64(out, kCacheVersion);
    put_u64(out, config_hash);
    put_u64(out, bundle.features.size());
    for (FeatureKind f : bundle.features) put_u64(out, static_cast<std::uint64_t>(f));
    put_doubles(out, bundle.scaler.mins);
    put_doubles(out, bundle.scaler.maxs);
    put_dataset(out, bundle.train);
    put_dataset(out, bundle.val);
    put_dataset(out, bundle.test);
    if (!out) throw IoError("failed writing dataset cache '" + path + "'");
}

std::optional<DatasetBundle> load_dataset_cache(const std::string& path,
                                                std::uint64_t config_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::uint64_t magic = 0, version = 0, hash = 0;
    if (!get_u64(in, magic) || magic != kCacheMagic) return std::nullopt;
    if (!get_u64(in, version) || version != kCacheVersion) return std::nullopt;
    if (!get_u64(in, hash) || hash != config_hash) return std::nullopt;
    std::uint64_t nfeat = 0;
    if (!get_u64(in, nfeat)) return std::nullopt;
    DatasetBundle bundle;
    for (std::uint64_t i = 0; i < nfeat; ++i) {
        std::uint64_t f = 0;
        if (!get_u64(in, f)) return std::nullopt;
        bundle.features.push_back(static_cast<FeatureKind>(f));
    }
    if (!get_doubles(in, bundle.scaler.mins) || !get_doubles(in, bundle.scaler.maxs)) {
        return std::nullopt;
    }
    if (!get_dataset(in, bundle.scaler, "train", bundle.train) ||
        !get_dataset(in, bundle.scaler, "val", bundle.val) ||
        !get_dataset(in, bundle.scaler, "test", bundle.test)) {
        return std::nullopt;
    }
    return bundle;
}

} // namespace hyperenergy
