#include "hyperenergy/data.hpp"
#include "hyperenergy/errors.hpp"
#include "hyperenergy/rng.hpp"
#include "hyperenergy/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace hyperenergy;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

TimeSeries small_series(std::size_t hours, double base = 1.0) {
    TimeSeries s;
    const HourStamp start = hours_from_civil({2021, 3, 1, 0});
    for (std::size_t i = 0; i < hours; ++i) {
        s.timestamps.push_back(start + static_cast<HourStamp>(i));
        s.consumption.push_back(base + 0.5 * std::sin(static_cast<double>(i)));
        s.temperature.push_back(10.0 + 0.1 * static_cast<double>(i % 24));
    }
    return s;
}

} // namespace

TEST_CASE("calendar facts") {
    // 2021-03-01T13:00 is a Monday, day-of-month 1, day-of-year 60
    const HourStamp ts = hours_from_civil({2021, 3, 1, 13});
    CHECK(day_of_week_monday0(ts) == 0);
    CHECK(civil_from_hours(ts).hour == 13);
    CHECK(civil_from_hours(ts).day == 1);
    CHECK(day_of_year(ts) == 60);

    // 2020-12-31 is day 366 of a leap year
    CHECK(day_of_year(hours_from_civil({2020, 12, 31, 0})) == 366);
    // weekday wrap: 2021-03-07 is a Sunday
    CHECK(day_of_week_monday0(hours_from_civil({2021, 3, 7, 5})) == 6);
}

TEST_CASE("timestamp parsing and formatting") {
    CHECK(parse_timestamp("2021-03-01 13:00:00") == hours_from_civil({2021, 3, 1, 13}));
    CHECK(parse_timestamp("2021-03-01T13:00") == hours_from_civil({2021, 3, 1, 13}));
    CHECK(parse_timestamp("2021-03-01 13") == hours_from_civil({2021, 3, 1, 13}));
    CHECK(format_timestamp(hours_from_civil({2021, 3, 1, 13})) == "2021-03-01 13:00:00");
    CHECK_THROWS_AS(parse_timestamp("2021-03-01 13:30:00"), DataError);
    CHECK_THROWS_AS(parse_timestamp("garbage"), DataError);
    CHECK_THROWS_AS(parse_timestamp("2021-13-01 13:00:00"), DataError);
}

TEST_CASE("csv ingestion of a well-formed file") {
    const std::string path = temp_path("he_ok.csv");
    write_file(path,
               "timestamp,consumption_kwh,temperature_c\n"
               "2021-03-01 00:00:00,1.5,4.0\n"
               "2021-03-01 01:00:00,2.0,3.5\n"
               "2021-03-01 02:00:00,1.0,3.0\n");
    TimeSeries s = ingest_csv(path, CsvColumnMap{});
    REQUIRE(s.size() == 3);
    CHECK(s.consumption[1] == 2.0);
    CHECK(s.temperature[2] == 3.0);
    CHECK(s.has_temperature());
}

TEST_CASE("csv rows are sorted; order does not matter") {
    const std::string path = temp_path("he_unsorted.csv");
    write_file(path,
               "timestamp,consumption_kwh\n"
               "2021-03-01 02:00:00,3\n"
               "2021-03-01 00:00:00,1\n"
               "2021-03-01 01:00:00,2\n");
    CsvColumnMap map;
    map.temperature = "";
    TimeSeries s = ingest_csv(path, map);
    CHECK(s.consumption == std::vector<double>{1, 2, 3});
    CHECK_FALSE(s.has_temperature());
}

TEST_CASE("csv error paths") {
    CsvColumnMap map;
    map.temperature = "";

    const std::string dup = temp_path("he_dup.csv");
    write_file(dup,
               "timestamp,consumption_kwh\n"
               "2021-03-01 00:00:00,1\n"
               "2021-03-01 00:00:00,2\n");
    try {
        ingest_csv(dup, map);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("2021-03-01 00:00:00") != std::string::npos);
    }

    const std::string neg = temp_path("he_neg.csv");
    write_file(neg, "timestamp,consumption_kwh\n2021-03-01 00:00:00,-1\n");
    CHECK_THROWS_AS(ingest_csv(neg, map), DataError);

    const std::string missing = temp_path("he_missing.csv");
    write_file(missing, "time,consumption_kwh\n2021-03-01 00:00:00,1\n");
    try {
        ingest_csv(missing, map);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("timestamp") != std::string::npos);
    }

    CHECK_THROWS_AS(ingest_csv(temp_path("he_nonexistent.csv"), map), IoError);
}

TEST_CASE("gap policy: reject by default, forward-fill when configured") {
    const std::string path = temp_path("he_gap.csv");
    write_file(path,
               "timestamp,consumption_kwh\n"
               "2021-03-01 00:00:00,1\n"
               "2021-03-01 03:00:00,4\n");
    CsvColumnMap map;
    map.temperature = "";
    CHECK_THROWS_AS(ingest_csv(path, map, GapPolicy::reject), DataError);

    TimeSeries filled = ingest_csv(path, map, GapPolicy::forward_fill, 3);
    REQUIRE(filled.size() == 4);
    CHECK(filled.consumption == std::vector<double>{1, 1, 1, 4});

    CHECK_THROWS_AS(ingest_csv(path, map, GapPolicy::forward_fill, 1), DataError);
}

TEST_CASE("series csv round-trips through ingestion") {
    const std::string path = temp_path("he_roundtrip.csv");
    TimeSeries s = small_series(30);
    write_series_csv(path, s);
    TimeSeries back = ingest_csv(path, CsvColumnMap{});
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(back.timestamps[i] == s.timestamps[i]);
        CHECK(back.consumption[i] == doctest::Approx(s.consumption[i]).epsilon(1e-6));
    }
}

TEST_CASE("calendar feature extraction") {
    TimeSeries s = small_series(48);
    FeatureTable t = extract_calendar_features(s, default_feature_set());
    CHECK(t.cols() == 5);
    CHECK(t.rows() == 48);
    // row 13 is 2021-03-01 13:00
    const std::size_t hour_col = *t.column_of(FeatureKind::hour_of_day);
    const std::size_t dow_col = *t.column_of(FeatureKind::day_of_week);
    const std::size_t doy_col = *t.column_of(FeatureKind::day_of_year);
    CHECK(t.at(13, hour_col) == 13.0);
    CHECK(t.at(13, dow_col) == 0.0);
    CHECK(t.at(13, doy_col) == 60.0);

    // invariant ranges over every row
    for (std::size_t r = 0; r < t.rows(); ++r) {
        CHECK(t.at(r, hour_col) >= 0.0);
        CHECK(t.at(r, hour_col) <= 23.0);
        CHECK(t.at(r, dow_col) >= 0.0);
        CHECK(t.at(r, dow_col) <= 6.0);
        CHECK(t.at(r, doy_col) >= 1.0);
        CHECK(t.at(r, doy_col) <= 366.0);
    }

    // excluding temperature drops the column
    std::vector<FeatureKind> no_temp = {FeatureKind::consumption, FeatureKind::hour_of_day};
    FeatureTable t2 = extract_calendar_features(s, no_temp);
    CHECK(t2.cols() == 2);
    CHECK_FALSE(t2.column_of(FeatureKind::temperature).has_value());

    TimeSeries no_temp_series = small_series(5);
    no_temp_series.temperature.clear();
    CHECK_THROWS_AS(extract_calendar_features(no_temp_series, default_feature_set()),
                    DataError);
}

TEST_CASE("chronological split boundaries and partition") {
    TimeSeries s = small_series(1000);
    FeatureTable t = extract_calendar_features(s, default_feature_set());
    SplitTables splits = chronological_split(t, SplitRatios{});
    CHECK(splits.train.rows() == 600);
    CHECK(splits.val.rows() == 200);
    CHECK(splits.test.rows() == 200);
    CHECK(splits.val.timestamps.front() == t.timestamps[600]);

    // concatenation reproduces the table
    std::vector<double> rebuilt = splits.train.values;
    rebuilt.insert(rebuilt.end(), splits.val.values.begin(), splits.val.values.end());
    rebuilt.insert(rebuilt.end(), splits.test.values.begin(), splits.test.values.end());
    CHECK(rebuilt == t.values);

    // L=10 with a 48-row requirement per split fails
    TimeSeries tiny = small_series(10);
    FeatureTable tiny_t = extract_calendar_features(tiny, default_feature_set());
    CHECK_THROWS_AS(chronological_split(tiny_t, SplitRatios{}, 48), DataError);

    CHECK_THROWS_AS(chronological_split(t, SplitRatios{0.5, 0.2, 0.2}), ConfigError);
}

TEST_CASE("min-max scaler") {
    FeatureTable t;
    t.features = {FeatureKind::consumption};
    t.timestamps = {0, 1, 2};
    t.values = {0, 5, 10};
    MinMaxScaler scaler = fit_scaler(t);
    FeatureTable scaled = apply_scaler(scaler, t);
    CHECK(scaled.values == std::vector<double>{0, 0.5, 1});

    // out-of-range test values are allowed
    CHECK(scaler.transform_value(20.0, 0) == 2.0);

    // round trip
    for (double x : {0.0, 3.33, 7.5, 10.0, 20.0, -4.0}) {
        CHECK(scaler.invert_value(scaler.transform_value(x, 0), 0) ==
              doctest::Approx(x).epsilon(1e-12));
    }

    // constant feature maps to 0 deterministically
    FeatureTable constant;
    constant.features = {FeatureKind::consumption};
    constant.timestamps = {0, 1};
    constant.values = {4, 4};
    MinMaxScaler cs = fit_scaler(constant);
    CHECK(cs.transform_value(4.0, 0) == 0.0);
    CHECK(cs.invert_value(0.0, 0) == 4.0);

    FeatureTable empty;
    empty.features = {FeatureKind::consumption};
    CHECK_THROWS_AS(fit_scaler(empty), DataError);
}

TEST_CASE("window construction") {
    TimeSeries s = small_series(100);
    FeatureTable t = extract_calendar_features(s, default_feature_set());
    MinMaxScaler scaler = fit_scaler(t);
    FeatureTable scaled = apply_scaler(scaler, t);

    WindowedDataset ds = make_windows(scaled, 24, 1, 24, scaler, "train");
    CHECK(ds.size() == 53); // (100 - 24 - 24)/1 + 1
    CHECK(ds.inputs.shape() == Shape{53, 24, 5});
    CHECK(ds.targets.shape() == Shape{53, 24});

    // target of sample 0 equals consumption rows [24, 48)
    const std::size_t kwh = *scaled.column_of(FeatureKind::consumption);
    for (std::size_t j = 0; j < 24; ++j) {
        CHECK(ds.targets.values()[j] == scaled.at(24 + j, kwh));
    }

    // adjacency: last input hour + 1 = first target hour
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(ds.target_start[i] == scaled.timestamps[i] + 24);
    }

    // exact-fit boundary: L = 48 gives one sample
    TimeSeries s48 = small_series(48);
    FeatureTable t48 = apply_scaler(scaler, extract_calendar_features(s48, default_feature_set()));
    CHECK(make_windows(t48, 24, 1, 24, scaler, "x").size() == 1);

    TimeSeries s47 = small_series(47);
    FeatureTable t47 = apply_scaler(scaler, extract_calendar_features(s47, default_feature_set()));
    CHECK_THROWS_AS(make_windows(t47, 24, 1, 24, scaler, "x"), DataError);
}

TEST_CASE("build_datasets: no leakage and determinism") {
    SynthOptions opt;
    opt.profile = SynthProfile::detached;
    opt.days = 30;
    opt.seed = 4;
    TimeSeries series = synth_generate(opt);

    PipelineConfig pc;
    DatasetBundle a = build_datasets(series, pc);
    DatasetBundle b = build_datasets(series, pc);

    // bit-identical across runs
    CHECK(std::equal(a.train.inputs.values().begin(), a.train.inputs.values().end(),
                     b.train.inputs.values().begin()));
    CHECK(a.scaler.mins == b.scaler.mins);

    // scaler depends only on training rows: perturb test-range values
    TimeSeries mutated = series;
    for (std::size_t i = mutated.size() - 50; i < mutated.size(); ++i) {
        mutated.consumption[i] += 123.0;
    }
    DatasetBundle c = build_datasets(mutated, pc);
    CHECK(a.scaler.mins == c.scaler.mins);
    CHECK(a.scaler.maxs == c.scaler.maxs);

    // split tags and window counts line up
    CHECK(a.train.split_tag == "train");
    CHECK(a.val.split_tag == "val");
    CHECK(a.test.split_tag == "test");
}

TEST_CASE("dataset cache round-trip honors the config hash") {
    SynthOptions opt;
    opt.profile = SynthProfile::townhouse;
    opt.days = 20;
    opt.seed = 9;
    TimeSeries series = synth_generate(opt);
    DatasetBundle bundle = build_datasets(series, PipelineConfig{});

    const std::string path = temp_path("he_cache.bin");
    save_dataset_cache(path, bundle, 0xabcdef);
    auto loaded = load_dataset_cache(path, 0xabcdef);
    REQUIRE(loaded.has_value());
    CHECK(std::equal(bundle.train.inputs.values().begin(),
                     bundle.train.inputs.values().end(),
                     loaded->train.inputs.values().begin()));
    CHECK(loaded->test.target_start == bundle.test.target_start);
    CHECK(loaded->scaler.maxs == bundle.scaler.maxs);

    CHECK_FALSE(load_dataset_cache(path, 0x123456).has_value()); // different config
    CHECK_FALSE(load_dataset_cache(temp_path("he_absent.bin"), 0xabcdef).has_value());
}

TEST_CASE("synthetic generator determinism and shape") {
    SynthOptions opt;
    opt.profile = SynthProfile::residence;
    opt.days = 365;
    opt.seed = 21;
    TimeSeries a = synth_generate(opt);
    TimeSeries b = synth_generate(opt);
    REQUIRE(a.size() == 8760);
    CHECK(a.consumption == b.consumption);
    CHECK(a.temperature == b.temperature);

    opt.seed = 22;
    TimeSeries c = synth_generate(opt);
    CHECK(a.consumption != c.consumption);

    SynthOptions bad = opt;
    bad.days = 3;
    CHECK_THROWS_AS(synth_generate(bad), ConfigError);
}

TEST_CASE("office profile without noise is exactly periodic over a week") {
    SynthOptions opt;
    opt.profile = SynthProfile::office;
    opt.days = 28;
    opt.seed = 5;
    opt.noise = 0.0;
    TimeSeries s = synth_generate(opt);
    for (std::size_t t = 0; t + 168 < s.size(); ++t) {
        CHECK(s.consumption[t] == s.consumption[t + 168]);
    }
}

TEST_CASE("ev charging session count stays within the binomial band") {
    // Monte Carlo: sessions per year ~ Binomial(365, rate); the count must
    // stay within rate*365 +- 3 sigma for the vast majority of seeds.
    const double rate = ev_charge_rate();
    const double mean = 365.0 * rate;
    const double sigma = std::sqrt(365.0 * rate * (1.0 - rate));
    int outside = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        SynthOptions opt;
        opt.profile = SynthProfile::ev_home;
        opt.days = 365;
        opt.seed = seed;
        SynthResult r = synth_generate_detailed(opt);
        const double count = static_cast<double>(r.event_count);
        if (std::fabs(count - mean) > 3.0 * sigma) ++outside;
    }
    CHECK(outside <= 2); // 3-sigma exclusion ~ 0.27% per trial
}

TEST_CASE("residence profile carries academic-calendar level shifts") {
    SynthOptions opt;
    opt.profile = SynthProfile::residence;
    opt.days = 365;
    opt.seed = 31;
    opt.noise = 0.0;
    TimeSeries s = synth_generate(opt);
    // average March consumption (full occupancy) vs July (term break)
    double march = 0.0, july = 0.0;
    int march_n = 0, july_n = 0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        const int doy = day_of_year(s.timestamps[t]);
        if (doy >= 60 && doy < 91) {
            march += s.consumption[t];
            ++march_n;
        } else if (doy >= 182 && doy < 213) {
            july += s.consumption[t];
            ++july_n;
        }
    }
    march /= march_n;
    july /= july_n;
    CHECK(march > july * 1.15);
}
