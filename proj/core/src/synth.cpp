#include "hyperenergy/synth.hpp"

#include "hyperenergy/errors.hpp"
#include "hyperenergy/rng.hpp"

#include <algorithm>
#include <cmath>

namespace hyperenergy {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEvChargeRate = 0.45;

struct ProfileSpec {
    double base;        // kWh floor
    double daily_amp;   // schedule amplitude
    double heat_coef;   // kWh per degree below the heating setpoint
    double cool_coef;   // kWh per degree above the cooling setpoint
    double noise_sigma; // kWh
    double weekend_scale;
};

ProfileSpec profile_spec(SynthProfile p) {
    switch (p) {
        case SynthProfile::residence: return {170.0, 70.0, 1.6, 2.0, 6.0, 0.92};
        case SynthProfile::detached: return {0.70, 0.90, 0.055, 0.050, 0.16, 1.10};
        case SynthProfile::ev_home: return {0.70, 0.90, 0.055, 0.050, 0.16, 1.10};
        case SynthProfile::townhouse: return {0.55, 0.65, 0.030, 0.035, 0.12, 1.08};
        case SynthProfile::office: return {30.0, 55.0, 0.0, 0.0, 2.2, 1.0};
    }
    return {1.0, 1.0, 0.0, 0.0, 0.1, 1.0};
}

double gauss_bump(double x, double center, double width) {
    const double d = (x - center) / width;
    return std::exp(-0.5 * d * d);
}

/// Hour-of-day schedule in [0, 1]; smooth double-peak shapes for homes, a
/// work-hours trapezoid with a lunch dip for offices. Student residences
/// blend two shapes by occupancy: term time is evening-dominant, breaks are
/// flat and daytime-centred, so the latent regime changes the profile's
/// shape, not just its level.
double daily_shape(SynthProfile p, unsigned hour, bool weekend, double occupancy) {
    const double h = static_cast<double>(hour);
    switch (p) {
        case SynthProfile::residence: {
            double term = 0.18 + 0.28 * gauss_bump(h, 8.5, 1.8) +
                          1.0 * gauss_bump(h, 20.5, 3.0) + 0.25 * gauss_bump(h, 13.0, 2.5);
            if (weekend) term += 0.15 * gauss_bump(h, 11.0, 3.0);
            double off_term = 0.22 + 0.55 * gauss_bump(h, 14.0, 4.5);
            const double frac = std::clamp((occupancy - 0.30) / 0.70, 0.0, 1.0);
            return frac * term + (1.0 - frac) * off_term;
        }
        case SynthProfile::detached:
        case SynthProfile::ev_home: {
            double v = 0.12 + 0.55 * gauss_bump(h, 7.5, 1.5) + 1.0 * gauss_bump(h, 18.5, 2.4);
            if (weekend) v += 0.30 * gauss_bump(h, 12.0, 3.5);
            return v;
        }
        case SynthProfile::townhouse: {
            double v = 0.15 + 0.45 * gauss_bump(h, 7.0, 1.5) + 1.0 * gauss_bump(h, 19.0, 2.8);
            if (weekend) v += 0.25 * gauss_bump(h, 12.5, 3.0);
            return v;
        }
        case SynthProfile::office: {
            if (weekend) return 0.15;
            double v = 0.12;
            if (hour >= 7 && hour <= 18) {
                v = 1.0;
                if (hour == 7 || hour == 18) v = 0.55;
                if (hour == 8 || hour == 17) v = 0.85;
                if (hour == 13) v = 0.82; // lunch dip
            } else if (hour == 19 || hour == 6) {
                v = 0.30;
            }
            return v;
        }
    }
    return 0.5;
}

/// Latent daily occupancy for student residences. The academic calendar sets
/// the base level (summer and winter breaks), but break boundaries jitter per
/// year, closures hit at random times, and week-to-week occupancy wobbles.
/// None of this is readable from calendar features alone, so a forecaster
/// has to infer the current regime from the recent consumption window.
std::vector<double> residence_occupancy_by_day(std::size_t days, HourStamp start_hour,
                                               std::uint64_t seed) {
    auto rng = make_rng(seed, "synth.regime");
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> occ(days, 1.0);
    const std::int64_t start_day = start_hour / 24;

    // calendar base with per-year jittered break boundaries
    std::vector<int> years;
    for (std::size_t d = 0; d < days; ++d) {
        const HourStamp ts = (start_day + static_cast<std::int64_t>(d)) * 24;
        const int year = civil_from_hours(ts).year;
        if (years.empty() || years.back() != year) years.push_back(year);
    }
    struct YearCal {
        int summer_start, summer_end, winter_start, reading_start;
    };
    std::vector<YearCal> cals;
    for (std::size_t i = 0; i < years.size(); ++i) {
        YearCal cal;
        cal.summer_start = 122 + static_cast<int>(unit(rng) * 20.0) - 10;
        cal.summer_end = 243 + static_cast<int>(unit(rng) * 20.0) - 10;
        cal.winter_start = 352 + static_cast<int>(unit(rng) * 8.0) - 4;
        cal.reading_start = 45 + static_cast<int>(unit(rng) * 10.0) - 5;
        cals.push_back(cal);
    }
    for (std::size_t d = 0; d < days; ++d) {
        const HourStamp ts = (start_day + static_cast<std::int64_t>(d)) * 24;
        const int doy = day_of_year(ts);
        const int year = civil_from_hours(ts).year;
        std::size_t yi = 0;
        for (std::size_t i = 0; i < years.size(); ++i) {
            if (years[i] == year) yi = i;
        }
        const YearCal& cal = cals[yi];
        double level = 1.0;
        if (doy >= cal.summer_start && doy <= cal.summer_end) level = 0.45;
        else if (doy >= cal.winter_start || doy <= 8) level = 0.60;
        else if (doy >= cal.reading_start && doy < cal.reading_start + 7) level = 0.70;
        // exam surge in the last 10 days before each break
        if ((doy >= cal.summer_start - 10 && doy < cal.summer_start) ||
            (doy >= cal.winter_start - 10 && doy < cal.winter_start)) {
            level *= 1.18;
        }
        occ[d] = level;
    }

    // random closures: a handful per year, one-half to four-fifths depth
    const std::size_t closures = std::max<std::size_t>(1, (days / 365 + 1) * 3);
    for (std::size_t e = 0; e < closures; ++e) {
        const std::size_t at = static_cast<std::size_t>(unit(rng) * static_cast<double>(days));
        const std::size_t len = 4 + static_cast<std::size_t>(unit(rng) * 11.0);
        const double depth = 0.5 + 0.3 * unit(rng);
        for (std::size_t d = at; d < std::min(days, at + len); ++d) occ[d] *= depth;
    }

    // week-to-week wobble
    double wobble = 1.0;
    for (std::size_t d = 0; d < days; ++d) {
        if (d % 7 == 0) wobble = 1.0 + 0.24 * (unit(rng) - 0.5);
        occ[d] *= wobble;
        occ[d] = std::clamp(occ[d], 0.2, 1.2);
    }
    return occ;
}

} // namespace

std::string synth_profile_name(SynthProfile p) {
    switch (p) {
        case SynthProfile::residence: return "residence";
        case SynthProfile::detached: return "detached";
        case SynthProfile::ev_home: return "ev_home";
        case SynthProfile::townhouse: return "townhouse";
        case SynthProfile::office: return "office";
    }
    return "residence";
}

SynthProfile synth_profile_from_name(const std::string& name) {
    for (SynthProfile p : {SynthProfile::residence, SynthProfile::detached,
                           SynthProfile::ev_home, SynthProfile::townhouse,
                           SynthProfile::office}) {
        if (synth_profile_name(p) == name) return p;
    }
    throw ConfigError("unknown synthetic profile '" + name + "'");
}

double ev_charge_rate() { return kEvChargeRate; }

SynthResult synth_generate_detailed(const SynthOptions& options) {
    if (options.days < 4) {
        throw ConfigError("synthetic series needs at least 4 days, got " +
                          std::to_string(options.days));
    }
    const ProfileSpec spec = profile_spec(options.profile);
    const std::size_t hours = options.days * 24;
    const HourStamp start = hours_from_civil(options.start);

    auto temp_rng = make_rng(options.seed, "synth.temperature");
    auto noise_rng = make_rng(options.seed, "synth.noise");
    auto event_rng = make_rng(options.seed, "synth.events");
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SynthResult result;
    TimeSeries& series = result.series;
    series.timestamps.resize(hours);
    series.consumption.assign(hours, 0.0);
    series.temperature.resize(hours);

    // Temperature: annual + daily cycles plus weather noise, continental
    // climate figures.
    for (std::size_t t = 0; t < hours; ++t) {
        const HourStamp ts = start + static_cast<HourStamp>(t);
        series.timestamps[t] = ts;
        const int doy = day_of_year(ts);
        const unsigned hod = civil_from_hours(ts).hour;
        const double annual =
            8.0 + 14.0 * std::sin(2.0 * kPi * (static_cast<double>(doy) - 105.0) / 365.25);
        const double daily = 4.0 * std::sin(2.0 * kPi * (static_cast<double>(hod) - 9.0) / 24.0);
        series.temperature[t] = annual + daily + options.noise * 1.5 * unit_normal(temp_rng);
    }

    std::vector<double> residence_occ;
    std::vector<double> residence_intensity;
    if (options.profile == SynthProfile::residence) {
        residence_occ = residence_occupancy_by_day(options.days, start, options.seed);
        // Bursty-behaviour intensity with day-to-day persistence (volatility
        // clustering): today's burst level is visible in the recent window
        // and predicts tomorrow's amplitude and spike rate.
        auto ar_rng = make_rng(options.seed, "synth.intensity");
        std::normal_distribution<double> ar_normal(0.0, 1.0);
        residence_intensity.resize(options.days);
        double level = 0.5;
        for (std::size_t d = 0; d < options.days; ++d) {
            level = 0.78 * level + 0.22 * std::fabs(ar_normal(ar_rng));
            residence_intensity[d] = level;
        }
    }
    auto spike_rng = make_rng(options.seed, "synth.spikes");
    std::uniform_real_distribution<double> spike_unit(0.0, 1.0);

    // Base consumption: schedule + weather coupling + noise.
    for (std::size_t t = 0; t < hours; ++t) {
        const HourStamp ts = series.timestamps[t];
        const unsigned hod = civil_from_hours(ts).hour;
        const int dow = day_of_week_monday0(ts);
        const bool weekend = dow >= 5;
        const double T = series.temperature[t];

        double occupancy = 1.0;
        if (!residence_occ.empty()) occupancy = residence_occ[t / 24];

        double v = spec.base * (0.55 + 0.45 * occupancy);
        double shape = daily_shape(options.profile, hod, weekend, occupancy);
        if (weekend) shape *= spec.weekend_scale;
        double amp = spec.daily_amp;
        if (!residence_intensity.empty()) {
            const double intensity = residence_intensity[t / 24];
            amp *= 0.70 + 0.55 * intensity;
            // clustered spikes: the per-hour rate follows the burst level
            const double rate = 0.04 + 0.16 * std::min(intensity, 1.5);
            const double roll = spike_unit(spike_rng);
            const double magnitude = spike_unit(spike_rng);
            if (roll < rate) {
                v += (0.35 + 0.65 * magnitude) * 0.5 * spec.daily_amp * occupancy;
            }
        }
        v += occupancy * amp * shape;
        v += spec.heat_coef * std::max(0.0, 16.0 - T);
        v += spec.cool_coef * occupancy * std::max(0.0, T - 23.0);
        v += options.noise * spec.noise_sigma * unit_normal(noise_rng);
        series.consumption[t] = std::max(0.0, v);
    }

    // EV charging sessions: evening plug-ins on a random subset of days.
    if (options.profile == SynthProfile::ev_home) {
        for (std::size_t day = 0; day < options.days; ++day) {
            const double roll = unit(event_rng);
            const double start_draw = unit(event_rng);
            const double dur_draw = unit(event_rng);
            const double power_draw = unit(event_rng);
            if (roll >= kEvChargeRate) continue;
            ++result.event_count;
            const std::size_t start_hour =
                17 + static_cast<std::size_t>(start_draw * 6.0); // 17..22
            const std::size_t duration = 2 + static_cast<std::size_t>(dur_draw * 3.0); // 2..4
            const double power = 7.2 * (0.85 + 0.3 * power_draw);
            for (std::size_t j = 0; j < duration; ++j) {
                const std::size_t idx = day * 24 + start_hour + j;
                if (idx < hours) series.consumption[idx] += power;
            }
        }
    }

    return result;
}

TimeSeries synth_generate(const SynthOptions& options) {
    return synth_generate_detailed(options).series;
}

} // namespace hyperenergy
