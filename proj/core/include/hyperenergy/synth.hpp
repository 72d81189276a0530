#pragma once

#include "hyperenergy/data.hpp"

#include <cstdint>
#include <string>

namespace hyperenergy {

enum class SynthProfile { residence, detached, ev_home, townhouse, office };

std::string synth_profile_name(SynthProfile p);
SynthProfile synth_profile_from_name(const std::string& name);

struct SynthOptions {
    SynthProfile profile = SynthProfile::residence;
    std::size_t days = 365;
    std::uint64_t seed = 0;
    double noise = 1.0; // scales the profile's nominal noise level
    CivilTime start{2019, 1, 1, 0};
};

struct SynthResult {
    TimeSeries series;
    std::size_t event_count = 0; // EV charging sessions / shift events emitted
};

/// Daily and weekly occupancy schedules, temperature coupling, profile
/// events (EV charging sessions, academic-term occupancy shifts) and
/// Gaussian noise, all drawn from seed-derived streams. Deterministic per
/// options. The office profile has no temperature coupling and no events,
/// so at noise = 0 it is exactly periodic with period 168 h.
SynthResult synth_generate_detailed(const SynthOptions& options);
TimeSeries synth_generate(const SynthOptions& options);

/// Expected per-day probability of an EV charging session (ev_home profile).
double ev_charge_rate();

} // namespace hyperenergy
