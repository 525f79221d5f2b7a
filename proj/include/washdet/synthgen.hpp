#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "washdet/recording.hpp"

namespace washdet::synth {

enum class ActivityKind { desk, walk, stairs, hand_wash, room_transit };

std::string_view activity_kind_name(ActivityKind k);

struct ActivitySegment {
    ActivityKind kind{};
    int64_t duration_ms = 0;
};

// Desk-scale stand-in for a recording session: mostly desk work, one walk
// with stairs, and a fixed number of hand washes, each entered and left
// through a room transit (the sink room reads slightly more humid and
// cooler than the rest of the building).
struct Scenario {
    int n_participants = 10;
    int washes_per_participant = 4;
    int64_t session_ms = 3'600'000;
    // 0 = wash IMU texture fully distinct from desk noise, 1 = identical to
    // it (the atmospheric channels then carry all of the wash signal)
    double imu_ambiguity = 0.3;
    // optional pre-baked scripts, one per participant; empty = draw
    // deterministically from the seed
    std::vector<std::vector<ActivitySegment>> scripts;
};

struct ResponseParams {
    double rh_baseline = 45.0;       // %RH
    double rh_room_bump = 1.5;       // ambient rise near the sink
    double rh_wash_gain = 5.0;       // peak rise during the wash
    double rh_rise_tau_s = 15.0;
    double rh_decay_tau_s = 120.0;   // must exceed the rise tau
    double temp_baseline_c = 24.0;
    double temp_room_dip_c = -0.8;   // signed offset inside the sink room
    double pressure_baseline_hpa = 1002.0;
    // signed rate of the first stairs segment (ascent < 0, descent > 0);
    // consecutive stairs segments alternate direction
    double pressure_stairs_rate_hpa_s = -0.04;

    // per-sample Gaussian noise
    double noise_acc_g = 0.02;
    double noise_gyro_dps = 1.0;
    double noise_rh = 0.1;
    double noise_temp_c = 0.02;
    double noise_pressure_hpa = 0.03;

    // per-recording constant miscalibration of the atmospheric channels
    // (absolute readings are untrustworthy, relative changes are not)
    double calib_sd_rh = 1.5;
    double calib_sd_temp_c = 0.5;
    double calib_sd_pressure_hpa = 1.0;
};

// %RH above the ambient baseline at t_rel seconds from wash onset. The room
// bump ramps in linearly over the preceding transit, a saturating
// exponential rise runs during the wash, and everything decays with the
// slower tau afterwards. Continuous in t_rel.
double humidity_response(double t_rel_s, double wash_len_s, double transit_s,
                         const ResponseParams& p);

// Temperature offset from baseline: linear ramp to the room dip over the
// entry transit, flat during the wash, linear ramp back over the exit.
double temperature_response(double t_rel_s, double wash_len_s, double transit_in_s,
                            double transit_out_s, const ResponseParams& p);

// Absolute pressure at t_abs seconds: baseline plus the stairs drift
// integrated over the script. Constant everywhere outside stairs segments.
double pressure_response(double t_abs_s, std::span<const ActivitySegment> script,
                         const ResponseParams& p);

// Deterministic activity script for one participant. Throws when the
// session is too short to hold the requested washes.
std::vector<ActivitySegment> build_participant_script(const Scenario& scn,
                                                      int participant_index,
                                                      uint64_t seed);

struct WashEvent {
    int64_t onset_ms = 0;
    int64_t end_ms = 0;
    int64_t transit_in_ms = 0;
    int64_t transit_out_ms = 0;
};

// Scripted wash intervals with their surrounding transits.
std::vector<WashEvent> scripted_washes(std::span<const ActivitySegment> script);

// All nine sensor channels at nominal rates plus the button and beacon-RSSI
// cues; annotations carry the exact scripted wash intervals. Fully
// deterministic in (scenario, params, seed, participant_index).
Recording generate_recording(const Scenario& scn, int participant_index,
                             const ResponseParams& p, uint64_t seed);

}  // namespace washdet::synth
