#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "washdet/features.hpp"
#include "washdet/recording.hpp"
#include "washdet/synthgen.hpp"

using namespace washdet;
using namespace washdet::synth;

namespace {

Scenario small_scenario(int participants = 2, int washes = 2,
                        int64_t session_ms = 600'000) {
    Scenario scn;
    scn.n_participants = participants;
    scn.washes_per_participant = washes;
    scn.session_ms = session_ms;
    return scn;
}

std::string bundle_bytes(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::string all;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        all += f.filename().string();
        all += ss.str();
    }
    return all;
}

}  // namespace

TEST_CASE("humidity response: shape, closed form, continuity") {
    ResponseParams p;
    p.rh_room_bump = 1.5;
    p.rh_wash_gain = 5.0;
    p.rh_rise_tau_s = 10.0;
    p.rh_decay_tau_s = 120.0;

    SUBCASE("zero far before the transit") {
        CHECK(humidity_response(-1e9, 30.0, 25.0, p) == 0.0);
        CHECK(humidity_response(-26.0, 30.0, 25.0, p) == 0.0);
    }
    SUBCASE("monotone non-decreasing over the wash") {
        double prev = -1.0;
        for (double t = 0.0; t <= 30.0; t += 0.25) {
            const double v = humidity_response(t, 30.0, 25.0, p);
            CHECK(v >= prev);
            prev = v;
        }
    }
    SUBCASE("closed-form rise above the pre-wash level") {
        const double rise = humidity_response(10.0, 30.0, 25.0, p) -
                            humidity_response(0.0, 30.0, 25.0, p);
        CHECK(rise == doctest::Approx(5.0 * (1.0 - std::exp(-1.0))).epsilon(1e-12));
        CHECK(rise == doctest::Approx(3.16060).epsilon(1e-4));
    }
    SUBCASE("continuous at the joints") {
        const double eps = 1e-9;
        for (const double t : {-25.0, 0.0, 30.0}) {
            const double lo = humidity_response(t - eps, 30.0, 25.0, p);
            const double hi = humidity_response(t + eps, 30.0, 25.0, p);
            CHECK(std::abs(hi - lo) < 1e-6);
        }
    }
    SUBCASE("decay is slower than the rise") {
        const double end = humidity_response(30.0, 30.0, 25.0, p);
        const double later = humidity_response(30.0 + p.rh_decay_tau_s, 30.0, 25.0, p);
        CHECK(later == doctest::Approx(end * std::exp(-1.0)).epsilon(1e-12));
    }
    SUBCASE("non-positive wash length throws") {
        CHECK_THROWS_AS(humidity_response(0.0, 0.0, 25.0, p), std::invalid_argument);
    }
}

TEST_CASE("temperature response: dip ramps in, stays flat, ramps out") {
    ResponseParams p;
    p.temp_room_dip_c = -0.8;

    CHECK(temperature_response(-1e9, 30.0, 20.0, 25.0, p) == 0.0);
    CHECK(temperature_response(-10.0, 30.0, 20.0, 25.0, p) ==
          doctest::Approx(-0.4).epsilon(1e-12));  // transit midpoint = dip/2

    double mn = 1e9, mx = -1e9;
    for (double t = 0.0; t <= 30.0; t += 0.1) {
        const double v = temperature_response(t, 30.0, 20.0, 25.0, p);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    CHECK(mx - mn <= 0.05);  // stable during the wash (noise-free)
    CHECK(mn == doctest::Approx(-0.8));

    CHECK(temperature_response(30.0 + 25.0, 30.0, 20.0, 25.0, p) ==
          doctest::Approx(0.0));
    CHECK(temperature_response(1e9, 30.0, 20.0, 25.0, p) == 0.0);
}

TEST_CASE("pressure response integrates stairs drift") {
    ResponseParams p;
    p.pressure_baseline_hpa = 1002.0;
    p.pressure_stairs_rate_hpa_s = -0.04;

    SUBCASE("no stairs: constant baseline") {
        const std::vector<ActivitySegment> script{
            {ActivityKind::desk, 100'000},
            {ActivityKind::room_transit, 20'000},
            {ActivityKind::hand_wash, 30'000},
            {ActivityKind::room_transit, 20'000},
            {ActivityKind::desk, 100'000},
        };
        for (double t = 0.0; t < 270.0; t += 7.0)
            CHECK(pressure_response(t, script, p) == 1002.0);
    }
    SUBCASE("30 s of stairs at -0.04 hPa/s nets -1.2 hPa") {
        const std::vector<ActivitySegment> script{
            {ActivityKind::desk, 100'000},
            {ActivityKind::stairs, 30'000},
            {ActivityKind::desk, 100'000},
        };
        CHECK(pressure_response(200.0, script, p) ==
              doctest::Approx(1002.0 - 1.2).epsilon(1e-12));
        // mid-segment: half the drift
        CHECK(pressure_response(115.0, script, p) ==
              doctest::Approx(1002.0 - 0.6).epsilon(1e-12));
    }
    SUBCASE("consecutive stairs segments alternate direction") {
        const std::vector<ActivitySegment> script{
            {ActivityKind::stairs, 30'000},
            {ActivityKind::walk, 60'000},
            {ActivityKind::stairs, 30'000},
            {ActivityKind::desk, 60'000},
        };
        CHECK(pressure_response(60.0, script, p) ==
              doctest::Approx(1002.0 - 1.2).epsilon(1e-12));
        CHECK(pressure_response(170.0, script, p) ==
              doctest::Approx(1002.0).epsilon(1e-12));  // back at the start floor
    }
}

TEST_CASE("participant scripts satisfy the scenario invariants") {
    const Scenario scn;  // defaults: 10 participants, 4 washes, 3600 s
    for (int idx = 0; idx < scn.n_participants; ++idx) {
        const auto script = build_participant_script(scn, idx, 42);
        int64_t total = 0;
        int washes = 0;
        bool stairs_seen = false;
        for (std::size_t i = 0; i < script.size(); ++i) {
            total += script[i].duration_ms;
            CHECK(script[i].duration_ms > 0);
            if (script[i].kind == ActivityKind::hand_wash) {
                ++washes;
                REQUIRE(i > 0);
                CHECK(script[i - 1].kind == ActivityKind::room_transit);
                CHECK(script[i].duration_ms >= 15'000);
                CHECK(script[i].duration_ms <= 40'000);
            }
            if (script[i].kind == ActivityKind::stairs) stairs_seen = true;
        }
        CHECK(total == scn.session_ms);
        CHECK(washes == scn.washes_per_participant);
        CHECK(stairs_seen);
    }

    SUBCASE("deterministic in the seed") {
        const auto a = build_participant_script(scn, 3, 42);
        const auto b = build_participant_script(scn, 3, 42);
        CHECK(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].kind == b[i].kind);
            CHECK(a[i].duration_ms == b[i].duration_ms);
        }
    }
    SUBCASE("session too short for the washes throws") {
        CHECK_THROWS_AS(build_participant_script(small_scenario(1, 4, 300'000), 0, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("generated recordings are deterministic and structurally sound") {
    const auto scn = small_scenario();
    const ResponseParams p;

    const auto rec = generate_recording(scn, 0, p, 11);
    SUBCASE("all nine sensor channels plus both cue channels are present") {
        for (int c = 0; c < kMlChannelCount; ++c)
            CHECK(rec.has(static_cast<ChannelId>(c)));
        CHECK(rec.has(ChannelId::button));
        CHECK(rec.has(ChannelId::beacon_rssi));
        CHECK(rec.duration_ms == scn.session_ms);
    }
    SUBCASE("annotations are the scripted wash intervals") {
        const auto script = build_participant_script(scn, 0, 11);
        const auto washes = scripted_washes(script);
        REQUIRE(rec.annotations.size() == washes.size());
        for (std::size_t i = 0; i < washes.size(); ++i) {
            CHECK(rec.annotations[i].start_ms == washes[i].onset_ms);
            CHECK(rec.annotations[i].end_ms == washes[i].end_ms);
            CHECK(rec.annotations[i].kind == AnnotationKind::hand_wash);
        }
    }
    SUBCASE("same seed, same recording; different seed differs") {
        const auto again = generate_recording(scn, 0, p, 11);
        CHECK(rec.channel(ChannelId::acc_x)->value ==
              again.channel(ChannelId::acc_x)->value);
        CHECK(rec.channel(ChannelId::humidity)->value ==
              again.channel(ChannelId::humidity)->value);
        const auto other = generate_recording(scn, 0, p, 12);
        CHECK(rec.channel(ChannelId::acc_x)->value !=
              other.channel(ChannelId::acc_x)->value);
    }
    SUBCASE("validation finds no issues under default parameters") {
        CHECK(validate_recording(rec).empty());
    }
    SUBCASE("button pairs propose exactly the scripted washes") {
        const auto result = propose_annotations(rec);
        REQUIRE(result.proposals.size() == rec.annotations.size());
        for (std::size_t i = 0; i < result.proposals.size(); ++i) {
            const auto mid =
                (result.proposals[i].start_ms + result.proposals[i].end_ms) / 2;
            CHECK(mid >= rec.annotations[i].start_ms);
            CHECK(mid <= rec.annotations[i].end_ms);
        }
    }
    SUBCASE("imu_ambiguity only reshapes the IMU channels") {
        auto ambiguous = scn;
        ambiguous.imu_ambiguity = 1.0;
        const auto rec1 = generate_recording(ambiguous, 0, p, 11);
        CHECK(rec1.channel(ChannelId::humidity)->value ==
              rec.channel(ChannelId::humidity)->value);
        CHECK(rec1.channel(ChannelId::pressure)->value ==
              rec.channel(ChannelId::pressure)->value);
        CHECK(rec1.channel(ChannelId::acc_x)->value !=
              rec.channel(ChannelId::acc_x)->value);
    }
    SUBCASE("invalid scenarios are rejected") {
        auto bad = scn;
        bad.imu_ambiguity = 1.5;
        CHECK_THROWS_AS(generate_recording(bad, 0, p, 1), std::invalid_argument);
        auto bad_script = scn;
        bad_script.scripts.assign(
            static_cast<std::size_t>(scn.n_participants),
            {{ActivityKind::desk, scn.session_ms}});  // zero washes scripted
        CHECK_THROWS_AS(generate_recording(bad_script, 0, p, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("same seed writes byte-identical bundles") {
    const auto scn = small_scenario(1, 2, 600'000);
    const ResponseParams p;
    const auto dir_a = std::filesystem::temp_directory_path() / "washdet_tests/det_a";
    const auto dir_b = std::filesystem::temp_directory_path() / "washdet_tests/det_b";
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    write_recording(generate_recording(scn, 0, p, 99), dir_a);
    write_recording(generate_recording(scn, 0, p, 99), dir_b);
    CHECK(bundle_bytes(dir_a) == bundle_bytes(dir_b));
}

TEST_CASE("default scenario: 40 washes, sane durations, ~97% null windows") {
    const Scenario scn;  // defaults
    const ResponseParams p;
    std::size_t washes = 0;
    std::size_t wash_windows = 0;
    std::size_t total_windows = 0;
    for (int i = 0; i < scn.n_participants; ++i) {
        const auto rec = generate_recording(scn, i, p, 42);
        for (const auto& a : rec.annotations) {
            ++washes;
            const double dur_s = static_cast<double>(a.end_ms - a.start_ms) / 1000.0;
            CHECK(dur_s >= 15.0);
            CHECK(dur_s <= 40.0);
        }
        auto windows = feat::make_windows(rec, 5.0);
        feat::label_windows(windows, rec.annotations);
        for (const auto& w : windows) {
            ++total_windows;
            wash_windows += w.label;
        }
    }
    CHECK(washes == 40);
    const double null_fraction =
        1.0 - static_cast<double>(wash_windows) / static_cast<double>(total_windows);
    CHECK(null_fraction >= 0.955);
    CHECK(null_fraction <= 0.985);
}
