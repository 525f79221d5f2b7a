#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "test_util.hpp"
#include "washdet/recording.hpp"
#include "washdet/synthgen.hpp"

using namespace washdet;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "washdet_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void append_line(const fs::path& file, const std::string& line) {
    std::ofstream out(file, std::ios::app);
    out << line << "\n";
}

bool recordings_equal(const Recording& a, const Recording& b) {
    if (a.duration_ms != b.duration_ms) return false;
    if (a.meta.participant_id != b.meta.participant_id) return false;
    if (a.meta.day_condition != b.meta.day_condition) return false;
    if (a.meta.outdoor_temp_c != b.meta.outdoor_temp_c) return false;
    if (a.meta.outdoor_rh_percent != b.meta.outdoor_rh_percent) return false;
    if (a.meta.outdoor_pressure_hpa != b.meta.outdoor_pressure_hpa) return false;
    if (a.annotations != b.annotations) return false;
    for (int c = 0; c < kChannelCount; ++c) {
        const auto id = static_cast<ChannelId>(c);
        if (a.has(id) != b.has(id)) return false;
        if (!a.has(id)) continue;
        if (a.channel(id)->t_ms != b.channel(id)->t_ms) return false;
        if (a.channel(id)->value != b.channel(id)->value) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("write -> parse round-trips a generated recording exactly") {
    synth::Scenario scn;
    scn.n_participants = 1;
    scn.washes_per_participant = 2;
    scn.session_ms = 600'000;
    const synth::ResponseParams params;
    const auto rec = synth::generate_recording(scn, 0, params, 7);

    const auto dir = temp_dir("roundtrip");
    write_recording(rec, dir);
    std::vector<std::string> warnings;
    const auto reparsed = parse_recording(dir, &warnings);
    CHECK(warnings.empty());
    CHECK(recordings_equal(rec, reparsed));
    CHECK(reparsed.duration_ms == 600'000);
}

TEST_CASE("parser errors carry enough context") {
    const auto base = testutil::make_recording(20'000);

    SUBCASE("missing required channel") {
        const auto dir = temp_dir("missing_channel");
        write_recording(base, dir);
        fs::remove(dir / "gyro_z.csv");
        CHECK_THROWS_WITH_AS(parse_recording(dir), "missing channel gyro_z",
                             std::runtime_error);
    }
    SUBCASE("non-monotone timestamps report the row") {
        const auto dir = temp_dir("non_monotone");
        write_recording(base, dir);
        append_line(dir / "humidity.csv", "500,42.0");  // goes backwards
        CHECK_THROWS_WITH_AS(parse_recording(dir),
                             doctest::Contains("non-monotone timestamps"),
                             std::runtime_error);
    }
    SUBCASE("malformed numeric cell reports row and column") {
        const auto dir = temp_dir("bad_cell");
        write_recording(base, dir);
        append_line(dir / "pressure.csv", "19999,not_a_number");
        CHECK_THROWS_WITH_AS(parse_recording(dir),
                             doctest::Contains("malformed numeric cell"),
                             std::runtime_error);
    }
    SUBCASE("non-finite values are rejected") {
        const auto dir = temp_dir("nonfinite");
        write_recording(base, dir);
        append_line(dir / "pressure.csv", "19999,inf");
        CHECK_THROWS_AS(parse_recording(dir), std::runtime_error);
    }
    SUBCASE("unknown channel files produce a warning, not an error") {
        const auto dir = temp_dir("unknown_channel");
        write_recording(base, dir);
        {
            std::ofstream out(dir / "magnetometer_x.csv");
            out << "t_ms,value\n0,1.0\n";
        }
        std::vector<std::string> warnings;
        const auto rec = parse_recording(dir, &warnings);
        CHECK(rec.duration_ms == 20'000);
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("magnetometer_x") != std::string::npos);
    }
    SUBCASE("meta out of range") {
        const auto dir = temp_dir("bad_meta");
        auto rec = base;
        rec.meta.outdoor_pressure_hpa = 2000.0;
        write_recording(rec, dir);
        CHECK_THROWS_WITH_AS(parse_recording(dir),
                             doctest::Contains("outdoor_pressure_hpa"),
                             std::runtime_error);
    }
}

TEST_CASE("propose_annotations pairs button presses under the cue gates") {
    auto rec = testutil::make_recording(300'000);

    const auto add_press = [&rec](int64_t t) {
        auto& btn = rec.ensure(ChannelId::button);
        btn.t_ms.push_back(t);
        btn.value.push_back(1.0);
        btn.t_ms.push_back(t + 150);
        btn.value.push_back(0.0);
    };
    const auto add_rssi_span = [&rec](int64_t from, int64_t to, double level) {
        auto& rssi = rec.ensure(ChannelId::beacon_rssi);
        for (int64_t t = from; t <= to; t += 1000) {
            rssi.t_ms.push_back(t);
            rssi.value.push_back(level);
        }
    };

    SUBCASE("one pair above the floor becomes one proposal") {
        add_press(100'000);
        add_press(125'000);
        add_rssi_span(95'000, 130'000, -55.0);
        const auto result = propose_annotations(rec, -80.0, 90.0);
        REQUIRE(result.proposals.size() == 1);
        CHECK(result.proposals[0].start_ms == 100'000);
        CHECK(result.proposals[0].end_ms == 125'000);
        CHECK(result.proposals[0].kind == AnnotationKind::hand_wash);
        CHECK(result.proposals[0].source == AnnotationSource::proposed);
        CHECK(result.warnings.empty());
    }
    SUBCASE("a span beyond max_wash_s is skipped with a warning") {
        add_press(10'000);
        add_press(200'000);
        const auto result = propose_annotations(rec, -80.0, 60.0);
        CHECK(result.proposals.empty());
        REQUIRE(result.warnings.size() == 1);
        CHECK(result.warnings[0].find("max_wash_s") != std::string::npos);
    }
    SUBCASE("low RSSI rejects the pair") {
        add_press(100'000);
        add_press(120'000);
        add_rssi_span(95'000, 125'000, -95.0);
        const auto result = propose_annotations(rec, -80.0, 90.0);
        CHECK(result.proposals.empty());
    }
    SUBCASE("missing RSSI coverage counts below the floor") {
        add_press(100'000);
        add_press(120'000);  // no rssi rows at all, but the channel exists
        rec.ensure(ChannelId::beacon_rssi);
        const auto result = propose_annotations(rec, -80.0, 90.0);
        CHECK(result.proposals.empty());
    }
    SUBCASE("odd trailing press warns and proposes nothing for it") {
        add_press(50'000);
        add_press(70'000);
        add_press(200'000);
        const auto result = propose_annotations(rec, -80.0, 90.0);
        CHECK(result.proposals.size() == 1);
        REQUIRE(!result.warnings.empty());
        CHECK(result.warnings.back().find("odd trailing") != std::string::npos);
    }
    SUBCASE("no cue channels is an error") {
        CHECK_THROWS_WITH_AS(propose_annotations(rec), "no ground-truth cues",
                             std::runtime_error);
    }
}

TEST_CASE("validate_recording flags the spec'd issue kinds") {
    SUBCASE("clean recording has no issues") {
        const auto rec = testutil::make_recording(60'000);
        CHECK(validate_recording(rec).empty());
    }
    SUBCASE("short hand wash is flagged, not fatal") {
        auto rec = testutil::make_recording(60'000);
        rec.annotations.push_back(
            {10'000, 12'000, AnnotationKind::hand_wash, AnnotationSource::manual});
        const auto issues = validate_recording(rec);
        REQUIRE(issues.size() == 1);
        CHECK(issues[0].kind == IssueKind::duration_out_of_range);
    }
    SUBCASE("a one-second hole in an IMU channel is located within a sample") {
        auto rec = testutil::make_recording(60'000);
        auto& acc = *rec.channels[static_cast<int>(ChannelId::acc_x)];
        // carve out [30000, 31000)
        std::vector<int64_t> t;
        std::vector<double> v;
        int64_t hole_start = 0;
        for (std::size_t i = 0; i < acc.size(); ++i) {
            if (acc.t_ms[i] >= 30'000 && acc.t_ms[i] < 31'000) continue;
            if (acc.t_ms[i] < 30'000) hole_start = acc.t_ms[i];
            t.push_back(acc.t_ms[i]);
            v.push_back(acc.value[i]);
        }
        acc.t_ms = std::move(t);
        acc.value = std::move(v);
        const auto issues = validate_recording(rec);
        REQUIRE(issues.size() == 1);
        CHECK(issues[0].kind == IssueKind::channel_gap);
        CHECK(issues[0].channel == ChannelId::acc_x);
        CHECK(std::abs(issues[0].t_ms - hole_start) <= 20);  // within one sample
    }
    SUBCASE("overlapping washes are flagged") {
        auto rec = testutil::make_recording(60'000);
        rec.annotations.push_back(
            {10'000, 30'000, AnnotationKind::hand_wash, AnnotationSource::manual});
        rec.annotations.push_back(
            {25'000, 45'000, AnnotationKind::hand_wash, AnnotationSource::manual});
        const auto issues = validate_recording(rec);
        REQUIRE(issues.size() == 1);
        CHECK(issues[0].kind == IssueKind::annotation_overlap);
    }
    SUBCASE("wrong sampling rate is flagged") {
        auto rec = testutil::make_recording(60'000);
        testutil::fill_channel(rec, ChannelId::acc_y, [](int64_t) { return 0.0; });
        auto& acc = *rec.channels[static_cast<int>(ChannelId::acc_y)];
        // thin to ~26 Hz: drop every second sample
        std::vector<int64_t> t;
        std::vector<double> v;
        for (std::size_t i = 0; i < acc.size(); i += 2) {
            t.push_back(acc.t_ms[i]);
            v.push_back(acc.value[i]);
        }
        acc.t_ms = std::move(t);
        acc.value = std::move(v);
        const auto issues = validate_recording(rec);
        bool found = false;
        for (const auto& issue : issues)
            if (issue.kind == IssueKind::rate_deviation &&
                issue.channel == ChannelId::acc_y)
                found = true;
        CHECK(found);
    }
}

TEST_CASE("annotation export is ordered, exact and re-parseable") {
    auto rec = testutil::make_recording(200'000);
    rec.annotations = {
        {150'000, 170'500, AnnotationKind::hand_wash, AnnotationSource::manual},
        {10'250, 35'750, AnnotationKind::hand_wash, AnnotationSource::proposed},
        {50'000, 90'000, AnnotationKind::walk, AnnotationSource::manual},
        {100'001, 120'003, AnnotationKind::hand_wash, AnnotationSource::manual},
    };
    const auto doc = export_annotations(rec);

    SUBCASE("chronological order with 3-decimal seconds") {
        CHECK(doc.find("10.250\t35.750\thand_wash\tproposed") != std::string::npos);
        CHECK(doc.find("10.250") < doc.find("50.000"));
        CHECK(doc.find("50.000") < doc.find("100.001"));
        CHECK(doc.find("100.001") < doc.find("150.000"));
    }
    SUBCASE("round-trip recovers identical triples") {
        const auto parsed = parse_annotation_document(doc);
        REQUIRE(parsed.size() == rec.annotations.size());
        auto sorted = rec.annotations;
        std::sort(sorted.begin(), sorted.end(),
                  [](const Annotation& a, const Annotation& b) {
                      return a.start_ms < b.start_ms;
                  });
        for (std::size_t i = 0; i < parsed.size(); ++i) {
            CHECK(parsed[i].start_ms == sorted[i].start_ms);
            CHECK(parsed[i].end_ms == sorted[i].end_ms);
            CHECK(parsed[i].kind == sorted[i].kind);
            CHECK(parsed[i].source == sorted[i].source);
        }
    }
    SUBCASE("empty annotation list still yields a valid document") {
        rec.annotations.clear();
        const auto empty_doc = export_annotations(rec);
        CHECK(empty_doc == "start_s\tend_s\tkind\tsource\n");
        CHECK(parse_annotation_document(empty_doc).empty());
    }
}
