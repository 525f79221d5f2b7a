#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace washdet {

// Sensor axes of one wrist unit. The first nine are the ML channels; the
// beacon RSSI and the button are ground-truth cues and never enter a
// feature matrix.
enum class ChannelId : int {
    acc_x = 0,
    acc_y,
    acc_z,
    gyro_x,
    gyro_y,
    gyro_z,
    humidity,
    temperature,
    pressure,
    beacon_rssi,
    button,
};

inline constexpr int kChannelCount = 11;
inline constexpr int kMlChannelCount = 9;

std::string_view channel_name(ChannelId id);
std::optional<ChannelId> channel_from_name(std::string_view name);
// 52 Hz for the IMU axes, 1 Hz for the atmospheric axes, 0 where the rate
// is unconstrained (cue channels).
double nominal_rate_hz(ChannelId id);

// Timestamped scalar stream for one sensor axis at its native rate.
// Timestamps are milliseconds since recording start, strictly increasing.
struct ChannelSeries {
    ChannelId id{};
    std::vector<int64_t> t_ms;
    std::vector<double> value;

    std::size_t size() const { return t_ms.size(); }
};

enum class AnnotationKind { hand_wash, walk, stairs, other_adl };
enum class AnnotationSource { manual, proposed };

std::string_view annotation_kind_name(AnnotationKind k);
std::optional<AnnotationKind> annotation_kind_from_name(std::string_view name);
std::string_view annotation_source_name(AnnotationSource s);
std::optional<AnnotationSource> annotation_source_from_name(std::string_view name);

struct Annotation {
    int64_t start_ms = 0;
    int64_t end_ms = 0;
    AnnotationKind kind = AnnotationKind::hand_wash;
    AnnotationSource source = AnnotationSource::manual;

    friend bool operator==(const Annotation&, const Annotation&) = default;
};

enum class DayCondition { rainy, sunny, cloudy };

std::string_view day_condition_name(DayCondition c);
std::optional<DayCondition> day_condition_from_name(std::string_view name);

struct RecordingMeta {
    std::string participant_id;
    DayCondition day_condition = DayCondition::cloudy;
    double outdoor_temp_c = 15.0;
    double outdoor_rh_percent = 70.0;
    double outdoor_pressure_hpa = 1000.0;
};

// One participant-session: multi-rate channel streams, annotations, weather
// metadata. Immutable after construction; shareable across threads.
struct Recording {
    RecordingMeta meta;
    int64_t duration_ms = 0;
    std::array<std::optional<ChannelSeries>, kChannelCount> channels;
    std::vector<Annotation> annotations;

    bool has(ChannelId id) const {
        return channels[static_cast<int>(id)].has_value();
    }
    const ChannelSeries* channel(ChannelId id) const {
        const auto& c = channels[static_cast<int>(id)];
        return c ? &*c : nullptr;
    }
    ChannelSeries& ensure(ChannelId id) {
        auto& c = channels[static_cast<int>(id)];
        if (!c) c.emplace(ChannelSeries{id, {}, {}});
        return *c;
    }
};

// On-disk bundle: one directory per recording, one `<channel>.csv` per
// channel (header `t_ms,value`), plus `meta.csv` (key,value rows) and
// `annotations.csv`. Plain decimal cells, '.' radix point, no locale.
// Unknown channel files are skipped with a warning; missing ML channels,
// non-monotone timestamps and malformed numeric cells are hard errors.
Recording parse_recording(const std::filesystem::path& dir,
                          std::vector<std::string>* warnings = nullptr);
void write_recording(const Recording& rec, const std::filesystem::path& dir);

struct ProposalResult {
    std::vector<Annotation> proposals;
    std::vector<std::string> warnings;
};

// Derives hand-wash proposals from ground-truth cues: consecutive button
// rising-edge pairs become [press, press] intervals, accepted when the span
// is at most max_wash_s and (if an RSSI channel exists) the mean beacon
// RSSI over the span stays above rssi_floor. RSSI coverage is sampled on a
// 1 s grid; grid points with no sample within 0.5 s count as
// rssi_floor - 1, so out-of-range stretches pull the mean below the floor.
ProposalResult propose_annotations(const Recording& rec,
                                   double rssi_floor_dbm = -80.0,
                                   double max_wash_s = 90.0);

enum class IssueKind {
    rate_deviation,
    channel_gap,
    annotation_overlap,
    duration_out_of_range,
};

std::string_view issue_kind_name(IssueKind k);

struct ValidationIssue {
    IssueKind kind{};
    std::optional<ChannelId> channel;
    int64_t t_ms = -1;  // location, where meaningful
    std::string message;
};

// Non-throwing integrity scan: rate deviation > 20 % of nominal, channel
// gaps > 5x the nominal period, overlapping hand-wash annotations, and
// hand-wash durations outside [3 s, 120 s].
std::vector<ValidationIssue> validate_recording(const Recording& rec);

// Line-oriented annotation document: one header row, then
// `start_s<TAB>end_s<TAB>kind<TAB>source` with seconds at 3 decimals,
// ordered by start. 3 decimals keep integer-millisecond times exact.
std::string export_annotations(const Recording& rec);
std::vector<Annotation> parse_annotation_document(std::string_view doc);

}  // namespace washdet
