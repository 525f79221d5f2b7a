#include "washdet/recording.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "washdet/kernels.hpp"

namespace washdet {

namespace {

constexpr std::string_view kChannelNames[kChannelCount] = {
    "acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y", "gyro_z",
    "humidity", "temperature", "pressure", "beacon_rssi", "button",
};

constexpr double kImuRateHz = 52.0;
constexpr double kAtmoRateHz = 1.0;

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

}  // namespace

std::string_view channel_name(ChannelId id) {
    return kChannelNames[static_cast<int>(id)];
}

std::optional<ChannelId> channel_from_name(std::string_view name) {
    for (int i = 0; i < kChannelCount; ++i)
        if (kChannelNames[i] == name) return static_cast<ChannelId>(i);
    return std::nullopt;
}

double nominal_rate_hz(ChannelId id) {
    switch (id) {
        case ChannelId::acc_x:
        case ChannelId::acc_y:
        case ChannelId::acc_z:
        case ChannelId::gyro_x:
        case ChannelId::gyro_y:
        case ChannelId::gyro_z:
            return kImuRateHz;
        case ChannelId::humidity:
        case ChannelId::temperature:
        case ChannelId::pressure:
            return kAtmoRateHz;
        case ChannelId::beacon_rssi:
        case ChannelId::button:
            return 0.0;
    }
    return 0.0;
}

std::string_view annotation_kind_name(AnnotationKind k) {
    switch (k) {
        case AnnotationKind::hand_wash: return "hand_wash";
        case AnnotationKind::walk: return "walk";
        case AnnotationKind::stairs: return "stairs";
        case AnnotationKind::other_adl: return "other_adl";
    }
    return "?";
}

std::optional<AnnotationKind> annotation_kind_from_name(std::string_view name) {
    for (auto k : {AnnotationKind::hand_wash, AnnotationKind::walk,
                   AnnotationKind::stairs, AnnotationKind::other_adl})
        if (annotation_kind_name(k) == name) return k;
    return std::nullopt;
}

std::string_view annotation_source_name(AnnotationSource s) {
    return s == AnnotationSource::manual ? "manual" : "proposed";
}

std::optional<AnnotationSource> annotation_source_from_name(std::string_view name) {
    if (name == "manual") return AnnotationSource::manual;
    if (name == "proposed") return AnnotationSource::proposed;
    return std::nullopt;
}

std::string_view day_condition_name(DayCondition c) {
    switch (c) {
        case DayCondition::rainy: return "rainy";
        case DayCondition::sunny: return "sunny";
        case DayCondition::cloudy: return "cloudy";
    }
    return "?";
}

std::optional<DayCondition> day_condition_from_name(std::string_view name) {
    for (auto c : {DayCondition::rainy, DayCondition::sunny, DayCondition::cloudy})
        if (day_condition_name(c) == name) return c;
    return std::nullopt;
}

std::string_view issue_kind_name(IssueKind k) {
    switch (k) {
        case IssueKind::rate_deviation: return "rate_deviation";
        case IssueKind::channel_gap: return "channel_gap";
        case IssueKind::annotation_overlap: return "annotation_overlap";
        case IssueKind::duration_out_of_range: return "duration_out_of_range";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// CSV helpers. Cells are plain decimal with '.' radix point; std::from_chars
// is locale-independent by construction.

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

double parse_double_cell(std::string_view cell, const std::string& file, int row,
                         int col) {
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() ||
        !std::isfinite(v))
        fail("malformed numeric cell in " + file + " at row " + std::to_string(row) +
             ", column " + std::to_string(col) + ": '" + std::string(cell) + "'");
    return v;
}

int64_t parse_int_cell(std::string_view cell, const std::string& file, int row,
                       int col) {
    int64_t v = 0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        fail("malformed integer cell in " + file + " at row " + std::to_string(row) +
             ", column " + std::to_string(col) + ": '" + std::string(cell) + "'");
    return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::string format_double(double v) {
    // shortest representation that round-trips exactly
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

ChannelSeries parse_channel_csv(const std::filesystem::path& path, ChannelId id) {
    ChannelSeries series;
    series.id = id;
    const auto lines = read_lines(path);
    if (lines.empty() || lines[0] != "t_ms,value")
        fail("bad header in " + path.string() + " (expected 't_ms,value')");
    const std::string fname = path.filename().string();
    series.t_ms.reserve(lines.size());
    series.value.reserve(lines.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto cells = split_csv_line(lines[i]);
        const int row = static_cast<int>(i);
        if (cells.size() != 2)
            fail("expected 2 cells in " + fname + " at row " + std::to_string(row));
        const int64_t t = parse_int_cell(cells[0], fname, row, 1);
        const double v = parse_double_cell(cells[1], fname, row, 2);
        if (!series.t_ms.empty() && t <= series.t_ms.back())
            fail("non-monotone timestamps in channel " +
                 std::string(channel_name(id)) + " at row " + std::to_string(row));
        series.t_ms.push_back(t);
        series.value.push_back(v);
    }
    return series;
}

}  // namespace

// ---------------------------------------------------------------------------

Recording parse_recording(const std::filesystem::path& dir,
                          std::vector<std::string>* warnings) {
    if (!std::filesystem::is_directory(dir))
        fail("recording bundle is not a directory: " + dir.string());

    Recording rec;

    // meta.csv
    {
        const auto path = dir / "meta.csv";
        const auto lines = read_lines(path);
        if (lines.empty() || lines[0] != "key,value")
            fail("bad header in " + path.string() + " (expected 'key,value')");
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            const auto cells = split_csv_line(lines[i]);
            if (cells.size() != 2)
                fail("expected 2 cells in meta.csv at row " + std::to_string(i));
            const std::string key(cells[0]);
            const std::string value(cells[1]);
            const int row = static_cast<int>(i);
            if (key == "participant_id") {
                rec.meta.participant_id = value;
            } else if (key == "day_condition") {
                const auto c = day_condition_from_name(value);
                if (!c) fail("unknown day_condition '" + value + "' in meta.csv");
                rec.meta.day_condition = *c;
            } else if (key == "outdoor_temp_c") {
                rec.meta.outdoor_temp_c = parse_double_cell(cells[1], "meta.csv", row, 2);
            } else if (key == "outdoor_rh_percent") {
                rec.meta.outdoor_rh_percent =
                    parse_double_cell(cells[1], "meta.csv", row, 2);
            } else if (key == "outdoor_pressure_hpa") {
                rec.meta.outdoor_pressure_hpa =
                    parse_double_cell(cells[1], "meta.csv", row, 2);
            } else if (key == "duration_ms") {
                rec.duration_ms = parse_int_cell(cells[1], "meta.csv", row, 2);
            } else if (warnings) {
                warnings->push_back("meta.csv: unknown key '" + key + "' ignored");
            }
        }
    }
    if (rec.meta.participant_id.empty()) fail("meta.csv: missing participant_id");
    if (rec.duration_ms <= 0) fail("meta.csv: missing or non-positive duration_ms");
    if (rec.meta.outdoor_temp_c < -40.0 || rec.meta.outdoor_temp_c > 60.0)
        fail("meta.csv: outdoor_temp_c out of range [-40, 60]");
    if (rec.meta.outdoor_rh_percent < 0.0 || rec.meta.outdoor_rh_percent > 100.0)
        fail("meta.csv: outdoor_rh_percent out of range [0, 100]");
    if (rec.meta.outdoor_pressure_hpa < 850.0 || rec.meta.outdoor_pressure_hpa > 1100.0)
        fail("meta.csv: outdoor_pressure_hpa out of range [850, 1100]");

    // channel files
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    for (const auto& path : files) {
        const std::string stem = path.stem().string();
        if (stem == "meta" || stem == "annotations") continue;
        const auto id = channel_from_name(stem);
        if (!id) {
            if (warnings)
                warnings->push_back("unknown channel file '" + path.filename().string() +
                                    "' ignored");
            continue;
        }
        auto series = parse_channel_csv(path, *id);
        if (!series.t_ms.empty() && series.t_ms.back() > rec.duration_ms)
            fail("channel " + std::string(channel_name(*id)) +
                 " has timestamps beyond duration_ms");
        if (!series.t_ms.empty() && series.t_ms.front() < 0)
            fail("channel " + std::string(channel_name(*id)) + " has negative timestamps");
        rec.channels[static_cast<int>(*id)] = std::move(series);
    }

    for (int i = 0; i < kMlChannelCount; ++i)
        if (!rec.channels[i])
            fail("missing channel " + std::string(kChannelNames[i]));

    // annotations.csv (optional file; required channels already checked)
    {
        const auto path = dir / "annotations.csv";
        if (std::filesystem::exists(path)) {
            const auto lines = read_lines(path);
            if (lines.empty() || lines[0] != "start_ms,end_ms,kind,source")
                fail("bad header in " + path.string());
            for (std::size_t i = 1; i < lines.size(); ++i) {
                if (lines[i].empty()) continue;
                const auto cells = split_csv_line(lines[i]);
                if (cells.size() != 4)
                    fail("expected 4 cells in annotations.csv at row " + std::to_string(i));
                const int row = static_cast<int>(i);
                Annotation a;
                a.start_ms = parse_int_cell(cells[0], "annotations.csv", row, 1);
                a.end_ms = parse_int_cell(cells[1], "annotations.csv", row, 2);
                const auto kind = annotation_kind_from_name(cells[2]);
                if (!kind)
                    fail("unknown annotation kind '" + std::string(cells[2]) +
                         "' in annotations.csv at row " + std::to_string(row));
                a.kind = *kind;
                const auto source = annotation_source_from_name(cells[3]);
                if (!source)
                    fail("unknown annotation source '" + std::string(cells[3]) +
                         "' in annotations.csv at row " + std::to_string(row));
                a.source = *source;
                if (a.end_ms <= a.start_ms)
                    fail("annotation with end_ms <= start_ms at row " + std::to_string(row));
                if (a.start_ms < 0 || a.end_ms > rec.duration_ms)
                    fail("annotation outside [0, duration_ms] at row " + std::to_string(row));
                rec.annotations.push_back(a);
            }
        }
    }
    std::sort(rec.annotations.begin(), rec.annotations.end(),
              [](const Annotation& a, const Annotation& b) {
                  return a.start_ms < b.start_ms;
              });
    for (std::size_t i = 1; i < rec.annotations.size(); ++i) {
        const auto& prev = rec.annotations[i - 1];
        const auto& cur = rec.annotations[i];
        if (prev.kind == AnnotationKind::hand_wash &&
            cur.kind == AnnotationKind::hand_wash && cur.start_ms < prev.end_ms)
            fail("overlapping hand_wash annotations at " + std::to_string(cur.start_ms) +
                 " ms");
    }
    return rec;
}

void write_recording(const Recording& rec, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    {
        std::ofstream out(dir / "meta.csv");
        out << "key,value\n";
        out << "participant_id," << rec.meta.participant_id << "\n";
        out << "day_condition," << day_condition_name(rec.meta.day_condition) << "\n";
        out << "outdoor_temp_c," << format_double(rec.meta.outdoor_temp_c) << "\n";
        out << "outdoor_rh_percent," << format_double(rec.meta.outdoor_rh_percent) << "\n";
        out << "outdoor_pressure_hpa," << format_double(rec.meta.outdoor_pressure_hpa)
            << "\n";
        out << "duration_ms," << rec.duration_ms << "\n";
        if (!out) fail("failed to write " + (dir / "meta.csv").string());
    }
    {
        std::ofstream out(dir / "annotations.csv");
        out << "start_ms,end_ms,kind,source\n";
        auto sorted = rec.annotations;
        std::sort(sorted.begin(), sorted.end(),
                  [](const Annotation& a, const Annotation& b) {
                      return a.start_ms < b.start_ms;
                  });
        for (const auto& a : sorted)
            out << a.start_ms << "," << a.end_ms << "," << annotation_kind_name(a.kind)
                << "," << annotation_source_name(a.source) << "\n";
        if (!out) fail("failed to write " + (dir / "annotations.csv").string());
    }
    for (int i = 0; i < kChannelCount; ++i) {
        const auto& c = rec.channels[i];
        if (!c) continue;
        const auto path = dir / (std::string(kChannelNames[i]) + ".csv");
        std::ofstream out(path);
        out << "t_ms,value\n";
        std::string buf;
        for (std::size_t j = 0; j < c->size(); ++j) {
            buf.clear();
            buf += std::to_string(c->t_ms[j]);
            buf += ',';
            buf += format_double(c->value[j]);
            buf += '\n';
            out << buf;
        }
        if (!out) fail("failed to write " + path.string());
    }
}

// ---------------------------------------------------------------------------

namespace {

// Sample nearest to t within half a grid step, else "missing".
std::optional<double> nearest_sample(const ChannelSeries& s, int64_t t,
                                     int64_t max_dist_ms) {
    if (s.t_ms.empty()) return std::nullopt;
    const auto it = std::lower_bound(s.t_ms.begin(), s.t_ms.end(), t);
    int64_t best_dt = std::numeric_limits<int64_t>::max();
    std::size_t best = 0;
    if (it != s.t_ms.end()) {
        best = static_cast<std::size_t>(it - s.t_ms.begin());
        best_dt = *it - t;
    }
    if (it != s.t_ms.begin()) {
        const auto prev = static_cast<std::size_t>(it - s.t_ms.begin()) - 1;
        const int64_t dt = t - s.t_ms[prev];
        if (dt < best_dt) {
            best = prev;
            best_dt = dt;
        }
    }
    if (best_dt > max_dist_ms) return std::nullopt;
    return s.value[best];
}

}  // namespace

ProposalResult propose_annotations(const Recording& rec, double rssi_floor_dbm,
                                   double max_wash_s) {
    const ChannelSeries* button = rec.channel(ChannelId::button);
    const ChannelSeries* rssi = rec.channel(ChannelId::beacon_rssi);
    if (!button && !rssi) fail("no ground-truth cues");

    ProposalResult result;
    if (!button) {
        result.warnings.push_back(
            "no button channel: RSSI alone cannot delimit washes, no proposals");
        return result;
    }

    // rising edges: 0 -> 1 transitions; state before the first sample is 0
    std::vector<int64_t> edges;
    double prev = 0.0;
    for (std::size_t i = 0; i < button->size(); ++i) {
        const double v = button->value[i];
        if (prev == 0.0 && v != 0.0) edges.push_back(button->t_ms[i]);
        prev = v;
    }

    const auto span_ok = [&](int64_t start, int64_t end) {
        return static_cast<double>(end - start) <= max_wash_s * 1000.0;
    };

    for (std::size_t i = 0; i + 1 < edges.size(); i += 2) {
        const int64_t start = edges[i];
        const int64_t end = edges[i + 1];
        if (!span_ok(start, end)) {
            result.warnings.push_back("press pair at " + std::to_string(start) + ".." +
                                      std::to_string(end) + " ms exceeds max_wash_s, skipped");
            continue;
        }
        if (rssi) {
            // mean RSSI over the span on a 1 s grid; missing coverage counts
            // as rssi_floor - 1 (out of range == below any floor)
            double sum = 0.0;
            int count = 0;
            for (int64_t t = start; t <= end; t += 1000) {
                const auto v = nearest_sample(*rssi, t, 500);
                sum += v.value_or(rssi_floor_dbm - 1.0);
                ++count;
            }
            if (count > 0 && sum / count < rssi_floor_dbm) {
                result.warnings.push_back("press pair at " + std::to_string(start) + ".." +
                                          std::to_string(end) +
                                          " ms rejected: mean beacon RSSI below floor");
                continue;
            }
        }
        result.proposals.push_back(Annotation{start, end, AnnotationKind::hand_wash,
                                              AnnotationSource::proposed});
    }
    if (edges.size() % 2 != 0)
        result.warnings.push_back("odd trailing button press at " +
                                  std::to_string(edges.back()) + " ms has no partner");
    return result;
}

std::vector<ValidationIssue> validate_recording(const Recording& rec) {
    std::vector<ValidationIssue> issues;

    for (int i = 0; i < kChannelCount; ++i) {
        const auto& c = rec.channels[i];
        if (!c) continue;
        const auto id = static_cast<ChannelId>(i);
        const double rate = nominal_rate_hz(id);
        if (rate <= 0.0) continue;  // cue channels: rate unconstrained
        const double nominal_ms = 1000.0 / rate;

        if (c->size() < 2) {
            issues.push_back({IssueKind::rate_deviation, id, -1,
                              std::string(channel_name(id)) +
                                  ": too few samples to establish a rate"});
            continue;
        }
        std::vector<double> gaps(c->size() - 1);
        for (std::size_t j = 1; j < c->size(); ++j)
            gaps[j - 1] = static_cast<double>(c->t_ms[j] - c->t_ms[j - 1]);
        std::vector<double> sorted = gaps;
        std::sort(sorted.begin(), sorted.end());
        const double median = kern::quantile_sorted(sorted, 0.5);
        if (std::abs(median - nominal_ms) > 0.2 * nominal_ms) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "%s: median inter-sample gap %.3f ms deviates more than 20%% "
                          "from nominal %.3f ms",
                          std::string(channel_name(id)).c_str(), median, nominal_ms);
            issues.push_back({IssueKind::rate_deviation, id, -1, buf});
        }
        for (std::size_t j = 0; j < gaps.size(); ++j) {
            if (gaps[j] > 5.0 * nominal_ms) {
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              "%s: gap of %.0f ms (> 5x nominal period) after t=%lld ms",
                              std::string(channel_name(id)).c_str(), gaps[j],
                              static_cast<long long>(c->t_ms[j]));
                issues.push_back({IssueKind::channel_gap, id, c->t_ms[j], buf});
            }
        }
    }

    std::vector<Annotation> washes;
    for (const auto& a : rec.annotations)
        if (a.kind == AnnotationKind::hand_wash) washes.push_back(a);
    std::sort(washes.begin(), washes.end(), [](const Annotation& a, const Annotation& b) {
        return a.start_ms < b.start_ms;
    });
    for (std::size_t i = 1; i < washes.size(); ++i) {
        if (washes[i].start_ms < washes[i - 1].end_ms)
            issues.push_back({IssueKind::annotation_overlap, std::nullopt,
                              washes[i].start_ms,
                              "hand_wash annotations overlap at " +
                                  std::to_string(washes[i].start_ms) + " ms"});
    }
    for (const auto& w : washes) {
        const double dur_s = static_cast<double>(w.end_ms - w.start_ms) / 1000.0;
        if (dur_s < 3.0 || dur_s > 120.0) {
            char buf[120];
            std::snprintf(buf, sizeof buf,
                          "hand_wash of %.2f s at t=%lld ms outside [3 s, 120 s]", dur_s,
                          static_cast<long long>(w.start_ms));
            issues.push_back({IssueKind::duration_out_of_range, std::nullopt, w.start_ms, buf});
        }
    }
    return issues;
}

std::string export_annotations(const Recording& rec) {
    auto sorted = rec.annotations;
    std::sort(sorted.begin(), sorted.end(), [](const Annotation& a, const Annotation& b) {
        return a.start_ms < b.start_ms;
    });
    std::string doc = "start_s\tend_s\tkind\tsource\n";
    char buf[160];
    for (const auto& a : sorted) {
        std::snprintf(buf, sizeof buf, "%.3f\t%.3f\t%s\t%s\n",
                      static_cast<double>(a.start_ms) / 1000.0,
                      static_cast<double>(a.end_ms) / 1000.0,
                      std::string(annotation_kind_name(a.kind)).c_str(),
                      std::string(annotation_source_name(a.source)).c_str());
        doc += buf;
    }
    return doc;
}

std::vector<Annotation> parse_annotation_document(std::string_view doc) {
    std::vector<Annotation> out;
    std::size_t pos = 0;
    int row = 0;
    while (pos < doc.size()) {
        std::size_t eol = doc.find('\n', pos);
        if (eol == std::string_view::npos) eol = doc.size();
        std::string_view line = doc.substr(pos, eol - pos);
        pos = eol + 1;
        ++row;
        if (line.empty() || line[0] == '#') continue;
        if (line.starts_with("start_s")) continue;  // header row
        std::array<std::string_view, 4> cells;
        std::size_t start = 0;
        int n = 0;
        for (; n < 4; ++n) {
            const std::size_t tab = line.find('\t', start);
            if (tab == std::string_view::npos) {
                cells[n] = line.substr(start);
                ++n;
                break;
            }
            cells[n] = line.substr(start, tab - start);
            start = tab + 1;
        }
        if (n != 4) fail("annotation document: expected 4 fields at row " +
                         std::to_string(row));
        const double start_s = parse_double_cell(cells[0], "annotation document", row, 1);
        const double end_s = parse_double_cell(cells[1], "annotation document", row, 2);
        const auto kind = annotation_kind_from_name(cells[2]);
        const auto source = annotation_source_from_name(cells[3]);
        if (!kind || !source)
            fail("annotation document: bad kind/source at row " + std::to_string(row));
        out.push_back(Annotation{static_cast<int64_t>(std::llround(start_s * 1000.0)),
                                 static_cast<int64_t>(std::llround(end_s * 1000.0)),
                                 *kind, *source});
    }
    return out;
}

}  // namespace washdet
