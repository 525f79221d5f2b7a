#include "washdet/features.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "washdet/kernels.hpp"

namespace washdet::feat {

namespace {

constexpr std::string_view kFeatureNames[kFeatureCount] = {
    "mean", "std", "min", "max", "slope", "median",
    "iqr",  "q1",  "q3",  "avg_crossings", "skewness", "kurtosis",
};

constexpr ChannelId kAcc[] = {ChannelId::acc_x, ChannelId::acc_y, ChannelId::acc_z};
constexpr ChannelId kAccHtp[] = {ChannelId::acc_x,    ChannelId::acc_y,
                                 ChannelId::acc_z,    ChannelId::humidity,
                                 ChannelId::temperature, ChannelId::pressure};
constexpr ChannelId kAccGyro[] = {ChannelId::acc_x,  ChannelId::acc_y,
                                  ChannelId::acc_z,  ChannelId::gyro_x,
                                  ChannelId::gyro_y, ChannelId::gyro_z};
constexpr ChannelId kAccGyroH[] = {ChannelId::acc_x,  ChannelId::acc_y,
                                   ChannelId::acc_z,  ChannelId::gyro_x,
                                   ChannelId::gyro_y, ChannelId::gyro_z,
                                   ChannelId::humidity};
constexpr ChannelId kAccGyroT[] = {ChannelId::acc_x,  ChannelId::acc_y,
                                   ChannelId::acc_z,  ChannelId::gyro_x,
                                   ChannelId::gyro_y, ChannelId::gyro_z,
                                   ChannelId::temperature};
constexpr ChannelId kAccGyroP[] = {ChannelId::acc_x,  ChannelId::acc_y,
                                   ChannelId::acc_z,  ChannelId::gyro_x,
                                   ChannelId::gyro_y, ChannelId::gyro_z,
                                   ChannelId::pressure};
constexpr ChannelId kAll[] = {ChannelId::acc_x,      ChannelId::acc_y,
                              ChannelId::acc_z,      ChannelId::gyro_x,
                              ChannelId::gyro_y,     ChannelId::gyro_z,
                              ChannelId::humidity,   ChannelId::temperature,
                              ChannelId::pressure};

constexpr SensorSubset kAllSubsets[kSubsetCount] = {
    SensorSubset::A,    SensorSubset::A_HTP, SensorSubset::AG,  SensorSubset::AG_H,
    SensorSubset::AG_T, SensorSubset::AG_P,  SensorSubset::ALL,
};

constexpr std::string_view kSubsetNames[kSubsetCount] = {
    "A", "A+HTP", "AG", "AG+H", "AG+T", "AG+P", "ALL",
};

}  // namespace

std::string_view feature_name(Feature f) {
    return kFeatureNames[static_cast<int>(f)];
}

std::span<const ChannelId> subset_channels(SensorSubset s) {
    switch (s) {
        case SensorSubset::A: return kAcc;
        case SensorSubset::A_HTP: return kAccHtp;
        case SensorSubset::AG: return kAccGyro;
        case SensorSubset::AG_H: return kAccGyroH;
        case SensorSubset::AG_T: return kAccGyroT;
        case SensorSubset::AG_P: return kAccGyroP;
        case SensorSubset::ALL: return kAll;
    }
    return kAll;
}

std::string_view subset_name(SensorSubset s) {
    return kSubsetNames[static_cast<int>(s)];
}

std::optional<SensorSubset> subset_from_name(std::string_view name) {
    for (int i = 0; i < kSubsetCount; ++i)
        if (kSubsetNames[i] == name) return static_cast<SensorSubset>(i);
    return std::nullopt;
}

std::span<const SensorSubset> all_subsets() { return kAllSubsets; }

FeatureBlock channel_features(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("empty window channel");
    const auto s = kern::summarize(xs);
    const double n = static_cast<double>(s.n);
    const double variance = s.m2 / n;

    FeatureBlock b;
    auto set = [&b](Feature f, double v) { b.values[static_cast<int>(f)] = v; };
    set(Feature::mean, s.mean);
    set(Feature::std_dev, std::sqrt(variance));
    set(Feature::min, s.min);
    set(Feature::max, s.max);
    set(Feature::slope, xs.back() - xs.front());

    thread_local std::vector<double> scratch;
    scratch.assign(xs.begin(), xs.end());
    std::sort(scratch.begin(), scratch.end());
    const double q1 = kern::quantile_sorted(scratch, 0.25);
    const double q3 = kern::quantile_sorted(scratch, 0.75);
    set(Feature::median, kern::quantile_sorted(scratch, 0.5));
    set(Feature::q1, q1);
    set(Feature::q3, q3);
    set(Feature::iqr, q3 - q1);

    set(Feature::avg_crossings,
        static_cast<double>(kern::count_mean_crossings(xs, s.mean)));

    // variance below 1e-12 is the pinned degenerate convention
    if (variance < 1e-12) {
        set(Feature::skewness, 0.0);
        set(Feature::kurtosis, 0.0);
    } else {
        set(Feature::skewness, (s.m3 / n) / std::pow(variance, 1.5));
        set(Feature::kurtosis, (s.m4 / n) / (variance * variance) - 3.0);
    }
    return b;
}

std::vector<Window> make_windows(const Recording& rec, double window_s) {
    if (!(window_s > 0.0)) throw std::invalid_argument("window_s must be positive");
    const auto win_ms = static_cast<int64_t>(std::llround(window_s * 1000.0));
    if (win_ms <= 0) throw std::invalid_argument("window_s must be positive");
    const int64_t count = rec.duration_ms / win_ms;

    std::vector<Window> windows(static_cast<std::size_t>(count));
    std::array<std::size_t, kMlChannelCount> cursor{};
    for (int64_t k = 0; k < count; ++k) {
        auto& w = windows[static_cast<std::size_t>(k)];
        w.start_ms = k * win_ms;
        w.end_ms = (k + 1) * win_ms;
        for (int c = 0; c < kMlChannelCount; ++c) {
            const ChannelSeries* series = rec.channel(static_cast<ChannelId>(c));
            if (!series) continue;
            std::size_t i = cursor[c];
            // windows are contiguous from t=0, so each cursor only advances
            const std::size_t begin = i;
            while (i < series->size() && series->t_ms[i] < w.end_ms) ++i;
            cursor[c] = i;
            w.slices[static_cast<std::size_t>(c)] = {
                static_cast<uint32_t>(begin), static_cast<uint32_t>(i - begin)};
        }
    }
    return windows;
}

uint8_t label_window(int64_t start_ms, int64_t end_ms,
                     std::span<const Annotation> annotations,
                     double overlap_threshold) {
    int64_t overlap = 0;
    for (const auto& a : annotations) {
        if (a.kind != AnnotationKind::hand_wash) continue;
        const int64_t lo = std::max(start_ms, a.start_ms);
        const int64_t hi = std::min(end_ms, a.end_ms);
        if (hi > lo) overlap += hi - lo;
    }
    const double fraction =
        static_cast<double>(overlap) / static_cast<double>(end_ms - start_ms);
    return fraction >= overlap_threshold ? 1 : 0;
}

void label_windows(std::vector<Window>& windows,
                   std::span<const Annotation> annotations,
                   double overlap_threshold) {
    for (auto& w : windows)
        w.label = label_window(w.start_ms, w.end_ms, annotations, overlap_threshold);
}

FeatureMatrix assemble_matrix(std::span<const Recording> recordings, double window_s,
                              SensorSubset subset, double overlap_threshold,
                              std::span<const std::string> recording_names) {
    if (!recording_names.empty() && recording_names.size() != recordings.size())
        throw std::invalid_argument("recording_names size mismatch");

    const auto channels = subset_channels(subset);

    std::vector<std::string> names(recordings.size());
    for (std::size_t i = 0; i < recordings.size(); ++i)
        names[i] = recording_names.empty() ? "r" + std::to_string(i)
                                           : recording_names[i];

    // deterministic row order: (participant, recording name)
    std::vector<std::size_t> order(recordings.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& pa = recordings[a].meta.participant_id;
        const auto& pb = recordings[b].meta.participant_id;
        if (pa != pb) return pa < pb;
        return names[a] < names[b];
    });

    FeatureMatrix m;
    m.n_cols = channels.size() * kFeatureCount;
    m.column_names.reserve(m.n_cols);
    for (const ChannelId c : channels)
        for (int f = 0; f < kFeatureCount; ++f)
            m.column_names.push_back(std::string(channel_name(c)) + "_" +
                                     std::string(kFeatureNames[f]));

    for (const std::size_t idx : order) {
        const Recording& rec = recordings[idx];
        for (const ChannelId c : channels)
            if (!rec.has(c))
                throw std::runtime_error("recording " + names[idx] +
                                         " missing channel " +
                                         std::string(channel_name(c)));

        auto windows = make_windows(rec, window_s);
        label_windows(windows, rec.annotations, overlap_threshold);

        int32_t participant_idx;
        {
            const auto it = std::find(m.participants.begin(), m.participants.end(),
                                      rec.meta.participant_id);
            participant_idx = static_cast<int32_t>(it - m.participants.begin());
            if (it == m.participants.end())
                m.participants.push_back(rec.meta.participant_id);
        }
        m.recordings.push_back(names[idx]);
        const auto recording_idx = static_cast<int32_t>(m.recordings.size() - 1);

        for (const auto& w : windows) {
            m.row_participant.push_back(participant_idx);
            m.row_recording.push_back(recording_idx);
            m.row_start_ms.push_back(w.start_ms);
            m.row_label.push_back(w.label);
            for (const ChannelId c : channels) {
                const ChannelSeries& series = *rec.channel(c);
                const auto& slice = w.slices[static_cast<std::size_t>(c)];
                const auto block = channel_features(
                    std::span<const double>(series.value).subspan(slice.offset,
                                                                  slice.count));
                m.values.insert(m.values.end(), block.values.begin(),
                                block.values.end());
            }
            ++m.n_rows;
        }
    }
    return m;
}

FeatureMatrix select_subset(const FeatureMatrix& all_matrix, SensorSubset subset) {
    const auto all_channels = subset_channels(SensorSubset::ALL);
    if (all_matrix.n_cols != all_channels.size() * kFeatureCount)
        throw std::invalid_argument("select_subset needs an ALL-subset matrix");
    const auto channels = subset_channels(subset);

    std::vector<std::size_t> cols;
    cols.reserve(channels.size() * kFeatureCount);
    for (const ChannelId c : channels) {
        const auto it = std::find(all_channels.begin(), all_channels.end(), c);
        const auto base =
            static_cast<std::size_t>(it - all_channels.begin()) * kFeatureCount;
        for (int f = 0; f < kFeatureCount; ++f) cols.push_back(base + f);
    }

    FeatureMatrix m;
    m.participants = all_matrix.participants;
    m.recordings = all_matrix.recordings;
    m.row_participant = all_matrix.row_participant;
    m.row_recording = all_matrix.row_recording;
    m.row_start_ms = all_matrix.row_start_ms;
    m.row_label = all_matrix.row_label;
    m.n_rows = all_matrix.n_rows;
    m.n_cols = cols.size();
    m.column_names.reserve(cols.size());
    for (const auto c : cols) m.column_names.push_back(all_matrix.column_names[c]);
    m.values.resize(m.n_rows * m.n_cols);
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        const double* src = all_matrix.row(r);
        double* dst = m.values.data() + r * m.n_cols;
        for (std::size_t c = 0; c < cols.size(); ++c) dst[c] = src[cols[c]];
    }
    return m;
}

void write_matrix_csv(const FeatureMatrix& m, std::ostream& out) {
    out << "participant,recording,start_ms,label";
    for (const auto& name : m.column_names) out << ',' << name;
    out << '\n';
    char buf[40];
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        out << m.participants[static_cast<std::size_t>(m.row_participant[r])] << ','
            << m.recordings[static_cast<std::size_t>(m.row_recording[r])] << ','
            << m.row_start_ms[r] << ',' << static_cast<int>(m.row_label[r]);
        const double* row = m.row(r);
        for (std::size_t c = 0; c < m.n_cols; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", row[c]);
            out << ',' << buf;
        }
        out << '\n';
    }
}

}  // namespace washdet::feat
