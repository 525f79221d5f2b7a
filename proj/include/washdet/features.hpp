#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "washdet/recording.hpp"

namespace washdet::feat {

inline constexpr int kFeatureCount = 12;

// Fixed feature order; also the per-channel column order of every matrix.
enum class Feature : int {
    mean = 0,
    std_dev,
    min,
    max,
    slope,
    median,
    iqr,
    q1,
    q3,
    avg_crossings,
    skewness,
    kurtosis,
};

std::string_view feature_name(Feature f);

struct FeatureBlock {
    std::array<double, kFeatureCount> values{};

    double operator[](Feature f) const { return values[static_cast<int>(f)]; }
};

// The 12 statistics of one window slice at native rate. Conventions: std,
// skewness and kurtosis use population moments; kurtosis is excess; a
// window with variance < 1e-12 has skewness = kurtosis = 0; slope is
// last - first; quartiles interpolate linearly at p*(n-1). Throws on an
// empty slice.
FeatureBlock channel_features(std::span<const double> samples);

struct ChannelSlice {
    uint32_t offset = 0;
    uint32_t count = 0;
};

// Non-overlapping window anchored at t = 0; samples are index ranges into
// the recording's channel arrays, one range per ML channel.
struct Window {
    int64_t start_ms = 0;
    int64_t end_ms = 0;
    uint8_t label = 0;  // 1 = wash
    std::array<ChannelSlice, kMlChannelCount> slices{};
};

// floor(duration / window) windows covering [k*w, (k+1)*w); the trailing
// partial window is dropped. Labels are left 0.
std::vector<Window> make_windows(const Recording& rec, double window_s);

// wash iff the fraction of the window overlapped by hand_wash annotations
// is >= overlap_threshold (boundary inclusive).
uint8_t label_window(int64_t start_ms, int64_t end_ms,
                     std::span<const Annotation> annotations,
                     double overlap_threshold = 0.5);

void label_windows(std::vector<Window>& windows,
                   std::span<const Annotation> annotations,
                   double overlap_threshold = 0.5);

// Sensor subsets of the ablation study. H/T/P = humidity, temperature,
// pressure; the cue channels are never part of a subset.
enum class SensorSubset : int { A = 0, A_HTP, AG, AG_H, AG_T, AG_P, ALL };
inline constexpr int kSubsetCount = 7;

std::span<const ChannelId> subset_channels(SensorSubset s);
std::string_view subset_name(SensorSubset s);
std::optional<SensorSubset> subset_from_name(std::string_view name);
std::span<const SensorSubset> all_subsets();

// Row-major design matrix: one row per window across all recordings with
// (participant, recording, start_ms, label) metadata, columns
// `<channel>_<feature>` in subset-channel x feature order. Rows are ordered
// by (participant, recording, start_ms) so equal inputs give equal bytes.
struct FeatureMatrix {
    std::vector<std::string> participants;  // unique ids, ascending
    std::vector<std::string> recordings;
    std::vector<int32_t> row_participant;
    std::vector<int32_t> row_recording;
    std::vector<int64_t> row_start_ms;
    std::vector<uint8_t> row_label;
    std::vector<std::string> column_names;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> values;

    double at(std::size_t r, std::size_t c) const { return values[r * n_cols + c]; }
    const double* row(std::size_t r) const { return values.data() + r * n_cols; }
};

FeatureMatrix assemble_matrix(std::span<const Recording> recordings, double window_s,
                              SensorSubset subset, double overlap_threshold = 0.5,
                              std::span<const std::string> recording_names = {});

// Column projection of an ALL-subset matrix; avoids recomputing features
// for each subset of the ablation.
FeatureMatrix select_subset(const FeatureMatrix& all_matrix, SensorSubset subset);

void write_matrix_csv(const FeatureMatrix& m, std::ostream& out);

}  // namespace washdet::feat
