#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "washdet/features.hpp"
#include "washdet/forest.hpp"
#include "washdet/recording.hpp"
#include "washdet/rng.hpp"

namespace washdet::ev {

enum class Task : int { loso = 0, personalized = 1 };

std::string_view task_name(Task t);

struct Fold {
    std::vector<uint32_t> train;
    std::vector<uint32_t> test;
    std::string descriptor;
};

// One fold per participant: test = that participant's rows, train = all
// others. Throws with fewer than two participants.
std::vector<Fold> loso_folds(const feat::FeatureMatrix& m);

// Stratified random split of one participant's rows: round(test_fraction*n)
// rows to test, both classes kept in train (and in test when the
// participant has at least two of each). Deterministic in the seed.
Fold personalized_split(const feat::FeatureMatrix& m, int participant_index,
                        double test_fraction, uint64_t seed);

struct ConfusionCounts {
    uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

ConfusionCounts confusion(std::span<const uint8_t> truth,
                          std::span<const uint8_t> predicted);

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Positive class = wash; any 0/0 is 0 by convention.
PRF f1_score(const ConfusionCounts& c);

struct AblationConfig {
    std::vector<double> windows_s{2.5, 5.0};
    std::vector<feat::SensorSubset> subsets{feat::all_subsets().begin(),
                                            feat::all_subsets().end()};
    bool run_loso = true;
    bool run_personalized = true;
    int repetitions = 5;
    double test_fraction = 1.0 / 3.0;
    double overlap_threshold = 0.5;
    rf::ForestParams forest;  // per-item seeds are derived from base_seed
    uint64_t base_seed = 0;
    int threads = 0;  // 0 = hardware; never affects results
};

struct SplitRecord {
    Task task{};
    double window_s = 0.0;
    feat::SensorSubset subset{};
    int rep = 0;
    std::string fold;
    ConfusionCounts counts;
    PRF prf;
};

struct ChanceRecord {
    Task task{};
    double window_s = 0.0;
    int rep = 0;
    std::string fold;
    rf::DummyStrategy strategy{};
    ConfusionCounts counts;
    PRF prf;
};

// F1 per (task x window x subset) plus the dummy-classifier chance upper
// bound per (task x window). Cells are fold-mean F1 averaged over
// repetitions; the pooled-confusion variant is kept alongside for the
// detailed report.
struct ResultsTable {
    std::vector<Task> tasks;
    std::vector<double> windows_s;
    std::vector<feat::SensorSubset> subsets;
    int repetitions = 0;

    std::vector<double> mean_f1;    // [task][window][subset]
    std::vector<double> pooled_f1;  // [task][window][subset]
    std::vector<double> rep_f1;     // [task][window][subset][rep]
    // best dummy F1 over strategies and splits within one repetition,
    // averaged over repetitions like every other cell
    std::vector<double> chance;      // [task][window]
    std::vector<double> chance_rep;  // [task][window][rep]

    std::vector<SplitRecord> details;
    std::vector<ChanceRecord> chance_details;

    std::size_t cell_index(std::size_t t, std::size_t w, std::size_t s) const {
        return (t * windows_s.size() + w) * subsets.size() + s;
    }
    double f1(Task task, double window_s, feat::SensorSubset subset) const;
    double chance_for(Task task, double window_s) const;
};

ResultsTable run_ablation(std::span<const Recording> recordings,
                          const AblationConfig& cfg);

// header_comment, when non-empty, is written as leading `# ...` lines.
void write_results_csv(const ResultsTable& t, std::ostream& out,
                       std::string_view header_comment = {});
void write_results_pretty(const ResultsTable& t, std::ostream& out);
void write_details_csv(const ResultsTable& t, std::ostream& out,
                       std::string_view header_comment = {});

// Percentile bootstrap CI of the mean: quantiles of n_boot resample means.
std::pair<double, double> bootstrap_ci(std::span<const double> values, int n_boot,
                                       double level, Rng& rng);

struct AlignedCurve {
    double grid_step_s = 1.0;
    std::vector<double> t_rel_s;
    std::vector<double> mean;
    std::vector<double> ci_low;
    std::vector<double> ci_high;
    std::vector<int> coverage;          // washes contributing per grid point
    std::vector<double> wash_offsets_s;  // wash end relative to onset
    std::size_t n_washes = 0;
    std::vector<std::string> warnings;
};

// Per-wash channel segments over [onset - pre_s, onset + post_s], aligned
// at onset and onset-value subtracted, resampled to the uniform grid by
// nearest sample (distance ties take the earlier sample); mean and
// percentile-bootstrap CI over washes per grid point. Washes running past
// the recording edge are trimmed with a warning.
AlignedCurve event_aligned_curve(std::span<const Recording> recordings,
                                 ChannelId channel, double pre_s, double post_s,
                                 int n_boot, double level, uint64_t seed,
                                 double grid_step_s = 1.0);

void write_curve_csv(const AlignedCurve& c, std::ostream& out,
                     std::string_view header_comment = {});

struct DurationStats {
    std::size_t count = 0;
    double mean_s = 0.0;
    double median_s = 0.0;
    double q1_s = 0.0;
    double q3_s = 0.0;
    double min_s = 0.0;
    double max_s = 0.0;
    double total_recorded_s = 0.0;
    double total_wash_s = 0.0;
    double null_fraction = 0.0;
};

// Summary over all hand_wash annotations; throws when there are none.
DurationStats duration_stats(std::span<const Recording> recordings);

}  // namespace washdet::ev
