#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace washdet::rf {

// Row-major numeric view plus optional labels (1 = wash). The forest never
// owns data; callers keep the matrix alive.
struct DataView {
    const double* values = nullptr;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    const uint8_t* labels = nullptr;

    double at(std::size_t r, std::size_t c) const { return values[r * n_cols + c]; }
    const double* row(std::size_t r) const { return values + r * n_cols; }
};

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0;           // 0 = unlimited
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    int features_per_split = 0;  // 0 = round(sqrt(n_features))
    double bootstrap_fraction = 1.0;
    uint64_t seed = 0;
};

// Axis-aligned binary tree; nodes in preorder. Leaves carry bootstrap class
// counts; leaf ties predict the positive class.
struct TreeNode {
    int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int32_t left = -1;
    int32_t right = -1;
    uint64_t count0 = 0;
    uint64_t count1 = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;

    uint8_t predict_row(const double* row) const;
};

struct Forest {
    ForestParams params;
    std::size_t n_features = 0;
    std::vector<Tree> trees;
};

// 1 - sum p_i^2 over the two classes; in [0, 0.5]. Throws on a zero total.
double gini_impurity(uint64_t count0, uint64_t count1);

struct SplitDecision {
    int feature = -1;
    double threshold = 0.0;
    double weighted_gini = 0.0;
};

// Exhaustive search over the candidate features and the midpoints between
// consecutive distinct sorted values; minimizes weighted child Gini. Ties
// break to the lower feature index, then the lower threshold. Returns
// nullopt when no split reduces the impurity.
std::optional<SplitDecision> best_split(const DataView& data,
                                        std::span<const uint32_t> rows,
                                        std::span<const int> candidate_features,
                                        int min_samples_leaf = 1);

// Bagged CART ensemble. Tree i draws its bootstrap and feature subsamples
// from a stream derived from (seed, i) alone, so results are identical for
// any thread count.
Forest train_forest(const DataView& data, const ForestParams& params,
                    int n_threads = 1);

// Majority vote; vote ties go to the positive class. Throws on a column
// count mismatch.
std::vector<uint8_t> predict(const Forest& forest, const DataView& rows);

// Versioned structured-text model format; thresholds keep full precision so
// load -> predict equals in-memory predict.
std::string serialize_forest(const Forest& forest);
Forest parse_forest(std::string_view text);

enum class DummyStrategy { most_frequent, stratified, uniform, always_positive };
inline constexpr int kDummyStrategyCount = 4;

std::string_view dummy_strategy_name(DummyStrategy s);

struct DummyModel {
    DummyStrategy strategy{};
    double p_wash = 0.0;   // training prevalence of the positive class
    uint8_t majority = 0;  // tie pinned to positive
    uint64_t seed = 0;
};

DummyModel train_dummy(std::span<const uint8_t> y, DummyStrategy strategy,
                       uint64_t seed);
std::vector<uint8_t> predict_dummy(const DummyModel& model, std::size_t n);

}  // namespace washdet::rf
