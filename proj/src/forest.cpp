#include "washdet/forest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "washdet/rng.hpp"
#include "washdet/threading.hpp"

namespace washdet::rf {

double gini_impurity(uint64_t count0, uint64_t count1) {
    const uint64_t total = count0 + count1;
    if (total == 0) throw std::invalid_argument("gini of an empty node");
    const double n = static_cast<double>(total);
    const double p0 = static_cast<double>(count0) / n;
    const double p1 = static_cast<double>(count1) / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

uint8_t Tree::predict_row(const double* row) const {
    int32_t idx = 0;
    while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
        const auto& node = nodes[static_cast<std::size_t>(idx)];
        idx = row[node.feature] <= node.threshold ? node.left : node.right;
    }
    const auto& leaf = nodes[static_cast<std::size_t>(idx)];
    return leaf.count1 >= leaf.count0 ? 1 : 0;
}

namespace {

struct WeightedRow {
    uint32_t row;
    uint32_t weight;
    uint8_t label;
};

struct SortedValue {
    double value;
    uint32_t weight;
    uint8_t label;
};

// score = sum over children of (n_child - (c0^2 + c1^2) / n_child);
// dividing by the node total gives the weighted Gini. Minimizing the score
// minimizes the weighted Gini.
struct ScanBest {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;
    bool found = false;
};

ScanBest scan_candidates(const DataView& data, std::span<const WeightedRow> samples,
                         std::span<const int> candidates, int min_samples_leaf,
                         std::vector<SortedValue>& scratch) {
    uint64_t total = 0;
    for (const auto& s : samples) total += s.weight;

    ScanBest best;
    for (const int f : candidates) {
        scratch.clear();
        scratch.reserve(samples.size());
        for (const auto& s : samples)
            scratch.push_back(
                {data.at(s.row, static_cast<std::size_t>(f)), s.weight, s.label});
        std::sort(scratch.begin(), scratch.end(),
                  [](const SortedValue& a, const SortedValue& b) {
                      return a.value < b.value;
                  });

        uint64_t left0 = 0, left1 = 0;
        uint64_t total1 = 0;
        for (const auto& v : scratch)
            if (v.label) total1 += v.weight;
        const uint64_t total0 = total - total1;

        for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
            if (scratch[i].label)
                left1 += scratch[i].weight;
            else
                left0 += scratch[i].weight;
            if (scratch[i].value == scratch[i + 1].value) continue;  // not a boundary

            const uint64_t nl = left0 + left1;
            const uint64_t nr = total - nl;
            if (nl < static_cast<uint64_t>(min_samples_leaf) ||
                nr < static_cast<uint64_t>(min_samples_leaf))
                continue;
            const uint64_t right0 = total0 - left0;
            const uint64_t right1 = total1 - left1;
            const double dl = static_cast<double>(nl);
            const double dr = static_cast<double>(nr);
            const double score =
                (dl - (static_cast<double>(left0) * static_cast<double>(left0) +
                       static_cast<double>(left1) * static_cast<double>(left1)) /
                          dl) +
                (dr - (static_cast<double>(right0) * static_cast<double>(right0) +
                       static_cast<double>(right1) * static_cast<double>(right1)) /
                          dr);
            if (!best.found || score < best.score) {
                double thr = (scratch[i].value + scratch[i + 1].value) * 0.5;
                // adjacent doubles can round the midpoint up to the right
                // value; fall back to the left value so `x <= thr` separates
                if (thr >= scratch[i + 1].value) thr = scratch[i].value;
                best.found = true;
                best.feature = f;
                best.threshold = thr;
                best.score = score;
            }
        }
    }
    return best;
}

class TreeBuilder {
public:
    TreeBuilder(const DataView& data, const ForestParams& params, int features_per_split)
        : data_(data), params_(params), fps_(features_per_split) {
        feature_pool_.resize(data.n_cols);
        for (std::size_t i = 0; i < data.n_cols; ++i)
            feature_pool_[i] = static_cast<int>(i);
    }

    Tree build(uint64_t tree_seed) {
        Rng rng(tree_seed);
        const std::size_t n = data_.n_rows;
        const auto draws = static_cast<uint64_t>(std::max<long long>(
            1, std::llround(params_.bootstrap_fraction * static_cast<double>(n))));

        std::vector<uint32_t> multiplicity(n, 0);
        for (uint64_t d = 0; d < draws; ++d)
            ++multiplicity[static_cast<std::size_t>(rng.below(n))];
        samples_.clear();
        for (std::size_t r = 0; r < n; ++r)
            if (multiplicity[r] > 0)
                samples_.push_back({static_cast<uint32_t>(r), multiplicity[r],
                                    data_.labels[r]});

        tree_ = Tree{};
        rng_ = &rng;
        build_node(0, samples_.size(), 0);
        return std::move(tree_);
    }

private:
    int32_t build_node(std::size_t begin, std::size_t end, int depth) {
        uint64_t c0 = 0, c1 = 0;
        for (std::size_t i = begin; i < end; ++i) {
            if (samples_[i].label)
                c1 += samples_[i].weight;
            else
                c0 += samples_[i].weight;
        }
        const uint64_t total = c0 + c1;

        const auto make_leaf = [&]() {
            const auto idx = static_cast<int32_t>(tree_.nodes.size());
            TreeNode leaf;
            leaf.count0 = c0;
            leaf.count1 = c1;
            tree_.nodes.push_back(leaf);
            return idx;
        };

        if (c0 == 0 || c1 == 0) return make_leaf();
        if (total < static_cast<uint64_t>(params_.min_samples_split)) return make_leaf();
        if (params_.max_depth > 0 && depth >= params_.max_depth) return make_leaf();

        // feature subsample: partial Fisher-Yates, then ascending order so
        // the tie rule (lower feature index wins) applies
        candidates_.clear();
        for (int j = 0; j < fps_; ++j) {
            const auto pick = static_cast<std::size_t>(j) +
                              static_cast<std::size_t>(rng_->below(
                                  static_cast<uint64_t>(data_.n_cols) - j));
            std::swap(feature_pool_[static_cast<std::size_t>(j)], feature_pool_[pick]);
            candidates_.push_back(feature_pool_[static_cast<std::size_t>(j)]);
        }
        std::sort(candidates_.begin(), candidates_.end());

        const auto node_span =
            std::span<const WeightedRow>(samples_).subspan(begin, end - begin);
        const ScanBest best = scan_candidates(data_, node_span, candidates_,
                                              params_.min_samples_leaf, scratch_);
        if (!best.found) return make_leaf();
        const double parent_score =
            static_cast<double>(total) -
            (static_cast<double>(c0) * static_cast<double>(c0) +
             static_cast<double>(c1) * static_cast<double>(c1)) /
                static_cast<double>(total);
        if (!(parent_score - best.score > 1e-9)) return make_leaf();

        const auto mid_it = std::stable_partition(
            samples_.begin() + static_cast<std::ptrdiff_t>(begin),
            samples_.begin() + static_cast<std::ptrdiff_t>(end),
            [&](const WeightedRow& s) {
                return data_.at(s.row, static_cast<std::size_t>(best.feature)) <=
                       best.threshold;
            });
        const auto mid =
            static_cast<std::size_t>(mid_it - samples_.begin());

        const auto idx = static_cast<int32_t>(tree_.nodes.size());
        TreeNode node;
        node.feature = best.feature;
        node.threshold = best.threshold;
        tree_.nodes.push_back(node);
        const int32_t left = build_node(begin, mid, depth + 1);
        const int32_t right = build_node(mid, end, depth + 1);
        tree_.nodes[static_cast<std::size_t>(idx)].left = left;
        tree_.nodes[static_cast<std::size_t>(idx)].right = right;
        return idx;
    }

    const DataView& data_;
    const ForestParams& params_;
    int fps_;
    Rng* rng_ = nullptr;
    Tree tree_;
    std::vector<WeightedRow> samples_;
    std::vector<int> feature_pool_;
    std::vector<int> candidates_;
    std::vector<SortedValue> scratch_;
};

}  // namespace

std::optional<SplitDecision> best_split(const DataView& data,
                                        std::span<const uint32_t> rows,
                                        std::span<const int> candidate_features,
                                        int min_samples_leaf) {
    if (!data.labels) throw std::invalid_argument("best_split needs labels");
    std::vector<WeightedRow> samples;
    samples.reserve(rows.size());
    uint64_t c0 = 0, c1 = 0;
    for (const uint32_t r : rows) {
        samples.push_back({r, 1, data.labels[r]});
        if (data.labels[r])
            ++c1;
        else
            ++c0;
    }
    std::vector<int> candidates(candidate_features.begin(), candidate_features.end());
    std::sort(candidates.begin(), candidates.end());
    std::vector<SortedValue> scratch;
    const ScanBest best =
        scan_candidates(data, samples, candidates, min_samples_leaf, scratch);
    if (!best.found) return std::nullopt;
    const uint64_t total = c0 + c1;
    const double parent_score =
        static_cast<double>(total) -
        (static_cast<double>(c0) * static_cast<double>(c0) +
         static_cast<double>(c1) * static_cast<double>(c1)) /
            static_cast<double>(total);
    if (!(parent_score - best.score > 1e-9)) return std::nullopt;
    return SplitDecision{best.feature, best.threshold,
                         best.score / static_cast<double>(total)};
}

Forest train_forest(const DataView& data, const ForestParams& params, int n_threads) {
    if (!data.values || !data.labels)
        throw std::invalid_argument("train_forest needs values and labels");
    if (data.n_rows < 2)
        throw std::invalid_argument("need at least 2 training rows");
    if (data.n_cols == 0) throw std::invalid_argument("no feature columns");
    if (params.n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
    if (!(params.bootstrap_fraction > 0.0))
        throw std::invalid_argument("bootstrap_fraction must be positive");
    if (params.min_samples_split < 2)
        throw std::invalid_argument("min_samples_split must be >= 2");
    if (params.min_samples_leaf < 1)
        throw std::invalid_argument("min_samples_leaf must be >= 1");
    {
        bool has0 = false, has1 = false;
        for (std::size_t r = 0; r < data.n_rows; ++r)
            (data.labels[r] ? has1 : has0) = true;
        if (!has0 || !has1) throw std::invalid_argument("degenerate training labels");
    }

    int fps = params.features_per_split;
    if (fps <= 0)
        fps = static_cast<int>(
            std::llround(std::sqrt(static_cast<double>(data.n_cols))));
    fps = std::clamp(fps, 1, static_cast<int>(data.n_cols));

    Forest forest;
    forest.params = params;
    forest.params.features_per_split = fps;
    forest.n_features = data.n_cols;
    forest.trees.resize(static_cast<std::size_t>(params.n_trees));

    const unsigned threads = resolve_threads(n_threads);
    parallel_for(forest.trees.size(), threads, [&](std::size_t i) {
        TreeBuilder builder(data, forest.params, fps);
        forest.trees[i] = builder.build(derive_seed(params.seed, streams::tree, i));
    });
    return forest;
}

std::vector<uint8_t> predict(const Forest& forest, const DataView& rows) {
    if (rows.n_cols != forest.n_features)
        throw std::invalid_argument("feature dimensionality mismatch: got " +
                                    std::to_string(rows.n_cols) + ", trained on " +
                                    std::to_string(forest.n_features));
    std::vector<uint8_t> labels(rows.n_rows);
    const auto n_trees = static_cast<uint32_t>(forest.trees.size());
    for (std::size_t r = 0; r < rows.n_rows; ++r) {
        uint32_t votes1 = 0;
        const double* row = rows.row(r);
        for (const auto& tree : forest.trees) votes1 += tree.predict_row(row);
        labels[r] = (2 * votes1 >= n_trees) ? 1 : 0;  // tie -> wash
    }
    return labels;
}

// ---------------------------------------------------------------------------

std::string serialize_forest(const Forest& forest) {
    std::string out = "washdet-forest v1\n";
    char buf[128];
    std::snprintf(buf, sizeof buf, "n_features %zu\n", forest.n_features);
    out += buf;
    const auto& p = forest.params;
    std::snprintf(buf, sizeof buf,
                  "params n_trees=%d max_depth=%d min_samples_split=%d "
                  "min_samples_leaf=%d features_per_split=%d ",
                  p.n_trees, p.max_depth, p.min_samples_split, p.min_samples_leaf,
                  p.features_per_split);
    out += buf;
    std::snprintf(buf, sizeof buf, "bootstrap_fraction=%.17g seed=%llu\n",
                  p.bootstrap_fraction, static_cast<unsigned long long>(p.seed));
    out += buf;
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        const auto& tree = forest.trees[t];
        std::snprintf(buf, sizeof buf, "tree %zu %zu\n", t, tree.nodes.size());
        out += buf;
        for (const auto& node : tree.nodes) {
            if (node.feature >= 0) {
                std::snprintf(buf, sizeof buf, "N %d %.17g %d %d\n", node.feature,
                              node.threshold, node.left, node.right);
            } else {
                std::snprintf(buf, sizeof buf, "L %llu %llu\n",
                              static_cast<unsigned long long>(node.count0),
                              static_cast<unsigned long long>(node.count1));
            }
            out += buf;
        }
    }
    out += "end\n";
    return out;
}

namespace {

class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    std::string_view next() {
        while (pos_ < text_.size()) {
            std::size_t eol = text_.find('\n', pos_);
            if (eol == std::string_view::npos) eol = text_.size();
            std::string_view line = text_.substr(pos_, eol - pos_);
            pos_ = eol + 1;
            if (!line.empty()) return line;
        }
        throw std::runtime_error("forest file: unexpected end of input");
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

std::vector<std::string_view> tokenize(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ') ++i;
        if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

template <typename T>
T parse_num(std::string_view s, const char* what) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::runtime_error(std::string("forest file: bad ") + what + " '" +
                                 std::string(s) + "'");
    return v;
}

}  // namespace

Forest parse_forest(std::string_view text) {
    LineReader reader(text);
    if (reader.next() != "washdet-forest v1")
        throw std::runtime_error("forest file: unknown header/version");

    Forest forest;
    {
        const auto tokens = tokenize(reader.next());
        if (tokens.size() != 2 || tokens[0] != "n_features")
            throw std::runtime_error("forest file: expected n_features");
        forest.n_features = parse_num<std::size_t>(tokens[1], "n_features");
    }
    {
        const auto tokens = tokenize(reader.next());
        if (tokens.empty() || tokens[0] != "params")
            throw std::runtime_error("forest file: expected params");
        for (std::size_t i = 1; i < tokens.size(); ++i) {
            const auto eq = tokens[i].find('=');
            if (eq == std::string_view::npos)
                throw std::runtime_error("forest file: bad params entry");
            const auto key = tokens[i].substr(0, eq);
            const auto val = tokens[i].substr(eq + 1);
            auto& p = forest.params;
            if (key == "n_trees") p.n_trees = parse_num<int>(val, "n_trees");
            else if (key == "max_depth") p.max_depth = parse_num<int>(val, "max_depth");
            else if (key == "min_samples_split")
                p.min_samples_split = parse_num<int>(val, "min_samples_split");
            else if (key == "min_samples_leaf")
                p.min_samples_leaf = parse_num<int>(val, "min_samples_leaf");
            else if (key == "features_per_split")
                p.features_per_split = parse_num<int>(val, "features_per_split");
            else if (key == "bootstrap_fraction")
                p.bootstrap_fraction = parse_num<double>(val, "bootstrap_fraction");
            else if (key == "seed") p.seed = parse_num<uint64_t>(val, "seed");
            else throw std::runtime_error("forest file: unknown param");
        }
    }
    forest.trees.reserve(static_cast<std::size_t>(forest.params.n_trees));
    for (int t = 0; t < forest.params.n_trees; ++t) {
        const auto header = tokenize(reader.next());
        if (header.size() != 3 || header[0] != "tree")
            throw std::runtime_error("forest file: expected tree header");
        if (parse_num<int>(header[1], "tree index") != t)
            throw std::runtime_error("forest file: tree index out of order");
        const auto n_nodes = parse_num<std::size_t>(header[2], "node count");
        Tree tree;
        tree.nodes.reserve(n_nodes);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            const auto tokens = tokenize(reader.next());
            TreeNode node;
            if (tokens.size() == 5 && tokens[0] == "N") {
                node.feature = parse_num<int32_t>(tokens[1], "feature");
                node.threshold = parse_num<double>(tokens[2], "threshold");
                node.left = parse_num<int32_t>(tokens[3], "left");
                node.right = parse_num<int32_t>(tokens[4], "right");
                if (node.feature < 0 ||
                    node.feature >= static_cast<int32_t>(forest.n_features))
                    throw std::runtime_error("forest file: feature index out of range");
            } else if (tokens.size() == 3 && tokens[0] == "L") {
                node.count0 = parse_num<uint64_t>(tokens[1], "count0");
                node.count1 = parse_num<uint64_t>(tokens[2], "count1");
            } else {
                throw std::runtime_error("forest file: bad node line");
            }
            tree.nodes.push_back(node);
        }
        for (const auto& node : tree.nodes) {
            if (node.feature < 0) continue;
            const auto n = static_cast<int32_t>(tree.nodes.size());
            if (node.left < 0 || node.left >= n || node.right < 0 || node.right >= n)
                throw std::runtime_error("forest file: child index out of range");
        }
        forest.trees.push_back(std::move(tree));
    }
    if (reader.next() != "end") throw std::runtime_error("forest file: missing end");
    return forest;
}

// ---------------------------------------------------------------------------

std::string_view dummy_strategy_name(DummyStrategy s) {
    switch (s) {
        case DummyStrategy::most_frequent: return "most_frequent";
        case DummyStrategy::stratified: return "stratified";
        case DummyStrategy::uniform: return "uniform";
        case DummyStrategy::always_positive: return "always_positive";
    }
    return "?";
}

DummyModel train_dummy(std::span<const uint8_t> y, DummyStrategy strategy,
                       uint64_t seed) {
    if (y.empty()) throw std::invalid_argument("train_dummy needs labels");
    uint64_t count1 = 0;
    for (const auto v : y) count1 += v ? 1 : 0;
    DummyModel model;
    model.strategy = strategy;
    model.p_wash = static_cast<double>(count1) / static_cast<double>(y.size());
    model.majority = (2 * count1 >= y.size()) ? 1 : 0;  // tie -> positive
    model.seed = seed;
    return model;
}

std::vector<uint8_t> predict_dummy(const DummyModel& model, std::size_t n) {
    std::vector<uint8_t> labels(n, 0);
    switch (model.strategy) {
        case DummyStrategy::most_frequent:
            std::fill(labels.begin(), labels.end(), model.majority);
            break;
        case DummyStrategy::always_positive:
            std::fill(labels.begin(), labels.end(), uint8_t{1});
            break;
        case DummyStrategy::stratified: {
            Rng rng(derive_seed(model.seed, streams::dummy, 1));
            for (auto& v : labels) v = rng.bernoulli(model.p_wash) ? 1 : 0;
            break;
        }
        case DummyStrategy::uniform: {
            Rng rng(derive_seed(model.seed, streams::dummy, 2));
            for (auto& v : labels) v = rng.bernoulli(0.5) ? 1 : 0;
            break;
        }
    }
    return labels;
}

}  // namespace washdet::rf
