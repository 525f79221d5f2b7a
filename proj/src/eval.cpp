#include "washdet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "washdet/kernels.hpp"
#include "washdet/threading.hpp"

namespace washdet::ev {

std::string_view task_name(Task t) {
    return t == Task::loso ? "LOSO" : "personalized";
}

std::vector<Fold> loso_folds(const feat::FeatureMatrix& m) {
    if (m.participants.size() < 2)
        throw std::invalid_argument("LOSO needs at least 2 participants");
    std::vector<Fold> folds(m.participants.size());
    for (std::size_t p = 0; p < m.participants.size(); ++p)
        folds[p].descriptor = m.participants[p];
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        const auto p = static_cast<std::size_t>(m.row_participant[r]);
        for (std::size_t f = 0; f < folds.size(); ++f) {
            if (f == p)
                folds[f].test.push_back(static_cast<uint32_t>(r));
            else
                folds[f].train.push_back(static_cast<uint32_t>(r));
        }
    }
    return folds;
}

namespace {

void fisher_yates(std::vector<uint32_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[static_cast<std::size_t>(rng.below(i))]);
}

}  // namespace

Fold personalized_split(const feat::FeatureMatrix& m, int participant_index,
                        double test_fraction, uint64_t seed) {
    if (participant_index < 0 ||
        static_cast<std::size_t>(participant_index) >= m.participants.size())
        throw std::invalid_argument("participant index out of range");
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0))
        throw std::invalid_argument("test_fraction must lie in (0, 1)");

    std::vector<uint32_t> pos, neg;
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        if (m.row_participant[r] != participant_index) continue;
        (m.row_label[r] ? pos : neg).push_back(static_cast<uint32_t>(r));
    }
    const std::string& pid =
        m.participants[static_cast<std::size_t>(participant_index)];
    if (pos.empty())
        throw std::runtime_error("no wash windows for participant " + pid);
    if (neg.empty())
        throw std::runtime_error("no null windows for participant " + pid);

    const std::size_t n = pos.size() + neg.size();
    const auto want_total = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(n)));

    auto clamp_class = [](std::size_t want, std::size_t have) -> std::size_t {
        if (have >= 2) return std::clamp<std::size_t>(want, 1, have - 1);
        return 0;  // a singleton class stays in train
    };
    std::size_t t_pos = clamp_class(
        static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(pos.size()))),
        pos.size());
    std::size_t t_neg =
        clamp_class(want_total >= t_pos ? want_total - t_pos : 0, neg.size());

    Rng rng(derive_seed(seed, streams::split));
    fisher_yates(pos, rng);
    fisher_yates(neg, rng);

    Fold fold;
    fold.descriptor = pid;
    fold.test.insert(fold.test.end(), pos.begin(),
                     pos.begin() + static_cast<std::ptrdiff_t>(t_pos));
    fold.test.insert(fold.test.end(), neg.begin(),
                     neg.begin() + static_cast<std::ptrdiff_t>(t_neg));
    fold.train.insert(fold.train.end(),
                      pos.begin() + static_cast<std::ptrdiff_t>(t_pos), pos.end());
    fold.train.insert(fold.train.end(),
                      neg.begin() + static_cast<std::ptrdiff_t>(t_neg), neg.end());
    std::sort(fold.test.begin(), fold.test.end());
    std::sort(fold.train.begin(), fold.train.end());
    return fold;
}

ConfusionCounts confusion(std::span<const uint8_t> truth,
                          std::span<const uint8_t> predicted) {
    if (truth.size() != predicted.size())
        throw std::invalid_argument("confusion: size mismatch");
    ConfusionCounts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] && predicted[i]) ++c.tp;
        else if (!truth[i] && predicted[i]) ++c.fp;
        else if (truth[i] && !predicted[i]) ++c.fn;
        else ++c.tn;
    }
    return c;
}

PRF f1_score(const ConfusionCounts& c) {
    PRF out;
    const double tp = static_cast<double>(c.tp);
    out.precision = (c.tp + c.fp) > 0 ? tp / static_cast<double>(c.tp + c.fp) : 0.0;
    out.recall = (c.tp + c.fn) > 0 ? tp / static_cast<double>(c.tp + c.fn) : 0.0;
    out.f1 = (out.precision + out.recall) > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct RowSet {
    std::vector<double> values;
    std::vector<uint8_t> labels;
    std::size_t n_cols = 0;

    rf::DataView view() const {
        return {values.data(), labels.size(), n_cols, labels.data()};
    }
};

RowSet materialize(const feat::FeatureMatrix& m, std::span<const uint32_t> rows) {
    RowSet set;
    set.n_cols = m.n_cols;
    set.values.resize(rows.size() * m.n_cols);
    set.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* src = m.row(rows[i]);
        std::copy(src, src + m.n_cols, set.values.data() + i * m.n_cols);
        set.labels[i] = m.row_label[rows[i]];
    }
    return set;
}

constexpr rf::DummyStrategy kAllDummies[rf::kDummyStrategyCount] = {
    rf::DummyStrategy::most_frequent,
    rf::DummyStrategy::stratified,
    rf::DummyStrategy::uniform,
    rf::DummyStrategy::always_positive,
};

}  // namespace

double ResultsTable::f1(Task task, double window_s, feat::SensorSubset subset) const {
    for (std::size_t t = 0; t < tasks.size(); ++t)
        for (std::size_t w = 0; w < windows_s.size(); ++w)
            for (std::size_t s = 0; s < subsets.size(); ++s)
                if (tasks[t] == task && windows_s[w] == window_s &&
                    subsets[s] == subset)
                    return mean_f1[cell_index(t, w, s)];
    throw std::invalid_argument("no such results cell");
}

double ResultsTable::chance_for(Task task, double window_s) const {
    for (std::size_t t = 0; t < tasks.size(); ++t)
        for (std::size_t w = 0; w < windows_s.size(); ++w)
            if (tasks[t] == task && windows_s[w] == window_s)
                return chance[t * windows_s.size() + w];
    throw std::invalid_argument("no such chance cell");
}

ResultsTable run_ablation(std::span<const Recording> recordings,
                          const AblationConfig& cfg) {
    if (recordings.empty()) throw std::invalid_argument("no recordings");
    if (cfg.repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    if (cfg.windows_s.empty()) throw std::invalid_argument("no window sizes");
    if (cfg.subsets.empty()) throw std::invalid_argument("no sensor subsets");
    if (!cfg.run_loso && !cfg.run_personalized)
        throw std::invalid_argument("no task selected");

    ResultsTable table;
    if (cfg.run_loso) table.tasks.push_back(Task::loso);
    if (cfg.run_personalized) table.tasks.push_back(Task::personalized);
    table.windows_s = cfg.windows_s;
    table.subsets = cfg.subsets;
    table.repetitions = cfg.repetitions;

    const std::size_t n_tasks = table.tasks.size();
    const std::size_t n_windows = cfg.windows_s.size();
    const std::size_t n_subsets = cfg.subsets.size();
    const std::size_t n_reps = static_cast<std::size_t>(cfg.repetitions);

    // shared per window size: the ALL matrix, its subset projections, the
    // LOSO folds, and the personalized splits (identical across subsets)
    struct WindowData {
        int64_t window_ms = 0;
        std::vector<feat::FeatureMatrix> subset_matrices;
        std::vector<Fold> loso;
        std::vector<std::vector<Fold>> personalized;  // [rep][participant]
        std::size_t n_participants = 0;
        std::vector<std::string> participants;
    };
    std::vector<WindowData> window_data(n_windows);
    for (std::size_t w = 0; w < n_windows; ++w) {
        auto& wd = window_data[w];
        wd.window_ms = static_cast<int64_t>(std::llround(cfg.windows_s[w] * 1000.0));
        const auto all = feat::assemble_matrix(recordings, cfg.windows_s[w],
                                               feat::SensorSubset::ALL,
                                               cfg.overlap_threshold);
        wd.participants = all.participants;
        wd.n_participants = all.participants.size();
        wd.subset_matrices.reserve(n_subsets);
        for (const auto subset : cfg.subsets)
            wd.subset_matrices.push_back(feat::select_subset(all, subset));
        if (cfg.run_loso) wd.loso = loso_folds(all);
        if (cfg.run_personalized) {
            wd.personalized.resize(n_reps);
            for (std::size_t rep = 0; rep < n_reps; ++rep) {
                wd.personalized[rep].reserve(wd.n_participants);
                for (std::size_t p = 0; p < wd.n_participants; ++p)
                    wd.personalized[rep].push_back(personalized_split(
                        all, static_cast<int>(p), cfg.test_fraction,
                        derive_seed(cfg.base_seed, streams::split, rep,
                                    static_cast<uint64_t>(wd.window_ms), p)));
            }
        }
    }

    // one work item per (task, window, subset, rep, fold); slot-addressed
    // results keep any parallel schedule equivalent to the serial one
    struct Item {
        std::size_t task_idx, window_idx, subset_idx, rep, fold;
    };
    std::vector<Item> items;
    for (std::size_t t = 0; t < n_tasks; ++t)
        for (std::size_t w = 0; w < n_windows; ++w)
            for (std::size_t s = 0; s < n_subsets; ++s)
                for (std::size_t rep = 0; rep < n_reps; ++rep) {
                    const std::size_t folds =
                        table.tasks[t] == Task::loso
                            ? window_data[w].loso.size()
                            : window_data[w].n_participants;
                    for (std::size_t f = 0; f < folds; ++f)
                        items.push_back({t, w, s, rep, f});
                }

    std::vector<ConfusionCounts> item_counts(items.size());
    const unsigned threads = resolve_threads(cfg.threads);
    parallel_for(items.size(), threads, [&](std::size_t i) {
        const Item& it = items[i];
        const Task task = table.tasks[it.task_idx];
        const WindowData& wd = window_data[it.window_idx];
        const feat::FeatureMatrix& matrix = wd.subset_matrices[it.subset_idx];
        const Fold& fold = task == Task::loso
                               ? wd.loso[it.fold]
                               : wd.personalized[it.rep][it.fold];
        try {
            const RowSet train = materialize(matrix, fold.train);
            const RowSet test = materialize(matrix, fold.test);
            rf::ForestParams params = cfg.forest;
            params.seed = derive_seed(
                cfg.base_seed, streams::ablation, it.rep,
                static_cast<uint64_t>(task),
                static_cast<uint64_t>(wd.window_ms),
                static_cast<uint64_t>(cfg.subsets[it.subset_idx]), it.fold);
            const rf::Forest forest = rf::train_forest(train.view(), params);
            const auto predicted = rf::predict(forest, test.view());
            item_counts[i] = confusion(test.labels, predicted);
        } catch (const std::exception& e) {
            throw std::runtime_error(
                std::string(task_name(task)) + " window=" +
                std::to_string(cfg.windows_s[it.window_idx]) + " subset=" +
                std::string(feat::subset_name(cfg.subsets[it.subset_idx])) +
                " rep=" + std::to_string(it.rep) + " fold=" + fold.descriptor +
                ": " + e.what());
        }
    });

    // serial aggregation in item order
    table.mean_f1.assign(n_tasks * n_windows * n_subsets, 0.0);
    table.pooled_f1.assign(n_tasks * n_windows * n_subsets, 0.0);
    table.rep_f1.assign(n_tasks * n_windows * n_subsets * n_reps, 0.0);
    for (std::size_t t = 0; t < n_tasks; ++t)
        for (std::size_t w = 0; w < n_windows; ++w)
            for (std::size_t s = 0; s < n_subsets; ++s) {
                double rep_sum = 0.0;
                double pooled_sum = 0.0;
                for (std::size_t rep = 0; rep < n_reps; ++rep) {
                    double fold_sum = 0.0;
                    std::size_t fold_count = 0;
                    ConfusionCounts pooled;
                    for (std::size_t i = 0; i < items.size(); ++i) {
                        const Item& it = items[i];
                        if (it.task_idx != t || it.window_idx != w ||
                            it.subset_idx != s || it.rep != rep)
                            continue;
                        const auto& c = item_counts[i];
                        const PRF prf = f1_score(c);
                        fold_sum += prf.f1;
                        ++fold_count;
                        pooled.tp += c.tp;
                        pooled.fp += c.fp;
                        pooled.fn += c.fn;
                        pooled.tn += c.tn;
                        const Fold& fold =
                            table.tasks[t] == Task::loso
                                ? window_data[w].loso[it.fold]
                                : window_data[w].personalized[rep][it.fold];
                        table.details.push_back(
                            {table.tasks[t], cfg.windows_s[w], cfg.subsets[s],
                             static_cast<int>(rep), fold.descriptor, c, prf});
                    }
                    const double rep_mean =
                        fold_count > 0 ? fold_sum / static_cast<double>(fold_count)
                                       : 0.0;
                    table.rep_f1[table.cell_index(t, w, s) * n_reps + rep] = rep_mean;
                    rep_sum += rep_mean;
                    pooled_sum += f1_score(pooled).f1;
                }
                table.mean_f1[table.cell_index(t, w, s)] =
                    rep_sum / static_cast<double>(n_reps);
                table.pooled_f1[table.cell_index(t, w, s)] =
                    pooled_sum / static_cast<double>(n_reps);
            }

    // chance upper bound: within one repetition the best dummy F1 over
    // strategies and splits (deliberately over-estimated); cells average
    // over repetitions like the forest cells do
    table.chance.assign(n_tasks * n_windows, 0.0);
    table.chance_rep.assign(n_tasks * n_windows * n_reps, 0.0);
    for (std::size_t t = 0; t < n_tasks; ++t)
        for (std::size_t w = 0; w < n_windows; ++w) {
            const WindowData& wd = window_data[w];
            const feat::FeatureMatrix& matrix = wd.subset_matrices[0];
            double rep_sum = 0.0;
            for (std::size_t rep = 0; rep < n_reps; ++rep) {
                double best = 0.0;
                const std::size_t folds = table.tasks[t] == Task::loso
                                              ? wd.loso.size()
                                              : wd.n_participants;
                for (std::size_t f = 0; f < folds; ++f) {
                    const Fold& fold = table.tasks[t] == Task::loso
                                           ? wd.loso[f]
                                           : wd.personalized[rep][f];
                    std::vector<uint8_t> train_labels(fold.train.size());
                    std::vector<uint8_t> test_labels(fold.test.size());
                    for (std::size_t i = 0; i < fold.train.size(); ++i)
                        train_labels[i] = matrix.row_label[fold.train[i]];
                    for (std::size_t i = 0; i < fold.test.size(); ++i)
                        test_labels[i] = matrix.row_label[fold.test[i]];
                    for (const auto strategy : kAllDummies) {
                        const auto model = rf::train_dummy(
                            train_labels, strategy,
                            derive_seed(cfg.base_seed, streams::dummy, rep,
                                        static_cast<uint64_t>(table.tasks[t]),
                                        static_cast<uint64_t>(wd.window_ms), f,
                                        static_cast<uint64_t>(strategy)));
                        const auto predicted =
                            rf::predict_dummy(model, test_labels.size());
                        const auto c = confusion(test_labels, predicted);
                        const PRF prf = f1_score(c);
                        best = std::max(best, prf.f1);
                        table.chance_details.push_back(
                            {table.tasks[t], cfg.windows_s[w], static_cast<int>(rep),
                             fold.descriptor, strategy, c, prf});
                    }
                }
                table.chance_rep[(t * n_windows + w) * n_reps + rep] = best;
                rep_sum += best;
            }
            table.chance[t * n_windows + w] = rep_sum / static_cast<double>(n_reps);
        }

    return table;
}

// ---------------------------------------------------------------------------

namespace {

std::string format_window(double window_s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", window_s);
    return buf;
}

void write_header_comment(std::ostream& out, std::string_view comment) {
    if (!comment.empty()) out << "# " << comment << "\n";
}

}  // namespace

void write_results_csv(const ResultsTable& t, std::ostream& out,
                       std::string_view header_comment) {
    write_header_comment(out, header_comment);
    out << "task,window_s";
    for (const auto s : t.subsets) out << ',' << feat::subset_name(s);
    out << ",Chance\n";
    char buf[32];
    for (std::size_t ti = 0; ti < t.tasks.size(); ++ti)
        for (std::size_t w = 0; w < t.windows_s.size(); ++w) {
            out << task_name(t.tasks[ti]) << ',' << format_window(t.windows_s[w]);
            for (std::size_t s = 0; s < t.subsets.size(); ++s) {
                std::snprintf(buf, sizeof buf, "%.4f",
                              t.mean_f1[t.cell_index(ti, w, s)]);
                out << ',' << buf;
            }
            std::snprintf(buf, sizeof buf, "%.4f",
                          t.chance[ti * t.windows_s.size() + w]);
            out << ',' << buf << '\n';
        }
}

void write_results_pretty(const ResultsTable& t, std::ostream& out) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-14s %8s", "task", "window");
    out << buf;
    for (const auto s : t.subsets) {
        std::snprintf(buf, sizeof buf, " %8s", std::string(feat::subset_name(s)).c_str());
        out << buf;
    }
    std::snprintf(buf, sizeof buf, " %8s\n", "Chance");
    out << buf;
    for (std::size_t ti = 0; ti < t.tasks.size(); ++ti)
        for (std::size_t w = 0; w < t.windows_s.size(); ++w) {
            std::snprintf(buf, sizeof buf, "%-14s %7gs",
                          std::string(task_name(t.tasks[ti])).c_str(),
                          t.windows_s[w]);
            out << buf;
            for (std::size_t s = 0; s < t.subsets.size(); ++s) {
                std::snprintf(buf, sizeof buf, " %8.3f",
                              t.mean_f1[t.cell_index(ti, w, s)]);
                out << buf;
            }
            std::snprintf(buf, sizeof buf, " %8.3f\n",
                          t.chance[ti * t.windows_s.size() + w]);
            out << buf;
        }
}

void write_details_csv(const ResultsTable& t, std::ostream& out,
                       std::string_view header_comment) {
    write_header_comment(out, header_comment);
    out << "record,task,window_s,subset,rep,fold,strategy,tp,fp,fn,tn,"
           "precision,recall,f1\n";
    char buf[64];
    auto prf_cells = [&](const ConfusionCounts& c, const PRF& p) {
        out << ',' << c.tp << ',' << c.fp << ',' << c.fn << ',' << c.tn;
        std::snprintf(buf, sizeof buf, ",%.9f,%.9f,%.9f\n", p.precision, p.recall,
                      p.f1);
        out << buf;
    };
    for (const auto& d : t.details) {
        out << "fold," << task_name(d.task) << ',' << format_window(d.window_s) << ','
            << feat::subset_name(d.subset) << ',' << d.rep << ',' << d.fold << ",";
        prf_cells(d.counts, d.prf);
    }
    // pooled-confusion aggregation alongside the per-fold macro average
    for (std::size_t ti = 0; ti < t.tasks.size(); ++ti)
        for (std::size_t w = 0; w < t.windows_s.size(); ++w)
            for (std::size_t s = 0; s < t.subsets.size(); ++s) {
                std::snprintf(buf, sizeof buf, "%.9f",
                              t.pooled_f1[t.cell_index(ti, w, s)]);
                out << "pooled," << task_name(t.tasks[ti]) << ','
                    << format_window(t.windows_s[w]) << ','
                    << feat::subset_name(t.subsets[s]) << ",,,,,,,,," << buf << '\n';
            }
    for (const auto& d : t.chance_details) {
        out << "chance," << task_name(d.task) << ',' << format_window(d.window_s)
            << ",," << d.rep << ',' << d.fold << ','
            << rf::dummy_strategy_name(d.strategy);
        prf_cells(d.counts, d.prf);
    }
}

// ---------------------------------------------------------------------------

std::pair<double, double> bootstrap_ci(std::span<const double> values, int n_boot,
                                       double level, Rng& rng) {
    if (values.empty()) throw std::invalid_argument("bootstrap of empty sample");
    if (n_boot < 1) throw std::invalid_argument("n_boot must be >= 1");
    if (!(level > 0.0) || !(level < 1.0))
        throw std::invalid_argument("level must lie in (0, 1)");
    const std::size_t n = values.size();
    std::vector<double> means(static_cast<std::size_t>(n_boot));
    for (auto& m : means) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            sum += values[static_cast<std::size_t>(rng.below(n))];
        m = sum / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    const double alpha = (1.0 - level) / 2.0;
    return {kern::quantile_sorted(means, alpha),
            kern::quantile_sorted(means, 1.0 - alpha)};
}

AlignedCurve event_aligned_curve(std::span<const Recording> recordings,
                                 ChannelId channel, double pre_s, double post_s,
                                 int n_boot, double level, uint64_t seed,
                                 double grid_step_s) {
    if (!(pre_s >= 0.0) || !(post_s > 0.0))
        throw std::invalid_argument("curve window must satisfy pre >= 0, post > 0");
    if (!(grid_step_s > 0.0))
        throw std::invalid_argument("grid_step_s must be positive");

    struct WashRef {
        const Recording* rec;
        int64_t onset_ms;
        int64_t end_ms;
    };
    std::vector<WashRef> washes;
    for (const auto& rec : recordings) {
        if (!rec.has(channel))
            throw std::runtime_error("channel " + std::string(channel_name(channel)) +
                                     " missing from a recording");
        for (const auto& a : rec.annotations)
            if (a.kind == AnnotationKind::hand_wash)
                washes.push_back({&rec, a.start_ms, a.end_ms});
    }
    if (washes.size() < 2)
        throw std::runtime_error("need at least 2 hand washes for an aligned curve");

    AlignedCurve curve;
    curve.grid_step_s = grid_step_s;
    curve.n_washes = washes.size();
    const auto n_points = static_cast<std::size_t>(
        std::floor((pre_s + post_s) / grid_step_s + 1e-9)) + 1;
    curve.t_rel_s.resize(n_points);
    for (std::size_t k = 0; k < n_points; ++k)
        curve.t_rel_s[k] = -pre_s + static_cast<double>(k) * grid_step_s;

    for (const auto& w : washes)
        curve.wash_offsets_s.push_back(
            static_cast<double>(w.end_ms - w.onset_ms) / 1000.0);

    // nearest sample at an absolute time (times inside the recording always
    // have one; the channel spans the session)
    const auto sample_at = [](const ChannelSeries& s, int64_t t) {
        const auto it = std::lower_bound(s.t_ms.begin(), s.t_ms.end(), t);
        if (it == s.t_ms.end()) return s.value.back();
        if (it == s.t_ms.begin()) return s.value.front();
        const auto hi = static_cast<std::size_t>(it - s.t_ms.begin());
        const auto lo = hi - 1;
        return (t - s.t_ms[lo] <= s.t_ms[hi] - t) ? s.value[lo] : s.value[hi];
    };

    std::vector<std::vector<double>> points(n_points);
    for (const auto& w : washes) {
        const ChannelSeries& series = *w.rec->channel(channel);
        const double v0 = sample_at(series, w.onset_ms);
        bool trimmed = false;
        for (std::size_t k = 0; k < n_points; ++k) {
            const auto target = w.onset_ms + static_cast<int64_t>(std::llround(
                                                 curve.t_rel_s[k] * 1000.0));
            if (target < 0 || target > w.rec->duration_ms) {
                trimmed = true;
                continue;
            }
            points[k].push_back(sample_at(series, target) - v0);
        }
        if (trimmed)
            curve.warnings.push_back(
                "wash at " + std::to_string(w.onset_ms) +
                " ms trimmed: grid extends past the recording edge");
    }

    curve.mean.resize(n_points);
    curve.ci_low.resize(n_points);
    curve.ci_high.resize(n_points);
    curve.coverage.resize(n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
        const auto& vals = points[k];
        curve.coverage[k] = static_cast<int>(vals.size());
        if (vals.empty()) {
            curve.mean[k] = curve.ci_low[k] = curve.ci_high[k] =
                std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        double sum = 0.0;
        for (const double v : vals) sum += v;
        curve.mean[k] = sum / static_cast<double>(vals.size());
        Rng rng(derive_seed(seed, streams::curve, k));
        const auto ci = bootstrap_ci(vals, n_boot, level, rng);
        curve.ci_low[k] = ci.first;
        curve.ci_high[k] = ci.second;
    }
    return curve;
}

void write_curve_csv(const AlignedCurve& c, std::ostream& out,
                     std::string_view header_comment) {
    write_header_comment(out, header_comment);
    out << "t_rel_s,mean,ci_low,ci_high\n";
    char buf[160];
    for (std::size_t k = 0; k < c.t_rel_s.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%g,%.9g,%.9g,%.9g\n", c.t_rel_s[k], c.mean[k],
                      c.ci_low[k], c.ci_high[k]);
        out << buf;
    }
}

DurationStats duration_stats(std::span<const Recording> recordings) {
    std::vector<double> durations;
    double total_recorded_s = 0.0;
    for (const auto& rec : recordings) {
        total_recorded_s += static_cast<double>(rec.duration_ms) / 1000.0;
        for (const auto& a : rec.annotations)
            if (a.kind == AnnotationKind::hand_wash)
                durations.push_back(static_cast<double>(a.end_ms - a.start_ms) /
                                    1000.0);
    }
    if (durations.empty()) throw std::runtime_error("no hand-wash annotations");
    std::sort(durations.begin(), durations.end());

    DurationStats s;
    s.count = durations.size();
    double sum = 0.0;
    for (const double d : durations) sum += d;
    s.mean_s = sum / static_cast<double>(durations.size());
    s.median_s = kern::quantile_sorted(durations, 0.5);
    s.q1_s = kern::quantile_sorted(durations, 0.25);
    s.q3_s = kern::quantile_sorted(durations, 0.75);
    s.min_s = durations.front();
    s.max_s = durations.back();
    s.total_recorded_s = total_recorded_s;
    s.total_wash_s = sum;
    s.null_fraction =
        total_recorded_s > 0.0 ? 1.0 - sum / total_recorded_s : 0.0;
    return s;
}

}  // namespace washdet::ev
