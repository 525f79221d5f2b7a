#include <cmath>
#include <set>
#include <sstream>

#include <doctest.h>

#include "test_util.hpp"
#include "washdet/eval.hpp"
#include "washdet/synthgen.hpp"

using namespace washdet;
using namespace washdet::ev;

namespace {

std::vector<Recording> mini_dataset(int participants = 3, uint64_t seed = 42,
                                    double imu_ambiguity = 0.3) {
    synth::Scenario scn;
    scn.n_participants = participants;
    scn.washes_per_participant = 2;
    scn.session_ms = 600'000;
    scn.imu_ambiguity = imu_ambiguity;
    const synth::ResponseParams params;
    std::vector<Recording> recs;
    for (int i = 0; i < participants; ++i)
        recs.push_back(synth::generate_recording(scn, i, params, seed));
    return recs;
}

}  // namespace

TEST_CASE("f1_score conventions and examples") {
    CHECK(f1_score({10, 0, 0, 5}).f1 == 1.0);
    CHECK(f1_score({10, 0, 0, 5}).precision == 1.0);
    CHECK(f1_score({0, 0, 4, 6}).f1 == 0.0);  // positives exist, none predicted
    const auto prf = f1_score({2, 1, 1, 0});
    CHECK(prf.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(prf.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(prf.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(f1_score({0, 0, 0, 10}).f1 == 0.0);  // all-null degenerate

    SUBCASE("converting a false positive to a true negative never hurts F1") {
        Rng rng(6);
        for (int i = 0; i < 300; ++i) {
            ConfusionCounts c{rng.below(20), rng.below(20) + 1, rng.below(20),
                              rng.below(20)};
            ConfusionCounts better = c;
            better.fp -= 1;
            better.tn += 1;
            CHECK(f1_score(better).f1 >= f1_score(c).f1);
        }
    }
}

TEST_CASE("confusion counts") {
    const std::vector<uint8_t> truth{1, 1, 0, 0, 1};
    const std::vector<uint8_t> pred{1, 0, 1, 0, 1};
    const auto c = confusion(truth, pred);
    CHECK(c.tp == 2);
    CHECK(c.fn == 1);
    CHECK(c.fp == 1);
    CHECK(c.tn == 1);
    CHECK_THROWS_AS(confusion(truth, std::vector<uint8_t>{1}),
                    std::invalid_argument);
}

TEST_CASE("loso folds partition rows by participant") {
    const auto recs = mini_dataset(3);
    const auto m = feat::assemble_matrix(recs, 5.0, feat::SensorSubset::A);
    const auto folds = loso_folds(m);
    REQUIRE(folds.size() == 3);

    std::set<uint32_t> all_test;
    for (const auto& fold : folds) {
        std::set<int32_t> train_parts, test_parts;
        for (const auto r : fold.train) train_parts.insert(m.row_participant[r]);
        for (const auto r : fold.test) {
            test_parts.insert(m.row_participant[r]);
            CHECK(all_test.insert(r).second);  // appears in exactly one test set
        }
        CHECK(test_parts.size() == 1);
        for (const auto p : test_parts) CHECK(train_parts.count(p) == 0);
    }
    CHECK(all_test.size() == m.n_rows);  // union covers every row

    SUBCASE("single participant is an error") {
        const auto one = mini_dataset(1);
        const auto m1 = feat::assemble_matrix(one, 5.0, feat::SensorSubset::A);
        CHECK_THROWS_AS(loso_folds(m1), std::invalid_argument);
    }
}

TEST_CASE("personalized splits are stratified, sized and seeded") {
    const auto recs = mini_dataset(2);
    const auto m = feat::assemble_matrix(recs, 5.0, feat::SensorSubset::A);

    const auto fold = personalized_split(m, 0, 1.0 / 3.0, 77);
    std::size_t n0 = 0;
    for (std::size_t r = 0; r < m.n_rows; ++r)
        if (m.row_participant[r] == 0) ++n0;
    CHECK(fold.train.size() + fold.test.size() == n0);
    CHECK(fold.test.size() ==
          static_cast<std::size_t>(std::llround(static_cast<double>(n0) / 3.0)));

    const auto count_classes = [&](const std::vector<uint32_t>& rows) {
        std::pair<int, int> c{0, 0};
        for (const auto r : rows) (m.row_label[r] ? c.second : c.first) += 1;
        return c;
    };
    const auto train_c = count_classes(fold.train);
    const auto test_c = count_classes(fold.test);
    CHECK(train_c.first > 0);
    CHECK(train_c.second > 0);  // both classes in train
    CHECK(test_c.first > 0);
    CHECK(test_c.second > 0);  // and in test (>= 2 of each available)

    SUBCASE("determinism over seeds") {
        const auto again = personalized_split(m, 0, 1.0 / 3.0, 77);
        CHECK(again.train == fold.train);
        CHECK(again.test == fold.test);
        int distinct = 0;
        for (uint64_t s = 0; s < 100; ++s) {
            const auto other = personalized_split(m, 0, 1.0 / 3.0, 1000 + s);
            if (other.test != fold.test) ++distinct;
        }
        CHECK(distinct >= 99);  // different seeds differ essentially always
    }
    SUBCASE("participant without washes is an error") {
        auto recs2 = recs;
        // strip participant p00's annotations so it has no positive windows
        recs2[0].annotations.clear();
        const auto m2 = feat::assemble_matrix(recs2, 5.0, feat::SensorSubset::A);
        CHECK_THROWS_WITH_AS(personalized_split(m2, 0, 1.0 / 3.0, 1),
                             doctest::Contains("no wash windows"),
                             std::runtime_error);
    }
}

TEST_CASE("bootstrap_ci basics") {
    SUBCASE("constant values collapse the interval") {
        const std::vector<double> v(12, 3.0);
        Rng rng(1);
        const auto ci = bootstrap_ci(v, 500, 0.95, rng);
        CHECK(ci.first == 3.0);
        CHECK(ci.second == 3.0);
    }
    SUBCASE("interval brackets the sample mean") {
        Rng data_rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> v(50);
            double sum = 0.0;
            for (auto& x : v) {
                x = data_rng.normal();
                sum += x;
            }
            const double mean = sum / static_cast<double>(v.size());
            Rng rng(derive_seed(100, trial));
            const auto ci = bootstrap_ci(v, 800, 0.95, rng);
            CHECK(ci.first <= mean);
            CHECK(ci.second >= mean);
        }
    }
    SUBCASE("deterministic given the rng") {
        std::vector<double> v{1, 2, 3, 4, 5, 6};
        Rng a(9), b(9);
        CHECK(bootstrap_ci(v, 300, 0.9, a) == bootstrap_ci(v, 300, 0.9, b));
    }
    SUBCASE("bad inputs throw") {
        Rng rng(1);
        CHECK_THROWS_AS(bootstrap_ci({}, 100, 0.95, rng), std::invalid_argument);
        const std::vector<double> v{1.0};
        CHECK_THROWS_AS(bootstrap_ci(v, 100, 1.5, rng), std::invalid_argument);
    }
}

TEST_CASE("event-aligned curve on identical deterministic washes") {
    // two recordings, one wash each, channel value = pure function of time
    // since onset, so aligned segments are identical
    std::vector<Recording> recs;
    for (int i = 0; i < 2; ++i) {
        auto rec = testutil::make_recording(600'000, "p0" + std::to_string(i));
        const int64_t onset = 200'000 + i * 50'000;
        testutil::fill_channel(rec, ChannelId::humidity, [onset](int64_t t) {
            const double rel = static_cast<double>(t - onset) / 1000.0;
            return 40.0 + (rel > 0 ? 5.0 * (1.0 - std::exp(-rel / 15.0)) : 0.0);
        });
        rec.annotations.push_back(
            {onset, onset + 30'000, AnnotationKind::hand_wash,
             AnnotationSource::manual});
        recs.push_back(std::move(rec));
    }

    const auto curve = event_aligned_curve(recs, ChannelId::humidity, 60.0, 120.0,
                                           400, 0.95, 7, 1.0);
    REQUIRE(curve.t_rel_s.size() == 181);
    CHECK(curve.n_washes == 2);
    // zero variance: CI collapses onto the mean
    for (std::size_t k = 0; k < curve.t_rel_s.size(); ++k) {
        CHECK(curve.ci_low[k] == doctest::Approx(curve.mean[k]).epsilon(1e-12));
        CHECK(curve.ci_high[k] == doctest::Approx(curve.mean[k]).epsilon(1e-12));
    }
    // onset alignment pins grid point 0 at exactly zero
    const std::size_t k0 = 60;
    CHECK(curve.t_rel_s[k0] == 0.0);
    CHECK(curve.mean[k0] == 0.0);
    CHECK(curve.wash_offsets_s == std::vector<double>{30.0, 30.0});

    SUBCASE("missing channel and too-few washes are errors") {
        auto broken = recs;
        broken[0].channels[static_cast<int>(ChannelId::humidity)].reset();
        CHECK_THROWS_AS(event_aligned_curve(broken, ChannelId::humidity, 60, 120,
                                            100, 0.95, 7),
                        std::runtime_error);
        std::vector<Recording> one{recs[0]};
        CHECK_THROWS_AS(
            event_aligned_curve(one, ChannelId::humidity, 60, 120, 100, 0.95, 7),
            std::runtime_error);
    }
    SUBCASE("washes near the recording edge are trimmed with a warning") {
        auto edgy = recs;
        edgy[0].annotations.push_back({590'000, 599'000,
                                       AnnotationKind::hand_wash,
                                       AnnotationSource::manual});
        const auto c =
            event_aligned_curve(edgy, ChannelId::humidity, 60, 120, 100, 0.95, 7);
        CHECK(c.n_washes == 3);
        REQUIRE(c.warnings.size() == 1);
        CHECK(c.warnings[0].find("trimmed") != std::string::npos);
        // the las grid points only have the two clean washes
        CHECK(c.coverage.back() == 2);
    }
}

TEST_CASE("duration_stats") {
    SUBCASE("single wash: every statistic equals its duration") {
        auto rec = testutil::make_recording(100'000);
        rec.annotations.push_back(
            {10'000, 30'000, AnnotationKind::hand_wash, AnnotationSource::manual});
        const std::vector<Recording> recs{rec};
        const auto s = duration_stats(recs);
        CHECK(s.count == 1);
        CHECK(s.mean_s == 20.0);
        CHECK(s.median_s == 20.0);
        CHECK(s.q1_s == 20.0);
        CHECK(s.q3_s == 20.0);
        CHECK(s.min_s == 20.0);
        CHECK(s.max_s == 20.0);
        CHECK(s.total_wash_s == 20.0);
        CHECK(s.total_recorded_s == 100.0);
        CHECK(s.null_fraction == doctest::Approx(0.8));
    }
    SUBCASE("no washes is an error") {
        const std::vector<Recording> recs{testutil::make_recording(10'000)};
        CHECK_THROWS_AS(duration_stats(recs), std::runtime_error);
    }
}

TEST_CASE("run_ablation: structure, determinism, leakage and chance") {
    const auto recs = mini_dataset(3);
    AblationConfig cfg;
    cfg.windows_s = {5.0};
    cfg.subsets = {feat::SensorSubset::AG, feat::SensorSubset::ALL};
    cfg.repetitions = 2;
    cfg.forest.n_trees = 15;
    cfg.base_seed = 4;
    cfg.threads = 1;

    const auto table = run_ablation(recs, cfg);
    CHECK(table.tasks.size() == 2);
    CHECK(table.mean_f1.size() == 2 * 1 * 2);
    CHECK(table.chance.size() == 2);
    for (const auto v : table.mean_f1) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    SUBCASE("rerun and thread-count independence, byte for byte") {
        auto cfg8 = cfg;
        cfg8.threads = 8;
        const auto again = run_ablation(recs, cfg8);
        std::ostringstream a, b;
        write_results_csv(table, a);
        write_results_csv(again, b);
        CHECK(a.str() == b.str());
        std::ostringstream da, db;
        write_details_csv(table, da);
        write_details_csv(again, db);
        CHECK(da.str() == db.str());
    }
    SUBCASE("per-repetition chance dominates every dummy record of that rep") {
        const auto chance_rep_of = [&](Task task, int rep) {
            for (std::size_t t = 0; t < table.tasks.size(); ++t)
                if (table.tasks[t] == task)
                    return table.chance_rep[t * static_cast<std::size_t>(
                                                    table.repetitions) +
                                            static_cast<std::size_t>(rep)];
            return -1.0;
        };
        for (const auto& d : table.chance_details)
            CHECK(chance_rep_of(d.task, d.rep) >= d.prf.f1);
        // each per-rep value is attained, and the cell is their mean
        for (std::size_t t = 0; t < table.tasks.size(); ++t) {
            double sum = 0.0;
            for (int r = 0; r < table.repetitions; ++r) {
                const double rep_val = chance_rep_of(table.tasks[t], r);
                double best = 0.0;
                for (const auto& d : table.chance_details)
                    if (d.task == table.tasks[t] && d.rep == r)
                        best = std::max(best, d.prf.f1);
                CHECK(best == rep_val);
                sum += rep_val;
            }
            CHECK(table.chance_for(table.tasks[t], 5.0) ==
                  doctest::Approx(sum / table.repetitions).epsilon(1e-14));
        }
    }
    SUBCASE("per-fold details cover every (cell, rep, fold)") {
        // 2 tasks x 1 window x 2 subsets x 2 reps x 3 folds
        CHECK(table.details.size() == 2 * 1 * 2 * 2 * 3);
    }
}

TEST_CASE("aggregation identity: one fold, one repetition") {
    const auto recs = mini_dataset(1);
    AblationConfig cfg;
    cfg.windows_s = {5.0};
    cfg.subsets = {feat::SensorSubset::ALL};
    cfg.run_loso = false;  // a single participant only supports personalized
    cfg.repetitions = 1;
    cfg.forest.n_trees = 15;
    cfg.base_seed = 11;
    cfg.threads = 1;

    const auto table = run_ablation(recs, cfg);
    REQUIRE(table.details.size() == 1);

    // recompute the one fold by hand with the same derived seeds
    const auto all =
        feat::assemble_matrix(recs, 5.0, feat::SensorSubset::ALL);
    const auto fold = personalized_split(
        all, 0, cfg.test_fraction,
        derive_seed(cfg.base_seed, streams::split, uint64_t{0}, uint64_t{5000},
                    uint64_t{0}));
    std::vector<double> train_vals, test_vals;
    std::vector<uint8_t> train_y, test_y;
    for (const auto r : fold.train) {
        train_vals.insert(train_vals.end(), all.row(r), all.row(r) + all.n_cols);
        train_y.push_back(all.row_label[r]);
    }
    for (const auto r : fold.test) {
        test_vals.insert(test_vals.end(), all.row(r), all.row(r) + all.n_cols);
        test_y.push_back(all.row_label[r]);
    }
    rf::ForestParams params = cfg.forest;
    params.seed = derive_seed(cfg.base_seed, streams::ablation, uint64_t{0},
                              static_cast<uint64_t>(Task::personalized),
                              uint64_t{5000},
                              static_cast<uint64_t>(feat::SensorSubset::ALL),
                              uint64_t{0});
    const auto forest = rf::train_forest(
        {train_vals.data(), train_y.size(), all.n_cols, train_y.data()}, params);
    const auto pred = rf::predict(
        forest, {test_vals.data(), test_y.size(), all.n_cols, test_y.data()});
    const auto expected = f1_score(confusion(test_y, pred));

    CHECK(table.mean_f1[0] == expected.f1);  // exact, no tolerance
    CHECK(table.pooled_f1[0] == expected.f1);
}

TEST_CASE("results writers produce the paper-shaped layout") {
    const auto recs = mini_dataset(2);
    AblationConfig cfg;
    cfg.windows_s = {2.5, 5.0};
    cfg.subsets = {feat::all_subsets().begin(), feat::all_subsets().end()};
    cfg.repetitions = 1;
    cfg.forest.n_trees = 5;
    cfg.base_seed = 3;
    cfg.threads = 0;

    const auto table = run_ablation(recs, cfg);
    std::ostringstream os;
    write_results_csv(table, os, "test header");
    const auto text = os.str();
    CHECK(text.find("# test header\n") == 0);
    CHECK(text.find("task,window_s,A,A+HTP,AG,AG+H,AG+T,AG+P,ALL,Chance\n") !=
          std::string::npos);
    CHECK(text.find("LOSO,2.5,") != std::string::npos);
    CHECK(text.find("personalized,5,") != std::string::npos);
    // 28 F1 cells + 4 chance cells
    CHECK(table.mean_f1.size() == 28);
    CHECK(table.chance.size() == 4);
}
