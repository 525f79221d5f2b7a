// washdet CLI: synthetic data generation, dataset statistics, the sensor
// ablation study, and event-aligned response curves, all reproducible from
// (config, seed).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "washdet/config.hpp"
#include "washdet/eval.hpp"
#include "washdet/features.hpp"
#include "washdet/forest.hpp"
#include "washdet/recording.hpp"
#include "washdet/rng.hpp"
#include "washdet/synthgen.hpp"
#include "washdet/version.hpp"

namespace fs = std::filesystem;
using washdet::cfg::Config;

namespace {

// keys that can never change result bytes stay out of the provenance hash
constexpr std::string_view kNonSemanticKeys[] = {"out", "threads", "config", "data"};

std::string provenance(const Config& cfg) {
    const uint64_t hash = cfg.semantic_hash(kNonSemanticKeys);
    char buf[128];
    std::snprintf(buf, sizeof buf, "washdet %s | seed=%llu | config=%016llx",
                  std::string(washdet::kVersion).c_str(),
                  static_cast<unsigned long long>(cfg.get_u64("seed", 42)),
                  static_cast<unsigned long long>(hash));
    return buf;
}

fs::path out_dir(const Config& cfg) {
    const fs::path dir = cfg.get_string("out", "out");
    fs::create_directories(dir);
    return dir;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("failed to write " + path.string());
}

struct Dataset {
    std::vector<washdet::Recording> recordings;
    std::vector<std::string> names;
};

Dataset load_dataset(const Config& cfg, std::vector<std::string>* warnings) {
    const std::string data = cfg.get_string("data", "");
    if (data.empty()) throw std::runtime_error("no --data directory given");
    const fs::path dir = data;
    if (!fs::is_directory(dir))
        throw std::runtime_error("dataset directory not found: " + dir.string());

    Dataset ds;
    if (fs::exists(dir / "meta.csv")) {
        ds.recordings.push_back(washdet::parse_recording(dir, warnings));
        ds.names.push_back(dir.filename().string());
        return ds;
    }
    std::vector<fs::path> bundles;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory() && fs::exists(entry.path() / "meta.csv"))
            bundles.push_back(entry.path());
    std::sort(bundles.begin(), bundles.end());
    if (bundles.empty())
        throw std::runtime_error("no recording bundles found in " + dir.string());
    for (const auto& bundle : bundles) {
        std::vector<std::string> local;
        ds.recordings.push_back(washdet::parse_recording(bundle, &local));
        ds.names.push_back(bundle.filename().string());
        if (warnings)
            for (const auto& w : local)
                warnings->push_back(bundle.filename().string() + ": " + w);
    }
    return ds;
}

washdet::synth::ResponseParams response_params(const Config& cfg) {
    washdet::synth::ResponseParams p;
    p.rh_baseline = cfg.get_double("params.rh_baseline", p.rh_baseline);
    p.rh_room_bump = cfg.get_double("params.rh_room_bump", p.rh_room_bump);
    p.rh_wash_gain = cfg.get_double("params.rh_wash_gain", p.rh_wash_gain);
    p.rh_rise_tau_s = cfg.get_double("params.rh_rise_tau_s", p.rh_rise_tau_s);
    p.rh_decay_tau_s = cfg.get_double("params.rh_decay_tau_s", p.rh_decay_tau_s);
    p.temp_baseline_c = cfg.get_double("params.temp_baseline_c", p.temp_baseline_c);
    p.temp_room_dip_c = cfg.get_double("params.temp_room_dip_c", p.temp_room_dip_c);
    p.pressure_baseline_hpa =
        cfg.get_double("params.pressure_baseline_hpa", p.pressure_baseline_hpa);
    p.pressure_stairs_rate_hpa_s = cfg.get_double("params.pressure_stairs_rate_hpa_s",
                                                  p.pressure_stairs_rate_hpa_s);
    p.noise_acc_g = cfg.get_double("params.noise_acc_g", p.noise_acc_g);
    p.noise_gyro_dps = cfg.get_double("params.noise_gyro_dps", p.noise_gyro_dps);
    p.noise_rh = cfg.get_double("params.noise_rh", p.noise_rh);
    p.noise_temp_c = cfg.get_double("params.noise_temp_c", p.noise_temp_c);
    p.noise_pressure_hpa =
        cfg.get_double("params.noise_pressure_hpa", p.noise_pressure_hpa);
    p.calib_sd_rh = cfg.get_double("params.calib_sd_rh", p.calib_sd_rh);
    p.calib_sd_temp_c = cfg.get_double("params.calib_sd_temp_c", p.calib_sd_temp_c);
    p.calib_sd_pressure_hpa =
        cfg.get_double("params.calib_sd_pressure_hpa", p.calib_sd_pressure_hpa);
    return p;
}

// ---------------------------------------------------------------------------

int cmd_synth(const Config& cfg) {
    washdet::synth::Scenario scn;
    scn.n_participants = static_cast<int>(cfg.get_int("scenario.participants", 10));
    scn.washes_per_participant = static_cast<int>(cfg.get_int("scenario.washes", 4));
    scn.session_ms = static_cast<int64_t>(
        std::llround(cfg.get_double("scenario.session_s", 3600.0) * 1000.0));
    scn.imu_ambiguity = cfg.get_double("scenario.imu_ambiguity", 0.3);
    const auto params = response_params(cfg);
    const uint64_t seed = cfg.get_u64("seed", 42);
    const fs::path out = out_dir(cfg);

    int total = 0;
    for (int i = 0; i < scn.n_participants; ++i) {
        const auto rec = washdet::synth::generate_recording(scn, i, params, seed);
        washdet::write_recording(rec, out / rec.meta.participant_id);
        int washes = 0;
        for (const auto& a : rec.annotations)
            if (a.kind == washdet::AnnotationKind::hand_wash) ++washes;
        total += washes;
        std::printf("%s: %d washes, %.0f s\n", rec.meta.participant_id.c_str(),
                    washes, static_cast<double>(rec.duration_ms) / 1000.0);
    }
    std::printf("wrote %d recordings (%d washes) to %s\n", scn.n_participants, total,
                out.string().c_str());
    return 0;
}

int cmd_stats(const Config& cfg) {
    std::vector<std::string> warnings;
    const Dataset ds = load_dataset(cfg, &warnings);
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

    std::size_t issue_count = 0;
    for (std::size_t i = 0; i < ds.recordings.size(); ++i) {
        for (const auto& issue : washdet::validate_recording(ds.recordings[i])) {
            std::printf("issue %s [%s] %s\n", ds.names[i].c_str(),
                        std::string(washdet::issue_kind_name(issue.kind)).c_str(),
                        issue.message.c_str());
            ++issue_count;
        }
    }
    std::printf("%zu validation issue(s) across %zu recording(s)\n", issue_count,
                ds.recordings.size());

    std::string csv = "# " + provenance(cfg) + "\nkey,value\n";
    char buf[128];
    try {
        const auto stats = washdet::ev::duration_stats(ds.recordings);
        std::printf("hand washes: %zu\n", stats.count);
        std::printf("duration mean %.2f s, median %.2f s, q1 %.2f s, q3 %.2f s\n",
                    stats.mean_s, stats.median_s, stats.q1_s, stats.q3_s);
        std::printf("duration min %.2f s, max %.2f s\n", stats.min_s, stats.max_s);
        std::printf("recorded %.1f min, washing %.2f min, null fraction %.4f\n",
                    stats.total_recorded_s / 60.0, stats.total_wash_s / 60.0,
                    stats.null_fraction);
        const std::pair<const char*, double> rows[] = {
            {"count", static_cast<double>(stats.count)},
            {"mean_s", stats.mean_s},
            {"median_s", stats.median_s},
            {"q1_s", stats.q1_s},
            {"q3_s", stats.q3_s},
            {"min_s", stats.min_s},
            {"max_s", stats.max_s},
            {"total_recorded_s", stats.total_recorded_s},
            {"total_wash_s", stats.total_wash_s},
            {"null_fraction", stats.null_fraction},
        };
        for (const auto& [key, value] : rows) {
            std::snprintf(buf, sizeof buf, "%s,%.6f\n", key, value);
            csv += buf;
        }
    } catch (const std::exception& e) {
        // a dataset without wash annotations still gets its validation report
        std::printf("duration statistics unavailable: %s\n", e.what());
        csv += "count,0\n";
    }
    std::snprintf(buf, sizeof buf, "validation_issues,%zu\n", issue_count);
    csv += buf;
    write_text_file(out_dir(cfg) / "stats.csv", csv);
    return 0;
}

int cmd_ablate(const Config& cfg) {
    std::vector<std::string> warnings;
    const Dataset ds = load_dataset(cfg, &warnings);
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

    washdet::ev::AblationConfig ab;
    ab.windows_s = cfg.get_double_list("ablate.windows", {2.5, 5.0});
    for (const double w : ab.windows_s) {
        if (w <= 0.0) throw std::runtime_error("window size must be positive");
        if (w != 2.5 && w != 5.0)
            std::fprintf(stderr, "warning: non-standard window size %g s\n", w);
    }
    if (cfg.contains("ablate.subsets")) {
        ab.subsets.clear();
        for (const auto& name : cfg.get_string_list("ablate.subsets", {})) {
            const auto s = washdet::feat::subset_from_name(name);
            if (!s) throw std::runtime_error("unknown sensor subset '" + name + "'");
            ab.subsets.push_back(*s);
        }
    }
    const std::string task = cfg.get_string("ablate.task", "all");
    if (task == "loso") ab.run_personalized = false;
    else if (task == "personalized") ab.run_loso = false;
    else if (task != "all") throw std::runtime_error("ablate.task must be all|loso|personalized");
    ab.repetitions = static_cast<int>(cfg.get_int("ablate.repetitions", 5));
    ab.test_fraction = cfg.get_double("ablate.test_fraction", 1.0 / 3.0);
    ab.overlap_threshold = cfg.get_double("ablate.overlap_threshold", 0.5);
    ab.forest.n_trees = static_cast<int>(cfg.get_int("forest.n_trees", 100));
    ab.forest.max_depth = static_cast<int>(cfg.get_int("forest.max_depth", 0));
    ab.forest.min_samples_split =
        static_cast<int>(cfg.get_int("forest.min_samples_split", 2));
    ab.forest.min_samples_leaf =
        static_cast<int>(cfg.get_int("forest.min_samples_leaf", 1));
    ab.forest.features_per_split =
        static_cast<int>(cfg.get_int("forest.features_per_split", 0));
    ab.forest.bootstrap_fraction = cfg.get_double("forest.bootstrap_fraction", 1.0);
    ab.base_seed = cfg.get_u64("seed", 42);
    ab.threads = static_cast<int>(cfg.get_int("threads", 0));

    const auto table = washdet::ev::run_ablation(ds.recordings, ab);

    const fs::path out = out_dir(cfg);
    const std::string header = provenance(cfg);
    {
        std::ostringstream os;
        washdet::ev::write_results_csv(table, os, header);
        write_text_file(out / "results.csv", os.str());
    }
    {
        std::ostringstream os;
        os << "# " << header << "\n";
        washdet::ev::write_results_pretty(table, os);
        write_text_file(out / "results.txt", os.str());
    }
    {
        std::ostringstream os;
        washdet::ev::write_details_csv(table, os, header);
        write_text_file(out / "details.csv", os.str());
    }
    if (cfg.get_bool("ablate.export_features", false)) {
        for (const double w : ab.windows_s) {
            const auto matrix = washdet::feat::assemble_matrix(
                ds.recordings, w, washdet::feat::SensorSubset::ALL,
                ab.overlap_threshold, ds.names);
            char name[64];
            std::snprintf(name, sizeof name, "features_%gs.csv", w);
            std::ostringstream os;
            os << "# " << header << "\n";
            washdet::feat::write_matrix_csv(matrix, os);
            write_text_file(out / name, os.str());
        }
    }
    washdet::ev::write_results_pretty(table, std::cout);
    std::printf("results written to %s\n", out.string().c_str());
    return 0;
}

int cmd_curves(const Config& cfg) {
    std::vector<std::string> warnings;
    const Dataset ds = load_dataset(cfg, &warnings);
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

    const double pre = cfg.get_double("curves.pre_s", 60.0);
    const double post = cfg.get_double("curves.post_s", 120.0);
    const int n_boot = static_cast<int>(cfg.get_int("curves.n_boot", 1000));
    const double level = cfg.get_double("curves.level", 0.95);
    const double step = cfg.get_double("curves.step_s", 1.0);
    const uint64_t seed = cfg.get_u64("seed", 42);
    const fs::path out = out_dir(cfg);
    const std::string header = provenance(cfg);

    const washdet::ChannelId channels[] = {washdet::ChannelId::humidity,
                                           washdet::ChannelId::temperature,
                                           washdet::ChannelId::pressure};
    std::size_t n_washes = 0;
    std::vector<double> offsets;
    for (const auto ch : channels) {
        const auto curve = washdet::ev::event_aligned_curve(
            ds.recordings, ch, pre, post, n_boot, level,
            washdet::derive_seed(seed, washdet::streams::curve,
                                 static_cast<int>(ch)),
            step);
        for (const auto& w : curve.warnings)
            std::fprintf(stderr, "warning: %s\n", w.c_str());
        std::ostringstream os;
        washdet::ev::write_curve_csv(curve, os, header);
        const std::string name = std::string(washdet::channel_name(ch)) + "_curve.csv";
        write_text_file(out / name, os.str());
        n_washes = curve.n_washes;
        offsets = curve.wash_offsets_s;
    }
    {
        // wash end markers relative to onset (the onset marker sits at 0)
        std::string csv = "# " + header + "\nwash_index,offset_s\n";
        char buf[64];
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%.3f\n", i, offsets[i]);
            csv += buf;
        }
        write_text_file(out / "wash_markers.csv", csv);
    }
    std::printf("aligned %zu washes; curves written to %s\n", n_washes,
                out.string().c_str());
    return 0;
}

int cmd_validate(const Config& cfg) {
    std::vector<std::string> warnings;
    const Dataset ds = load_dataset(cfg, &warnings);
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::size_t total = 0;
    for (std::size_t i = 0; i < ds.recordings.size(); ++i) {
        const auto issues = washdet::validate_recording(ds.recordings[i]);
        for (const auto& issue : issues)
            std::printf("%s [%s] %s\n", ds.names[i].c_str(),
                        std::string(washdet::issue_kind_name(issue.kind)).c_str(),
                        issue.message.c_str());
        total += issues.size();
    }
    std::printf("%zu issue(s) in %zu recording(s)\n", total, ds.recordings.size());
    return 0;  // findings are issues, never hard errors
}

int cmd_export_annotations(const Config& cfg) {
    std::vector<std::string> warnings;
    const Dataset ds = load_dataset(cfg, &warnings);
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

    const bool propose = cfg.get_bool("propose", false);
    const double rssi_floor = cfg.get_double("propose.rssi_floor_dbm", -80.0);
    const double max_wash_s = cfg.get_double("propose.max_wash_s", 90.0);
    const fs::path out = out_dir(cfg);

    for (std::size_t i = 0; i < ds.recordings.size(); ++i) {
        washdet::Recording rec = ds.recordings[i];
        if (propose) {
            const auto result =
                washdet::propose_annotations(rec, rssi_floor, max_wash_s);
            for (const auto& w : result.warnings)
                std::fprintf(stderr, "warning: %s: %s\n", ds.names[i].c_str(),
                             w.c_str());
            rec.annotations.insert(rec.annotations.end(), result.proposals.begin(),
                                   result.proposals.end());
        }
        const std::string doc = washdet::export_annotations(rec);
        write_text_file(out / (ds.names[i] + ".annotations.tsv"),
                        "# " + provenance(cfg) + "\n" + doc);
    }
    std::printf("exported annotations for %zu recording(s) to %s\n",
                ds.recordings.size(), out.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hand-washing detection pipeline: synthetic recordings, window "
                 "features, random-forest ablation, response curves"};
    app.require_subcommand(1);

    std::vector<std::pair<std::string, std::string>> pending;
    const auto add_opt = [&pending](CLI::App* cmd, const std::string& flag,
                                    const std::string& key, const std::string& desc) {
        cmd->add_option_function<std::string>(
            flag,
            [key, &pending](const std::string& v) { pending.emplace_back(key, v); },
            desc);
    };
    const auto add_flag = [&pending](CLI::App* cmd, const std::string& flag,
                                     const std::string& key, const std::string& desc) {
        cmd->add_flag_callback(
            flag, [key, &pending]() { pending.emplace_back(key, "true"); }, desc);
    };

    const auto add_common = [&](CLI::App* cmd) {
        add_opt(cmd, "--config", "config", "key = value config file");
        add_opt(cmd, "--seed", "seed", "base seed (default 42)");
        add_opt(cmd, "--out", "out", "output directory (default out)");
        add_opt(cmd, "--threads", "threads", "worker threads, 0 = auto; never affects results");
        cmd->add_option_function<std::vector<std::string>>(
            "--set",
            [&pending](const std::vector<std::string>& kvs) {
                for (const auto& kv : kvs) {
                    const auto eq = kv.find('=');
                    if (eq == std::string::npos)
                        throw CLI::ValidationError("--set expects key=value");
                    pending.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
                }
            },
            "extra config entries (key=value, repeatable)");
    };

    auto* synth = app.add_subcommand("synth", "generate synthetic recording bundles");
    add_common(synth);
    add_opt(synth, "--participants", "scenario.participants", "participant count");
    add_opt(synth, "--washes", "scenario.washes", "hand washes per participant");
    add_opt(synth, "--session-s", "scenario.session_s", "session length in seconds");
    add_opt(synth, "--imu-ambiguity", "scenario.imu_ambiguity",
            "0 = distinct wash IMU texture, 1 = indistinguishable from desk");

    auto* stats = app.add_subcommand("stats", "wash duration and imbalance report");
    add_common(stats);
    add_opt(stats, "--data", "data", "dataset directory");

    auto* ablate = app.add_subcommand("ablate", "sensor-subset ablation study");
    add_common(ablate);
    add_opt(ablate, "--data", "data", "dataset directory");
    add_opt(ablate, "--windows", "ablate.windows", "window sizes in seconds (csv)");
    add_opt(ablate, "--subsets", "ablate.subsets", "sensor subsets (csv of names)");
    add_opt(ablate, "--reps", "ablate.repetitions", "repetitions (default 5)");
    add_opt(ablate, "--task", "ablate.task", "all|loso|personalized");
    add_opt(ablate, "--trees", "forest.n_trees", "trees per forest (default 100)");
    add_opt(ablate, "--max-depth", "forest.max_depth", "tree depth cap, 0 = unlimited");
    add_flag(ablate, "--export-features", "ablate.export_features",
             "also write the per-window feature matrices");

    auto* curves = app.add_subcommand(
        "curves", "event-aligned atmospheric response curves with bootstrap CIs");
    add_common(curves);
    add_opt(curves, "--data", "data", "dataset directory");
    add_opt(curves, "--pre", "curves.pre_s", "seconds before onset (default 60)");
    add_opt(curves, "--post", "curves.post_s", "seconds after onset (default 120)");
    add_opt(curves, "--boot", "curves.n_boot", "bootstrap resamples (default 1000)");
    add_opt(curves, "--level", "curves.level", "CI level (default 0.95)");
    add_opt(curves, "--step", "curves.step_s", "grid step in seconds (default 1)");

    auto* validate = app.add_subcommand("validate", "integrity scan of a dataset");
    add_common(validate);
    add_opt(validate, "--data", "data", "dataset directory");

    auto* exporter =
        app.add_subcommand("export-annotations", "labeling-tool annotation export");
    add_common(exporter);
    add_opt(exporter, "--data", "data", "dataset directory");
    add_flag(exporter, "--propose", "propose",
             "add proposals derived from button/beacon cues");
    add_opt(exporter, "--rssi-floor", "propose.rssi_floor_dbm",
            "beacon gate in dBm (default -80)");
    add_opt(exporter, "--max-wash-s", "propose.max_wash_s",
            "longest accepted press-pair span (default 90)");

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg;
        for (const auto& [key, value] : pending)
            if (key == "config") cfg = Config::from_file(value);
        for (const auto& [key, value] : pending)
            if (key != "config") cfg.set(key, value);

        if (synth->parsed()) return cmd_synth(cfg);
        if (stats->parsed()) return cmd_stats(cfg);
        if (ablate->parsed()) return cmd_ablate(cfg);
        if (curves->parsed()) return cmd_curves(cfg);
        if (validate->parsed()) return cmd_validate(cfg);
        if (exporter->parsed()) return cmd_export_annotations(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
