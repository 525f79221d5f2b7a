#include "washdet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "washdet/rng.hpp"

namespace washdet::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// t_i = round(i * 1000 / 52): 52 Hz on an integer-millisecond clock
int64_t imu_timestamp(int64_t i) { return (i * 1000 + 26) / 52; }

void validate_params(const ResponseParams& p) {
    if (p.rh_rise_tau_s <= 0.0 || p.rh_decay_tau_s <= 0.0)
        throw std::invalid_argument("response taus must be positive");
    if (p.rh_decay_tau_s <= p.rh_rise_tau_s)
        throw std::invalid_argument("humidity decay tau must exceed the rise tau");
    if (p.rh_room_bump < 0.0 || p.rh_wash_gain < 0.0)
        throw std::invalid_argument("humidity gains must be non-negative");
    if (p.rh_baseline < 5.0 ||
        p.rh_baseline + p.rh_room_bump + p.rh_wash_gain > 95.0)
        throw std::invalid_argument("humidity model leaves [0, 100] %RH");
    for (double sd : {p.noise_acc_g, p.noise_gyro_dps, p.noise_rh, p.noise_temp_c,
                      p.noise_pressure_hpa, p.calib_sd_rh, p.calib_sd_temp_c,
                      p.calib_sd_pressure_hpa})
        if (sd < 0.0) throw std::invalid_argument("noise sd must be non-negative");
}

}  // namespace

std::string_view activity_kind_name(ActivityKind k) {
    switch (k) {
        case ActivityKind::desk: return "desk";
        case ActivityKind::walk: return "walk";
        case ActivityKind::stairs: return "stairs";
        case ActivityKind::hand_wash: return "hand_wash";
        case ActivityKind::room_transit: return "room_transit";
    }
    return "?";
}

double humidity_response(double t_rel_s, double wash_len_s, double transit_s,
                         const ResponseParams& p) {
    if (wash_len_s <= 0.0) throw std::invalid_argument("wash_len_s must be positive");
    if (t_rel_s < -transit_s) return 0.0;
    if (t_rel_s < 0.0) {
        if (transit_s <= 0.0) return 0.0;
        return p.rh_room_bump * (1.0 + t_rel_s / transit_s);
    }
    if (t_rel_s <= wash_len_s)
        return p.rh_room_bump +
               p.rh_wash_gain * (1.0 - std::exp(-t_rel_s / p.rh_rise_tau_s));
    const double end_value =
        p.rh_room_bump + p.rh_wash_gain * (1.0 - std::exp(-wash_len_s / p.rh_rise_tau_s));
    return end_value * std::exp(-(t_rel_s - wash_len_s) / p.rh_decay_tau_s);
}

double temperature_response(double t_rel_s, double wash_len_s, double transit_in_s,
                            double transit_out_s, const ResponseParams& p) {
    if (wash_len_s <= 0.0) throw std::invalid_argument("wash_len_s must be positive");
    if (t_rel_s < -transit_in_s) return 0.0;
    if (t_rel_s < 0.0) {
        if (transit_in_s <= 0.0) return 0.0;
        return p.temp_room_dip_c * (1.0 + t_rel_s / transit_in_s);
    }
    if (t_rel_s <= wash_len_s) return p.temp_room_dip_c;
    if (transit_out_s <= 0.0) return 0.0;
    if (t_rel_s <= wash_len_s + transit_out_s)
        return p.temp_room_dip_c * (1.0 - (t_rel_s - wash_len_s) / transit_out_s);
    return 0.0;
}

double pressure_response(double t_abs_s, std::span<const ActivitySegment> script,
                         const ResponseParams& p) {
    double offset = 0.0;
    double t_seg_start = 0.0;
    int stairs_index = 0;
    for (const auto& seg : script) {
        const double len_s = static_cast<double>(seg.duration_ms) / 1000.0;
        const double t_seg_end = t_seg_start + len_s;
        if (seg.kind == ActivityKind::stairs) {
            const double rate =
                p.pressure_stairs_rate_hpa_s * (stairs_index % 2 == 0 ? 1.0 : -1.0);
            ++stairs_index;
            if (t_abs_s < t_seg_end)
                return p.pressure_baseline_hpa + offset +
                       rate * std::max(0.0, t_abs_s - t_seg_start);
            offset += rate * len_s;
        } else if (t_abs_s < t_seg_end) {
            break;
        }
        t_seg_start = t_seg_end;
    }
    return p.pressure_baseline_hpa + offset;
}

std::vector<ActivitySegment> build_participant_script(const Scenario& scn,
                                                      int participant_index,
                                                      uint64_t seed) {
    const int washes = scn.washes_per_participant;
    const int64_t session = scn.session_ms;
    if (session <= 0) throw std::invalid_argument("session_ms must be positive");
    if (washes < 0) throw std::invalid_argument("washes_per_participant must be >= 0");

    Rng rng(derive_seed(seed, streams::script, participant_index));

    struct Placed {
        int64_t start;
        std::vector<ActivitySegment> segs;
        int64_t length() const {
            int64_t n = 0;
            for (const auto& s : segs) n += s.duration_ms;
            return n;
        }
    };
    std::vector<Placed> placed;

    if (washes > 0) {
        const int64_t head = std::min<int64_t>(300'000, session / 6);
        const int64_t span = session - 2 * head;
        const int64_t spacing = washes > 0 ? span / washes : span;
        if (span <= 0 || spacing < 170'000)
            throw std::invalid_argument(
                "session too short for the requested number of washes");
        for (int k = 0; k < washes; ++k) {
            const int64_t jitter_range = spacing / 10;
            const int64_t jitter =
                static_cast<int64_t>(rng.below(2 * jitter_range + 1)) - jitter_range;
            const int64_t onset = head + spacing * k + spacing / 2 + jitter;
            const int64_t transit_in = 20'000 + static_cast<int64_t>(rng.below(20'001));
            const int64_t wash_len = 15'000 + static_cast<int64_t>(rng.below(25'001));
            const int64_t transit_out = 20'000 + static_cast<int64_t>(rng.below(20'001));
            Placed g;
            g.start = onset - transit_in;
            g.segs = {{ActivityKind::room_transit, transit_in},
                      {ActivityKind::hand_wash, wash_len},
                      {ActivityKind::room_transit, transit_out}};
            placed.push_back(std::move(g));
        }
        for (std::size_t i = 1; i < placed.size(); ++i)
            if (placed[i].start < placed[i - 1].start + placed[i - 1].length() + 1000)
                throw std::invalid_argument("wash groups collide; session too short");
        if (placed.front().start < 0 ||
            placed.back().start + placed.back().length() > session)
            throw std::invalid_argument("wash group leaves the session window");
    }

    // one walk with stairs in the largest quiet stretch, when it fits
    {
        int64_t gap_start = 0;
        int64_t best_start = 0, best_len = 0;
        std::size_t best_pos = 0, pos = 0;
        for (const auto& g : placed) {
            if (g.start - gap_start > best_len) {
                best_len = g.start - gap_start;
                best_start = gap_start;
                best_pos = pos;
            }
            gap_start = g.start + g.length();
            ++pos;
        }
        if (session - gap_start > best_len) {
            best_len = session - gap_start;
            best_start = gap_start;
            best_pos = pos;
        }
        std::vector<ActivitySegment> block;
        if (best_len >= 330'000)
            block = {{ActivityKind::walk, 90'000},  {ActivityKind::stairs, 35'000},
                     {ActivityKind::walk, 60'000},  {ActivityKind::stairs, 35'000},
                     {ActivityKind::walk, 90'000}};
        else if (best_len >= 170'000)
            block = {{ActivityKind::walk, 60'000},
                     {ActivityKind::stairs, 30'000},
                     {ActivityKind::walk, 60'000}};
        if (!block.empty()) {
            int64_t block_len = 0;
            for (const auto& s : block) block_len += s.duration_ms;
            Placed b;
            b.start = best_start + (best_len - block_len) / 2;
            b.segs = std::move(block);
            placed.insert(placed.begin() + static_cast<std::ptrdiff_t>(best_pos),
                          std::move(b));
        }
    }

    std::vector<ActivitySegment> script;
    int64_t cursor = 0;
    for (const auto& g : placed) {
        if (g.start > cursor)
            script.push_back({ActivityKind::desk, g.start - cursor});
        for (const auto& s : g.segs) script.push_back(s);
        cursor = g.start + g.length();
    }
    if (cursor < session) script.push_back({ActivityKind::desk, session - cursor});
    return script;
}

std::vector<WashEvent> scripted_washes(std::span<const ActivitySegment> script) {
    std::vector<WashEvent> events;
    int64_t t = 0;
    for (std::size_t i = 0; i < script.size(); ++i) {
        const auto& seg = script[i];
        if (seg.kind == ActivityKind::hand_wash) {
            WashEvent e;
            e.onset_ms = t;
            e.end_ms = t + seg.duration_ms;
            if (i > 0 && script[i - 1].kind == ActivityKind::room_transit)
                e.transit_in_ms = script[i - 1].duration_ms;
            if (i + 1 < script.size() && script[i + 1].kind == ActivityKind::room_transit)
                e.transit_out_ms = script[i + 1].duration_ms;
            events.push_back(e);
        }
        t += seg.duration_ms;
    }
    return events;
}

namespace {

struct SegmentTexture {
    double amp = 0.0;
    double freq_hz = 0.0;
    double phase = 0.0;
    double jitter_sd = 0.0;
};

// Stylized periodic IMU texture per activity. The wash contribution scales
// with (1 - imu_ambiguity); at 1.0 a wash sample is bit-identical to desk.
SegmentTexture segment_texture(ActivityKind kind, bool is_acc, double vigor,
                               double ambiguity, Rng& rng) {
    SegmentTexture tex;
    const double walk_amp = is_acc ? 0.25 : 25.0;
    const double wash_amp = is_acc ? 0.35 : 55.0;
    const double wash_jitter = is_acc ? 0.08 : 15.0;
    switch (kind) {
        case ActivityKind::desk:
            break;
        case ActivityKind::walk:
            tex.amp = walk_amp * rng.uniform(0.9, 1.1);
            tex.freq_hz = rng.uniform(1.7, 2.3);
            tex.phase = rng.uniform(0.0, kTwoPi);
            break;
        case ActivityKind::stairs:
            tex.amp = 1.15 * walk_amp * rng.uniform(0.9, 1.1);
            tex.freq_hz = rng.uniform(1.6, 2.2);
            tex.phase = rng.uniform(0.0, kTwoPi);
            break;
        case ActivityKind::room_transit:
            tex.amp = 0.5 * walk_amp * rng.uniform(0.9, 1.1);
            tex.freq_hz = rng.uniform(1.4, 1.9);
            tex.phase = rng.uniform(0.0, kTwoPi);
            break;
        case ActivityKind::hand_wash:
            tex.amp = (1.0 - ambiguity) * wash_amp * vigor * rng.uniform(0.85, 1.15);
            tex.freq_hz = rng.uniform(3.0, 5.0);
            tex.phase = rng.uniform(0.0, kTwoPi);
            tex.jitter_sd = (1.0 - ambiguity) * wash_jitter * vigor;
            break;
    }
    return tex;
}

}  // namespace

Recording generate_recording(const Scenario& scn, int participant_index,
                             const ResponseParams& p, uint64_t seed) {
    validate_params(p);
    if (participant_index < 0 || participant_index >= scn.n_participants)
        throw std::invalid_argument("participant_index out of range");
    if (scn.imu_ambiguity < 0.0 || scn.imu_ambiguity > 1.0)
        throw std::invalid_argument("imu_ambiguity must lie in [0, 1]");
    if (!scn.scripts.empty() &&
        scn.scripts.size() != static_cast<std::size_t>(scn.n_participants))
        throw std::invalid_argument("scripts must be empty or one per participant");

    const std::vector<ActivitySegment> script =
        scn.scripts.empty()
            ? build_participant_script(scn, participant_index, seed)
            : scn.scripts[static_cast<std::size_t>(participant_index)];

    int64_t script_len = 0;
    int wash_count = 0;
    for (std::size_t i = 0; i < script.size(); ++i) {
        if (script[i].duration_ms <= 0)
            throw std::invalid_argument("script segment with non-positive duration");
        script_len += script[i].duration_ms;
        if (script[i].kind == ActivityKind::hand_wash) {
            ++wash_count;
            if (i == 0 || script[i - 1].kind != ActivityKind::room_transit)
                throw std::invalid_argument(
                    "every hand_wash must be preceded by a room_transit");
        }
    }
    if (script_len != scn.session_ms)
        throw std::invalid_argument("script durations do not sum to session_ms");
    if (wash_count != scn.washes_per_participant)
        throw std::invalid_argument("script wash count differs from scenario");

    const auto washes = scripted_washes(script);
    const int64_t session = scn.session_ms;

    Recording rec;
    rec.duration_ms = session;

    {
        char buf[16];
        std::snprintf(buf, sizeof buf, "p%02d", participant_index);
        rec.meta.participant_id = buf;
    }
    Rng meta_rng(derive_seed(seed, streams::meta, participant_index));
    rec.meta.day_condition = static_cast<DayCondition>(meta_rng.below(3));
    rec.meta.outdoor_temp_c = meta_rng.uniform(13.0, 21.0);
    rec.meta.outdoor_rh_percent = meta_rng.uniform(63.5, 89.0);
    rec.meta.outdoor_pressure_hpa = meta_rng.uniform(996.7, 1007.7);
    const double calib_rh = meta_rng.normal(0.0, p.calib_sd_rh);
    const double calib_temp = meta_rng.normal(0.0, p.calib_sd_temp_c);
    const double calib_press = meta_rng.normal(0.0, p.calib_sd_pressure_hpa);

    Rng style_rng(derive_seed(seed, streams::style, participant_index));
    const double vigor = style_rng.uniform(0.7, 1.3);
    const double rh_style = style_rng.uniform(-4.0, 4.0);
    const double temp_style = style_rng.uniform(-1.5, 1.5);
    const double press_style = style_rng.uniform(-3.0, 3.0);
    const double acc_rest[3] = {style_rng.uniform(-0.2, 0.2),
                                style_rng.uniform(-0.2, 0.2),
                                style_rng.uniform(0.9, 1.0)};

    for (const auto& w : washes)
        rec.annotations.push_back(Annotation{w.onset_ms, w.end_ms,
                                             AnnotationKind::hand_wash,
                                             AnnotationSource::manual});

    // atmospheric channels, 1 Hz
    {
        auto& hum = rec.ensure(ChannelId::humidity);
        auto& temp = rec.ensure(ChannelId::temperature);
        auto& press = rec.ensure(ChannelId::pressure);
        Rng noise_h(derive_seed(seed, streams::noise, participant_index,
                                static_cast<int>(ChannelId::humidity)));
        Rng noise_t(derive_seed(seed, streams::noise, participant_index,
                                static_cast<int>(ChannelId::temperature)));
        Rng noise_p(derive_seed(seed, streams::noise, participant_index,
                                static_cast<int>(ChannelId::pressure)));
        for (int64_t t = 0; t < session; t += 1000) {
            const double t_s = static_cast<double>(t) / 1000.0;
            double h = p.rh_baseline + rh_style + calib_rh;
            double c = p.temp_baseline_c + temp_style + calib_temp;
            for (const auto& w : washes) {
                const double t_rel = t_s - static_cast<double>(w.onset_ms) / 1000.0;
                const double len_s =
                    static_cast<double>(w.end_ms - w.onset_ms) / 1000.0;
                h += humidity_response(
                    t_rel, len_s, static_cast<double>(w.transit_in_ms) / 1000.0, p);
                c += temperature_response(
                    t_rel, len_s, static_cast<double>(w.transit_in_ms) / 1000.0,
                    static_cast<double>(w.transit_out_ms) / 1000.0, p);
            }
            h += p.noise_rh * noise_h.normal();
            c += p.noise_temp_c * noise_t.normal();
            double pr = pressure_response(t_s, script, p) + press_style + calib_press +
                        p.noise_pressure_hpa * noise_p.normal();
            hum.t_ms.push_back(t);
            hum.value.push_back(h);
            temp.t_ms.push_back(t);
            temp.value.push_back(c);
            press.t_ms.push_back(t);
            press.value.push_back(pr);
        }
    }

    // IMU channels, 52 Hz
    {
        const ChannelId imu_ids[6] = {ChannelId::acc_x,  ChannelId::acc_y,
                                      ChannelId::acc_z,  ChannelId::gyro_x,
                                      ChannelId::gyro_y, ChannelId::gyro_z};
        // segment boundaries in ms
        std::vector<int64_t> seg_end(script.size());
        int64_t acc_ms = 0;
        for (std::size_t s = 0; s < script.size(); ++s) {
            acc_ms += script[s].duration_ms;
            seg_end[s] = acc_ms;
        }
        for (int c = 0; c < 6; ++c) {
            const ChannelId id = imu_ids[c];
            const bool is_acc = c < 3;
            const double rest = is_acc ? acc_rest[c] : 0.0;
            const double noise_sd = is_acc ? p.noise_acc_g : p.noise_gyro_dps;

            std::vector<SegmentTexture> tex(script.size());
            for (std::size_t s = 0; s < script.size(); ++s) {
                Rng tex_rng(derive_seed(seed, streams::texture, participant_index,
                                        static_cast<int>(s), static_cast<int>(id)));
                tex[s] = segment_texture(script[s].kind, is_acc, vigor,
                                         scn.imu_ambiguity, tex_rng);
            }
            Rng noise_rng(derive_seed(seed, streams::noise, participant_index,
                                      static_cast<int>(id)));
            Rng jitter_rng(derive_seed(seed, streams::texture, participant_index,
                                       0x1177, static_cast<int>(id)));

            auto& series = rec.ensure(id);
            std::size_t s = 0;
            int64_t seg_start = 0;
            for (int64_t i = 0;; ++i) {
                const int64_t t = imu_timestamp(i);
                if (t >= session) break;
                while (t >= seg_end[s]) {
                    seg_start = seg_end[s];
                    ++s;
                }
                double v = rest + noise_sd * noise_rng.normal();
                const auto& tx = tex[s];
                if (tx.amp != 0.0) {
                    const double t_in_seg =
                        static_cast<double>(t - seg_start) / 1000.0;
                    v += tx.amp * std::sin(kTwoPi * tx.freq_hz * t_in_seg + tx.phase);
                }
                if (script[s].kind == ActivityKind::hand_wash)
                    v += tx.jitter_sd * jitter_rng.normal();
                series.t_ms.push_back(t);
                series.value.push_back(v);
            }
        }
    }

    // button cue: one press shortly before and one shortly after each wash
    {
        auto& btn = rec.ensure(ChannelId::button);
        Rng rng(derive_seed(seed, streams::button, participant_index));
        btn.t_ms.push_back(0);
        btn.value.push_back(0.0);
        for (const auto& w : washes) {
            const int64_t press1 =
                w.onset_ms - 1000 - static_cast<int64_t>(rng.below(2001));
            const int64_t press2 =
                w.end_ms + 1000 + static_cast<int64_t>(rng.below(2001));
            for (const int64_t press : {press1, press2}) {
                if (press <= btn.t_ms.back() || press + 150 >= session) continue;
                btn.t_ms.push_back(press);
                btn.value.push_back(1.0);
                btn.t_ms.push_back(press + 150);
                btn.value.push_back(0.0);
            }
        }
    }

    // beacon RSSI: present only near the sink (transit + wash), missing
    // elsewhere (out of range)
    {
        auto& rssi = rec.ensure(ChannelId::beacon_rssi);
        Rng rng(derive_seed(seed, streams::rssi, participant_index));
        for (const auto& w : washes) {
            const int64_t win_start = w.onset_ms - w.transit_in_ms;
            const int64_t win_end = w.end_ms + w.transit_out_ms;
            for (int64_t t = ((win_start + 999) / 1000) * 1000;
                 t <= win_end && t < session; t += 1000) {
                if (!rssi.t_ms.empty() && t <= rssi.t_ms.back()) continue;
                double level;
                if (t < w.onset_ms) {
                    const double f = w.transit_in_ms > 0
                                         ? static_cast<double>(t - win_start) /
                                               static_cast<double>(w.transit_in_ms)
                                         : 1.0;
                    level = -72.0 + 20.0 * f;
                } else if (t <= w.end_ms) {
                    level = -50.0;
                } else {
                    const double f = w.transit_out_ms > 0
                                         ? static_cast<double>(t - w.end_ms) /
                                               static_cast<double>(w.transit_out_ms)
                                         : 1.0;
                    level = -52.0 - 20.0 * f;
                }
                rssi.t_ms.push_back(t);
                rssi.value.push_back(level + 2.0 * rng.normal());
            }
        }
    }

    return rec;
}

}  // namespace washdet::synth
