#include "hetsync/scenario.hpp"

#include "hetsync/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace hetsync {

// ---------------------------------------------------------------------------
// Key table

namespace {

struct Field {
    std::string key;
    std::function<void(Scenario&, const std::string&)> set;
    std::function<std::string(const Scenario&)> get;
};

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& expect) {
    throw ConfigError(key, "config key '" + key + "': cannot parse '" + value + "' as " + expect);
}

template <class T>
T parse_integer(const std::string& key, const std::string& v) {
    T out{};
    const auto t = trim(v);
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty()) bad(key, v, "an integer");
    return out;
}

double parse_real(const std::string& key, const std::string& v) {
    double out = 0;
    const auto t = trim(v);
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty() || !std::isfinite(out)) bad(key, v, "a finite number");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    const auto t = trim(v);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    bad(key, v, "a boolean (true/false)");
}

Distribution parse_dist(const std::string& key, const std::string& v) {
    try {
        return Distribution::parse(trim(v));
    } catch (const std::exception& e) {
        throw ConfigError(key, "config key '" + key + "': " + e.what());
    }
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::set<LidarScheme> parse_schemes(const std::string& key, const std::string& v) {
    std::set<LidarScheme> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.insert(parse_lidar_scheme(item));
        } catch (const std::exception&) {
            throw ConfigError(key, "config key '" + key + "': unknown scheme '" + item + "' (expected arrival, internal, pps_disciplined)");
        }
    }
    if (out.empty()) throw ConfigError(key, "config key '" + key + "': at least one scheme is required");
    return out;
}

std::string fmt_schemes(const std::set<LidarScheme>& s) {
    std::string out;
    for (LidarScheme x : s) {
        if (!out.empty()) out += ",";
        out += std::string(to_string(x));
    }
    return out;
}

#define HS_INT(KEY, MEMBER)                                                                                          \
    Field {                                                                                                          \
        KEY, [](Scenario& s, const std::string& v) { s.MEMBER = parse_integer<std::decay_t<decltype(s.MEMBER)>>(KEY, v); }, \
            [](const Scenario& s) { return std::to_string(s.MEMBER); }                                               \
    }
#define HS_REAL(KEY, MEMBER)                                                                                  \
    Field {                                                                                                   \
        KEY, [](Scenario& s, const std::string& v) { s.MEMBER = parse_real(KEY, v); },                        \
            [](const Scenario& s) { return format_double(s.MEMBER); }                                         \
    }
#define HS_BOOL(KEY, MEMBER)                                                                                  \
    Field {                                                                                                   \
        KEY, [](Scenario& s, const std::string& v) { s.MEMBER = parse_bool(KEY, v); },                        \
            [](const Scenario& s) { return fmt_bool(s.MEMBER); }                                              \
    }
#define HS_DIST(KEY, MEMBER)                                                                                  \
    Field {                                                                                                   \
        KEY, [](Scenario& s, const std::string& v) { s.MEMBER = parse_dist(KEY, v); },                        \
            [](const Scenario& s) { return s.MEMBER.to_string(); }                                            \
    }
#define HS_CLOCK(PREFIX, MEMBER)                                                                              \
    HS_INT(PREFIX "clock_offset_ns", MEMBER.offset0_ns), HS_REAL(PREFIX "clock_rate_ppm", MEMBER.rate_ppm),   \
        HS_REAL(PREFIX "clock_rw_sigma_ppm_per_sqrt_s", MEMBER.rw_sigma_ppm_per_sqrt_s),                      \
        HS_REAL(PREFIX "clock_jitter_ns", MEMBER.jitter_sigma_ns)

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        HS_REAL("run.duration_s", duration_s),
        HS_INT("run.seed", seed),
        Field{"run.out_dir", [](Scenario& s, const std::string& v) { s.out_dir = trim(v); },
              [](const Scenario& s) { return s.out_dir; }},

        HS_CLOCK("mcu.", mcu.clock),
        HS_INT("mcu.tick_rate_hz", mcu.timer.tick_rate_hz.num),
        HS_INT("mcu.overflow_ticks", mcu.timer.overflow_ticks),
        HS_INT("mcu.compare_half_ticks", mcu.timer.compare_half_ticks),
        HS_REAL("mcu.latency_base_ns", mcu.latency.base_ns),
        HS_REAL("mcu.latency_sigma_ns", mcu.latency.sigma_ns),
        Field{"mcu.blocked_extra_ns",
              [](Scenario& s, const std::string& v) {
                  if (trim(v) == "auto") s.mcu.latency.blocked_extra_ns.reset();
                  else s.mcu.latency.blocked_extra_ns = parse_integer<std::int64_t>("mcu.blocked_extra_ns", v);
              },
              [](const Scenario& s) {
                  return s.mcu.latency.blocked_extra_ns ? std::to_string(*s.mcu.latency.blocked_extra_ns) : std::string("auto");
              }},
        HS_INT("mcu.service_trigger_ns", mcu.service.service_ns[0]),
        HS_INT("mcu.service_imu_ns", mcu.service.service_ns[1]),
        HS_INT("mcu.service_overflow_ns", mcu.service.service_ns[2]),
        HS_INT("mcu.service_half_ns", mcu.service.service_ns[3]),
        HS_BOOL("mcu.trigger_enabled", mcu.trigger.enabled),
        HS_INT("mcu.trigger_hz", mcu.trigger.trigger_hz),
        HS_INT("mcu.camera_fps", mcu.trigger.camera_fps),
        HS_INT("mcu.phase_offset_ns", mcu.trigger.phase_offset_ns),
        HS_INT("mcu.serial_baud", mcu.serial_baud),
        HS_INT("mcu.epoch_unix_s", mcu.epoch.start_unix_s),

        HS_BOOL("lidar.enabled", lidar_enabled),
        Field{"lidar.schemes", [](Scenario& s, const std::string& v) { s.schemes = parse_schemes("lidar.schemes", v); },
              [](const Scenario& s) { return fmt_schemes(s.schemes); }},
        HS_INT("lidar.packet_period_ns", lidar.packet_period_ns),
        HS_INT("lidar.first_packet_ns", lidar.first_packet_ns),
        HS_DIST("lidar.arrival_jitter", lidar.arrival_jitter),
        HS_REAL("lidar.spike_probability", lidar.spike.probability),
        HS_DIST("lidar.spike_magnitude", lidar.spike.magnitude),
        HS_INT("lidar.burst_gap_ns", lidar.burst_gap_ns),
        HS_CLOCK("lidar.internal_", lidar.internal_clock),
        HS_INT("lidar.internal_quantum_ns", lidar.internal_quantum_ns),
        HS_CLOCK("lidar.host_", lidar.host_clock),
        HS_INT("lidar.window_min_ns", lidar.window.min_after_pps_ns),
        HS_INT("lidar.window_max_ns", lidar.window.max_after_pps_ns),

        HS_BOOL("imu.enabled", imu_enabled),
        HS_INT("imu.sample_rate_hz", imu.sample_rate_hz),
        HS_BOOL("imu.driven_by_mcu_clock", imu.driven_by_mcu_clock),
        HS_CLOCK("imu.private_", imu.private_clock),
        HS_REAL("imu.gyro_noise_sigma", imu.gyro_noise_sigma),

        HS_BOOL("depthcam.enabled", depthcam_enabled),
        HS_INT("depthcam.grid_hz", depthcam.grid_hz),
        HS_INT("depthcam.configured_fps", depthcam.configured_fps),
        HS_CLOCK("depthcam.", depthcam.internal_clock),
        HS_BOOL("depthcam.first_frame_invalid", depthcam.first_frame_invalid),

        HS_BOOL("phone.enabled", phone_enabled),
        HS_CLOCK("phone.", phone.clock),
        HS_INT("phone.cam_fps", phone.cam_fps),
        HS_INT("phone.gyro_rate_hz", phone.gyro_rate_hz),
        HS_DIST("phone.net_jitter", phone.net_jitter),
        HS_REAL("phone.gyro_noise_sigma", phone.gyro_noise_sigma),

        HS_BOOL("motion.enabled", motion.enabled),
        HS_INT("motion.components", motion.components),
        HS_REAL("motion.f_lo_hz", motion.f_lo_hz),
        HS_REAL("motion.f_hi_hz", motion.f_hi_hz),
        HS_REAL("motion.peak_rad_s", motion.peak_rad_s),

        HS_BOOL("align.enabled", align.enabled),
        HS_REAL("align.at_s", align.at_s),
        HS_INT("align.resample_period_ns", align.resample_period_ns),
        HS_INT("align.max_lag_ns", align.max_lag_ns),
        HS_REAL("align.confidence_threshold", align.confidence_threshold),

        HS_INT("eval.hist_bin_ns", eval.hist_bin_ns),
        HS_INT("eval.hist_lo_ns", eval.hist_lo_ns),
        HS_INT("eval.hist_hi_ns", eval.hist_hi_ns),
    };
    return table;
}

#undef HS_INT
#undef HS_REAL
#undef HS_BOOL
#undef HS_DIST
#undef HS_CLOCK

const Field* find_field(const std::string& key) {
    for (const auto& f : fields())
        if (f.key == key) return &f;
    return nullptr;
}

// Runs a module validator, reporting its failure against `key`.
template <class F>
void check(const std::string& key, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(key, "config key '" + key + "': " + e.what());
    }
}

} // namespace

std::vector<std::string> scenario_keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
}

void set_scenario_key(Scenario& s, const std::string& key, const std::string& value) {
    const Field* f = find_field(key);
    if (!f) throw ConfigError(key, "unknown config key '" + key + "'");
    f->set(s, value);
}

std::string canonical_config(const Scenario& s) {
    std::ostringstream os;
    std::string section;
    for (const auto& f : fields()) {
        const auto dot = f.key.find('.');
        const std::string sec = f.key.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) os << '\n';
            os << '[' << sec << "]\n";
            section = sec;
        }
        os << f.key.substr(dot + 1) << " = " << f.get(s) << '\n';
    }
    return os.str();
}

namespace {

// The output location is not a simulation parameter; keep it out of artifacts and their hashes.
std::string artifact_config(const Scenario& s) {
    Scenario copy = s;
    copy.out_dir = Scenario{}.out_dir;
    return canonical_config(copy);
}

} // namespace

Scenario parse_scenario(std::istream& is, const std::string& source_name) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("<syntax>", source_name + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    Scenario s;
    for (const auto& [section, node] : tree) {
        if (node.empty()) throw ConfigError(section, source_name + ": key '" + section + "' must appear inside a [section]");
        for (const auto& [key, value] : node) set_scenario_key(s, section + "." + key, value.data());
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("--config", "cannot open config file '" + path.string() + "'");
    return parse_scenario(in, path.string());
}

void Scenario::validate() const {
    if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw ConfigError("run.duration_s", "run.duration_s must be > 0");
    if (duration_s > 1e6) throw ConfigError("run.duration_s", "run.duration_s must be <= 1e6");
    check("mcu.tick_rate_hz", [&] { mcu.timer.validate(); });
    check("mcu.clock_rate_ppm", [&] { mcu.clock.validate(); });
    check("mcu.latency_base_ns", [&] { mcu.latency.validate(); });
    for (std::size_t i = 0; i < mcu.service.service_ns.size(); ++i)
        if (mcu.service.service_ns[i] < 0) throw ConfigError("mcu.service_*_ns", "interrupt service durations must be >= 0");
    if (mcu.trigger.enabled) {
        if (mcu.trigger.trigger_hz <= 0) throw ConfigError("mcu.trigger_hz", "mcu.trigger_hz must be positive");
        if (mcu.trigger.camera_fps <= 0 || mcu.trigger.trigger_hz % mcu.trigger.camera_fps != 0)
            throw ConfigError("mcu.camera_fps", "mcu.camera_fps must be positive and divide mcu.trigger_hz");
    }
    check("mcu.phase_offset_ns", [&] { mcu.trigger.validate(); });
    check("mcu.serial_baud", [&] { mcu.validate(); });
    check("lidar.packet_period_ns", [&] { lidar.validate(); });
    if (lidar.window.max_after_pps_ns >= mcu.timer.period_ns())
        throw ConfigError("lidar.window_max_ns", "lidar.window_max_ns must be below the PPS period");
    check("imu.sample_rate_hz", [&] { imu.validate(); });
    if (depthcam.grid_hz > 0 && (depthcam.configured_fps <= 0 || depthcam.grid_hz % depthcam.configured_fps != 0))
        throw ConfigError("depthcam.configured_fps", "depthcam.configured_fps must be positive and divide depthcam.grid_hz");
    check("depthcam.grid_hz", [&] { depthcam.validate(); });
    check("phone.cam_fps", [&] { phone.validate(); });
    if (motion.components < 0) throw ConfigError("motion.components", "motion.components must be >= 0");
    if (!(motion.f_lo_hz > 0 && motion.f_lo_hz <= motion.f_hi_hz)) throw ConfigError("motion.f_lo_hz", "require 0 < f_lo_hz <= f_hi_hz");
    if (!(motion.peak_rad_s >= 0)) throw ConfigError("motion.peak_rad_s", "motion.peak_rad_s must be >= 0");
    if (align.enabled) {
        if (!phone_enabled || !imu_enabled) throw ConfigError("align.enabled", "alignment needs phone.enabled and imu.enabled");
        if (!(align.at_s > 0 && align.at_s < duration_s)) throw ConfigError("align.at_s", "align.at_s must lie inside (0, duration_s)");
        if (!mcu.trigger.enabled) throw ConfigError("align.enabled", "alignment adjusts the trigger phase; enable mcu.trigger_enabled");
    }
    if (align.resample_period_ns <= 0) throw ConfigError("align.resample_period_ns", "align.resample_period_ns must be > 0");
    if (align.max_lag_ns < 0) throw ConfigError("align.max_lag_ns", "align.max_lag_ns must be >= 0");
    if (eval.hist_bin_ns <= 0) throw ConfigError("eval.hist_bin_ns", "eval.hist_bin_ns must be > 0");
    if (eval.hist_hi_ns <= eval.hist_lo_ns) throw ConfigError("eval.hist_hi_ns", "eval.hist_hi_ns must exceed eval.hist_lo_ns");
}

TrueTime Scenario::end() const { return TrueTime{std::llround(duration_s * 1e9)}; }

// ---------------------------------------------------------------------------
// Simulation

namespace {

bool by_scheme_seq(const TimestampRecord& a, const TimestampRecord& b) {
    const auto rank = [](const std::string& s) {
        if (s == kSchemeArrival) return 0;
        if (s == kSchemeInternal) return 1;
        if (s == kSchemeDisciplined) return 2;
        return 3;
    };
    if (rank(a.scheme) != rank(b.scheme)) return rank(a.scheme) < rank(b.scheme);
    if (a.scheme != b.scheme) return a.scheme < b.scheme;
    return a.seq < b.seq;
}

} // namespace

SimulationOutput simulate(const Scenario& s, std::ostream* trace) {
    s.validate();
    Engine engine;
    engine.set_trace(trace);

    const MotionProfile motion = s.motion.enabled
                                     ? MotionProfile::multi_sine(s.seed, s.motion.components, s.motion.f_lo_hz, s.motion.f_hi_hz,
                                                                 s.motion.peak_rad_s)
                                     : MotionProfile::zero();

    Firmware fw(engine, s.mcu, s.seed);
    fw.start();

    std::optional<LidarModel> lidar;
    if (s.lidar_enabled) {
        lidar.emplace(engine, s.lidar, s.seed, s.schemes, s.mcu.epoch);
        lidar->attach(fw);
        lidar->start(s.end());
    }
    std::optional<ImuModel> imu;
    if (s.imu_enabled) {
        imu.emplace(engine, s.imu, s.seed, fw, &motion);
        imu->start();
    }
    std::optional<DepthCamModel> cam;
    if (s.depthcam_enabled) {
        cam.emplace(engine, s.depthcam, s.seed);
        cam->attach(fw);
    }
    std::optional<PhoneModel> phone;
    if (s.phone_enabled) {
        phone.emplace(engine, s.phone, s.seed, &motion);
        phone->start();
    }

    SimulationOutput out;
    if (s.align.enabled) {
        const TrueTime at{std::llround(s.align.at_s * 1e9)};
        engine.schedule(at, EventKind::Custom, [&](Engine&, const Event& ev) {
            const auto rig = resample_uniform(gyro_magnitude(fw.host_records()), s.align.resample_period_ns);
            const auto ph = resample_uniform(gyro_magnitude(phone->streams().gyro), s.align.resample_period_ns);
            OffsetOptions opt;
            opt.max_lag_ns = s.align.max_lag_ns;
            opt.confidence_threshold = s.align.confidence_threshold;
            AlignmentOutcome a;
            a.estimate = estimate_offset(rig, ph, opt);
            a.applied_at = ev.at;
            const auto& frames = phone->streams().frames;
            if (frames.empty()) throw AlgorithmError("NoPhoneFrames", "no phone frame recorded before alignment");
            a.phone_frame_ts = frames.back().timestamp_ns;
            a.frame_ts_mcu = a.phone_frame_ts - a.estimate.offset_ns;
            const Rational T = period_of_hz(s.mcu.trigger.trigger_hz);
            // only the phase modulo T matters, and one second is a whole number of trigger periods
            const std::int64_t f = mod_floor(a.frame_ts_mcu, kNsPerSec);
            a.phase_before_ns = fw.state().trigger_cfg.phase_offset_ns;
            a.dt_ns = trigger_phase_offset(f, T, a.phase_before_ns);
            a.phase_after_ns = apply_trigger_phase(a.phase_before_ns, a.dt_ns, T);
            fw.set_trigger_phase(a.phase_after_ns);
            a.dt_second_ns = trigger_phase_offset(f, T, fw.state().trigger_cfg.phase_offset_ns);
            out.alignment = a;
        });
    }

    engine.run_until(s.end());
    out.events_dispatched = engine.dispatched_count();

    if (lidar) {
        out.lidar = lidar->records();
        std::stable_sort(out.lidar.begin(), out.lidar.end(), by_scheme_seq);
        out.lidar_unsynced = lidar->unsynced_records();
        out.lidar_spikes = lidar->spikes();
        out.lidar_rejected_ngms = lidar->rejected_ngms();
        out.lidar_missing_ngms = lidar->disciplined().missing_ngm();
    }
    out.imu = fw.host_records();
    out.ngms = fw.ngms();
    out.pps_rising = fw.pps_rising();
    for (const auto& p : fw.trigger_pulses()) {
        if (!p.captured) continue; // capture still pending at the end of the run
        TimestampRecord r;
        r.sensor_id = "trigger";
        r.seq = p.index;
        r.scheme = "mcu";
        r.timestamp_ns = p.captured->ns;
        r.true_ns = p.true_at.ns;
        out.trigger.push_back(std::move(r));
    }
    if (cam) {
        out.depthcam = cam->frame_records();
        out.exposures = cam->exposures();
    }
    if (phone) {
        out.phone_gyro = phone->streams().gyro;
        out.phone_cam = phone->streams().frames;
    }
    out.service_log = fw.service_log();
    out.firmware_state = fw.state();
    std::vector<TrueTime> arrivals;
    for (const auto& n : out.ngms) arrivals.push_back(n.arrival_at);
    out.ngm_pairs = pair_ngm_to_pps(out.pps_rising, arrivals, s.lidar.window);
    return out;
}

// ---------------------------------------------------------------------------
// Artifacts

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string Manifest::to_json() const {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["config_sha256"] = config_sha256;
    nlohmann::ordered_json arts = nlohmann::ordered_json::array();
    for (const auto& a : artifacts) arts.push_back({{"name", a.name}, {"sha256", a.sha256}});
    j["artifacts"] = arts;
    return j.dump(2) + "\n";
}

std::vector<std::pair<std::string, std::string>> render_artifacts(const SimulationOutput& out, const Scenario& s) {
    std::vector<std::pair<std::string, std::string>> files;
    const auto csv = [&](const std::string& name, const std::vector<TimestampRecord>& recs) {
        std::ostringstream os;
        write_records_csv(os, recs);
        files.emplace_back(name, os.str());
    };
    files.emplace_back("config.effective.ini", artifact_config(s));

    if (s.lidar_enabled) {
        csv("lidar.csv", out.lidar);
        csv("lidar_unsynced.csv", out.lidar_unsynced);
        const SchemeTable table = compare_schemes(out.lidar);
        std::ostringstream txt, rcsv;
        write_report_text(txt, table);
        write_report_csv(rcsv, table);
        files.emplace_back("report.txt", txt.str());
        files.emplace_back("report.csv", rcsv.str());
        for (const auto& row : table.rows) {
            std::vector<std::int64_t> ts;
            for (const auto& r : out.lidar)
                if (r.scheme == row.scheme) ts.push_back(r.timestamp_ns);
            const auto h = histogram(periods(ts), s.eval.hist_bin_ns, s.eval.hist_lo_ns, s.eval.hist_hi_ns);
            std::ostringstream hs;
            write_histogram_csv(hs, h);
            files.emplace_back("hist_" + row.scheme + ".csv", hs.str());
        }
    }
    if (s.imu_enabled) csv("imu.csv", out.imu);
    {
        std::ostringstream ngm;
        for (const auto& n : out.ngms) ngm << n.sentence;
        files.emplace_back("ngm.txt", ngm.str());
    }
    if (s.mcu.trigger.enabled) csv("trigger.csv", out.trigger);
    if (s.depthcam_enabled) {
        csv("depthcam.csv", out.depthcam);
        const MatchResult m = match_trigger_frames(out.trigger, out.depthcam, s.depthcam.grid_hz, s.depthcam.configured_fps);
        csv("depthcam_retimestamped.csv", m.retimestamped);
    }
    if (s.phone_enabled) {
        csv("phone_gyro.csv", out.phone_gyro);
        csv("phone_cam.csv", out.phone_cam);
    }
    if (out.alignment) {
        const auto& a = *out.alignment;
        std::ostringstream os;
        os << "offset_ns,confidence,method,low_confidence,applied_at_ns,phase_before_ns,dt_ns,phase_after_ns\n"
           << a.estimate.offset_ns << ',' << format_double(a.estimate.confidence) << ',' << to_string(a.estimate.method) << ','
           << (a.estimate.low_confidence ? "true" : "false") << ',' << a.applied_at.ns << ',' << a.phase_before_ns << ','
           << a.dt_ns << ',' << a.phase_after_ns << '\n';
        files.emplace_back("alignment.csv", os.str());
    }
    return files;
}

Manifest write_artifacts(const SimulationOutput& out, const Scenario& s, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw ConfigError("run.out_dir", "cannot create output directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));

    Manifest m;
    m.seed = s.seed;
    m.config_sha256 = sha256_hex(artifact_config(s));
    for (const auto& [name, bytes] : render_artifacts(out, s)) {
        std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw ConfigError("run.out_dir", "cannot write '" + (dir / name).string() + "'");
        m.artifacts.push_back({name, sha256_hex(bytes)});
    }
    std::ofstream f(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    f << m.to_json();
    if (!f) throw ConfigError("run.out_dir", "cannot write '" + (dir / "manifest.json").string() + "'");
    return m;
}

} // namespace hetsync
