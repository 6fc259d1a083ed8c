// hetsync command-line front end: scenario runs and post-processing.

#include "hetsync/errors.hpp"
#include "hetsync/nmea.hpp"
#include "hetsync/records.hpp"
#include "hetsync/scenario.hpp"
#include "hetsync/stats.hpp"
#include "hetsync/sync.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

using namespace hetsync;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitAlgorithm = 4;

struct RunOptions {
    std::string config;
    std::vector<std::string> seeds;
    std::string out;
    std::optional<double> duration;
    std::string schemes;
    std::string trace;
};

std::vector<std::uint64_t> parse_seed_list(const std::vector<std::string>& items) {
    std::vector<std::uint64_t> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            std::uint64_t v = 0;
            const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || p != tok.data() + tok.size()) throw ConfigError("--seed", "invalid seed '" + tok + "'");
            out.push_back(v);
        }
    }
    return out;
}

struct SeedResult {
    std::uint64_t seed = 0;
    std::filesystem::path dir;
    Manifest manifest;
    std::string report;
};

SeedResult run_one(Scenario s, const std::filesystem::path& dir, const std::string& trace_path) {
    std::ofstream trace_file;
    if (!trace_path.empty()) {
        trace_file.open(trace_path, std::ios::binary | std::ios::trunc);
        if (!trace_file) throw ConfigError("--trace", "cannot open trace file '" + trace_path + "'");
    }
    const SimulationOutput out = simulate(s, trace_path.empty() ? nullptr : &trace_file);
    SeedResult r{s.seed, dir, write_artifacts(out, s, dir), {}};
    std::ifstream rep(dir / "report.txt");
    std::stringstream ss;
    ss << rep.rdbuf();
    r.report = ss.str();
    if (out.alignment) {
        const auto& a = *out.alignment;
        std::ostringstream os;
        os << "alignment: offset_ns=" << a.estimate.offset_ns << " confidence=" << format_double(a.estimate.confidence)
           << " dt_ns=" << a.dt_ns << " phase_ns=" << a.phase_before_ns << "->" << a.phase_after_ns
           << (a.estimate.low_confidence ? " [LowConfidence]" : "") << '\n';
        r.report += os.str();
    }
    return r;
}

int cmd_run(const RunOptions& o) {
    Scenario base = load_scenario(o.config);
    if (o.duration) set_scenario_key(base, "run.duration_s", format_double(*o.duration));
    if (!o.schemes.empty()) set_scenario_key(base, "lidar.schemes", o.schemes);
    if (!o.out.empty()) base.out_dir = o.out;
    std::vector<std::uint64_t> seeds = parse_seed_list(o.seeds);
    if (seeds.empty()) seeds.push_back(base.seed);
    base.validate();
    if (seeds.size() > 1 && !o.trace.empty()) throw ConfigError("--trace", "--trace requires a single seed");

    std::vector<Scenario> jobs;
    for (std::uint64_t seed : seeds) {
        Scenario s = base;
        s.seed = seed;
        if (seeds.size() > 1) s.out_dir = (std::filesystem::path(base.out_dir) / ("seed-" + std::to_string(seed))).string();
        jobs.push_back(std::move(s));
    }

    // independent simulations fan out over worker threads; results are reported in seed-list order
    std::vector<std::optional<SeedResult>> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, jobs.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
                try {
                    results[i] = run_one(jobs[i], jobs[i].out_dir, o.trace);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (const auto& r : results) {
        std::cout << "seed " << r->seed << " -> " << r->dir.string() << '\n' << r->report;
        std::cout << "manifest sha256 " << sha256_hex(r->manifest.to_json()) << '\n';
    }
    return 0;
}

int cmd_align(const std::string& phone_path, const std::string& rig_path, std::int64_t period_ns, std::int64_t max_lag_ns,
              const std::string& method, const std::string& out_path) {
    const auto phone = read_records_csv(std::filesystem::path(phone_path));
    const auto rig = read_records_csv(std::filesystem::path(rig_path));
    OffsetOptions opt;
    opt.max_lag_ns = max_lag_ns;
    if (method == "integer_lag") opt.method = OffsetMethod::IntegerLag;
    else if (method != "subsample") throw ConfigError("--method", "method must be integer_lag or subsample");
    const auto a = resample_uniform(gyro_magnitude(rig), period_ns);
    const auto b = resample_uniform(gyro_magnitude(phone), period_ns);
    const OffsetEstimate e = estimate_offset(a, b, opt);

    std::ostringstream csv;
    csv << "offset_ns,confidence,method,low_confidence\n"
        << e.offset_ns << ',' << format_double(e.confidence) << ',' << to_string(e.method) << ',' << (e.low_confidence ? "true" : "false")
        << '\n';
    std::cout << "offset_ns " << e.offset_ns << "  (phone clock = rig clock + offset)\n"
              << "confidence " << format_double(e.confidence) << (e.low_confidence ? "  [LowConfidence]" : "") << '\n'
              << "method " << to_string(e.method) << '\n';
    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
        f << csv.str();
        if (!f) throw ConfigError("--out", "cannot write '" + out_path + "'");
    }
    return 0;
}

int cmd_retimestamp(const std::string& pulses_path, const std::string& frames_path, int grid_hz, int fps, const std::string& out_path) {
    const auto pulses = read_records_csv(std::filesystem::path(pulses_path));
    const auto frames = read_records_csv(std::filesystem::path(frames_path));
    const MatchResult m = match_trigger_frames(pulses, frames, grid_hz, fps);
    std::ostringstream os;
    os << "frame_seq,pulse_index,mcu_timestamp_ns,residual_ns\n";
    for (const auto& x : m.matches) os << x.frame_seq << ',' << x.pulse_index << ',' << x.mcu_timestamp_ns << ',' << x.residual_ns << '\n';
    for (std::int64_t d : m.discarded) std::cerr << "frame " << d << " discarded (invalid first frame)\n";
    if (out_path.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
        f << os.str();
        if (!f) throw ConfigError("--out", "cannot write '" + out_path + "'");
        std::cout << m.matches.size() << " frames matched, " << m.discarded.size() << " discarded\n";
    }
    return 0;
}

int cmd_nmea_check(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto diags = check_sentences(ss.str());
    for (const auto& d : diags) std::cout << path << ':' << d.line << ": error[" << to_string(d.kind) << "] " << d.message << '\n';
    if (!diags.empty()) {
        std::cerr << "error[DataError] " << diags.size() << " invalid sentence(s) in " << path << '\n';
        return kExitData;
    }
    std::cout << path << ": all sentences valid\n";
    return 0;
}

int cmd_stats(const std::string& path, const std::string& sensor, std::int64_t bin_ns, std::int64_t lo_ns, std::int64_t hi_ns,
              const std::string& hist_prefix) {
    auto records = read_records_csv(std::filesystem::path(path));
    if (!sensor.empty())
        std::erase_if(records, [&](const TimestampRecord& r) { return r.sensor_id != sensor; });
    const SchemeTable t = compare_schemes(records);
    for (const auto& w : t.warnings) std::cerr << "warning: " << w << '\n';
    if (t.rows.empty()) throw DataError("no scheme in '" + path + "' has at least 2 timestamps");
    write_report_text(std::cout, t);
    if (!hist_prefix.empty()) {
        for (const auto& row : t.rows) {
            std::vector<std::pair<std::int64_t, std::int64_t>> v;
            for (const auto& r : records)
                if (r.scheme == row.scheme) v.emplace_back(r.seq, r.timestamp_ns);
            std::sort(v.begin(), v.end());
            std::vector<std::int64_t> ts;
            for (const auto& [seq, x] : v) ts.push_back(x);
            const std::string out = hist_prefix + row.scheme + ".csv";
            std::ofstream f(out, std::ios::binary | std::ios::trunc);
            write_histogram_csv(f, histogram(periods(ts), bin_ns, lo_ns, hi_ns));
            if (!f) throw ConfigError("--hist-prefix", "cannot write '" + out + "'");
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hetsync: heterogeneous sensor time-synchronization simulator"};
    app.require_subcommand(1);

    RunOptions run;
    auto* sub_run = app.add_subcommand("run", "Run a simulation scenario and write records, reports and a manifest");
    sub_run->add_option("--config", run.config, "Scenario file (INI)")->required();
    sub_run->add_option("--seed", run.seeds, "Seed or comma-separated seed list (overrides run.seed)");
    sub_run->add_option("--out", run.out, "Output directory (overrides run.out_dir)");
    sub_run->add_option("--duration", run.duration, "Simulated seconds (overrides run.duration_s)");
    sub_run->add_option("--schemes", run.schemes, "LiDAR schemes, e.g. arrival,internal,pps_disciplined");
    sub_run->add_option("--trace", run.trace, "Write the dispatched-event trace to this file");

    std::string phone, rig, method = "subsample", align_out;
    std::int64_t period_ns = 2'500'000, max_lag_ns = 2 * kNsPerSec;
    auto* sub_align = app.add_subcommand("align", "Estimate the phone-to-rig clock offset from two gyro CSVs");
    sub_align->add_option("--phone", phone, "Phone gyro CSV")->required();
    sub_align->add_option("--rig", rig, "Rig (MCU) gyro CSV")->required();
    sub_align->add_option("--period-ns", period_ns, "Resampling period")->capture_default_str();
    sub_align->add_option("--max-lag-ns", max_lag_ns, "Lag search half-range")->capture_default_str();
    sub_align->add_option("--method", method, "integer_lag or subsample")->capture_default_str();
    sub_align->add_option("--out", align_out, "Write the estimate as CSV");

    std::string pulses, frames, rt_out;
    int grid_hz = 30, fps = 5;
    auto* sub_rt = app.add_subcommand("retimestamp", "Match triggered frames to MCU pulse timestamps");
    sub_rt->add_option("--pulses", pulses, "Trigger pulse CSV (seq = pulse index)")->required();
    sub_rt->add_option("--frames", frames, "Frame CSV (seq = frame number, device timestamps)")->required();
    sub_rt->add_option("--grid-hz", grid_hz, "Trigger / exposure grid rate")->capture_default_str();
    sub_rt->add_option("--fps", fps, "Configured camera frame rate")->capture_default_str();
    sub_rt->add_option("--out", rt_out, "Matched-frames CSV (stdout when omitted)");

    std::string nmea_file;
    auto* sub_nmea = app.add_subcommand("nmea", "NMEA utilities");
    sub_nmea->require_subcommand(1);
    auto* sub_check = sub_nmea->add_subcommand("check", "Validate a file of GPRMC sentences, one per line");
    sub_check->add_option("file", nmea_file, "Sentence file")->required();

    std::string stats_file, sensor, hist_prefix;
    std::int64_t bin_ns = 1000, lo_ns = 0, hi_ns = 10'000'000;
    auto* sub_stats = app.add_subcommand("stats", "Period statistics per scheme over a record CSV");
    sub_stats->add_option("file", stats_file, "Record CSV")->required();
    sub_stats->add_option("--sensor", sensor, "Only records of this sensor_id");
    sub_stats->add_option("--hist-prefix", hist_prefix, "Write <prefix><scheme>.csv histograms");
    sub_stats->add_option("--bin-ns", bin_ns, "Histogram bin width")->capture_default_str();
    sub_stats->add_option("--lo-ns", lo_ns, "Histogram lower edge")->capture_default_str();
    sub_stats->add_option("--hi-ns", hi_ns, "Histogram upper edge")->capture_default_str();

    auto* sub_cfg = app.add_subcommand("config", "Print the default scenario with every key");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sub_run) return cmd_run(run);
        if (*sub_align) return cmd_align(phone, rig, period_ns, max_lag_ns, method, align_out);
        if (*sub_rt) return cmd_retimestamp(pulses, frames, grid_hz, fps, rt_out);
        if (*sub_check) return cmd_nmea_check(nmea_file);
        if (*sub_stats) return cmd_stats(stats_file, sensor, bin_ns, lo_ns, hi_ns, hist_prefix);
        if (*sub_cfg) {
            std::cout << canonical_config(Scenario{});
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error[ConfigError] " << e.field() << ": " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "error[DataError] " << e.what() << '\n';
        return kExitData;
    } catch (const AlgorithmError& e) {
        std::cerr << "error[" << e.flag() << "] " << e.what() << '\n';
        return kExitAlgorithm;
    } catch (const std::exception& e) {
        std::cerr << "error[DataError] " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
