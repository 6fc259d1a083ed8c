#include "hetsync/errors.hpp"
#include "hetsync/scenario.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace hetsync;
namespace fs = std::filesystem;

namespace {

const fs::path kTmp = fs::path(HETSYNC_TEST_TMP) / "cli";

struct Result {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

fs::path scratch(const std::string& name) {
    const fs::path d = kTmp / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

Result cli(const std::string& args, const fs::path& dir) {
    const fs::path o = dir / "stdout.txt", e = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + HETSYNC_CLI_PATH + "\" " + args + " >\"" + o.string() + "\" 2>\"" + e.string() + "\"";
    const int st = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.out = slurp(o);
    r.err = slurp(e);
    return r;
}

std::string table1() { return std::string(HETSYNC_SOURCE_DIR) + "/configs/table1.scenario"; }

void write_gyro(const fs::path& p, std::int64_t offset_ns, std::uint64_t seed, bool still = false) {
    PhoneConfig cfg;
    cfg.clock = ClockState{offset_ns, 0, 0, 0};
    cfg.gyro_noise_sigma = 0.01;
    if (still) cfg.gyro_noise_sigma = 0.0;
    const MotionProfile m = still ? MotionProfile::zero() : MotionProfile::multi_sine(3);
    write_records_csv(p, phone_streams(cfg, m, TrueTime{20 * kNsPerSec}, seed).gyro);
}

void write_canonical_pulses(const fs::path& p, std::int64_t skip = -1) {
    std::vector<TimestampRecord> v;
    for (std::int64_t k = 1; k <= 60; ++k)
        if (k != skip) v.push_back({"trigger", k, "mcu", (k - 1) * 33'333'333, std::nullopt, {}});
    write_records_csv(p, v);
}

void write_canonical_frames(const fs::path& p, std::int64_t n) {
    std::vector<TimestampRecord> v;
    for (std::int64_t k = 1; k <= n; ++k) v.push_back({"depthcam", k, "device", 7'000'000'000 + k * 200'000'000, std::nullopt, {}});
    write_records_csv(p, v);
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("canonical config round-trips through the parser") {
    Scenario s;
    s.seed = 99;
    s.lidar.arrival_jitter = Distribution::parse("mix(0.9 normal(1, 2), 0.1 uniform(3, 4))");
    s.mcu.latency.blocked_extra_ns = 1234;
    s.phone_enabled = true;
    const std::string text = canonical_config(s);
    std::istringstream is(text);
    const Scenario back = parse_scenario(is);
    CHECK(canonical_config(back) == text);
    CHECK(back.seed == 99);
    CHECK(*back.mcu.latency.blocked_extra_ns == 1234);
    CHECK(scenario_keys().size() > 40);
}

TEST_CASE("bundled table1 scenario loads") {
    const Scenario s = load_scenario(table1());
    CHECK(s.duration_s == 60.0);
    CHECK(s.schemes.size() == 3);
    CHECK(s.lidar.internal_clock.rate_ppm == -37.0);
}

TEST_CASE("config errors name the offending key") {
    auto field_of = [](const std::string& text) {
        std::istringstream is(text);
        try {
            (void)parse_scenario(is);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    CHECK(field_of("[run]\nduration_s = 0\n") == "run.duration_s");
    CHECK(field_of("[lidar]\nbogus = 1\n") == "lidar.bogus");
    CHECK(field_of("[mcu]\ntrigger_hz = abc\n") == "mcu.trigger_hz");
    CHECK(field_of("[mcu]\ncamera_fps = 7\n") == "mcu.camera_fps");
    CHECK(field_of("[lidar]\narrival_jitter = normal(1, -2)\n") == "lidar.arrival_jitter");
    CHECK(field_of("[lidar]\nschemes = arrival,ros\n") == "lidar.schemes");
    CHECK(field_of("[mcu]\nclock_rate_ppm = 5000\n") == "mcu.clock_rate_ppm");
    CHECK(field_of("[depthcam]\nconfigured_fps = 4\n") == "depthcam.configured_fps");
}

TEST_CASE("run: duration 0 exits 2 with a field diagnostic") {
    const fs::path d = scratch("zero");
    spit(d / "bad.scenario", "[run]\nduration_s = 0\n");
    const Result r = cli("run --config \"" + (d / "bad.scenario").string() + "\" --out \"" + (d / "o").string() + "\"", d);
    CHECK(r.code == 2);
    CHECK(r.err.find("error[ConfigError] run.duration_s") != std::string::npos);
}

TEST_CASE("run: unwritable output directory exits 2") {
    const fs::path d = scratch("unwritable");
    spit(d / "blocker", "not a directory");
    const Result r = cli("run --config \"" + table1() + "\" --duration 1 --out \"" + (d / "blocker" / "x").string() + "\"", d);
    CHECK(r.code == 2);
    CHECK(r.err.find("error[ConfigError] run.out_dir") != std::string::npos);
}

TEST_CASE("run: missing config file and bad flags exit 2") {
    const fs::path d = scratch("flags");
    CHECK(cli("run --config /nonexistent.scenario", d).code == 2);
    CHECK(cli("run", d).code == 2);
    CHECK(cli("frobnicate", d).code == 2);
    CHECK(cli("run --config \"" + table1() + "\" --seed x1", d).code == 2);
}

TEST_CASE("run: same config and seed give byte-identical artifacts and manifests") {
    const fs::path d = scratch("determinism");
    const std::string base = "run --config \"" + table1() + "\" --duration 3 --seed 5 --out ";
    const Result a = cli(base + "\"" + (d / "a").string() + "\"", d);
    REQUIRE(a.code == 0);
    const Result b = cli(base + "\"" + (d / "b").string() + "\"", d);
    REQUIRE(b.code == 0);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(d / "a")) {
        ++files;
        CHECK(slurp(e.path()) == slurp(d / "b" / e.path().filename()));
    }
    CHECK(files >= 10);
    const std::string report = slurp(d / "a" / "report.txt");
    for (const char* s : {"arrival", "internal", "pps_disciplined"}) CHECK(report.find(s) != std::string::npos);
    CHECK(slurp(d / "a" / "manifest.json").find("\"config_sha256\"") != std::string::npos);
}

TEST_CASE("run: a seed list fans out into per-seed directories in seed order") {
    const fs::path d = scratch("seeds");
    const Result r = cli("run --config \"" + table1() + "\" --duration 1 --seed 3,1,2 --out \"" + (d / "o").string() + "\"", d);
    REQUIRE(r.code == 0);
    for (const char* s : {"seed-1", "seed-2", "seed-3"}) CHECK(fs::exists(d / "o" / s / "manifest.json"));
    CHECK(r.out.find("seed 3") < r.out.find("seed 1"));
    CHECK(r.out.find("seed 1") < r.out.find("seed 2"));
}

TEST_CASE("align: identical files report offset 0") {
    const fs::path d = scratch("align_same");
    write_gyro(d / "g.csv", 0, 1);
    const Result r = cli("align --phone \"" + (d / "g.csv").string() + "\" --rig \"" + (d / "g.csv").string() + "\" --out \"" +
                             (d / "est.csv").string() + "\"",
                         d);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("offset_ns 0 ") != std::string::npos);
    CHECK(slurp(d / "est.csv").rfind("offset_ns,confidence,method,low_confidence\n0,", 0) == 0);
}

TEST_CASE("align: known 12.3 ms offset is recovered within 0.625 ms") {
    const fs::path d = scratch("align_known");
    write_gyro(d / "rig.csv", 0, 1);
    write_gyro(d / "phone.csv", 12'300'000, 2);
    const Result r = cli("align --phone \"" + (d / "phone.csv").string() + "\" --rig \"" + (d / "rig.csv").string() + "\" --out \"" +
                             (d / "est.csv").string() + "\"",
                         d);
    REQUIRE(r.code == 0);
    std::istringstream csv(slurp(d / "est.csv"));
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    const std::int64_t offset = std::stoll(row.substr(0, row.find(',')));
    CHECK(std::llabs(offset - 12'300'000) <= 625'000);
}

TEST_CASE("align: constant gyro exits 4 with InsufficientExcitation") {
    const fs::path d = scratch("align_flat");
    write_gyro(d / "flat.csv", 0, 1, true);
    const Result r = cli("align --phone \"" + (d / "flat.csv").string() + "\" --rig \"" + (d / "flat.csv").string() + "\"", d);
    CHECK(r.code == 4);
    CHECK(r.err.find("error[InsufficientExcitation]") != std::string::npos);
}

TEST_CASE("retimestamp: canonical fixture maps frame 2 to pulse 12") {
    const fs::path d = scratch("rt");
    write_canonical_pulses(d / "p.csv");
    write_canonical_frames(d / "f.csv", 10);
    const Result r = cli("retimestamp --pulses \"" + (d / "p.csv").string() + "\" --frames \"" + (d / "f.csv").string() + "\"", d);
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("frame_seq,pulse_index,mcu_timestamp_ns,residual_ns\n2,12,366666663,0\n3,18,", 0) == 0);
    CHECK(r.err.find("frame 1 discarded") != std::string::npos);
}

TEST_CASE("retimestamp: deleted pulse 18 exits 4 with MatchGap at frame 3") {
    const fs::path d = scratch("rt_gap");
    write_canonical_pulses(d / "p.csv", 18);
    write_canonical_frames(d / "f.csv", 10);
    const Result r = cli("retimestamp --pulses \"" + (d / "p.csv").string() + "\" --frames \"" + (d / "f.csv").string() + "\"", d);
    CHECK(r.code == 4);
    CHECK(r.err.find("error[MatchGap]") != std::string::npos);
    CHECK(r.err.find("frame 3") != std::string::npos);
}

TEST_CASE("retimestamp: empty frames file gives empty output and success") {
    const fs::path d = scratch("rt_empty");
    write_canonical_pulses(d / "p.csv");
    write_canonical_frames(d / "f.csv", 0);
    const Result r = cli("retimestamp --pulses \"" + (d / "p.csv").string() + "\" --frames \"" + (d / "f.csv").string() + "\" --out \"" +
                             (d / "m.csv").string() + "\"",
                         d);
    CHECK(r.code == 0);
    CHECK(slurp(d / "m.csv") == "frame_seq,pulse_index,mcu_timestamp_ns,residual_ns\n");
}

TEST_CASE("retimestamp: schema errors exit 3") {
    const fs::path d = scratch("rt_schema");
    spit(d / "p.csv", "seq,ts\n1,2\n");
    write_canonical_frames(d / "f.csv", 3);
    const Result r = cli("retimestamp --pulses \"" + (d / "p.csv").string() + "\" --frames \"" + (d / "f.csv").string() + "\"", d);
    CHECK(r.code == 3);
    CHECK(r.err.find("error[DataError]") != std::string::npos);
}

TEST_CASE("nmea check: valid file exits 0, bad lines exit 3 with line numbers") {
    const fs::path d = scratch("nmea");
    const std::string good = generate_gprmc(0, Fix{}) + generate_gprmc(1, Fix{});
    spit(d / "good.txt", good);
    CHECK(cli("nmea check \"" + (d / "good.txt").string() + "\"", d).code == 0);
    spit(d / "bad.txt", good + "$GPRMC,123519,A,4807.038,N,01131.000,E,022.4,084.4,230394,003.1,W*6B\r\n");
    const Result r = cli("nmea check \"" + (d / "bad.txt").string() + "\"", d);
    CHECK(r.code == 3);
    CHECK(r.out.find(":3: error[ChecksumMismatch]") != std::string::npos);
}

TEST_CASE("stats prints one row per scheme and writes histograms") {
    const fs::path d = scratch("stats");
    std::vector<TimestampRecord> v;
    for (std::int64_t i = 0; i < 100; ++i) {
        v.push_back({"lidar", i, "internal", i * 1'328'000, std::nullopt, {}});
        v.push_back({"lidar", i, "arrival", i * 1'328'000 + (i % 3) * 1000, std::nullopt, {}});
    }
    write_records_csv(d / "r.csv", v);
    const Result r = cli("stats \"" + (d / "r.csv").string() + "\" --hist-prefix \"" + (d / "hist_").string() + "\"", d);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("internal") != std::string::npos);
    CHECK(r.out.find("arrival") != std::string::npos);
    CHECK(slurp(d / "hist_internal.csv").find("1328000,99\n") != std::string::npos);
    spit(d / "bad.csv", "nope\n");
    CHECK(cli("stats \"" + (d / "bad.csv").string() + "\"", d).code == 3);
}

TEST_CASE("config subcommand prints a parseable default scenario") {
    const fs::path d = scratch("config");
    const Result r = cli("config", d);
    REQUIRE(r.code == 0);
    std::istringstream is(r.out);
    CHECK(canonical_config(parse_scenario(is)) == canonical_config(Scenario{}));
}

} // TEST_SUITE
