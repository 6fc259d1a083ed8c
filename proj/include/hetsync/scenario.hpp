#pragma once

// Scenario configuration (INI key table, keys namespaced by module) and the
// end-to-end simulation run that wires firmware, sensors and evaluation.

#include "hetsync/firmware.hpp"
#include "hetsync/sensors.hpp"
#include "hetsync/stats.hpp"
#include "hetsync/sync.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace hetsync {

struct MotionConfig {
    bool enabled = true;
    int components = 6;
    double f_lo_hz = 0.2;
    double f_hi_hz = 3.0;
    double peak_rad_s = 1.5;
};

struct AlignConfig {
    bool enabled = false;
    double at_s = 30.0; // alignment runs once, at this simulated instant
    std::int64_t resample_period_ns = 2'500'000;
    std::int64_t max_lag_ns = 2 * kNsPerSec;
    double confidence_threshold = 3.0;
};

struct EvalConfig {
    std::int64_t hist_bin_ns = 1'000;
    std::int64_t hist_lo_ns = 0;
    std::int64_t hist_hi_ns = 10'000'000;
};

struct Scenario {
    double duration_s = 60.0;
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    FirmwareConfig mcu;
    bool lidar_enabled = true;
    LidarConfig lidar;
    std::set<LidarScheme> schemes{LidarScheme::Arrival, LidarScheme::Internal, LidarScheme::PpsDisciplined};
    bool imu_enabled = true;
    ImuConfig imu;
    bool depthcam_enabled = true;
    DepthCamConfig depthcam;
    bool phone_enabled = false;
    PhoneConfig phone;
    MotionConfig motion;
    AlignConfig align;
    EvalConfig eval;

    // Throws ConfigError naming the first offending key.
    void validate() const;
    TrueTime end() const;
};

// INI text: sections [run] [mcu] [lidar] [imu] [depthcam] [phone] [motion] [align] [eval].
// Unknown keys and malformed values are ConfigErrors naming `section.key`.
Scenario parse_scenario(std::istream& is, const std::string& source_name = "<config>");
Scenario load_scenario(const std::filesystem::path& path);
// Sets one `section.key` from text, as if it appeared in a config file.
void set_scenario_key(Scenario& s, const std::string& key, const std::string& value);
// Every key with its effective value, in a fixed order; parse_scenario(canonical) == s.
std::string canonical_config(const Scenario& s);
std::vector<std::string> scenario_keys();

struct AlignmentOutcome {
    OffsetEstimate estimate;
    TrueTime applied_at;
    std::int64_t phone_frame_ts = 0;  // phone clock
    std::int64_t frame_ts_mcu = 0;    // same frame mapped into the MCU domain
    std::int64_t phase_before_ns = 0;
    std::int64_t dt_ns = 0;
    std::int64_t phase_after_ns = 0;
    std::int64_t dt_second_ns = 0; // re-applying with unchanged phases
};

struct SimulationOutput {
    std::vector<TimestampRecord> lidar;          // synchronized records, sorted by (scheme, seq)
    std::vector<TimestampRecord> lidar_unsynced; // disciplined records before the first reload
    std::vector<TimestampRecord> imu;
    std::vector<NgmEmission> ngms;
    std::vector<TrueTime> pps_rising;
    std::vector<TimestampRecord> trigger; // seq = pulse index, timestamp = MCU capture
    std::vector<TimestampRecord> depthcam;
    std::vector<Exposure> exposures;
    std::vector<TimestampRecord> phone_gyro;
    std::vector<TimestampRecord> phone_cam;
    std::vector<ServiceRecord> service_log;
    FirmwareState firmware_state;
    Associations ngm_pairs;
    std::optional<AlignmentOutcome> alignment;
    std::uint64_t events_dispatched = 0;
    std::uint64_t lidar_spikes = 0;
    std::uint64_t lidar_rejected_ngms = 0;
    std::uint64_t lidar_missing_ngms = 0;
};

SimulationOutput simulate(const Scenario& s, std::ostream* trace = nullptr);

struct Artifact {
    std::string name;
    std::string sha256;
};

struct Manifest {
    std::uint64_t seed = 0;
    std::string config_sha256;
    std::vector<Artifact> artifacts;
    std::string to_json() const;
};

// Renders every artifact in memory (name -> bytes), in a fixed order.
std::vector<std::pair<std::string, std::string>> render_artifacts(const SimulationOutput& out, const Scenario& s);
// Writes artifacts plus manifest.json into dir; ConfigError("run.out_dir") when the directory is unusable.
Manifest write_artifacts(const SimulationOutput& out, const Scenario& s, const std::filesystem::path& dir);

std::string sha256_hex(std::string_view bytes);

} // namespace hetsync
