#pragma once

#include "hetsync/clock.hpp"
#include "hetsync/domain.hpp"
#include "hetsync/engine.hpp"
#include "hetsync/firmware.hpp"
#include "hetsync/nmea.hpp"
#include "hetsync/records.hpp"
#include "hetsync/rng.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hetsync {

// ---------------------------------------------------------------------------
// Shared angular-velocity profile seen by every rigidly attached gyroscope.

class MotionProfile {
public:
    struct Sine {
        double amplitude = 0.0; // rad/s
        double freq_hz = 0.0;
        double phase = 0.0;
    };

    MotionProfile() = default;
    static MotionProfile zero() { return {}; }
    // Sum of `components` sines per axis, frequencies in [f_lo, f_hi] Hz, amplitudes in [0.2, 1] * peak.
    static MotionProfile multi_sine(std::uint64_t seed, int components = 6, double f_lo = 0.2, double f_hi = 3.0,
                                    double peak_rad_s = 1.5);

    std::array<double, 3> omega(TrueTime t) const;
    double magnitude(TrueTime t) const;

    std::array<std::vector<Sine>, 3> axes;
};

// ---------------------------------------------------------------------------
// LiDAR

enum class LidarScheme { Arrival, Internal, PpsDisciplined };
std::string_view to_string(LidarScheme s);
LidarScheme parse_lidar_scheme(std::string_view s);

struct SpikeConfig {
    double probability = 0.0;
    Distribution magnitude = Distribution(Uniform{2e6, 9e6});
};

struct LidarConfig {
    std::int64_t packet_period_ns = 1'328'000;
    std::int64_t first_packet_ns = 100'000;
    Distribution arrival_jitter = Distribution(Normal{200'000.0, 30'000.0});
    SpikeConfig spike{0.00014, Distribution(Uniform{5e6, 6e6})};
    std::int64_t burst_gap_ns = 5'720; // minimum spacing of back-to-back deliveries
    ClockState internal_clock{0, -37.0, 0.0, 0.0};
    std::int64_t internal_quantum_ns = 1'000;
    ClockState host_clock{};
    PairingWindow window{};

    void validate() const;
};

struct LidarPacket {
    std::int64_t seq = 0;
    TrueTime emitted;
};

class LidarModel {
public:
    LidarModel(Engine& engine, const LidarConfig& cfg, std::uint64_t seed, std::set<LidarScheme> schemes,
               const SecondLabelEpoch& epoch = {});

    // PPS + NGM feed from the GPS-emulating MCU.
    void attach(Firmware& fw);
    void start(TrueTime t_end);

    // Timestamp of one packet under one scheme; flags unsynced disciplined readings.
    struct Stamped {
        TimestampRecord record;
        bool unsynced = false;
    };
    Stamped lidar_timestamp(LidarScheme scheme, const LidarPacket& packet);

    void on_pps(TrueTime t);
    void on_ngm(TrueTime arrival, const std::string& sentence);

    const std::vector<TimestampRecord>& records() const { return records_; }
    const std::vector<TimestampRecord>& unsynced_records() const { return unsynced_; }
    DisciplinedClock& disciplined() { return disciplined_; }
    std::uint64_t rejected_ngms() const { return rejected_ngm_; }
    std::uint64_t duplicate_ngms() const { return duplicate_ngm_; }
    std::uint64_t spikes() const { return spikes_; }

private:
    void emit(const LidarPacket& p);
    std::int64_t quantize(std::int64_t v) const;

    Engine& engine_;
    LidarConfig cfg_;
    std::set<LidarScheme> schemes_;
    SecondLabelEpoch epoch_;
    Oscillator internal_;
    Oscillator host_;
    DisciplinedClock disciplined_;
    RngStream jitter_rng_;
    RngStream spike_rng_;
    TrueTime last_arrival_{-1};
    std::optional<TrueTime> last_pps_;
    bool last_pps_paired_ = false;
    std::uint64_t rejected_ngm_ = 0;
    std::uint64_t duplicate_ngm_ = 0;
    std::uint64_t spikes_ = 0;
    std::vector<TimestampRecord> records_;
    std::vector<TimestampRecord> unsynced_;
};

// ---------------------------------------------------------------------------
// IMU

struct ImuConfig {
    int sample_rate_hz = 100;
    bool driven_by_mcu_clock = true;
    ClockState private_clock{0, 500.0, 0.5, 0.0}; // internal RC oscillator when not MCU-driven
    double gyro_noise_sigma = 0.0;                 // rad/s, white

    void validate() const;
};

struct ImuTick {
    std::int64_t seq = 0;
    TrueTime true_at;
    std::int64_t mcu_local_ns = 0; // MCU-clock reading at the data-ready edge (tick-exact)
};

/// Data-ready instants up to t_end (inclusive), first sample at MCU-local 0.
std::vector<ImuTick> imu_stream(const ImuConfig& cfg, const McuTimerConfig& timer, const ClockState& mcu_clock, TrueTime t_end,
                                std::uint64_t seed = 0);

class ImuModel {
public:
    ImuModel(Engine& engine, const ImuConfig& cfg, std::uint64_t seed, Firmware& fw, const MotionProfile* motion);
    void start();
    std::uint64_t emitted() const { return seq_; }

private:
    void data_ready(TrueTime t);

    Engine& engine_;
    ImuConfig cfg_;
    Firmware& fw_;
    const MotionProfile* motion_;
    Oscillator private_osc_;
    std::optional<ClockDomain> private_domain_;
    RngStream noise_rng_;
    std::int64_t k_ = 0;
    std::int64_t seq_ = 0;
};

// ---------------------------------------------------------------------------
// Triggered depth camera

struct DepthCamConfig {
    int grid_hz = 30;
    int configured_fps = 5;
    ClockState internal_clock{};
    bool first_frame_invalid = true;

    void validate() const;
};

struct Exposure {
    std::int64_t index = 0; // 1-based exposure count
    TrueTime at;
    std::int64_t device_ns = 0;
    std::int64_t pulse_index = 0;
    std::optional<std::int64_t> frame_seq; // set when this exposure yields a frame
    bool frame_valid = true;
};

class DepthCamModel {
public:
    DepthCamModel(Engine& engine, const DepthCamConfig& cfg, std::uint64_t seed);

    void attach(Firmware& fw);
    // Next exposure for a pulse; nullopt when the pulse falls into an already-claimed grid slot.
    std::optional<Exposure> expose_on_trigger(std::int64_t pulse_index, TrueTime pulse);

    const std::vector<Exposure>& exposures() const { return exposures_; }
    std::vector<TimestampRecord> frame_records() const; // valid and invalid frames, device timestamps
    std::uint64_t absorbed() const { return absorbed_; }

private:
    Engine& engine_;
    DepthCamConfig cfg_;
    Oscillator osc_;
    std::optional<std::int64_t> last_grid_k_;
    std::int64_t exposure_count_ = 0;
    std::uint64_t absorbed_ = 0;
    std::vector<Exposure> exposures_;
};

// ---------------------------------------------------------------------------
// Smartphone on an independent clock

struct PhoneConfig {
    ClockState clock{12'300'000, 0.0, 0.0, 0.0};
    int cam_fps = 30;
    int gyro_rate_hz = 400;
    Distribution net_jitter = Distribution(Normal{3'000'000.0, 1'000'000.0});
    double gyro_noise_sigma = 0.0;

    void validate() const;
};

struct PhoneStreams {
    std::vector<TimestampRecord> frames;
    std::vector<TimestampRecord> gyro;
    std::vector<TrueTime> frame_arrivals;
    std::vector<TrueTime> gyro_arrivals;
};

class PhoneModel {
public:
    PhoneModel(Engine& engine, const PhoneConfig& cfg, std::uint64_t seed, const MotionProfile* motion);
    void start();
    const PhoneStreams& streams() const { return streams_; }
    Oscillator& clock() { return osc_; }

private:
    Engine& engine_;
    PhoneConfig cfg_;
    const MotionProfile* motion_;
    Oscillator osc_;
    ClockDomain domain_;
    RngStream noise_rng_;
    RngStream net_rng_;
    std::int64_t frame_k_ = 0;
    std::int64_t gyro_k_ = 0;
    PhoneStreams streams_;
};

/// Runs a phone in isolation up to t_end (inclusive).
PhoneStreams phone_streams(const PhoneConfig& cfg, const MotionProfile& motion, TrueTime t_end, std::uint64_t seed = 0);

// First local ns whose grid index reaches k on a rate_hz grid: ceil(k * 1e9 / rate_hz).
std::int64_t grid_instant_ns(std::int64_t k, std::int64_t rate_hz);

} // namespace hetsync
