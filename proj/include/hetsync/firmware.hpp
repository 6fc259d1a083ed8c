#pragma once

// Behavioral model of the MCU firmware: one general-purpose timer provides the
// reference clock, the PPS output (rising edge at overflow, falling edge at the
// half-period compare) and the trigger-pulse compare; prioritized interrupts
// capture timestamps and set flags; the main loop consumes flags in a fixed order.

#include "hetsync/clock.hpp"
#include "hetsync/domain.hpp"
#include "hetsync/engine.hpp"
#include "hetsync/nmea.hpp"
#include "hetsync/records.hpp"
#include "hetsync/rng.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hetsync {

// Declaration order is priority order: a lower value preempts a higher one.
enum class InterruptKind : std::uint8_t {
    TriggerCapture = 0,
    ImuReady = 1,
    TimerOverflow = 2,
    TimerHalf = 3,
};
inline constexpr std::size_t kInterruptKinds = 4;

std::string_view to_string(InterruptKind k);
int priority(InterruptKind k); // throws std::invalid_argument for values outside the enum

struct LatencyModel {
    double base_ns = 3470.0;
    double sigma_ns = 2.4;
    // Shift applied to a preempted handler; nullopt = occupancy of the preempting handler.
    std::optional<std::int64_t> blocked_extra_ns;

    void validate() const;
};

struct ServiceConfig {
    // CPU occupancy of each handler after its capture instant, indexed by InterruptKind.
    std::array<std::int64_t, kInterruptKinds> service_ns{2000, 2000, 2000, 2000};
};

struct TriggerConfig {
    bool enabled = true;
    int trigger_hz = 30;
    int camera_fps = 5;
    std::int64_t phase_offset_ns = 0;

    void validate() const;
    std::int64_t period_floor_ns() const { return kNsPerSec / trigger_hz; }
};

struct FirmwareConfig {
    McuTimerConfig timer;
    ClockState clock;
    LatencyModel latency;
    ServiceConfig service;
    TriggerConfig trigger;
    Fix fix;
    SecondLabelEpoch epoch;
    int serial_baud = 9600;

    void validate() const;
};

struct CapturedStamp {
    TickPosition pos;
    std::int64_t ns = 0; // MCU-domain ns, rounded to nearest
};

struct ImuSample {
    std::int64_t seq = 0;
    TrueTime true_at;
    std::vector<double> values;
};

struct FirmwareState {
    bool imu_dat_rdy = false;
    bool nmea_mes_gen = false;
    std::optional<CapturedStamp> pending_imu_timestamp;
    std::optional<ImuSample> pending_imu_sample;
    std::optional<InterruptKind> in_service;
    TriggerConfig trigger_cfg;
    std::int64_t second_label = 0;     // maintained by the overflow handler
    std::int64_t pending_ngm_label = 0; // label captured when NMEA_MES_GEN was set

    std::uint64_t imu_flags_set = 0;
    std::uint64_t imu_flags_cleared = 0;
    std::uint64_t ngm_flags_set = 0;
    std::uint64_t ngm_flags_cleared = 0;
    std::uint64_t imu_overruns = 0;
};

struct ImuEmit {
    ImuSample sample;
    CapturedStamp stamp;
};

struct NgmEmit {
    std::int64_t second_label = 0;
    std::string sentence;
};

using MainLoopAction = std::variant<ImuEmit, NgmEmit>;

/// One pass over the flags: IMU first, then NGM. Each set flag is cleared before acting.
std::vector<MainLoopAction> main_loop_step(FirmwareState& state, const Fix& fix, const SecondLabelEpoch& epoch);

struct ServiceRecord {
    InterruptKind kind = InterruptKind::ImuReady;
    TrueTime request;
    TrueTime entry;
    TrueTime action; // capture / flag-set instant
    TrueTime exit;
    std::int64_t delay_ns() const { return action - request; }
};

struct NgmEmission {
    std::int64_t second_label = 0;
    std::string sentence;
    TrueTime sent_at;
    TrueTime arrival_at;
};

struct TriggerPulse {
    std::int64_t index = 0; // 1-based emission count
    TrueTime true_at;
    std::optional<CapturedStamp> captured;
};

class Firmware {
public:
    Firmware(Engine& engine, const FirmwareConfig& cfg, std::uint64_t seed);
    Firmware(const Firmware&) = delete;
    Firmware& operator=(const Firmware&) = delete;

    // Registers the timer channels (overflow, half compare, trigger compare) on the MCU clock domain.
    void start();

    // Interrupt request line. Samples ride along with ImuReady requests.
    void on_interrupt(InterruptKind kind, TrueTime t, std::optional<ImuSample> sample = std::nullopt);

    // New phase applies from the next trigger pulse onwards.
    void set_trigger_phase(std::int64_t phase_offset_ns);

    ClockDomain& domain() { return domain_; }
    Oscillator& clock() { return osc_; }
    const FirmwareConfig& config() const { return cfg_; }
    const FirmwareState& state() const { return state_; }

    CapturedStamp capture_at(TrueTime t) const;

    // Outputs
    const std::vector<TimestampRecord>& host_records() const { return host_records_; }
    const std::vector<NgmEmission>& ngms() const { return ngms_; }
    const std::vector<TrueTime>& pps_rising() const { return pps_rising_; }
    const std::vector<TrueTime>& pps_falling() const { return pps_falling_; }
    const std::vector<TriggerPulse>& trigger_pulses() const { return pulses_; }
    const std::vector<ServiceRecord>& service_log() const { return service_log_; }

    // Observers
    std::vector<std::function<void(TrueTime)>> on_pps_rising;
    std::vector<std::function<void(TrueTime, const NgmEmission&)>> on_ngm_arrival;
    std::vector<std::function<void(std::int64_t index, TrueTime)>> on_trigger_pulse;

private:
    struct Active {
        std::uint64_t id = 0;
        InterruptKind kind = InterruptKind::ImuReady;
        TrueTime request, entry, action, exit;
        bool action_done = false;
        std::uint64_t gen = 0;
        std::optional<ImuSample> sample;
        std::int64_t pulse_index = 0;
    };
    struct Pending {
        InterruptKind kind;
        TrueTime request;
        std::optional<ImuSample> sample;
        std::int64_t pulse_index = 0;
        std::uint64_t order = 0;
    };

    void request(InterruptKind kind, TrueTime t, std::optional<ImuSample> sample, std::int64_t pulse_index);
    void begin(Pending p, TrueTime entry);
    void schedule_steps(Active& a);
    void on_action(std::uint64_t id, std::uint64_t gen);
    void on_exit(std::uint64_t id, std::uint64_t gen);
    void run_main_loop(TrueTime now);
    std::optional<std::int64_t> next_trigger_target();

    Engine& engine_;
    FirmwareConfig cfg_;
    Oscillator osc_;
    ClockDomain domain_;
    RngStream latency_rng_;
    FirmwareState state_;

    std::vector<Active> stack_;
    std::vector<Pending> pending_;
    std::uint64_t next_id_ = 0;
    std::uint64_t next_order_ = 0;

    std::int64_t next_overflow_cycle_ = 0;
    std::int64_t next_half_cycle_ = 0;
    std::int64_t trigger_phase_ticks_ = 0;
    std::int64_t trigger_k_ = 0;
    std::int64_t trigger_count_ = 0;
    std::int64_t last_trigger_ticks_ = -1;
    std::optional<std::size_t> trigger_source_;

    std::vector<TimestampRecord> host_records_;
    std::vector<NgmEmission> ngms_;
    std::vector<TrueTime> pps_rising_;
    std::vector<TrueTime> pps_falling_;
    std::vector<TriggerPulse> pulses_;
    std::vector<ServiceRecord> service_log_;
};

} // namespace hetsync
