#pragma once

#include "hetsync/nmea.hpp"
#include "hetsync/rng.hpp"
#include "hetsync/time.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace hetsync {

/// Oscillator parameters relating a device's local clock to TrueTime.
struct ClockState {
    std::int64_t offset0_ns = 0;
    double rate_ppm = 0.0;
    double rw_sigma_ppm_per_sqrt_s = 0.0;
    double jitter_sigma_ns = 0.0;

    void validate() const; // |rate_ppm| <= 1000, sigmas >= 0
    bool noiseless() const { return rw_sigma_ppm_per_sqrt_s == 0.0 && jitter_sigma_ns == 0.0; }
};

// Frequency errors are held as integer parts-per-10^12.
inline constexpr std::int64_t kPptScale = 1'000'000'000'000;
std::int64_t ppm_to_ppt(double ppm);

/// Deterministic part of a reading: offset0 + t + round(t * rate). No noise.
std::int64_t read_clock(const ClockState& clock, TrueTime t);

/// Stateful oscillator. The frequency random walk advances in discrete
/// increments at advance() instants with variance proportional to elapsed time.
class Oscillator {
public:
    Oscillator() : Oscillator(ClockState{}, 0, "ideal") {}
    Oscillator(const ClockState& cfg, std::uint64_t seed, std::string_view stream_id);

    const ClockState& config() const { return cfg_; }

    // Moves the segment origin to t (t >= origin), applying one random-walk increment.
    void advance(TrueTime t);

    // Noise-free local reading for t >= segment origin; does not mutate state.
    std::int64_t local_at(TrueTime t) const;

    // advance(t) followed by local_at(t) plus one white-jitter draw.
    std::int64_t read(TrueTime t);

    // Earliest t >= segment origin with local_at(t) >= target, under the current rate.
    TrueTime when(std::int64_t local_target) const;

    TrueTime origin() const { return seg_true_; }
    std::int64_t rate_ppt() const { return rate_ppt_; }

private:
    ClockState cfg_;
    RngStream rng_;
    TrueTime seg_true_{0};
    std::int64_t seg_local_ = 0;
    std::int64_t rate_ppt_ = 0;
};

struct McuTimerConfig {
    Rational tick_rate_hz{76'800'000, 1};
    std::int64_t overflow_ticks = 76'800'000;
    std::int64_t compare_half_ticks = 38'400'000;

    void validate() const;
    // Exact PPS period in ns; throws if the overflow period is not an integer number of ns.
    std::int64_t period_ns() const;
};

struct TickPosition {
    std::int64_t cycle = 0;
    std::int64_t tick = 0;
    bool operator==(const TickPosition&) const = default;
};

// Tick count at local time `local_ns`: floor(local_ns * rate). Rounds toward -inf.
std::int64_t ticks_at(const McuTimerConfig& cfg, std::int64_t local_ns);
TickPosition true_to_tick(const McuTimerConfig& cfg, TrueTime t);
TickPosition local_to_tick(const McuTimerConfig& cfg, std::int64_t local_ns);
// First local ns at which the counter has reached `ticks` (inverse of ticks_at).
std::int64_t tick_boundary_ns(const McuTimerConfig& cfg, std::int64_t ticks);
// Timestamp reported for a captured counter value, rounded to nearest ns.
std::int64_t tick_to_ns(const McuTimerConfig& cfg, TickPosition pos);

struct PpsEdge {
    TrueTime at;
    bool rising = true;
    std::int64_t cycle = 0;
};

/// Rising edge at every overflow, falling edge compare_half_ticks later, up to t_end inclusive.
std::vector<PpsEdge> pps_edges(const McuTimerConfig& cfg, TrueTime t_end, const ClockState& mcu_clock = {});

/// Slave clock reloaded by PPS + NGM: reading = label seconds + local ticks since the PPS.
class DisciplinedClock {
public:
    DisciplinedClock() = default;
    DisciplinedClock(const ClockState& base, std::uint64_t seed, std::string_view stream_id);

    struct Reading {
        std::int64_t ns = 0;
        bool synced = false;
    };

    // Core reload: label applies to the instant pps_at, sub-second phase resets there.
    void discipline(TrueTime pps_at, std::int64_t second_label);

    // Event-driven protocol: a PPS edge reloads immediately once the clock holds a label;
    // the NGM then confirms (or corrects) it. Without an NGM the clock free-runs from the last reload.
    void on_pps(TrueTime pps_at);
    void on_ngm(TrueTime pps_at, std::int64_t second_label);

    Reading read(TrueTime t);
    Reading read_noiseless(TrueTime t) const;

    bool synced() const { return locked_; }
    std::int64_t label() const { return label_; }
    TrueTime last_pps_true() const { return last_pps_true_; }
    std::uint64_t reloads() const { return reloads_; }
    std::uint64_t missing_ngm() const { return missing_ngm_; }
    Oscillator& base() { return base_; }

private:
    Oscillator base_;
    bool locked_ = false;
    bool confirmed_ = false;
    std::int64_t label_ = 0;
    std::int64_t anchor_local_ = 0;
    TrueTime last_pps_true_{0};
    std::optional<std::pair<TrueTime, std::int64_t>> pending_pps_; // (true, local) awaiting NGM
    std::uint64_t reloads_ = 0;
    std::uint64_t missing_ngm_ = 0;
};

/// Functional form: returns the clock reloaded at pps_at with the sentence's second label.
DisciplinedClock discipline(DisciplinedClock clock, TrueTime pps_at, const GprmcSentence& ngm, const SecondLabelEpoch& epoch);

} // namespace hetsync
