#pragma once

// Synchronization algorithms: uniform resampling, gyro cross-correlation
// offset estimation, trigger-pulse to frame matching, and trigger phase alignment.

#include "hetsync/records.hpp"
#include "hetsync/time.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace hetsync {

struct Sample {
    std::int64_t t_ns = 0;
    double value = 0.0;
};

struct UniformSeries {
    std::int64_t start_ns = 0;
    std::int64_t period_ns = 0;
    std::vector<double> values;

    std::int64_t time_at(std::size_t i) const { return start_ns + static_cast<std::int64_t>(i) * period_ns; }
};

// Linear interpolation onto start + i * period for every grid point inside [first, last].
UniformSeries resample_uniform(std::span<const Sample> samples, std::int64_t period_ns);
// Both streams on one shared grid spanning the overlap of their time ranges.
std::pair<UniformSeries, UniformSeries> resample_overlap(std::span<const Sample> a, std::span<const Sample> b,
                                                         std::int64_t period_ns);

// |(gx, gy, gz)| of gyro records, timestamped by each record's reported time.
std::vector<Sample> gyro_magnitude(const std::vector<TimestampRecord>& records);

enum class OffsetMethod { IntegerLag, Subsample };
std::string_view to_string(OffsetMethod m);

struct OffsetOptions {
    OffsetMethod method = OffsetMethod::Subsample;
    std::int64_t max_lag_ns = 2 * kNsPerSec;
    double min_variance = 1e-6;         // per-series variance below this means no usable motion
    double confidence_threshold = 3.0;  // peak-to-sidelobe ratio
    double min_overlap_fraction = 0.5;  // of the shorter series, for a lag to be considered
};

struct OffsetEstimate {
    std::int64_t offset_ns = 0; // b's clock = a's clock + offset
    double confidence = 1.0;
    OffsetMethod method = OffsetMethod::Subsample;
    bool low_confidence = false;
    std::int64_t integer_lag = 0; // samples
    double peak = 0.0;            // normalized correlation at the integer peak
};

inline constexpr double kMaxConfidence = 1e6;

// Throws AlgorithmError("InsufficientExcitation") when either series is (nearly) constant.
OffsetEstimate estimate_offset(const UniformSeries& a, const UniformSeries& b, const OffsetOptions& opt = {});

// Normalized cross-correlation of a against b at integer lag (b index = a index + lag);
// nullopt-like NaN when the overlap is empty or degenerate. Reference for tests.
double ncc_at_lag(std::span<const double> a, std::span<const double> b, std::int64_t lag);

struct FrameMatch {
    std::int64_t frame_seq = 0;
    std::int64_t pulse_index = 0;
    std::int64_t mcu_timestamp_ns = 0;
    std::int64_t residual_ns = 0; // device-clock elapsed minus MCU-clock elapsed, relative to the first match
};

struct MatchResult {
    std::vector<FrameMatch> matches;
    std::vector<TimestampRecord> retimestamped; // scheme "retimestamped"
    std::vector<std::int64_t> discarded;        // frame sequence numbers dropped as invalid
};

// Pulses: seq = 1-based pulse index, timestamp = MCU capture. Frames: seq = 1-based frame number,
// timestamp = device clock. Frame k maps to pulse k * (grid_hz / fps); frame 1 is discarded.
// Throws AlgorithmError("MatchGap") when a required pulse is missing, DataError on unsorted input.
MatchResult match_trigger_frames(const std::vector<TimestampRecord>& pulses, const std::vector<TimestampRecord>& frames,
                                 int grid_hz, int fps);

// dt in [0, T) so that phase + dt lines the trigger up with the frame's phase modulo T.
// Frame phase is taken as floor(frame_ts mod T); when dt wraps it is rounded up so that
// apply_trigger_phase lands exactly on that integer phase.
std::int64_t trigger_phase_offset(std::int64_t frame_ts_ns, Rational period_ns, std::int64_t current_phase_ns);
std::int64_t trigger_phase_offset(std::int64_t frame_ts_ns, std::int64_t period_ns, std::int64_t current_phase_ns);
// (phase + dt) on the circle of ceil(T) integer phases; lands on floor(frame_ts mod T).
std::int64_t apply_trigger_phase(std::int64_t phase_ns, std::int64_t dt_ns, Rational period_ns);
// 1e9 / hz as an exact rational
Rational period_of_hz(std::int64_t hz);

} // namespace hetsync
