#include "hetsync/sync.hpp"

#include "hetsync/errors.hpp"
#include "hetsync/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hetsync {

namespace {

void check_increasing(std::span<const Sample> s, const char* what) {
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i].t_ns <= s[i - 1].t_ns)
            throw DataError(std::string(what) + ": timestamps must be strictly increasing (index " + std::to_string(i) + ")");
}

// Values at start + i * period for i in [0, count), samples sorted and covering the range.
std::vector<double> interpolate(std::span<const Sample> s, std::int64_t start, std::int64_t period, std::size_t count) {
    std::vector<double> out;
    out.reserve(count);
    std::size_t j = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const std::int64_t t = start + static_cast<std::int64_t>(i) * period;
        while (j + 1 < s.size() && s[j + 1].t_ns <= t) ++j;
        if (s[j].t_ns == t || j + 1 == s.size()) {
            out.push_back(s[j].value);
            continue;
        }
        const double frac = static_cast<double>(t - s[j].t_ns) / static_cast<double>(s[j + 1].t_ns - s[j].t_ns);
        out.push_back(s[j].value + (s[j + 1].value - s[j].value) * frac);
    }
    return out;
}

std::size_t grid_count(std::int64_t first, std::int64_t last, std::int64_t period) {
    return static_cast<std::size_t>((last - first) / period) + 1;
}

} // namespace

UniformSeries resample_uniform(std::span<const Sample> samples, std::int64_t period_ns) {
    if (period_ns <= 0) throw std::invalid_argument("resample_uniform: period must be positive");
    check_increasing(samples, "resample_uniform");
    if (samples.size() < 2 || samples.back().t_ns - samples.front().t_ns < period_ns)
        throw DataError("resample_uniform: input spans fewer than 2 grid samples");
    const std::size_t n = grid_count(samples.front().t_ns, samples.back().t_ns, period_ns);
    return {samples.front().t_ns, period_ns, interpolate(samples, samples.front().t_ns, period_ns, n)};
}

std::pair<UniformSeries, UniformSeries> resample_overlap(std::span<const Sample> a, std::span<const Sample> b,
                                                         std::int64_t period_ns) {
    if (period_ns <= 0) throw std::invalid_argument("resample_overlap: period must be positive");
    check_increasing(a, "resample_overlap (first stream)");
    check_increasing(b, "resample_overlap (second stream)");
    if (a.empty() || b.empty()) throw DataError("resample_overlap: empty stream");
    const std::int64_t lo = std::max(a.front().t_ns, b.front().t_ns);
    const std::int64_t hi = std::min(a.back().t_ns, b.back().t_ns);
    if (hi - lo < period_ns) throw DataError("resample_overlap: overlap spans fewer than 2 grid samples");
    const std::size_t n = grid_count(lo, hi, period_ns);
    return {UniformSeries{lo, period_ns, interpolate(a, lo, period_ns, n)},
            UniformSeries{lo, period_ns, interpolate(b, lo, period_ns, n)}};
}

std::vector<Sample> gyro_magnitude(const std::vector<TimestampRecord>& records) {
    std::vector<Sample> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (r.values.size() < 3)
            throw DataError("gyro record " + r.sensor_id + "#" + std::to_string(r.seq) + " lacks gx,gy,gz values");
        out.push_back({r.timestamp_ns, std::sqrt(r.values[0] * r.values[0] + r.values[1] * r.values[1] + r.values[2] * r.values[2])});
    }
    return out;
}

std::string_view to_string(OffsetMethod m) { return m == OffsetMethod::IntegerLag ? "integer_lag" : "subsample"; }

double ncc_at_lag(std::span<const double> a, std::span<const double> b, std::int64_t lag) {
    const std::int64_t na = static_cast<std::int64_t>(a.size()), nb = static_cast<std::int64_t>(b.size());
    const std::int64_t i0 = std::max<std::int64_t>(0, -lag), i1 = std::min(na, nb - lag);
    if (i1 - i0 < 2) return std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(i1 - i0);
    double ma = 0, mb = 0;
    for (std::int64_t i = i0; i < i1; ++i) {
        ma += a[i];
        mb += b[i + lag];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::int64_t i = i0; i < i1; ++i) {
        const double x = a[i] - ma, y = b[i + lag] - mb;
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    if (saa <= 0 || sbb <= 0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

namespace {

double variance(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

std::vector<double> demeaned(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - m;
    return out;
}

std::vector<double> prefix(const std::vector<double>& v, bool squared) {
    std::vector<double> p(v.size() + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) p[i + 1] = p[i] + (squared ? v[i] * v[i] : v[i]);
    return p;
}

} // namespace

OffsetEstimate estimate_offset(const UniformSeries& a, const UniformSeries& b, const OffsetOptions& opt) {
    if (a.period_ns <= 0 || a.period_ns != b.period_ns) throw DataError("estimate_offset: series must share a positive sample period");
    if (a.values.size() < 3 || b.values.size() < 3) throw DataError("estimate_offset: series too short");
    if (opt.max_lag_ns < 0) throw std::invalid_argument("estimate_offset: max_lag_ns must be >= 0");
    const double va = variance(a.values), vb = variance(b.values);
    if (!(va >= opt.min_variance) || !(vb >= opt.min_variance))
        throw AlgorithmError("InsufficientExcitation", "gyro magnitude variance below " + format_double(opt.min_variance) +
                                                           " (first " + format_double(va) + ", second " + format_double(vb) + ")");

    const std::vector<double> x = demeaned(a.values), y = demeaned(b.values);
    const std::vector<double> px = prefix(x, false), pxx = prefix(x, true), py = prefix(y, false), pyy = prefix(y, true);
    const std::int64_t na = static_cast<std::int64_t>(x.size()), nb = static_cast<std::int64_t>(y.size());
    const std::int64_t P = a.period_ns;
    const std::int64_t base = b.start_ns - a.start_ns;
    const std::int64_t min_overlap =
        std::max<std::int64_t>(3, static_cast<std::int64_t>(opt.min_overlap_fraction * static_cast<double>(std::min(na, nb))));

    const std::int64_t lag_lo = std::max(narrow_i128(ceil_div(static_cast<i128>(-opt.max_lag_ns) - base, P)), -(na - 1));
    const std::int64_t lag_hi = std::min(narrow_i128(floor_div(static_cast<i128>(opt.max_lag_ns) - base, P)), nb - 1);
    if (lag_lo > lag_hi) throw DataError("estimate_offset: no lag within the search range overlaps both series");

    const auto& k = kernels::active();
    std::vector<double> ncc(static_cast<std::size_t>(lag_hi - lag_lo + 1), std::numeric_limits<double>::quiet_NaN());
    for (std::int64_t L = lag_lo; L <= lag_hi; ++L) {
        const std::int64_t i0 = std::max<std::int64_t>(0, -L), i1 = std::min(na, nb - L);
        const std::int64_t n = i1 - i0;
        if (n < min_overlap) continue;
        const double dn = static_cast<double>(n);
        const double sa = px[i1] - px[i0], saa = pxx[i1] - pxx[i0];
        const double sb = py[i1 + L] - py[i0 + L], sbb = pyy[i1 + L] - pyy[i0 + L];
        const double sab = k.dot_f64(x.data() + i0, y.data() + i0 + L, static_cast<std::size_t>(n));
        const double cov = sab - sa * sb / dn;
        const double vx = saa - sa * sa / dn, vy = sbb - sb * sb / dn;
        if (!(vx > opt.min_variance * dn * 1e-3) || !(vy > opt.min_variance * dn * 1e-3)) continue;
        ncc[static_cast<std::size_t>(L - lag_lo)] = cov / std::sqrt(vx * vy);
    }

    std::ptrdiff_t best = -1;
    for (std::size_t i = 0; i < ncc.size(); ++i)
        if (!std::isnan(ncc[i]) && (best < 0 || ncc[i] > ncc[static_cast<std::size_t>(best)])) best = static_cast<std::ptrdiff_t>(i);
    if (best < 0) throw DataError("estimate_offset: no lag has enough overlap to correlate");
    const auto at = [&](std::ptrdiff_t i) {
        return (i < 0 || i >= static_cast<std::ptrdiff_t>(ncc.size())) ? std::numeric_limits<double>::quiet_NaN()
                                                                         : ncc[static_cast<std::size_t>(i)];
    };
    const double peak = ncc[static_cast<std::size_t>(best)];

    // main lobe: the monotonically decreasing flanks around the peak
    std::ptrdiff_t left = best, right = best;
    while (!std::isnan(at(left - 1)) && at(left - 1) < at(left)) --left;
    while (!std::isnan(at(right + 1)) && at(right + 1) < at(right)) ++right;
    double side = -std::numeric_limits<double>::infinity();
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(ncc.size()); ++i)
        if ((i < left || i > right) && !std::isnan(at(i))) side = std::max(side, at(i));

    OffsetEstimate est;
    est.method = opt.method;
    est.integer_lag = lag_lo + best;
    est.peak = peak;
    if (peak <= 0) est.confidence = 1.0;
    else if (side <= 0) est.confidence = kMaxConfidence;
    else est.confidence = std::clamp(peak / side, 1.0, kMaxConfidence);
    est.low_confidence = est.confidence < opt.confidence_threshold;

    double frac = 0.0;
    if (opt.method == OffsetMethod::Subsample) {
        const double ym = at(best - 1), yp = at(best + 1);
        if (!std::isnan(ym) && !std::isnan(yp)) {
            const double denom = ym - 2.0 * peak + yp;
            if (denom < 0) frac = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
        }
    }
    est.offset_ns = checked_add(base, std::llround((static_cast<double>(est.integer_lag) + frac) * static_cast<double>(P)));
    return est;
}

// ---------------------------------------------------------------------------

namespace {

void check_strict(const std::vector<TimestampRecord>& v, const char* what) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i].seq <= v[i - 1].seq)
            throw DataError(std::string(what) + ": sequence numbers must be strictly increasing (seq " + std::to_string(v[i].seq) + ")");
        if (v[i].timestamp_ns <= v[i - 1].timestamp_ns)
            throw DataError(std::string(what) + ": timestamps must be strictly increasing (seq " + std::to_string(v[i].seq) + ")");
    }
}

} // namespace

MatchResult match_trigger_frames(const std::vector<TimestampRecord>& pulses, const std::vector<TimestampRecord>& frames,
                                 int grid_hz, int fps) {
    if (grid_hz <= 0 || fps <= 0 || grid_hz % fps != 0)
        throw ConfigError("depthcam.grid_hz", "grid_hz must be a positive multiple of fps");
    check_strict(pulses, "trigger pulses");
    check_strict(frames, "frames");
    const std::int64_t stride = grid_hz / fps;

    MatchResult out;
    const FrameMatch* first = nullptr;
    std::int64_t first_device = 0;
    for (const auto& f : frames) {
        if (f.seq <= 1) {
            out.discarded.push_back(f.seq);
            continue;
        }
        const std::int64_t want = checked_mul(f.seq, stride);
        const auto it = std::lower_bound(pulses.begin(), pulses.end(), want,
                                         [](const TimestampRecord& p, std::int64_t s) { return p.seq < s; });
        if (it == pulses.end() || it->seq != want)
            throw AlgorithmError("MatchGap", "frame " + std::to_string(f.seq) + " has no trigger pulse " + std::to_string(want));
        FrameMatch m{f.seq, want, it->timestamp_ns, 0};
        if (first) m.residual_ns = (f.timestamp_ns - first_device) - (it->timestamp_ns - first->mcu_timestamp_ns);
        out.matches.push_back(m);
        if (!first) {
            first = &out.matches.front();
            first_device = f.timestamp_ns;
        }
        TimestampRecord r = f;
        r.scheme = "retimestamped";
        r.timestamp_ns = it->timestamp_ns;
        out.retimestamped.push_back(std::move(r));
        first = &out.matches.front(); // vector may have reallocated
    }
    return out;
}

// ---------------------------------------------------------------------------

Rational period_of_hz(std::int64_t hz) {
    if (hz <= 0) throw std::invalid_argument("frequency must be positive");
    return Rational(kNsPerSec, hz);
}

std::int64_t trigger_phase_offset(std::int64_t frame_ts_ns, Rational T, std::int64_t phase_ns) {
    if (frame_ts_ns < 0 || phase_ns < 0) throw std::invalid_argument("trigger_phase_offset: inputs must be nonnegative");
    // work in units of 1/T.den ns so that T is an integer
    const i128 q = T.den, p = T.num;
    const i128 frame_mod = floor_div(static_cast<i128>(frame_ts_ns) * q - floor_div(static_cast<i128>(frame_ts_ns) * q, p) * p, q);
    const i128 phase_mod = floor_div(static_cast<i128>(phase_ns) * q - floor_div(static_cast<i128>(phase_ns) * q, p) * p, q);
    i128 d = (frame_mod - phase_mod) * q;
    if (d < 0) d += p;
    return narrow_i128(ceil_div(d, q));
}

std::int64_t trigger_phase_offset(std::int64_t frame_ts_ns, std::int64_t period_ns, std::int64_t phase_ns) {
    if (period_ns <= 0) throw std::invalid_argument("trigger_phase_offset: period must be positive");
    return trigger_phase_offset(frame_ts_ns, Rational(period_ns, 1), phase_ns);
}

std::int64_t apply_trigger_phase(std::int64_t phase_ns, std::int64_t dt_ns, Rational T) {
    // integer phases live on a circle of ceil(T) positions, matching the rounding in trigger_phase_offset
    const std::int64_t slots = narrow_i128(ceil_div(T.num, T.den));
    return mod_floor(checked_add(phase_ns, dt_ns), slots);
}

} // namespace hetsync
