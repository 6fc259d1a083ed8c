#include "hetsync/errors.hpp"
#include "hetsync/sensors.hpp"
#include "hetsync/sync.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hetsync;

namespace {

std::vector<double> smooth_noise(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(n);
    double s = 0;
    for (auto& x : v) {
        s = 0.9 * s + d(g);
        x = s;
    }
    return v;
}

UniformSeries series(std::vector<double> v, std::int64_t start = 0, std::int64_t period = 2'500'000) {
    return UniformSeries{start, period, std::move(v)};
}

// Argmax of the brute-force correlation over every lag with enough overlap.
std::int64_t brute_argmax(const std::vector<double>& a, const std::vector<double>& b, std::int64_t max_lag) {
    const auto na = static_cast<std::int64_t>(a.size()), nb = static_cast<std::int64_t>(b.size());
    const std::int64_t min_overlap = std::max<std::int64_t>(3, std::min(na, nb) / 2);
    std::int64_t best = 0;
    double best_v = -2;
    for (std::int64_t L = -max_lag; L <= max_lag; ++L) {
        const std::int64_t overlap = std::min(na, nb - L) - std::max<std::int64_t>(0, -L);
        if (overlap < min_overlap) continue;
        const double v = ncc_at_lag(a, b, L);
        if (!std::isnan(v) && v > best_v) {
            best_v = v;
            best = L;
        }
    }
    return best;
}

TimestampRecord rec(std::int64_t seq, std::int64_t ts) { return TimestampRecord{"x", seq, "mcu", ts, std::nullopt, {}}; }

std::vector<TimestampRecord> canonical_pulses(std::int64_t n) {
    std::vector<TimestampRecord> v;
    for (std::int64_t k = 1; k <= n; ++k) v.push_back(rec(k, (k - 1) * 33'333'333 + 3'470));
    return v;
}

std::vector<TimestampRecord> canonical_frames(std::int64_t n) {
    std::vector<TimestampRecord> v;
    for (std::int64_t k = 1; k <= n; ++k) v.push_back(rec(k, 5'000'000'000 + (6 * k - 1) * 33'333'333));
    return v;
}

} // namespace

TEST_SUITE("sync-algos") {

TEST_CASE("resample: two points, period 5") {
    const std::vector<Sample> s{{0, 0.0}, {10, 10.0}};
    const UniformSeries u = resample_uniform(s, 5);
    CHECK(u.start_ns == 0);
    CHECK(u.values == std::vector<double>{0.0, 5.0, 10.0});
}

TEST_CASE("resample: uniform input at its own period is the identity") {
    std::vector<Sample> s;
    const auto v = smooth_noise(100, 1);
    for (std::size_t i = 0; i < v.size(); ++i) s.push_back({static_cast<std::int64_t>(i) * 7 + 100, v[i]});
    const UniformSeries u = resample_uniform(s, 7);
    CHECK(u.values == v);
    CHECK(u.time_at(3) == 121);
}

TEST_CASE("resample: jittered samples stay within the linear-interpolation bound") {
    std::mt19937_64 g(5);
    std::uniform_int_distribution<std::int64_t> jitter(-400'000, 400'000);
    const double w = 2.0 * 3.14159265358979 * 3.0; // 3 Hz
    std::vector<Sample> s;
    std::int64_t max_gap = 0;
    for (std::int64_t i = 0; i < 4000; ++i) {
        const std::int64_t t = i * 2'500'000 + jitter(g);
        if (!s.empty()) max_gap = std::max(max_gap, t - s.back().t_ns);
        s.push_back({t, std::sin(w * static_cast<double>(t) / 1e9)});
    }
    const UniformSeries u = resample_uniform(s, 1'000'000);
    const double h = static_cast<double>(max_gap) / 1e9;
    const double bound = h * h / 8.0 * w * w + 1e-12;
    double worst = 0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const double truth = std::sin(w * static_cast<double>(u.time_at(i)) / 1e9);
        worst = std::max(worst, std::abs(u.values[i] - truth));
    }
    CHECK(worst <= bound);
    CHECK(worst > 0.0);
}

TEST_CASE("resample: bad inputs") {
    const std::vector<Sample> one{{0, 1.0}};
    CHECK_THROWS_AS(resample_uniform(one, 5), DataError);
    const std::vector<Sample> backwards{{0, 1.0}, {10, 1.0}, {10, 2.0}};
    CHECK_THROWS_AS(resample_uniform(backwards, 5), DataError);
    const std::vector<Sample> a{{0, 0.0}, {10, 1.0}}, b{{20, 0.0}, {30, 1.0}};
    CHECK_THROWS_AS(resample_overlap(a, b, 5), DataError);
}

TEST_CASE("resample_overlap puts both streams on one grid") {
    const std::vector<Sample> a{{0, 0.0}, {100, 100.0}}, b{{40, 0.0}, {140, 10.0}};
    const auto [ua, ub] = resample_overlap(a, b, 20);
    CHECK(ua.start_ns == 40);
    CHECK(ub.start_ns == 40);
    CHECK(ua.values == std::vector<double>{40, 60, 80, 100});
    CHECK(ub.values == std::vector<double>{0, 2, 4, 6});
}

TEST_CASE("identical series: zero offset, unit peak") {
    const auto v = smooth_noise(2000, 7);
    const OffsetEstimate e = estimate_offset(series(v), series(v));
    CHECK(e.offset_ns == 0);
    CHECK(e.integer_lag == 0);
    CHECK(e.peak == doctest::Approx(1.0));
    CHECK(e.confidence >= 3.0);
    CHECK_FALSE(e.low_confidence);
}

TEST_CASE("integer lag matches the brute-force correlation argmax") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = smooth_noise(600, seed);
        auto b = smooth_noise(500, seed + 1000);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] += 0.5 * a[(i + seed * 7) % a.size()];
        OffsetOptions o;
        o.method = OffsetMethod::IntegerLag;
        o.max_lag_ns = 200 * 2'500'000LL;
        const OffsetEstimate e = estimate_offset(series(a), series(b), o);
        CHECK(e.integer_lag == brute_argmax(a, b, 200));
        CHECK(e.offset_ns == e.integer_lag * 2'500'000);
    }
}

TEST_CASE("shift equivariance: shifting one copy by k samples reports k periods") {
    const auto base = smooth_noise(3000, 42);
    OffsetOptions o;
    o.method = OffsetMethod::IntegerLag;
    for (std::int64_t k : {-400, -37, -5, -1, 0, 1, 5, 99, 400}) {
        const std::size_t m = 1000, n = 1000;
        std::vector<double> a(base.begin() + m, base.begin() + m + n);
        std::vector<double> b(base.begin() + static_cast<std::ptrdiff_t>(m) - k, base.begin() + static_cast<std::ptrdiff_t>(m + n) - k);
        const OffsetEstimate e = estimate_offset(series(a), series(b), o);
        CHECK(e.offset_ns == k * 2'500'000);
        CHECK(e.integer_lag == k);
    }
}

TEST_CASE("shifted by exactly 5 samples with different start stamps") {
    const auto base = smooth_noise(1200, 3);
    std::vector<double> a(base.begin() + 100, base.begin() + 1100), b(base.begin() + 95, base.begin() + 1095);
    const OffsetEstimate e = estimate_offset(series(a, 1'000'000'000), series(b, 1'000'000'000 + 777), {OffsetMethod::IntegerLag});
    CHECK(e.offset_ns == 5 * 2'500'000 + 777);
}

TEST_CASE("scaling one series leaves the integer argmax unchanged") {
    const auto a = smooth_noise(800, 11);
    auto b = smooth_noise(800, 12);
    for (std::size_t i = 20; i < b.size(); ++i) b[i] += a[i - 20];
    OffsetOptions o;
    o.method = OffsetMethod::IntegerLag;
    const auto ref = estimate_offset(series(a), series(b), o).integer_lag;
    for (double c : {1e-3, 0.5, 3.0, 1e4}) {
        auto bc = b;
        for (auto& x : bc) x *= c;
        CHECK(estimate_offset(series(a), series(bc), o).integer_lag == ref);
    }
}

TEST_CASE("subsample refinement moves the estimate by less than one period") {
    const auto a = smooth_noise(1500, 21);
    auto b = a;
    for (std::size_t i = 1; i < b.size(); ++i) b[i] = 0.5 * (a[i] + a[i - 1]); // half-sample delay
    const auto ei = estimate_offset(series(a), series(b), {OffsetMethod::IntegerLag});
    const auto es = estimate_offset(series(a), series(b), {OffsetMethod::Subsample});
    CHECK(std::llabs(es.offset_ns - ei.offset_ns) < 2'500'000);
    CHECK(std::llabs(es.offset_ns - 1'250'000) < 500'000);
}

TEST_CASE("constant series: InsufficientExcitation") {
    const std::vector<double> flat(500, 0.0);
    const auto v = smooth_noise(500, 1);
    try {
        (void)estimate_offset(series(flat), series(v));
        FAIL("expected AlgorithmError");
    } catch (const AlgorithmError& e) {
        CHECK(e.flag() == "InsufficientExcitation");
    }
}

TEST_CASE("periodic signal yields a low-confidence flag") {
    std::vector<double> a(1000), b(1000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = std::sin(2 * 3.14159265358979 * static_cast<double>(i) / 40.0);
        b[i] = std::sin(2 * 3.14159265358979 * static_cast<double>(i + 3) / 40.0);
    }
    const OffsetEstimate e = estimate_offset(series(a), series(b));
    CHECK(e.confidence >= 1.0);
    CHECK(e.low_confidence);
}

TEST_CASE("12.3 ms phone offset recovered within a quarter sample at 400 Hz") {
    const MotionProfile motion = MotionProfile::multi_sine(17);
    PhoneConfig rig_cfg;
    rig_cfg.clock = ClockState{};
    rig_cfg.gyro_noise_sigma = 0.01;
    PhoneConfig phone_cfg = rig_cfg; // default offset 12.3 ms
    phone_cfg.clock.offset0_ns = 12'300'000;
    const TrueTime end{30 * kNsPerSec};
    const auto rig = phone_streams(rig_cfg, motion, end, 1);
    const auto phone = phone_streams(phone_cfg, motion, end, 2);
    const auto a = resample_uniform(gyro_magnitude(rig.gyro), 2'500'000);
    const auto b = resample_uniform(gyro_magnitude(phone.gyro), 2'500'000);
    const OffsetEstimate e = estimate_offset(a, b);
    CHECK(std::llabs(e.offset_ns - 12'300'000) <= 625'000);
    CHECK_FALSE(e.low_confidence);
}

TEST_CASE("gyro_magnitude needs three axes") {
    CHECK_THROWS_AS(gyro_magnitude({rec(1, 0)}), DataError);
    TimestampRecord r = rec(1, 5);
    r.values = {3.0, 4.0, 0.0};
    CHECK(gyro_magnitude({r})[0].value == 5.0);
}

TEST_CASE("match: frame 2 -> pulse 12, frame 3 -> pulse 18, first frame discarded") {
    const MatchResult m = match_trigger_frames(canonical_pulses(60), canonical_frames(10), 30, 5);
    CHECK(m.discarded == std::vector<std::int64_t>{1});
    REQUIRE(m.matches.size() == 9);
    CHECK(m.matches[0].frame_seq == 2);
    CHECK(m.matches[0].pulse_index == 12);
    CHECK(m.matches[1].pulse_index == 18);
    for (std::size_t i = 1; i < m.matches.size(); ++i) CHECK(m.matches[i].pulse_index - m.matches[i - 1].pulse_index == 6);
    CHECK(m.retimestamped[0].timestamp_ns == 11 * 33'333'333 + 3'470);
    CHECK(m.retimestamped[0].scheme == "retimestamped");
    CHECK(m.matches[0].residual_ns == 0);
    for (const auto& x : m.matches) CHECK(x.residual_ns == 0);
}

TEST_CASE("match: empty frames give empty output") {
    const MatchResult m = match_trigger_frames(canonical_pulses(12), {}, 30, 5);
    CHECK(m.matches.empty());
    CHECK(m.discarded.empty());
}

TEST_CASE("match: a missing pulse is a MatchGap naming the frame") {
    auto pulses = canonical_pulses(60);
    pulses.erase(pulses.begin() + 17); // pulse 18
    try {
        (void)match_trigger_frames(pulses, canonical_frames(10), 30, 5);
        FAIL("expected MatchGap");
    } catch (const AlgorithmError& e) {
        CHECK(e.flag() == "MatchGap");
        CHECK(std::string(e.what()).find("frame 3") != std::string::npos);
    }
}

TEST_CASE("match: unsorted input and bad rates are rejected") {
    auto frames = canonical_frames(4);
    std::swap(frames[1], frames[2]);
    CHECK_THROWS_AS(match_trigger_frames(canonical_pulses(30), frames, 30, 5), DataError);
    CHECK_THROWS_AS(match_trigger_frames(canonical_pulses(30), canonical_frames(4), 30, 7), ConfigError);
}

TEST_CASE("phase offset examples") {
    const Rational T = period_of_hz(30);
    CHECK(trigger_phase_offset(7'000'000, T, 7'000'000) == 0);
    CHECK(trigger_phase_offset(10'000'000, T, 0) == 10'000'000);
    CHECK(trigger_phase_offset(kNsPerSec + 10'000'000, T, 0) == 10'000'000);
    CHECK(trigger_phase_offset(10'000'000, 40'000'000, 15'000'000) == 35'000'000);
    CHECK_THROWS(trigger_phase_offset(1, 0, 0));
    CHECK_THROWS(period_of_hz(0));
}

TEST_CASE("phase offset: result in [0, T) and a second application gives zero") {
    std::mt19937_64 g(77);
    for (std::int64_t hz : {30, 7, 1000}) {
        const Rational T = period_of_hz(hz);
        const std::int64_t ceil_t = (kNsPerSec + hz - 1) / hz;
        for (int i = 0; i < 2000; ++i) {
            const auto f = static_cast<std::int64_t>(g() % (100 * kNsPerSec));
            const auto phase = static_cast<std::int64_t>(g() % static_cast<std::uint64_t>(kNsPerSec / hz));
            const std::int64_t dt = trigger_phase_offset(f, T, phase);
            CHECK(dt >= 0);
            CHECK(dt < ceil_t);
            const std::int64_t next = apply_trigger_phase(phase, dt, T);
            CHECK(trigger_phase_offset(f, T, next) == 0);
            // the new phase sits within 1 ns of the frame phase
            const double frame_mod = std::fmod(static_cast<double>(f), 1e9 / static_cast<double>(hz));
            CHECK(std::abs(static_cast<double>(next) - frame_mod) <= 1.0);
        }
    }
}

} // TEST_SUITE
