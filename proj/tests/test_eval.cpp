#include "hetsync/errors.hpp"
#include "hetsync/records.hpp"
#include "hetsync/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace hetsync;

namespace {

struct Brute {
    std::size_t count;
    double mean;
    double std;
    std::int64_t min, max;
};

Brute brute_stats(const std::vector<std::int64_t>& ts) {
    Brute b{ts.size() - 1, 0, 0, INT64_MAX, INT64_MIN};
    i128 s = 0, ss = 0;
    for (std::size_t i = 1; i < ts.size(); ++i) {
        const std::int64_t d = ts[i] - ts[i - 1];
        s += d;
        ss += static_cast<i128>(d) * d;
        if (d < b.min) b.min = d;
        if (d > b.max) b.max = d;
    }
    const auto n = static_cast<i128>(b.count);
    b.mean = static_cast<double>(static_cast<long double>(s) / static_cast<long double>(n));
    const i128 num = n * ss - s * s;
    b.std = num <= 0 ? 0.0 : static_cast<double>(std::sqrt(static_cast<long double>(num) / (static_cast<long double>(n) * static_cast<long double>(n))));
    return b;
}

std::vector<std::int64_t> random_timestamps(std::mt19937_64& g, std::size_t n) {
    std::uniform_int_distribution<std::int64_t> step(0, 10'000'000);
    std::vector<std::int64_t> ts(n);
    std::int64_t t = static_cast<std::int64_t>(g() % 1'000'000'000);
    for (auto& x : ts) {
        x = t;
        t += step(g);
    }
    return ts;
}

TimestampRecord rec(std::string scheme, std::int64_t seq, std::int64_t ts, std::optional<std::int64_t> truth = std::nullopt) {
    return TimestampRecord{"lidar", seq, std::move(scheme), ts, truth, {}};
}

} // namespace

TEST_SUITE("eval") {

TEST_CASE("period_stats examples") {
    const std::vector<std::int64_t> a{10, 20, 30};
    const PeriodStats s = period_stats(a);
    CHECK(s.count == 2);
    CHECK(s.mean_ns == 10.0);
    CHECK(s.std_ns == 0.0);
    CHECK(s.min_ns == 10);
    CHECK(s.max_ns == 10);
    const std::vector<std::int64_t> b{0, 10, 25};
    const PeriodStats t = period_stats(b);
    CHECK(t.mean_ns == 12.5);
    CHECK(t.std_ns == 2.5);
    CHECK(t.min_ns == 10);
    CHECK(t.max_ns == 15);
}

TEST_CASE("period_stats rejects short or decreasing input") {
    const std::vector<std::int64_t> one{5}, down{5, 4};
    CHECK_THROWS(period_stats(one));
    CHECK_THROWS(period_stats(down));
}

TEST_CASE("period_stats equals the brute-force reference on random arrays") {
    std::mt19937_64 g(123);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(g() % 100'000);
        const auto ts = random_timestamps(g, n);
        const PeriodStats s = period_stats(ts);
        const Brute b = brute_stats(ts);
        CHECK(s.count == b.count);
        CHECK(s.mean_ns == b.mean);
        CHECK(s.std_ns == b.std);
        CHECK(s.min_ns == b.min);
        CHECK(s.max_ns == b.max);
        CHECK(s.min_ns <= s.mean_ns);
        CHECK(s.mean_ns <= s.max_ns);
    }
}

TEST_CASE("period_stats handles one million elements with ns^2 sums past 64 bits") {
    std::mt19937_64 g(9);
    std::vector<std::int64_t> ts(1'000'000);
    std::int64_t t = 0;
    for (auto& x : ts) {
        x = t;
        t += 1'000'000'000 + static_cast<std::int64_t>(g() % 1000);
    }
    const PeriodStats s = period_stats(ts);
    const Brute b = brute_stats(ts);
    CHECK(s.mean_ns == b.mean);
    CHECK(s.std_ns == b.std);
    CHECK(s.std_ns == doctest::Approx(288.675).epsilon(0.01)); // uniform(0, 999)
}

TEST_CASE("histogram: equal periods fill a single bin") {
    const std::vector<std::int64_t> v(50, 1'328'000);
    const Histogram h = histogram(v, 1000, 0, 10'000'000);
    std::size_t nonzero = 0;
    for (auto c : h.counts) nonzero += c != 0;
    CHECK(nonzero == 1);
    CHECK(h.counts[1328] == 50);
}

TEST_CASE("histogram: uniform data lands within 5 sigma per bin") {
    std::mt19937_64 g(4);
    std::vector<std::int64_t> v(100'000);
    for (auto& x : v) x = static_cast<std::int64_t>(g() % 100);
    const Histogram h = histogram(v, 10, 0, 100);
    REQUIRE(h.counts.size() == 10);
    const double expect = 10'000, sigma = std::sqrt(100'000 * 0.1 * 0.9);
    for (auto c : h.counts) CHECK(std::abs(static_cast<double>(c) - expect) <= 5 * sigma);
}

TEST_CASE("histogram: mass conservation with out-of-range values and a clipped last bin") {
    std::mt19937_64 g(2);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(g() % 100'000);
        const auto p = periods(random_timestamps(g, n));
        const Histogram h = histogram(p, 1 + static_cast<std::int64_t>(g() % 50'000), 1'000'000, 9'000'001);
        std::uint64_t sum = h.out_of_range();
        for (auto c : h.counts) sum += c;
        CHECK(sum == p.size());
        CHECK(h.bin_left_ns.size() == h.counts.size());
        CHECK(h.bin_left_ns.back() < h.hi_ns);
    }
    CHECK_THROWS(histogram({}, 0, 0, 10));
    CHECK_THROWS(histogram({}, 1, 10, 10));
}

TEST_CASE("histogram CSV layout") {
    const std::vector<std::int64_t> v{1, 2, 12};
    std::ostringstream os;
    write_histogram_csv(os, histogram(v, 10, 0, 20));
    CHECK(os.str() == "bin_left_ns,count\n0,2\n10,1\n");
}

TEST_CASE("compare_schemes: three rows in Table-I order with sync availability") {
    std::vector<TimestampRecord> r;
    for (std::int64_t i = 0; i < 5; ++i) {
        r.push_back(rec("pps_disciplined", i, i * 1000 + (i % 2)));
        r.push_back(rec("internal", i, i * 1000));
        r.push_back(rec("arrival", i, i * 1000 + (i % 2) * 50));
    }
    const SchemeTable t = compare_schemes(r);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[0].scheme == "arrival");
    CHECK(t.rows[1].scheme == "internal");
    CHECK(t.rows[2].scheme == "pps_disciplined");
    CHECK(*t.rows[0].sync_available);
    CHECK_FALSE(*t.rows[1].sync_available);
    CHECK(*t.rows[2].sync_available);
    CHECK(t.warnings.empty());
}

TEST_CASE("compare_schemes: single scheme gives one row and warnings for the rest") {
    const SchemeTable t = compare_schemes({rec("internal", 1, 10), rec("internal", 2, 20)});
    CHECK(t.rows.size() == 1);
    CHECK(t.warnings.size() == 2);
}

TEST_CASE("compare_schemes: identical lists under two labels give identical rows; order by seq") {
    std::vector<TimestampRecord> r{rec("a", 3, 30), rec("a", 1, 10), rec("a", 2, 25), rec("b", 1, 10), rec("b", 2, 25), rec("b", 3, 30)};
    const SchemeTable t = compare_schemes(r);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].stats.std_ns == t.rows[1].stats.std_ns);
    CHECK(t.rows[0].stats.mean_ns == t.rows[1].stats.mean_ns);
    CHECK(t.rows[0].stats.min_ns == 5);
    CHECK_FALSE(t.rows[0].sync_available.has_value());
    std::ostringstream a, b;
    write_report_csv(a, t);
    write_report_csv(b, compare_schemes(r));
    CHECK(a.str() == b.str());
}

TEST_CASE("report CSV and text carry the same rows") {
    const SchemeTable t = compare_schemes({rec("internal", 1, 0), rec("internal", 2, 1'327'000), rec("internal", 3, 2'655'000)});
    std::ostringstream csv, txt;
    write_report_csv(csv, t);
    write_report_text(txt, t);
    CHECK(csv.str().find("internal,2,1327500,500,1327000,1328000,no") != std::string::npos);
    CHECK(txt.str().find("1327.500") != std::string::npos);
}

TEST_CASE("absolute_error_series") {
    CHECK(absolute_error_series({rec("x", 1, 5, 5), rec("x", 2, 9, 9)}) == std::vector<std::int64_t>{0, 0});
    CHECK(absolute_error_series({rec("x", 1, 7, 5)}) == std::vector<std::int64_t>{2});
    CHECK_THROWS_AS(absolute_error_series({rec("x", 1, 5)}), DataError);
}

TEST_CASE("record CSV round-trip with and without payload") {
    std::vector<TimestampRecord> plain{rec("arrival", 1, 100, 90), rec("arrival", 2, 200)};
    std::stringstream s1;
    write_records_csv(s1, plain);
    CHECK(s1.str().rfind("sensor_id,seq,scheme,timestamp_ns,true_ns\n", 0) == 0);
    CHECK(read_records_csv(s1) == plain);

    std::vector<TimestampRecord> gyro{TimestampRecord{"imu", 0, "mcu", 5, 4, {0.1, -2.5e-7, 3.0}}};
    std::stringstream s2;
    write_records_csv(s2, gyro);
    CHECK(read_records_csv(s2) == gyro);
}

TEST_CASE("record CSV schema errors") {
    std::istringstream no_header("lidar,1,arrival,5,\n");
    CHECK_THROWS_AS(read_records_csv(no_header), DataError);
    std::istringstream bad_cols("sensor_id,seq,scheme,timestamp_ns,true_ns\nlidar,1,arrival\n");
    CHECK_THROWS_AS(read_records_csv(bad_cols), DataError);
    std::istringstream bad_num("sensor_id,seq,scheme,timestamp_ns,true_ns\nlidar,x,arrival,5,\n");
    CHECK_THROWS_AS(read_records_csv(bad_num), DataError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_records_csv(empty), DataError);
    CHECK_THROWS_AS(check_record_order({rec("a", 2, 0), rec("a", 2, 1)}), DataError);
    CHECK_NOTHROW(check_record_order({rec("a", 2, 0), rec("b", 1, 1)}));
}

} // TEST_SUITE
