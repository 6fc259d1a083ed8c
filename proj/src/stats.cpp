#include "hetsync/stats.hpp"

#include "hetsync/errors.hpp"
#include "hetsync/kernels/kernels.hpp"
#include "hetsync/time.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

namespace hetsync {

std::vector<std::int64_t> periods(std::span<const std::int64_t> ts) {
    if (ts.size() < 2) return {};
    std::vector<std::int64_t> d(ts.size() - 1);
    kernels::active().diff_i64(ts.data(), ts.size(), d.data());
    return d;
}

double population_std(std::size_t n, i128 sum, i128 sum_sq) {
    const i128 nn = static_cast<i128>(n);
    const i128 num = nn * sum_sq - sum * sum; // = N^2 * variance, exact
    if (num <= 0) return 0.0;
    const long double var = static_cast<long double>(num) / (static_cast<long double>(nn) * static_cast<long double>(nn));
    return static_cast<double>(std::sqrt(var));
}

PeriodStats period_stats(std::span<const std::int64_t> ts) {
    if (ts.size() < 2) throw std::invalid_argument("period_stats needs at least 2 timestamps");
    const std::vector<std::int64_t> d = periods(ts);
    std::int64_t max_abs = 0;
    i128 sum_sq = 0;
    for (std::int64_t v : d) {
        if (v < 0) throw std::invalid_argument("period_stats: timestamps must be nondecreasing");
        max_abs = std::max(max_abs, v);
        sum_sq += static_cast<i128>(v) * v;
    }
    kernels::SumMinMax smm;
    if (static_cast<long double>(max_abs) * static_cast<long double>(d.size()) < 0x1p62L) {
        smm = kernels::active().sum_min_max_i64(d.data(), d.size());
    } else {
        smm = {0, d[0], d[0]};
        for (std::int64_t v : d) {
            smm.sum += v;
            smm.min = std::min(smm.min, v);
            smm.max = std::max(smm.max, v);
        }
    }
    PeriodStats s;
    s.count = d.size();
    s.mean_ns = static_cast<double>(static_cast<long double>(smm.sum) / static_cast<long double>(d.size()));
    s.std_ns = population_std(d.size(), smm.sum, sum_sq);
    s.min_ns = smm.min;
    s.max_ns = smm.max;
    return s;
}

Histogram histogram(std::span<const std::int64_t> values, std::int64_t bin_width_ns, std::int64_t lo_ns, std::int64_t hi_ns) {
    if (bin_width_ns <= 0) throw std::invalid_argument("histogram: bin width must be positive");
    if (hi_ns <= lo_ns) throw std::invalid_argument("histogram: empty range");
    Histogram h;
    h.lo_ns = lo_ns;
    h.hi_ns = hi_ns;
    h.bin_width_ns = bin_width_ns;
    const std::int64_t nbins = static_cast<std::int64_t>(ceil_div(static_cast<i128>(hi_ns) - lo_ns, bin_width_ns));
    h.counts.assign(static_cast<std::size_t>(nbins), 0);
    for (std::int64_t b = 0; b < nbins; ++b) h.bin_left_ns.push_back(lo_ns + b * bin_width_ns);
    for (std::int64_t v : values) {
        if (v < lo_ns) ++h.below;
        else if (v >= hi_ns) ++h.above;
        else ++h.counts[static_cast<std::size_t>((static_cast<i128>(v) - lo_ns) / bin_width_ns)];
    }
    return h;
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
    os << "bin_left_ns,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) os << h.bin_left_ns[i] << ',' << h.counts[i] << '\n';
}

SchemeTable compare_schemes(const std::vector<TimestampRecord>& records) {
    std::map<std::string, std::vector<std::pair<std::int64_t, std::int64_t>>> by_scheme;
    for (const auto& r : records) by_scheme[r.scheme].emplace_back(r.seq, r.timestamp_ns);

    SchemeTable t;
    const std::vector<std::pair<std::string, bool>> known = {
        {kSchemeArrival, true}, {kSchemeInternal, false}, {kSchemeDisciplined, true}};
    std::vector<std::string> order;
    for (const auto& [name, avail] : known) {
        if (by_scheme.count(name)) order.push_back(name);
        else t.warnings.push_back("scheme '" + name + "' missing; omitted");
    }
    for (const auto& [name, v] : by_scheme)
        if (std::none_of(known.begin(), known.end(), [&](const auto& k) { return k.first == name; })) order.push_back(name);

    for (const auto& name : order) {
        auto rows = by_scheme.at(name);
        std::sort(rows.begin(), rows.end());
        if (rows.size() < 2) {
            t.warnings.push_back("scheme '" + name + "' has fewer than 2 timestamps; omitted");
            continue;
        }
        std::vector<std::int64_t> ts;
        ts.reserve(rows.size());
        for (const auto& [seq, v] : rows) ts.push_back(v);
        SchemeRow row;
        row.scheme = name;
        row.stats = period_stats(ts);
        for (const auto& [k, avail] : known)
            if (k == name) row.sync_available = avail;
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_report_text(std::ostream& os, const SchemeTable& table) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-16s %10s %12s %12s %12s %12s %6s\n", "scheme", "count", "mean[us]", "std[us]", "min[us]",
                  "max[us]", "sync");
    os << buf;
    for (const auto& r : table.rows) {
        std::snprintf(buf, sizeof buf, "%-16s %10zu %12.3f %12.3f %12.3f %12.3f %6s\n", r.scheme.c_str(), r.stats.count,
                      r.stats.mean_ns / 1e3, r.stats.std_ns / 1e3, static_cast<double>(r.stats.min_ns) / 1e3,
                      static_cast<double>(r.stats.max_ns) / 1e3,
                      r.sync_available ? (*r.sync_available ? "yes" : "no") : "-");
        os << buf;
    }
    for (const auto& w : table.warnings) os << "warning: " << w << '\n';
}

void write_report_csv(std::ostream& os, const SchemeTable& table) {
    os << "scheme,count,mean_ns,std_ns,min_ns,max_ns,sync_available\n";
    for (const auto& r : table.rows) {
        os << r.scheme << ',' << r.stats.count << ',' << format_double(r.stats.mean_ns) << ',' << format_double(r.stats.std_ns)
           << ',' << r.stats.min_ns << ',' << r.stats.max_ns << ',' << (r.sync_available ? (*r.sync_available ? "yes" : "no") : "")
           << '\n';
    }
}

std::vector<std::int64_t> absolute_error_series(const std::vector<TimestampRecord>& records) {
    std::vector<std::int64_t> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (!r.true_ns)
            throw DataError("record " + r.sensor_id + "/" + r.scheme + " seq " + std::to_string(r.seq) + " has no ground truth");
        out.push_back(checked_sub(r.timestamp_ns, *r.true_ns));
    }
    return out;
}

} // namespace hetsync
