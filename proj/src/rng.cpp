#include "hetsync/rng.hpp"

#include <boost/random/normal_distribution.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hetsync {

namespace {

void validate(const Component& c) {
    if (const auto* n = std::get_if<Normal>(&c)) {
        if (!(n->sigma >= 0.0) || !std::isfinite(n->mean))
            throw std::invalid_argument("normal distribution requires sigma >= 0");
    } else {
        const auto& u = std::get<Uniform>(c);
        if (!(u.lo <= u.hi) || !std::isfinite(u.lo) || !std::isfinite(u.hi))
            throw std::invalid_argument("uniform distribution requires a <= b");
    }
}

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct Cursor {
    std::string_view s;
    std::size_t i = 0;

    void skip_ws() {
        while (i < s.size() && (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ',')) ++i;
    }
    bool eat(char c) {
        skip_ws();
        if (i < s.size() && s[i] == c) {
            ++i;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) throw std::invalid_argument("distribution: expected '" + std::string(1, c) + "' in '" + std::string(s) + "'");
    }
    std::string word() {
        skip_ws();
        std::size_t b = i;
        while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
        return std::string(s.substr(b, i - b));
    }
    double number() {
        skip_ws();
        std::size_t b = i;
        while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.' || s[i] == '-' || s[i] == '+' ||
                                s[i] == 'e' || s[i] == 'E'))
            ++i;
        double v = 0;
        auto [p, ec] = std::from_chars(s.data() + b, s.data() + i, v);
        if (ec != std::errc() || p != s.data() + i || b == i)
            throw std::invalid_argument("distribution: bad number in '" + std::string(s) + "'");
        return v;
    }
};

Component parse_component(Cursor& c) {
    const std::string w = c.word();
    c.expect('(');
    const double a = c.number();
    const double b = c.number();
    c.expect(')');
    if (w == "normal") return Normal{a, b};
    if (w == "uniform") return Uniform{a, b};
    throw std::invalid_argument("distribution: unknown family '" + w + "'");
}

} // namespace

Distribution::Distribution(Normal n) {
    validate(n);
    parts_.push_back({1.0, n});
}

Distribution::Distribution(Uniform u) {
    validate(u);
    parts_.push_back({1.0, u});
}

Distribution Distribution::mixture(std::vector<WeightedComponent> parts) {
    if (parts.empty()) throw std::invalid_argument("mixture needs at least one component");
    double total = 0.0;
    for (const auto& p : parts) {
        if (!(p.weight >= 0.0)) throw std::invalid_argument("mixture weights must be non-negative");
        validate(p.dist);
        total += p.weight;
    }
    if (!(total > 0.0)) throw std::invalid_argument("mixture weights must not all be zero");
    for (auto& p : parts) p.weight /= total;
    Distribution d;
    d.parts_ = std::move(parts);
    return d;
}

Distribution Distribution::parse(std::string_view text) {
    Cursor c{text};
    c.skip_ws();
    const std::size_t mark = c.i;
    const std::string w = c.word();
    if (w == "mix") {
        c.expect('(');
        std::vector<WeightedComponent> parts;
        while (!c.eat(')')) {
            const double weight = c.number();
            parts.push_back({weight, parse_component(c)});
            if (c.i >= text.size()) throw std::invalid_argument("distribution: unterminated mix(...)");
        }
        c.skip_ws();
        if (c.i != text.size()) throw std::invalid_argument("distribution: trailing text");
        return mixture(std::move(parts));
    }
    c.i = mark;
    Component comp = parse_component(c);
    c.skip_ws();
    if (c.i != text.size()) throw std::invalid_argument("distribution: trailing text");
    return std::visit([](auto v) { return Distribution(v); }, comp);
}

std::string Distribution::to_string() const {
    std::ostringstream os;
    auto num = [](double v) {
        char buf[32];
        const bool integral = v == std::trunc(v) && std::abs(v) < 1e15;
        const auto r = integral ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed) : std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, r.ptr);
    };
    auto comp = [&](const Component& c) {
        if (const auto* n = std::get_if<Normal>(&c))
            os << "normal(" << num(n->mean) << ", " << num(n->sigma) << ")";
        else
            os << "uniform(" << num(std::get<Uniform>(c).lo) << ", " << num(std::get<Uniform>(c).hi) << ")";
    };
    if (parts_.size() == 1) {
        comp(parts_[0].dist);
    } else {
        os << "mix(";
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (i) os << ", ";
            os << num(parts_[i].weight) << ' ';
            comp(parts_[i].dist);
        }
        os << ")";
    }
    return os.str();
}

double Distribution::mean() const {
    double m = 0.0;
    for (const auto& p : parts_) {
        if (const auto* n = std::get_if<Normal>(&p.dist))
            m += p.weight * n->mean;
        else
            m += p.weight * 0.5 * (std::get<Uniform>(p.dist).lo + std::get<Uniform>(p.dist).hi);
    }
    return m;
}

std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view stream_id) {
    // FNV-1a over the label, then mixed with the run seed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : stream_id) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t x = seed ^ h;
    return splitmix64(x);
}

RngStream::RngStream(std::uint64_t seed, std::string_view stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(derive_stream_seed(seed, stream_id)) {}

double RngStream::uniform01() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal(double mean, double sigma) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("normal distribution requires sigma >= 0");
    ++draws_;
    if (sigma == 0.0) return mean;
    boost::random::normal_distribution<double> nd(mean, sigma);
    return nd(engine_);
}

double RngStream::draw_component(const Component& c) {
    if (const auto* n = std::get_if<Normal>(&c)) return normal(n->mean, n->sigma);
    const auto& u = std::get<Uniform>(c);
    if (u.lo == u.hi) {
        ++draws_;
        return u.lo;
    }
    return u.lo + (u.hi - u.lo) * uniform01();
}

double RngStream::draw(const Distribution& dist) {
    const auto& parts = dist.parts();
    if (parts.size() == 1) return draw_component(parts[0].dist);
    double u = uniform01();
    for (const auto& p : parts) {
        if (u < p.weight) return draw_component(p.dist);
        u -= p.weight;
    }
    return draw_component(parts.back().dist);
}

} // namespace hetsync
