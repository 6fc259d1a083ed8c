#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hetsync {

struct Normal {
    double mean = 0.0;
    double sigma = 0.0;
};

struct Uniform {
    double lo = 0.0;
    double hi = 0.0;
};

using Component = std::variant<Normal, Uniform>;

struct WeightedComponent {
    double weight = 1.0;
    Component dist;
};

/// normal(mu, sigma) | uniform(a, b) | weighted mixture of those.
class Distribution {
public:
    Distribution() : Distribution(Normal{}) {}
    Distribution(Normal n);
    Distribution(Uniform u);
    static Distribution mixture(std::vector<WeightedComponent> parts);

    // Text form: "normal(200000, 80000)", "uniform(2e6, 9e6)",
    // "mix(0.9995 normal(0, 30000), 0.0005 uniform(2e6, 9e6))".
    static Distribution parse(std::string_view text);
    std::string to_string() const;

    const std::vector<WeightedComponent>& parts() const { return parts_; }
    double mean() const;

private:
    std::vector<WeightedComponent> parts_;
};

/// Reproducible random source keyed by (seed, stream label).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view stream_id);

    double draw(const Distribution& dist);
    double uniform01();
    double normal(double mean, double sigma);
    std::uint64_t next_u64() { return engine_(); }

    std::uint64_t seed() const { return seed_; }
    const std::string& stream_id() const { return stream_id_; }
    std::uint64_t draw_count() const { return draws_; }

private:
    double draw_component(const Component& c);

    std::uint64_t seed_;
    std::string stream_id_;
    std::mt19937_64 engine_;
    std::uint64_t draws_ = 0;
};

std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view stream_id);

} // namespace hetsync
