#pragma once

#include "hetsync/clock.hpp"
#include "hetsync/engine.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace hetsync {

/// Drives every periodic source defined in one oscillator's local time.
/// Only the earliest pending target is scheduled on the engine, so the
/// oscillator's random walk can advance at each wake without invalidating
/// already-scheduled true times.
class ClockDomain {
public:
    struct Source {
        EventKind kind = EventKind::Custom;
        // Next local-time target strictly after the previous one; nullopt ends the source.
        std::function<std::optional<std::int64_t>()> next;
        std::function<void(Engine&, TrueTime at, std::int64_t local_target)> fire;
    };

    ClockDomain(Engine& engine, Oscillator& osc) : engine_(engine), osc_(osc) {}
    ClockDomain(const ClockDomain&) = delete;
    ClockDomain& operator=(const ClockDomain&) = delete;

    std::size_t add(Source src);
    // Re-queries a source's next target (e.g. after its schedule changed) and reschedules.
    void refresh(std::size_t id);

    Oscillator& oscillator() { return osc_; }

private:
    struct Slot {
        Source src;
        std::optional<std::int64_t> target;
    };

    void reschedule();
    void wake(TrueTime at, std::uint64_t gen);

    Engine& engine_;
    Oscillator& osc_;
    std::vector<Slot> slots_;
    std::uint64_t gen_ = 0;
    bool firing_ = false;
};

} // namespace hetsync
