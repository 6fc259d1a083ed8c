#pragma once

#include "hetsync/time.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <queue>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace hetsync {

enum class EventKind : std::uint8_t {
    TimerOverflow,
    TimerCompare,
    ImuDataReady,
    LidarPacketEmit,
    NetArrival,
    TriggerPulse,
    ExposureStart,
    Custom,
};

std::string_view to_string(EventKind k);

class Engine;

struct Event {
    TrueTime at;
    std::uint64_t seq = 0; // assigned by Engine::schedule
    EventKind kind = EventKind::Custom;
    std::function<void(Engine&, const Event&)> action;
};

class SchedulingError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Single-threaded discrete-event engine. Events dispatch in (at, seq) order.
class Engine {
public:
    Engine() = default;
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    // Returns the sequence number assigned to the event.
    std::uint64_t schedule(Event ev);
    std::uint64_t schedule(TrueTime at, EventKind kind, std::function<void(Engine&, const Event&)> action = {});

    // Dispatches every event with at <= t_end (inclusive), then sets now() = t_end.
    std::uint64_t run_until(TrueTime t_end);

    TrueTime now() const { return now_; }
    std::uint64_t scheduled_count() const { return next_seq_; }
    std::uint64_t dispatched_count() const { return dispatched_; }
    std::size_t pending_count() const { return queue_.size(); }

    // One line per dispatched event: true_time_ns \t seq \t kind
    void set_trace(std::ostream* sink) { trace_ = sink; }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    TrueTime now_{0};
    std::uint64_t next_seq_ = 0;
    std::uint64_t dispatched_ = 0;
    std::ostream* trace_ = nullptr;
};

} // namespace hetsync
