#include "hetsync/engine.hpp"

#include <ostream>
#include <string>

namespace hetsync {

std::string_view to_string(EventKind k) {
    switch (k) {
    case EventKind::TimerOverflow: return "timer-overflow";
    case EventKind::TimerCompare: return "timer-compare";
    case EventKind::ImuDataReady: return "imu-data-ready";
    case EventKind::LidarPacketEmit: return "lidar-packet-emit";
    case EventKind::NetArrival: return "net-arrival";
    case EventKind::TriggerPulse: return "trigger-pulse";
    case EventKind::ExposureStart: return "exposure-start";
    case EventKind::Custom: return "custom";
    }
    return "unknown";
}

std::uint64_t Engine::schedule(Event ev) {
    if (ev.at < now_)
        throw SchedulingError("cannot schedule " + std::string(to_string(ev.kind)) + " at " + std::to_string(ev.at.ns) +
                              " ns: simulation time is already " + std::to_string(now_.ns) + " ns");
    ev.seq = next_seq_++;
    const std::uint64_t seq = ev.seq;
    queue_.push(std::move(ev));
    return seq;
}

std::uint64_t Engine::schedule(TrueTime at, EventKind kind, std::function<void(Engine&, const Event&)> action) {
    return schedule(Event{at, 0, kind, std::move(action)});
}

std::uint64_t Engine::run_until(TrueTime t_end) {
    if (t_end < now_) throw SchedulingError("run_until target lies in the past");
    std::uint64_t count = 0;
    while (!queue_.empty() && queue_.top().at <= t_end) {
        // priority_queue::top is const; the action is moved out before pop.
        Event ev = std::move(const_cast<Event&>(queue_.top()));
        queue_.pop();
        now_ = ev.at;
        ++dispatched_;
        ++count;
        if (trace_) *trace_ << ev.at.ns << '\t' << ev.seq << '\t' << to_string(ev.kind) << '\n';
        if (ev.action) ev.action(*this, ev);
    }
    now_ = t_end;
    return count;
}

} // namespace hetsync
