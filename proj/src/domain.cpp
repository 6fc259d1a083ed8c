#include "hetsync/domain.hpp"

#include <stdexcept>

namespace hetsync {

std::size_t ClockDomain::add(Source src) {
    slots_.push_back({std::move(src), std::nullopt});
    slots_.back().target = slots_.back().src.next();
    if (!firing_) reschedule();
    return slots_.size() - 1;
}

void ClockDomain::refresh(std::size_t id) {
    if (id >= slots_.size()) throw std::out_of_range("ClockDomain::refresh: unknown source");
    slots_[id].target = slots_[id].src.next();
    if (!firing_) reschedule();
}

void ClockDomain::reschedule() {
    std::optional<std::int64_t> best;
    EventKind kind = EventKind::Custom;
    for (const auto& s : slots_) {
        if (s.target && (!best || *s.target < *best)) {
            best = s.target;
            kind = s.src.kind;
        }
    }
    ++gen_;
    if (!best) return;
    TrueTime at = osc_.when(*best);
    if (at < engine_.now()) at = engine_.now();
    const std::uint64_t gen = gen_;
    engine_.schedule(at, kind, [this, gen](Engine&, const Event& ev) { wake(ev.at, gen); });
}

void ClockDomain::wake(TrueTime at, std::uint64_t gen) {
    if (gen != gen_) return; // superseded by a refresh
    osc_.advance(at);
    const std::int64_t local = osc_.local_at(at);
    firing_ = true;
    for (auto& s : slots_) {
        if (s.target && *s.target <= local) {
            const std::int64_t target = *s.target;
            s.target = s.src.next();
            s.src.fire(engine_, at, target);
        }
    }
    firing_ = false;
    reschedule();
}

} // namespace hetsync
