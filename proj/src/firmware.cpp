#include "hetsync/firmware.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hetsync {

std::string_view to_string(InterruptKind k) {
    switch (k) {
    case InterruptKind::TriggerCapture: return "trigger_capture";
    case InterruptKind::ImuReady: return "imu_ready";
    case InterruptKind::TimerOverflow: return "timer_overflow";
    case InterruptKind::TimerHalf: return "timer_half";
    }
    return "unknown";
}

int priority(InterruptKind k) {
    const auto v = static_cast<std::uint8_t>(k);
    if (v >= kInterruptKinds) throw std::invalid_argument("unknown interrupt kind " + std::to_string(v));
    return v;
}

void LatencyModel::validate() const {
    if (!(base_ns >= 0.0)) throw std::invalid_argument("latency base_ns must be >= 0");
    if (!(sigma_ns >= 0.0)) throw std::invalid_argument("latency sigma_ns must be >= 0");
    if (blocked_extra_ns && *blocked_extra_ns < 0) throw std::invalid_argument("latency blocked_extra_ns must be >= 0");
}

void TriggerConfig::validate() const {
    if (!enabled) return;
    if (trigger_hz <= 0 || camera_fps <= 0) throw std::invalid_argument("trigger_hz and camera_fps must be positive");
    if (trigger_hz % camera_fps != 0) throw std::invalid_argument("trigger_hz must be a multiple of camera_fps");
    if (phase_offset_ns < 0 || static_cast<i128>(phase_offset_ns) * trigger_hz >= kNsPerSec)
        throw std::invalid_argument("trigger phase_offset_ns must lie in [0, 1e9 / trigger_hz)");
}

void FirmwareConfig::validate() const {
    timer.validate();
    clock.validate();
    latency.validate();
    trigger.validate();
    for (auto s : service.service_ns)
        if (s < 0) throw std::invalid_argument("interrupt service durations must be >= 0");
    if (serial_baud <= 0) throw std::invalid_argument("serial_baud must be positive");
}

std::vector<MainLoopAction> main_loop_step(FirmwareState& state, const Fix& fix, const SecondLabelEpoch& epoch) {
    std::vector<MainLoopAction> out;
    if (state.imu_dat_rdy) {
        state.imu_dat_rdy = false;
        ++state.imu_flags_cleared;
        if (state.pending_imu_timestamp && state.pending_imu_sample)
            out.emplace_back(ImuEmit{*state.pending_imu_sample, *state.pending_imu_timestamp});
        state.pending_imu_timestamp.reset();
        state.pending_imu_sample.reset();
    }
    if (state.nmea_mes_gen) {
        state.nmea_mes_gen = false;
        ++state.ngm_flags_cleared;
        out.emplace_back(NgmEmit{state.pending_ngm_label, generate_gprmc(state.pending_ngm_label, fix, epoch)});
    }
    return out;
}

Firmware::Firmware(Engine& engine, const FirmwareConfig& cfg, std::uint64_t seed)
    : engine_(engine), cfg_(cfg), osc_(cfg.clock, seed, "mcu.clock"), domain_(engine, osc_), latency_rng_(seed, "mcu.latency") {
    cfg_.validate();
    state_.trigger_cfg = cfg_.trigger;
    trigger_phase_ticks_ = narrow_i128(
        round_div(static_cast<i128>(cfg_.trigger.phase_offset_ns) * cfg_.timer.tick_rate_hz.num,
                  static_cast<i128>(cfg_.timer.tick_rate_hz.den) * kNsPerSec));
}

CapturedStamp Firmware::capture_at(TrueTime t) const {
    const TickPosition pos = local_to_tick(cfg_.timer, osc_.local_at(t));
    return {pos, tick_to_ns(cfg_.timer, pos)};
}

std::optional<std::int64_t> Firmware::next_trigger_target() {
    const auto& r = cfg_.timer.tick_rate_hz;
    const i128 den = static_cast<i128>(r.den) * state_.trigger_cfg.trigger_hz;
    const std::int64_t ticks = trigger_phase_ticks_ + narrow_i128(floor_div(static_cast<i128>(trigger_k_) * r.num, den));
    ++trigger_k_;
    last_trigger_ticks_ = ticks;
    return tick_boundary_ns(cfg_.timer, ticks);
}

void Firmware::start() {
    domain_.add({EventKind::TimerOverflow,
                 [this]() -> std::optional<std::int64_t> {
                     return tick_boundary_ns(cfg_.timer, next_overflow_cycle_++ * cfg_.timer.overflow_ticks);
                 },
                 [this](Engine&, TrueTime t, std::int64_t) {
                     pps_rising_.push_back(t);
                     for (auto& cb : on_pps_rising) cb(t);
                     request(InterruptKind::TimerOverflow, t, std::nullopt, 0);
                 }});
    domain_.add({EventKind::TimerCompare,
                 [this]() -> std::optional<std::int64_t> {
                     return tick_boundary_ns(cfg_.timer,
                                             next_half_cycle_++ * cfg_.timer.overflow_ticks + cfg_.timer.compare_half_ticks);
                 },
                 [this](Engine&, TrueTime t, std::int64_t) {
                     pps_falling_.push_back(t);
                     request(InterruptKind::TimerHalf, t, std::nullopt, 0);
                 }});
    if (state_.trigger_cfg.enabled) {
        trigger_source_ = domain_.add({EventKind::TriggerPulse, [this]() { return next_trigger_target(); },
                                       [this](Engine&, TrueTime t, std::int64_t) {
                                           const std::int64_t index = ++trigger_count_;
                                           pulses_.push_back({index, t, std::nullopt});
                                           for (auto& cb : on_trigger_pulse) cb(index, t);
                                           request(InterruptKind::TriggerCapture, t, std::nullopt, index);
                                       }});
    }
}

void Firmware::set_trigger_phase(std::int64_t phase_offset_ns) {
    TriggerConfig next = state_.trigger_cfg;
    next.phase_offset_ns = phase_offset_ns;
    next.validate();
    state_.trigger_cfg = next;
    const auto& r = cfg_.timer.tick_rate_hz;
    trigger_phase_ticks_ = narrow_i128(
        round_div(static_cast<i128>(phase_offset_ns) * r.num, static_cast<i128>(r.den) * kNsPerSec));
    if (!trigger_source_) return;
    const std::int64_t now_ticks = ticks_at(cfg_.timer, osc_.local_at(engine_.now()));
    const std::int64_t floor_ticks = std::max(now_ticks, last_trigger_ticks_);
    const i128 den = static_cast<i128>(r.den) * state_.trigger_cfg.trigger_hz;
    i128 k = floor_div((static_cast<i128>(floor_ticks) - trigger_phase_ticks_) * den, r.num);
    if (k < 0) k = 0;
    trigger_k_ = narrow_i128(k);
    // advance to the first pulse strictly after both the last emitted pulse and now
    for (;;) {
        const std::int64_t ticks =
            trigger_phase_ticks_ + narrow_i128(floor_div(static_cast<i128>(trigger_k_) * r.num, den));
        if (ticks > floor_ticks) break;
        ++trigger_k_;
    }
    domain_.refresh(*trigger_source_);
}

void Firmware::on_interrupt(InterruptKind kind, TrueTime t, std::optional<ImuSample> sample) {
    (void)priority(kind);
    request(kind, t, std::move(sample), 0);
}

void Firmware::request(InterruptKind kind, TrueTime t, std::optional<ImuSample> sample, std::int64_t pulse_index) {
    Pending p{kind, t, std::move(sample), pulse_index, next_order_++};
    if (stack_.empty() || priority(kind) < priority(stack_.back().kind)) {
        begin(std::move(p), t);
    } else {
        pending_.push_back(std::move(p));
    }
}

void Firmware::schedule_steps(Active& a) {
    const std::uint64_t id = a.id;
    const std::uint64_t gen = a.gen;
    if (!a.action_done)
        engine_.schedule(a.action, EventKind::Custom, [this, id, gen](Engine&, const Event&) { on_action(id, gen); });
    engine_.schedule(a.exit, EventKind::Custom, [this, id, gen](Engine&, const Event&) { on_exit(id, gen); });
}

void Firmware::begin(Pending p, TrueTime entry) {
    const double draw = latency_rng_.normal(cfg_.latency.base_ns, cfg_.latency.sigma_ns);
    const std::int64_t latency = std::max<std::int64_t>(0, std::llround(draw));
    Active a;
    a.id = next_id_++;
    a.kind = p.kind;
    a.request = p.request;
    a.entry = entry;
    a.action = entry + latency;
    a.exit = a.action + cfg_.service.service_ns[static_cast<std::size_t>(priority(p.kind))];
    a.sample = std::move(p.sample);
    a.pulse_index = p.pulse_index;

    // nested entry: everything below is frozen for the new handler's occupancy
    const std::int64_t occupancy = a.exit - entry;
    const std::int64_t shift = cfg_.latency.blocked_extra_ns.value_or(occupancy);
    for (auto& below : stack_) {
        if (!below.action_done && below.action >= entry) below.action += shift;
        below.exit += shift;
        ++below.gen;
        schedule_steps(below);
    }
    stack_.push_back(std::move(a));
    state_.in_service = stack_.back().kind;
    schedule_steps(stack_.back());
}

void Firmware::on_action(std::uint64_t id, std::uint64_t gen) {
    auto it = std::find_if(stack_.begin(), stack_.end(), [&](const Active& a) { return a.id == id; });
    if (it == stack_.end() || it->gen != gen || it->action_done) return;
    it->action_done = true;
    const TrueTime t = it->action;
    switch (it->kind) {
    case InterruptKind::ImuReady:
        if (state_.imu_dat_rdy) ++state_.imu_overruns;
        state_.imu_dat_rdy = true;
        ++state_.imu_flags_set;
        state_.pending_imu_timestamp = capture_at(t);
        state_.pending_imu_sample = it->sample ? *it->sample : ImuSample{};
        break;
    case InterruptKind::TimerHalf:
        state_.nmea_mes_gen = true;
        ++state_.ngm_flags_set;
        state_.pending_ngm_label = state_.second_label;
        break;
    case InterruptKind::TimerOverflow:
        state_.second_label = capture_at(t).pos.cycle;
        break;
    case InterruptKind::TriggerCapture:
        if (it->pulse_index >= 1 && static_cast<std::size_t>(it->pulse_index) <= pulses_.size())
            pulses_[static_cast<std::size_t>(it->pulse_index - 1)].captured = capture_at(t);
        break;
    }
}

void Firmware::on_exit(std::uint64_t id, std::uint64_t gen) {
    if (stack_.empty() || stack_.back().id != id || stack_.back().gen != gen) return;
    const Active done = stack_.back();
    stack_.pop_back();
    service_log_.push_back({done.kind, done.request, done.entry, done.action, done.exit});
    const TrueTime now = engine_.now();

    if (!pending_.empty()) {
        auto best = std::min_element(pending_.begin(), pending_.end(), [](const Pending& a, const Pending& b) {
            if (priority(a.kind) != priority(b.kind)) return priority(a.kind) < priority(b.kind);
            return a.order < b.order;
        });
        if (stack_.empty() || priority(best->kind) < priority(stack_.back().kind)) {
            Pending p = std::move(*best);
            pending_.erase(best);
            begin(std::move(p), now);
            return;
        }
    }
    if (!stack_.empty()) {
        state_.in_service = stack_.back().kind;
        return;
    }
    state_.in_service.reset();
    run_main_loop(now);
}

void Firmware::run_main_loop(TrueTime now) {
    for (auto& action : main_loop_step(state_, cfg_.fix, cfg_.epoch)) {
        if (auto* imu = std::get_if<ImuEmit>(&action)) {
            TimestampRecord r;
            r.sensor_id = "imu";
            r.seq = imu->sample.seq;
            r.scheme = "mcu";
            r.timestamp_ns = imu->stamp.ns;
            r.true_ns = imu->sample.true_at.ns;
            r.values = imu->sample.values;
            host_records_.push_back(std::move(r));
        } else {
            auto& ngm = std::get<NgmEmit>(action);
            const auto bits = static_cast<i128>(ngm.sentence.size()) * 10 * kNsPerSec;
            const std::int64_t wire_ns = narrow_i128(ceil_div(bits, cfg_.serial_baud));
            NgmEmission e{ngm.second_label, std::move(ngm.sentence), now, now + wire_ns};
            ngms_.push_back(e);
            engine_.schedule(e.arrival_at, EventKind::NetArrival, [this, e](Engine&, const Event& ev) {
                for (auto& cb : on_ngm_arrival) cb(ev.at, e);
            });
        }
    }
}

} // namespace hetsync
