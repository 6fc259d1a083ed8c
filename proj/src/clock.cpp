#include "hetsync/clock.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hetsync {

void ClockState::validate() const {
    if (!(std::fabs(rate_ppm) <= 1000.0)) throw std::invalid_argument("clock rate_ppm must satisfy |rate_ppm| <= 1000");
    if (!(rw_sigma_ppm_per_sqrt_s >= 0.0)) throw std::invalid_argument("clock random-walk sigma must be >= 0");
    if (!(jitter_sigma_ns >= 0.0)) throw std::invalid_argument("clock jitter_sigma_ns must be >= 0");
}

std::int64_t ppm_to_ppt(double ppm) { return static_cast<std::int64_t>(std::llround(ppm * 1e6)); }

namespace {

std::int64_t linear_local(std::int64_t seg_local, std::int64_t elapsed, std::int64_t rate_ppt) {
    const i128 drift = round_div(static_cast<i128>(elapsed) * rate_ppt, kPptScale);
    return narrow_i128(static_cast<i128>(seg_local) + elapsed + drift);
}

} // namespace

std::int64_t read_clock(const ClockState& clock, TrueTime t) {
    clock.validate();
    return linear_local(clock.offset0_ns, t.ns, ppm_to_ppt(clock.rate_ppm));
}

Oscillator::Oscillator(const ClockState& cfg, std::uint64_t seed, std::string_view stream_id)
    : cfg_(cfg), rng_(seed, stream_id), seg_local_(cfg.offset0_ns), rate_ppt_(ppm_to_ppt(cfg.rate_ppm)) {
    cfg_.validate();
}

void Oscillator::advance(TrueTime t) {
    if (t < seg_true_) throw std::invalid_argument("Oscillator::advance: time went backwards");
    if (cfg_.rw_sigma_ppm_per_sqrt_s == 0.0 || t == seg_true_) return;
    const std::int64_t elapsed = t - seg_true_;
    seg_local_ = linear_local(seg_local_, elapsed, rate_ppt_);
    seg_true_ = t;
    const double step_ppm = rng_.normal(0.0, cfg_.rw_sigma_ppm_per_sqrt_s * std::sqrt(static_cast<double>(elapsed) / 1e9));
    rate_ppt_ += ppm_to_ppt(step_ppm);
}

std::int64_t Oscillator::local_at(TrueTime t) const {
    if (t < seg_true_) throw std::invalid_argument("Oscillator::local_at: time precedes the current segment");
    return linear_local(seg_local_, t - seg_true_, rate_ppt_);
}

std::int64_t Oscillator::read(TrueTime t) {
    advance(t);
    std::int64_t v = local_at(t);
    if (cfg_.jitter_sigma_ns > 0.0) v = checked_add(v, std::llround(rng_.normal(0.0, cfg_.jitter_sigma_ns)));
    return v;
}

TrueTime Oscillator::when(std::int64_t local_target) const {
    if (local_at(seg_true_) >= local_target) return seg_true_;
    const i128 span = static_cast<i128>(local_target) - seg_local_;
    i128 guess = floor_div(span * kPptScale, static_cast<i128>(kPptScale) + rate_ppt_);
    std::int64_t d = narrow_i128(guess < 0 ? 0 : guess);
    // linear_local is non-decreasing in d; the estimate is within a couple of ns.
    while (d > 0 && linear_local(seg_local_, d - 1, rate_ppt_) >= local_target) --d;
    while (linear_local(seg_local_, d, rate_ppt_) < local_target) ++d;
    return seg_true_ + d;
}

void McuTimerConfig::validate() const {
    if (!(0 < compare_half_ticks && compare_half_ticks < overflow_ticks))
        throw std::invalid_argument("mcu timer: require 0 < compare_half_ticks < overflow_ticks");
    (void)period_ns();
}

std::int64_t McuTimerConfig::period_ns() const {
    const i128 num = static_cast<i128>(overflow_ticks) * tick_rate_hz.den * kNsPerSec;
    if (num % tick_rate_hz.num != 0) throw std::invalid_argument("mcu timer: overflow period is not a whole number of ns");
    return narrow_i128(num / tick_rate_hz.num);
}

std::int64_t ticks_at(const McuTimerConfig& cfg, std::int64_t local_ns) {
    const i128 num = static_cast<i128>(local_ns) * cfg.tick_rate_hz.num;
    return narrow_i128(floor_div(num, static_cast<i128>(cfg.tick_rate_hz.den) * kNsPerSec));
}

TickPosition local_to_tick(const McuTimerConfig& cfg, std::int64_t local_ns) {
    const std::int64_t t = ticks_at(cfg, local_ns);
    return {narrow_i128(floor_div(t, cfg.overflow_ticks)), mod_floor(t, cfg.overflow_ticks)};
}

TickPosition true_to_tick(const McuTimerConfig& cfg, TrueTime t) {
    if (t.ns < 0) throw std::invalid_argument("true_to_tick: t precedes the epoch");
    return local_to_tick(cfg, t.ns);
}

std::int64_t tick_boundary_ns(const McuTimerConfig& cfg, std::int64_t ticks) {
    const i128 num = static_cast<i128>(ticks) * cfg.tick_rate_hz.den * kNsPerSec;
    return narrow_i128(ceil_div(num, cfg.tick_rate_hz.num));
}

std::int64_t tick_to_ns(const McuTimerConfig& cfg, TickPosition pos) {
    const i128 ticks = static_cast<i128>(pos.cycle) * cfg.overflow_ticks + pos.tick;
    return narrow_i128(round_div(ticks * cfg.tick_rate_hz.den * kNsPerSec, cfg.tick_rate_hz.num));
}

std::vector<PpsEdge> pps_edges(const McuTimerConfig& cfg, TrueTime t_end, const ClockState& mcu_clock) {
    if (t_end.ns <= 0) throw std::invalid_argument("pps_edges: t_end must be positive");
    cfg.validate();
    Oscillator osc(mcu_clock, 0, "mcu.pps_edges");
    std::vector<PpsEdge> out;
    for (std::int64_t k = 0;; ++k) {
        const TrueTime rise = osc.when(tick_boundary_ns(cfg, k * cfg.overflow_ticks));
        if (rise > t_end) break;
        out.push_back({rise, true, k});
        const TrueTime fall = osc.when(tick_boundary_ns(cfg, k * cfg.overflow_ticks + cfg.compare_half_ticks));
        if (fall > t_end) break;
        out.push_back({fall, false, k});
    }
    return out;
}

DisciplinedClock::DisciplinedClock(const ClockState& base, std::uint64_t seed, std::string_view stream_id)
    : base_(base, seed, stream_id) {}

void DisciplinedClock::discipline(TrueTime pps_at, std::int64_t second_label) {
    base_.advance(pps_at);
    anchor_local_ = base_.local_at(pps_at);
    label_ = second_label;
    last_pps_true_ = pps_at;
    locked_ = true;
    confirmed_ = true;
    pending_pps_.reset();
    ++reloads_;
}

void DisciplinedClock::on_pps(TrueTime pps_at) {
    base_.advance(pps_at);
    const std::int64_t local = base_.local_at(pps_at);
    if (locked_ && confirmed_) {
        anchor_local_ = local;
        label_ += 1; // provisional until the paired NGM arrives
        last_pps_true_ = pps_at;
        confirmed_ = false;
        ++reloads_;
    } else if (locked_) {
        // the previous reload never got its NGM: free-run from it until a new pair arrives
        ++missing_ngm_;
    }
    pending_pps_ = {pps_at, local};
}

void DisciplinedClock::on_ngm(TrueTime pps_at, std::int64_t second_label) {
    if (!pending_pps_ || pending_pps_->first != pps_at) return;
    if (locked_ && !confirmed_ && last_pps_true_ == pps_at) {
        label_ = second_label;
    } else {
        anchor_local_ = pending_pps_->second;
        label_ = second_label;
        last_pps_true_ = pps_at;
        locked_ = true;
        ++reloads_;
    }
    confirmed_ = true;
    pending_pps_.reset();
}

DisciplinedClock::Reading DisciplinedClock::read(TrueTime t) {
    const std::int64_t local = base_.read(t);
    if (!locked_) return {local, false};
    return {checked_add(checked_mul(label_, kNsPerSec), local - anchor_local_), true};
}

DisciplinedClock::Reading DisciplinedClock::read_noiseless(TrueTime t) const {
    const std::int64_t local = base_.local_at(t);
    if (!locked_) return {local, false};
    return {checked_add(checked_mul(label_, kNsPerSec), local - anchor_local_), true};
}

DisciplinedClock discipline(DisciplinedClock clock, TrueTime pps_at, const GprmcSentence& ngm, const SecondLabelEpoch& epoch) {
    clock.discipline(pps_at, epoch.to_label(ngm.date, ngm.time));
    return clock;
}

} // namespace hetsync
