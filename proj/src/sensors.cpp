#include "hetsync/sensors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hetsync {

std::int64_t grid_instant_ns(std::int64_t k, std::int64_t rate_hz) {
    return narrow_i128(ceil_div(static_cast<i128>(k) * kNsPerSec, rate_hz));
}

// ---------------------------------------------------------------------------

MotionProfile MotionProfile::multi_sine(std::uint64_t seed, int components, double f_lo, double f_hi, double peak) {
    RngStream rng(seed, "motion");
    MotionProfile m;
    for (auto& axis : m.axes) {
        for (int i = 0; i < components; ++i) {
            Sine s;
            s.amplitude = peak * (0.2 + 0.8 * rng.uniform01()) / components;
            s.freq_hz = f_lo + (f_hi - f_lo) * rng.uniform01();
            s.phase = 2.0 * std::numbers::pi * rng.uniform01();
            axis.push_back(s);
        }
    }
    return m;
}

std::array<double, 3> MotionProfile::omega(TrueTime t) const {
    std::array<double, 3> w{0.0, 0.0, 0.0};
    const double ts = t.seconds();
    for (std::size_t a = 0; a < 3; ++a)
        for (const auto& s : axes[a]) w[a] += s.amplitude * std::sin(2.0 * std::numbers::pi * s.freq_hz * ts + s.phase);
    return w;
}

double MotionProfile::magnitude(TrueTime t) const {
    const auto w = omega(t);
    return std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
}

// ---------------------------------------------------------------------------

std::string_view to_string(LidarScheme s) {
    switch (s) {
    case LidarScheme::Arrival: return "arrival";
    case LidarScheme::Internal: return "internal";
    case LidarScheme::PpsDisciplined: return "pps_disciplined";
    }
    return "unknown";
}

LidarScheme parse_lidar_scheme(std::string_view s) {
    if (s == "arrival") return LidarScheme::Arrival;
    if (s == "internal") return LidarScheme::Internal;
    if (s == "pps_disciplined") return LidarScheme::PpsDisciplined;
    throw std::invalid_argument("unknown LiDAR scheme '" + std::string(s) + "'");
}

void LidarConfig::validate() const {
    if (packet_period_ns <= 0) throw std::invalid_argument("lidar packet_period_ns must be positive");
    if (first_packet_ns < 0) throw std::invalid_argument("lidar first_packet_ns must be >= 0");
    if (!(spike.probability >= 0.0 && spike.probability <= 1.0)) throw std::invalid_argument("lidar spike probability must lie in [0, 1]");
    if (burst_gap_ns < 0) throw std::invalid_argument("lidar burst_gap_ns must be >= 0");
    if (internal_quantum_ns <= 0) throw std::invalid_argument("lidar internal_quantum_ns must be positive");
    internal_clock.validate();
    host_clock.validate();
    window.validate();
}

LidarModel::LidarModel(Engine& engine, const LidarConfig& cfg, std::uint64_t seed, std::set<LidarScheme> schemes,
                       const SecondLabelEpoch& epoch)
    : engine_(engine), cfg_(cfg), schemes_(std::move(schemes)), epoch_(epoch), internal_(cfg.internal_clock, seed, "lidar.internal"),
      host_(cfg.host_clock, seed, "lidar.host"), disciplined_(cfg.internal_clock, seed, "lidar.disciplined"),
      jitter_rng_(seed, "lidar.jitter"), spike_rng_(seed, "lidar.spike") {
    cfg_.validate();
}

void LidarModel::attach(Firmware& fw) {
    fw.on_pps_rising.push_back([this](TrueTime t) { on_pps(t); });
    fw.on_ngm_arrival.push_back([this](TrueTime t, const NgmEmission& e) { on_ngm(t, e.sentence); });
}

void LidarModel::on_pps(TrueTime t) {
    last_pps_ = t;
    last_pps_paired_ = false;
    disciplined_.on_pps(t);
}

void LidarModel::on_ngm(TrueTime arrival, const std::string& sentence) {
    GprmcSentence s;
    try {
        s = parse_gprmc(sentence);
    } catch (const NmeaError&) {
        ++rejected_ngm_;
        return;
    }
    if (!last_pps_) {
        ++rejected_ngm_;
        return;
    }
    const std::int64_t dt = arrival - *last_pps_;
    if (dt < cfg_.window.min_after_pps_ns || dt > cfg_.window.max_after_pps_ns) {
        ++rejected_ngm_;
        return;
    }
    if (last_pps_paired_) {
        ++duplicate_ngm_;
        return;
    }
    last_pps_paired_ = true;
    disciplined_.on_ngm(*last_pps_, epoch_.to_label(s.date, s.time));
}

std::int64_t LidarModel::quantize(std::int64_t v) const {
    return narrow_i128(floor_div(v, cfg_.internal_quantum_ns) * cfg_.internal_quantum_ns);
}

LidarModel::Stamped LidarModel::lidar_timestamp(LidarScheme scheme, const LidarPacket& p) {
    Stamped out;
    out.record.sensor_id = "lidar";
    out.record.seq = p.seq;
    out.record.scheme = std::string(to_string(scheme));
    out.record.true_ns = p.emitted.ns;
    switch (scheme) {
    case LidarScheme::Internal:
        out.record.timestamp_ns = quantize(internal_.read(p.emitted));
        break;
    case LidarScheme::PpsDisciplined: {
        const auto r = disciplined_.read(p.emitted);
        out.record.timestamp_ns = quantize(r.ns);
        out.unsynced = !r.synced;
        break;
    }
    case LidarScheme::Arrival: {
        double delay = std::max(0.0, jitter_rng_.draw(cfg_.arrival_jitter));
        if (cfg_.spike.probability > 0.0 && spike_rng_.uniform01() < cfg_.spike.probability) {
            delay += std::max(0.0, spike_rng_.draw(cfg_.spike.magnitude));
            ++spikes_;
        }
        TrueTime arrival = p.emitted + std::llround(delay);
        if (last_arrival_.ns >= 0 && arrival < last_arrival_ + cfg_.burst_gap_ns) arrival = last_arrival_ + cfg_.burst_gap_ns;
        last_arrival_ = arrival;
        out.record.timestamp_ns = host_.read(arrival);
        break;
    }
    }
    return out;
}

void LidarModel::emit(const LidarPacket& p) {
    for (LidarScheme s : schemes_) {
        Stamped st = lidar_timestamp(s, p);
        if (s == LidarScheme::Arrival) {
            // the host sees the packet only when it arrives
            const TrueTime at = TrueTime{std::max(engine_.now().ns, last_arrival_.ns)};
            engine_.schedule(at, EventKind::NetArrival,
                             [this, rec = std::move(st.record)](Engine&, const Event&) { records_.push_back(rec); });
        } else if (st.unsynced) {
            unsynced_.push_back(std::move(st.record));
        } else {
            records_.push_back(std::move(st.record));
        }
    }
}

void LidarModel::start(TrueTime t_end) {
    // one self-rescheduling chain of emission events
    auto step = std::make_shared<std::function<void(Engine&, const Event&)>>();
    auto seq = std::make_shared<std::int64_t>(0);
    *step = [this, step, seq, t_end](Engine& eng, const Event& ev) {
        emit({(*seq)++, ev.at});
        const TrueTime next = ev.at + cfg_.packet_period_ns;
        if (next <= t_end) eng.schedule(next, EventKind::LidarPacketEmit, *step);
    };
    const TrueTime first{cfg_.first_packet_ns};
    if (first <= t_end) engine_.schedule(first, EventKind::LidarPacketEmit, *step);
}

// ---------------------------------------------------------------------------

void ImuConfig::validate() const {
    if (sample_rate_hz <= 0) throw std::invalid_argument("imu sample_rate_hz must be positive");
    if (!(gyro_noise_sigma >= 0.0)) throw std::invalid_argument("imu gyro_noise_sigma must be >= 0");
    private_clock.validate();
}

namespace {

std::int64_t imu_local_target(const ImuConfig& cfg, const McuTimerConfig& timer, std::int64_t k) {
    if (cfg.driven_by_mcu_clock) {
        const auto& r = timer.tick_rate_hz;
        const std::int64_t ticks =
            narrow_i128(floor_div(static_cast<i128>(k) * r.num, static_cast<i128>(r.den) * cfg.sample_rate_hz));
        return tick_boundary_ns(timer, ticks);
    }
    return grid_instant_ns(k, cfg.sample_rate_hz);
}

} // namespace

std::vector<ImuTick> imu_stream(const ImuConfig& cfg, const McuTimerConfig& timer, const ClockState& mcu_clock, TrueTime t_end,
                                std::uint64_t seed) {
    cfg.validate();
    timer.validate();
    Oscillator mcu(mcu_clock, seed, "mcu.clock");
    Oscillator priv(cfg.private_clock, seed, "imu.private");
    Oscillator& driver = cfg.driven_by_mcu_clock ? mcu : priv;
    std::vector<ImuTick> out;
    for (std::int64_t k = 0;; ++k) {
        const TrueTime t = driver.when(imu_local_target(cfg, timer, k));
        if (t > t_end) break;
        driver.advance(t);
        if (&driver != &mcu) mcu.advance(t);
        const TickPosition pos = local_to_tick(timer, mcu.local_at(t));
        out.push_back({k, t, tick_to_ns(timer, pos)});
    }
    return out;
}

ImuModel::ImuModel(Engine& engine, const ImuConfig& cfg, std::uint64_t seed, Firmware& fw, const MotionProfile* motion)
    : engine_(engine), cfg_(cfg), fw_(fw), motion_(motion), private_osc_(cfg.private_clock, seed, "imu.private"),
      noise_rng_(seed, "imu.noise") {
    cfg_.validate();
}

void ImuModel::data_ready(TrueTime t) {
    ImuSample s;
    s.seq = seq_++;
    s.true_at = t;
    if (motion_) {
        const auto w = motion_->omega(t);
        for (double v : w) s.values.push_back(v + noise_rng_.normal(0.0, cfg_.gyro_noise_sigma));
    }
    fw_.on_interrupt(InterruptKind::ImuReady, t, std::move(s));
}

void ImuModel::start() {
    ClockDomain::Source src{EventKind::ImuDataReady,
                            [this]() -> std::optional<std::int64_t> { return imu_local_target(cfg_, fw_.config().timer, k_++); },
                            [this](Engine&, TrueTime t, std::int64_t) { data_ready(t); }};
    if (cfg_.driven_by_mcu_clock) {
        fw_.domain().add(std::move(src));
    } else {
        private_domain_.emplace(engine_, private_osc_);
        private_domain_->add(std::move(src));
    }
}

// ---------------------------------------------------------------------------

void DepthCamConfig::validate() const {
    if (grid_hz <= 0 || configured_fps <= 0) throw std::invalid_argument("depthcam grid_hz and configured_fps must be positive");
    if (grid_hz % configured_fps != 0) throw std::invalid_argument("depthcam grid_hz must be a multiple of configured_fps");
    internal_clock.validate();
}

DepthCamModel::DepthCamModel(Engine& engine, const DepthCamConfig& cfg, std::uint64_t seed)
    : engine_(engine), cfg_(cfg), osc_(cfg.internal_clock, seed, "depthcam.clock") {
    cfg_.validate();
}

void DepthCamModel::attach(Firmware& fw) {
    fw.on_trigger_pulse.push_back([this](std::int64_t index, TrueTime t) {
        if (auto e = expose_on_trigger(index, t)) {
            engine_.schedule(e->at, EventKind::ExposureStart);
        }
    });
}

std::optional<Exposure> DepthCamModel::expose_on_trigger(std::int64_t pulse_index, TrueTime pulse) {
    osc_.advance(pulse);
    const std::int64_t local = osc_.local_at(pulse);
    // smallest k with ceil(k * 1e9 / grid_hz) >= local
    const std::int64_t k = narrow_i128(floor_div((static_cast<i128>(local) - 1) * cfg_.grid_hz, kNsPerSec)) + 1;
    if (last_grid_k_ && k <= *last_grid_k_) {
        ++absorbed_;
        return std::nullopt;
    }
    last_grid_k_ = k;
    Exposure e;
    e.index = ++exposure_count_;
    e.device_ns = grid_instant_ns(k, cfg_.grid_hz);
    e.at = osc_.when(e.device_ns);
    e.pulse_index = pulse_index;
    const std::int64_t stride = cfg_.grid_hz / cfg_.configured_fps;
    if (e.index % stride == 0) {
        e.frame_seq = e.index / stride;
        e.frame_valid = !(cfg_.first_frame_invalid && *e.frame_seq == 1);
    }
    exposures_.push_back(e);
    return e;
}

std::vector<TimestampRecord> DepthCamModel::frame_records() const {
    std::vector<TimestampRecord> out;
    for (const auto& e : exposures_) {
        if (!e.frame_seq) continue;
        TimestampRecord r;
        r.sensor_id = "depthcam";
        r.seq = *e.frame_seq;
        r.scheme = "device";
        r.timestamp_ns = e.device_ns;
        r.true_ns = e.at.ns;
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------

void PhoneConfig::validate() const {
    if (cam_fps <= 0 || gyro_rate_hz <= 0) throw std::invalid_argument("phone rates must be positive");
    if (!(gyro_noise_sigma >= 0.0)) throw std::invalid_argument("phone gyro_noise_sigma must be >= 0");
    clock.validate();
}

PhoneModel::PhoneModel(Engine& engine, const PhoneConfig& cfg, std::uint64_t seed, const MotionProfile* motion)
    : engine_(engine), cfg_(cfg), motion_(motion), osc_(cfg.clock, seed, "phone.clock"), domain_(engine, osc_),
      noise_rng_(seed, "phone.noise"), net_rng_(seed, "phone.net") {
    cfg_.validate();
}

void PhoneModel::start() {
    // phone-local time starts wherever its offset puts it; the first sample is the first grid point at or after it
    const std::int64_t local0 = osc_.local_at(engine_.now());
    auto first_k = [local0](int rate) {
        return narrow_i128(floor_div((static_cast<i128>(local0) - 1) * rate, kNsPerSec)) + 1;
    };
    frame_k_ = first_k(cfg_.cam_fps);
    gyro_k_ = first_k(cfg_.gyro_rate_hz);

    domain_.add({EventKind::Custom, [this]() -> std::optional<std::int64_t> { return grid_instant_ns(frame_k_++, cfg_.cam_fps); },
                 [this](Engine&, TrueTime t, std::int64_t local) {
                     TimestampRecord r;
                     r.sensor_id = "phone_cam";
                     r.seq = static_cast<std::int64_t>(streams_.frames.size());
                     r.scheme = "phone";
                     r.timestamp_ns = local;
                     r.true_ns = t.ns;
                     streams_.frames.push_back(std::move(r));
                     streams_.frame_arrivals.push_back(t + std::max<std::int64_t>(0, std::llround(net_rng_.draw(cfg_.net_jitter))));
                 }});
    domain_.add({EventKind::Custom,
                 [this]() -> std::optional<std::int64_t> { return grid_instant_ns(gyro_k_++, cfg_.gyro_rate_hz); },
                 [this](Engine&, TrueTime t, std::int64_t local) {
                     TimestampRecord r;
                     r.sensor_id = "phone_gyro";
                     r.seq = static_cast<std::int64_t>(streams_.gyro.size());
                     r.scheme = "phone";
                     r.timestamp_ns = local;
                     r.true_ns = t.ns;
                     const auto w = motion_ ? motion_->omega(t) : std::array<double, 3>{0.0, 0.0, 0.0};
                     for (double v : w) r.values.push_back(v + noise_rng_.normal(0.0, cfg_.gyro_noise_sigma));
                     streams_.gyro.push_back(std::move(r));
                     streams_.gyro_arrivals.push_back(t + std::max<std::int64_t>(0, std::llround(net_rng_.draw(cfg_.net_jitter))));
                 }});
}

PhoneStreams phone_streams(const PhoneConfig& cfg, const MotionProfile& motion, TrueTime t_end, std::uint64_t seed) {
    Engine engine;
    PhoneModel phone(engine, cfg, seed, &motion);
    phone.start();
    engine.run_until(t_end);
    return phone.streams();
}

} // namespace hetsync
