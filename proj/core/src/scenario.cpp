#include "rtovc/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <string>

#include "rtovc/errors.hpp"

namespace rtovc {

const char* to_string(PulseShape s) noexcept {
    return s == PulseShape::Trapezoid ? "trapezoid" : "half_sine";
}

const char* to_string(ControllerKind k) noexcept { return k == ControllerKind::Rtovc ? "rtovc" : "pid"; }

const char* to_string(HydraulicModel m) noexcept {
    return m == HydraulicModel::Reduced ? "reduced" : "pressure";
}

double Pulse::value(double t) const noexcept {
    if (t < start || t > end || end <= start) return 0.0;
    if (shape == PulseShape::HalfSine) return amplitude * std::sin(kPi * (t - start) / (end - start));
    const double r = std::min(ramp, 0.5 * (end - start));
    if (r <= 0.0) return amplitude;
    return amplitude * std::min({1.0, (t - start) / r, (end - t) / r});
}

double ModelError::value(double t) const noexcept {
    return offset + amplitude * std::sin(2.0 * kPi * frequency * t);
}

double ModelError::bound() const noexcept { return std::abs(offset) + std::abs(amplitude); }

double DisturbanceSchedule::slip(double t) const noexcept {
    double s = 0.0;
    for (const Pulse& p : slip_events) s += p.value(t);
    return s;
}

double DisturbanceSchedule::torque(double t) const noexcept {
    double s = 0.0;
    for (const Pulse& p : wheel_torque) s += p.value(t);
    return s;
}

DisturbanceSchedule realise(const DisturbanceModel& d, std::uint64_t seed, std::size_t wheel) {
    DisturbanceSchedule out{d.wheel_torque, d.slip_events, d.model_error};
    const RandomSlip& r = d.random_slip;
    if (r.count <= 0) return out;
    std::mt19937_64 gen(seed ^ (0x9E3779B97F4A7C15ULL * (wheel + 1)));
    // Raw 53-bit draws keep the sequence identical across standard libraries.
    auto unit = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < r.count; ++i) {
        const double len = r.length_min + unit() * (r.length_max - r.length_min);
        const double span = std::max(0.0, r.window_end - r.window_start - len);
        Pulse p;
        p.start = r.window_start + unit() * span;
        p.end = p.start + len;
        p.amplitude = r.amplitude_min + unit() * (r.amplitude_max - r.amplitude_min);
        p.shape = unit() < 0.5 ? PulseShape::Trapezoid : PulseShape::HalfSine;
        p.ramp = 0.25 * len;
        out.slip_events.push_back(p);
    }
    return out;
}

double ReferenceProfile::value(double t) const noexcept {
    if (knots.empty()) return 0.0;
    if (t <= knots.front().t) return knots.front().v;
    if (t >= knots.back().t) return knots.back().v;
    auto it = std::upper_bound(knots.begin(), knots.end(), t,
                               [](double x, const Knot& k) { return x < k.t; });
    const Knot& b = *it;
    const Knot& a = *(it - 1);
    return a.v + (b.v - a.v) * (t - a.t) / (b.t - a.t);
}

double ReferenceProfile::slope(double t) const noexcept {
    if (knots.size() < 2 || t < knots.front().t || t >= knots.back().t) return 0.0;
    auto it = std::upper_bound(knots.begin(), knots.end(), t,
                               [](double x, const Knot& k) { return x < k.t; });
    const Knot& b = *it;
    const Knot& a = *(it - 1);
    return (b.v - a.v) / (b.t - a.t);
}

double ReferenceProfile::max_abs() const noexcept {
    double m = 0.0;
    for (const Knot& k : knots) m = std::max(m, std::abs(k.v));
    return m;
}

std::size_t ScenarioConfig::step_count() const {
    return static_cast<std::size_t>(std::llround(duration / dt));
}

WheelParams ScenarioConfig::nominal_params(std::size_t wheel) const {
    WheelParams p = wheels.at(wheel).plant;
    p.damping *= 1.0 + nominal_mismatch;
    p.coulomb_friction *= 1.0 + nominal_mismatch;
    p.normal_force *= 1.0 + nominal_mismatch;
    return p;
}

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

void validate_pulses(const std::vector<Pulse>& pulses, const std::string& where) {
    for (const Pulse& p : pulses) {
        require(std::isfinite(p.start) && std::isfinite(p.end) && std::isfinite(p.amplitude) &&
                    std::isfinite(p.ramp),
                where + ": pulse fields must be finite");
        require(p.end > p.start, where + ": pulse end must follow its start");
        require(p.ramp >= 0, where + ": pulse ramp must be non-negative");
    }
}

}  // namespace

void ScenarioConfig::validate() const {
    require(!name.empty() && std::all_of(name.begin(), name.end(), [](char ch) {
                return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.';
            }),
            "name must be non-empty and use only letters, digits, '_', '-' or '.'");
    require(std::isfinite(duration) && duration > 0, "duration must be positive");
    require(std::isfinite(dt) && dt > 0 && dt <= 1e-3, "dt must lie in (0, 1e-3]");
    const double steps = duration / dt;
    require(std::abs(steps - std::round(steps)) <= 1e-6, "dt must divide the duration");
    require(plant_substeps >= 1, "plant_substeps must be at least 1");
    require(metrics_start >= 0 && metrics_start < duration, "metrics_start must lie in [0, duration)");

    gains.validate();
    gains.validate_step(dt);
    bounds.validate();
    require(adaptive_init.psi1_hat > 0 && adaptive_init.psi2_hat > 0,
            "initial adaptive parameters must be positive");
    require(valve_polarity == 1.0 || valve_polarity == -1.0, "valve_polarity must be +1 or -1");
    require(pid.kp >= 0 && pid.ki >= 0 && pid.kd >= 0 && pid.integral_clamp >= 0,
            "PID gains and clamp must be non-negative");
    require(nominal_mismatch > -1 && nominal_mismatch < 1, "nominal_mismatch must lie in (-1, 1)");
    require(std::isfinite(coupling.gain), "coupling gain must be finite");
    require(analysis.rho1 > 0 && analysis.rho2 > 0 && analysis.rho3 > 0 && analysis.rho4 > 0,
            "analysis rho constants must be positive");
    require(analysis.lower_bound_fraction > 0 && analysis.lower_bound_fraction <= 1,
            "analysis lower_bound_fraction must lie in (0, 1]");

    require(!reference.knots.empty(), "reference profile needs at least one knot");
    for (std::size_t i = 0; i < reference.knots.size(); ++i) {
        const Knot& k = reference.knots[i];
        require(std::isfinite(k.t) && std::isfinite(k.v), "reference knots must be finite");
        if (i > 0) require(k.t > reference.knots[i - 1].t, "reference knot times must increase");
        require(std::abs(k.v) <= bounds.v_max, "reference velocity exceeds v_max");
    }

    bool any = false;
    for (std::size_t w = 0; w < kWheelCount; ++w) {
        const WheelConfig& wc = wheels[w];
        const std::string name = std::string("wheel ") + kWheelNames[w];
        if (!wc.enabled) continue;
        any = true;
        wc.plant.validate();
        wc.hydraulics.validate();
        gains.validate_dominance(nominal_params(w).inertia / nominal_params(w).radius);
        require(std::isfinite(wc.initial_velocity) && std::abs(wc.initial_velocity) < bounds.eps1,
                name + ": initial velocity must lie inside eps1");
        require(std::isfinite(wc.static_load) && wc.static_load >= 0,
                name + ": static load must be non-negative");
        validate_pulses(wc.disturbance.slip_events, name);
        validate_pulses(wc.disturbance.wheel_torque, name);
        const RandomSlip& r = wc.disturbance.random_slip;
        require(r.count >= 0, name + ": random slip count must be non-negative");
        if (r.count > 0) {
            require(r.window_end > r.window_start, name + ": random slip window is empty");
            require(r.amplitude_min <= r.amplitude_max, name + ": random slip amplitude range inverted");
            require(r.length_min > 0 && r.length_min <= r.length_max,
                    name + ": random slip length range invalid");
        }
        const ModelError& m = wc.disturbance.model_error;
        require(std::isfinite(m.offset) && std::isfinite(m.amplitude) && std::isfinite(m.frequency) &&
                    m.frequency >= 0,
                name + ": model error must be finite with non-negative frequency");
    }
    require(any, "at least one wheel must be enabled");
}

}  // namespace rtovc
