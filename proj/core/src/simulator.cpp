#include "rtovc/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cmath>
#include <exception>
#include <functional>
#include <stdexcept>
#include <thread>
#include <variant>

#include "rtovc/errors.hpp"

namespace rtovc {

PidOutput pid_controller(const PidGains& pid, const SafetyBounds& bounds, double v_e, double dt,
                         PidState& s) {
    s.integral += v_e * dt;
    if (pid.ki > 0) {
        const double limit = pid.integral_clamp / pid.ki;
        s.integral = std::clamp(s.integral, -limit, limit);
    }
    const double derivative = s.primed ? (v_e - s.previous_error) / dt : 0.0;
    s.previous_error = v_e;
    s.primed = true;
    const double u = -(pid.kp * v_e + pid.ki * s.integral + pid.kd * derivative);
    return {u, std::clamp(u, bounds.u_lo, bounds.u_hi)};
}

DisturbanceSample WheelPlant::disturbance(double t, double load_shift) const noexcept {
    DisturbanceSample d;
    d.wheel_torque = schedule.torque(t);
    d.slip_rate = schedule.slip(t);
    d.model_error = schedule.model_error.value(t);
    d.normal_force_shift = load_shift;
    return d;
}

VehicleModel build_vehicle(const ScenarioConfig& cfg) {
    VehicleModel m;
    for (std::size_t w = 0; w < kWheelCount; ++w) {
        const WheelConfig& wc = cfg.wheels[w];
        m.enabled[w] = wc.enabled;
        m.wheels[w].params = wc.plant;
        m.wheels[w].hydraulics = wc.hydraulics;
        m.wheels[w].model = cfg.hydraulic_model;
        m.wheels[w].schedule = realise(wc.disturbance, cfg.seed, w);
    }
    return m;
}

std::array<double, 2> plant_derivative(const WheelPlant& p, const std::array<double, 2>& x,
                                       double spool, double t, double load_shift, int* clamps) {
    const HydraulicParams& h = p.hydraulics;
    const bool reduced = p.model == HydraulicModel::Reduced;
    const double tau_m = reduced ? x[1] : motor_torque_from_pressure(h, x[1]);
    const double delta_p = reduced ? pressure_from_motor_torque(h, x[1]) : x[1];
    const WheelState ws{x[0]};
    const double acc =
        wheel_acceleration(p.params, ws, p.params.gear_ratio * tau_m, p.disturbance(t, load_shift));
    const double omega_m = p.params.gear_ratio * x[0];

    double hyd;
    Clamped b{};
    if (reduced) {
        b = pressure_factor(h, delta_p, signum(spool));
        hyd = h.coeff_a() * b.value * spool - h.coeff_c() * omega_m - h.leakage_rate() * tau_m;
    } else {
        b = valve_flow_clamped(h, spool, delta_p);
        hyd = pressure_rate(h, b.value - leakage_flow(h, delta_p), omega_m);
    }
    if (b.clamped && clamps) ++*clamps;
    if (!std::isfinite(hyd)) throw PlantFault("non-finite hydraulic rate");
    return {acc / p.params.radius, hyd};
}

WheelPlantState integrate_wheel(const WheelPlant& p, const WheelPlantState& s, double spool,
                                double load_shift, double t, double dt, int* clamps) {
    const bool reduced = p.model == HydraulicModel::Reduced;
    const std::array<double, 2> x{s.omega_w, reduced ? s.tau_m : s.delta_p};
    auto f = [&](const std::array<double, 2>& y, double tt) {
        return plant_derivative(p, y, spool, tt, load_shift, clamps);
    };
    auto axpy = [](const std::array<double, 2>& y, double a, const std::array<double, 2>& k) {
        return std::array<double, 2>{y[0] + a * k[0], y[1] + a * k[1]};
    };
    const auto k1 = f(x, t);
    const auto k2 = f(axpy(x, 0.5 * dt, k1), t + 0.5 * dt);
    const auto k3 = f(axpy(x, 0.5 * dt, k2), t + 0.5 * dt);
    const auto k4 = f(axpy(x, dt, k3), t + dt);
    std::array<double, 2> y;
    for (int i = 0; i < 2; ++i) y[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!std::isfinite(y[0]) || !std::isfinite(y[1])) throw PlantFault("non-finite plant state");

    WheelPlantState out;
    out.omega_w = y[0];
    if (reduced) {
        out.tau_m = y[1];
        out.delta_p = pressure_from_motor_torque(p.hydraulics, y[1]);
    } else {
        out.delta_p = y[1];
        out.tau_m = motor_torque_from_pressure(p.hydraulics, y[1]);
    }
    return out;
}

VehicleState integrate_step(const VehicleModel& model, const VehicleState& s,
                            const std::array<double, kWheelCount>& spool,
                            const std::array<double, kWheelCount>& load_shift, double t, double dt) {
    if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
    VehicleState out = s;
    for (std::size_t w = 0; w < kWheelCount; ++w)
        if (model.enabled[w])
            out.wheels[w] = integrate_wheel(model.wheels[w], s.wheels[w], spool[w], load_shift[w], t, dt);
    return out;
}

std::vector<double> SimTrace::series(std::uint32_t wheel, double TraceRow::*field) const {
    std::vector<double> out;
    out.reserve(rows.size() / std::max<std::size_t>(1, wheels.size()));
    for (const TraceRow& r : rows)
        if (r.wheel == wheel) out.push_back(r.*field);
    return out;
}

namespace {

struct PidUnit {
    PidGains gains;
    SafetyBounds bounds;
    PidState state;
    BarrierStatus status;
};

class WheelRunner {
public:
    WheelRunner(const ScenarioConfig& cfg, const VehicleModel& model, std::uint32_t index)
        : cfg_(cfg), model_(model), index_(index), plant_(model.wheels[index]),
          nominal_(cfg.nominal_params(index)) {
        state_.omega_w = cfg.wheels[index].initial_velocity / plant_.params.radius;
        const ControllerConstants constants{nominal_.radius, nominal_.gear_ratio};
        if (cfg.controller == ControllerKind::Rtovc)
            controller_.emplace<RtovcController>(cfg.gains, cfg.bounds, constants, cfg.adaptive_init);
        else
            controller_.emplace<PidUnit>(PidUnit{cfg.pid, cfg.bounds, {}, {}});
        summary_.wheel = index;
    }

    // Control pass for step k; fills the trace row and the spool command.
    void control(std::size_t k, TraceRow& row) {
        const double dt = cfg_.dt;
        const double t = static_cast<double>(k) * dt;
        const double v_w = plant_.params.radius * state_.omega_w;
        const double v_d = cfg_.reference.value(t);
        const double omega_meas = v_w / nominal_.radius;
        const double g1_nom = known_term_g1(nominal_, WheelState{omega_meas});
        shift_ = load_shift(k);

        row = TraceRow{};
        row.t = t;
        row.wheel = index_;
        row.v_d = v_d;
        row.v_w = v_w;
        row.omega_w = state_.omega_w;
        row.tau_m = state_.tau_m;
        row.delta_p = state_.delta_p;
        row.g1_nominal = g1_nom;

        BarrierStatus status;
        if (auto* rtovc = std::get_if<RtovcController>(&controller_)) {
            const ControlOutput o = rtovc->step(v_w, v_d, g1_nom, dt);
            row.v_e = o.v_e;
            row.tau_w_hat = o.tau_w_hat;
            row.tau_m_hat = o.tau_m_hat;
            row.beta1 = o.beta1;
            row.beta2 = o.beta2;
            row.u_raw = o.u_raw;
            row.u_sat = o.u_sat;
            row.lambda1 = o.lambda1;
            row.lambda2 = o.lambda2;
            row.psi1_hat = rtovc->adaptive().psi1_hat;
            row.psi2_hat = rtovc->adaptive().psi2_hat;
            spool_ = cfg_.valve_polarity * o.u_sat;
            status = rtovc->status();
        } else {
            PidUnit& pid = std::get<PidUnit>(controller_);
            const double v_e = v_w - v_d;
            row.v_e = v_e;
            if (!pid.status.tripped()) {
                const SafetyBounds& b = pid.bounds;
                if (!(std::abs(v_w) < b.guard_fraction * b.eps1))
                    pid.status = {BarrierState::Tripped, BarrierCause::VelocityBound, std::abs(v_w) / b.eps1};
                else if (!(std::abs(v_e) < b.guard_fraction * b.alpha1))
                    pid.status = {BarrierState::Tripped, BarrierCause::TrackingError, std::abs(v_e) / b.alpha1};
            }
            if (pid.status.tripped()) {
                row.u_raw = row.u_sat = 0.0;
            } else {
                const PidOutput o = pid_controller(pid.gains, pid.bounds, v_e, dt, pid.state);
                const Saturation s = saturate(o.u_raw, pid.bounds.u_hi, pid.bounds.u_lo);
                row.u_raw = o.u_raw;
                row.u_sat = s.u_sat;
                row.lambda1 = s.lambda1;
                row.lambda2 = s.lambda2;
            }
            spool_ = row.u_sat;
            status = pid.status;
        }
        row.spool = spool_;
        row.status = status.tripped() ? 1u : 0u;
        row.cause = static_cast<std::uint32_t>(status.cause);

        const DisturbanceSample d = plant_.disturbance(t, shift_);
        const WheelParams& p = plant_.params;
        const double shift_term = p.control_gain() * (-p.radius * d.normal_force_shift);
        row.disturbance = lumped_disturbance(p, d) + shift_term;
        row.f1_star = known_term_g1(p, WheelState{state_.omega_w}) + shift_term +
                      lumped_disturbance(p, d) - g1_nom - cfg_.reference.slope(t);
        const HydraulicParams& h = plant_.hydraulics;
        row.a2 = h.coeff_a() * pressure_factor(h, state_.delta_p, signum(spool_)).value * row.lambda1;

        tripped_now_ = status.tripped() && !summary_.status.tripped();
        summary_.status = status;
        if (t >= cfg_.metrics_start) {
            sum_sq_ += row.v_e * row.v_e;
            ++count_;
        }
        if (!status.tripped()) {
            summary_.max_abs_v_e = std::max(summary_.max_abs_v_e, std::abs(row.v_e));
            summary_.max_abs_v_w = std::max(summary_.max_abs_v_w, std::abs(v_w));
            summary_.max_abs_u_sat = std::max(summary_.max_abs_u_sat, std::abs(row.u_sat));
            summary_.peak_tau_m_hat = std::max(summary_.peak_tau_m_hat, std::abs(row.tau_m_hat));
        }
        summary_.peak_tau_m = std::max(summary_.peak_tau_m, std::abs(state_.tau_m));
    }

    void advance(std::size_t k, std::uint32_t& clamps) {
        const int n = cfg_.plant_substeps;
        const double h = cfg_.dt / n;
        const double t0 = static_cast<double>(k) * cfg_.dt;
        int c = 0;
        for (int i = 0; i < n; ++i)
            state_ = integrate_wheel(plant_, state_, spool_, shift_, t0 + i * h, h, &c);
        clamps = static_cast<std::uint32_t>(c);
    }

    bool tripped_now() const noexcept { return tripped_now_; }
    bool tripped() const noexcept { return summary_.status.tripped(); }

    WheelSummary summary() const {
        WheelSummary s = summary_;
        s.rms_error = count_ ? std::sqrt(sum_sq_ / static_cast<double>(count_)) : 0.0;
        return s;
    }

private:
    double load_shift(std::size_t k) const {
        if (!cfg_.coupling.enabled || k == 0) return 0.0;
        const double tp = static_cast<double>(k - 1) * cfg_.dt;
        double sum = 0.0;
        int n = 0;
        for (std::size_t w = 0; w < kWheelCount; ++w) {
            if (!model_.enabled[w]) continue;
            sum += model_.wheels[w].schedule.slip(tp);
            ++n;
        }
        return cfg_.coupling.gain * (model_.wheels[index_].schedule.slip(tp) - sum / n);
    }

    const ScenarioConfig& cfg_;
    const VehicleModel& model_;
    std::uint32_t index_;
    const WheelPlant& plant_;
    WheelParams nominal_;
    WheelPlantState state_;
    std::variant<std::monostate, RtovcController, PidUnit> controller_;
    double spool_ = 0.0;
    double shift_ = 0.0;
    bool tripped_now_ = false;
    double sum_sq_ = 0.0;
    std::size_t count_ = 0;
    WheelSummary summary_;
};

// Shared per-step bookkeeping; runs on a single thread between the control and advance phases.
struct StepLedger {
    const ScenarioConfig& cfg;
    std::size_t stride;
    std::size_t steps;
    std::vector<TraceRow> current;
    std::vector<TraceRow>& rows;
    RunSummary& summary;
    std::vector<WheelRunner>& runners;
    std::size_t k = 0;
    bool stop = false;

    void commit() {
        bool any_trip = false;
        for (std::size_t i = 0; i < runners.size(); ++i) {
            if (runners[i].tripped_now()) {
                if (!summary.tripped) {
                    summary.tripped = true;
                    summary.trip_time = current[i].t;
                    summary.trip_wheel = current[i].wheel;
                    summary.trip_cause = static_cast<BarrierCause>(current[i].cause);
                }
                any_trip = true;
            }
        }
        if (k % stride == 0 || any_trip)
            rows.insert(rows.end(), current.begin(), current.end());
        summary.steps = k + 1;
        if (any_trip && cfg.stop_on_trip) stop = true;
    }
};

}  // namespace

SimResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
    cfg.validate();
    if (options.record_stride == 0) throw std::invalid_argument("record stride must be positive");
    const VehicleModel model = build_vehicle(cfg);
    const std::size_t steps = cfg.step_count();

    SimResult result;
    SimTrace& trace = result.trace;
    trace.stride = options.record_stride;
    trace.dt = cfg.dt;
    std::vector<WheelRunner> runners;
    for (std::uint32_t w = 0; w < kWheelCount; ++w) {
        if (!model.enabled[w]) continue;
        trace.wheels.push_back(w);
        runners.emplace_back(cfg, model, w);
    }
    const std::size_t nw = runners.size();
    trace.rows.reserve((steps / options.record_stride + 2) * nw);
    StepLedger ledger{cfg, options.record_stride, steps, std::vector<TraceRow>(nw), trace.rows,
                      result.summary, runners};
    std::vector<std::uint32_t> clamps(nw, 0);

    if (!options.parallel || nw == 1) {
        for (std::size_t k = 0; k < steps; ++k) {
            ledger.k = k;
            for (std::size_t i = 0; i < nw; ++i) {
                runners[i].control(k, ledger.current[i]);
                ledger.current[i].pressure_clamps = clamps[i];
            }
            ledger.commit();
            if (ledger.stop) break;
            for (std::size_t i = 0; i < nw; ++i) runners[i].advance(k, clamps[i]);
        }
    } else {
        std::vector<std::exception_ptr> errors(nw);
        std::atomic<bool> failed{false};
        bool stop = false;
        std::size_t k_shared = 0;
        bool control_phase = true;
        auto on_phase = [&]() noexcept {
            const bool commit = control_phase;
            control_phase = !control_phase;
            if (failed.load()) {
                stop = true;
                return;
            }
            if (!commit) return;
            ledger.k = k_shared;
            ledger.commit();
            stop = ledger.stop;
        };
        std::barrier sync(static_cast<std::ptrdiff_t>(nw), on_phase);
        auto worker = [&](std::size_t i) {
            for (std::size_t k = 0; k < steps; ++k) {
                if (i == 0) k_shared = k;
                try {
                    if (!failed.load()) {
                        runners[i].control(k, ledger.current[i]);
                        ledger.current[i].pressure_clamps = clamps[i];
                    }
                } catch (...) {
                    errors[i] = std::current_exception();
                    failed.store(true);
                }
                sync.arrive_and_wait();
                if (stop) break;
                try {
                    runners[i].advance(k, clamps[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                    failed.store(true);
                }
                sync.arrive_and_wait();
                if (stop) break;
            }
        };
        {
            std::vector<std::jthread> threads;
            for (std::size_t i = 0; i < nw; ++i) threads.emplace_back(worker, i);
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    for (const WheelRunner& r : runners) result.summary.wheels.push_back(r.summary());
    return result;
}

namespace {

ScenarioConfig plant_side(ScenarioConfig c) {
    const ScenarioConfig defaults;
    c.name = defaults.name;
    c.controller = defaults.controller;
    c.gains = defaults.gains;
    c.adaptive_init = defaults.adaptive_init;
    c.valve_polarity = defaults.valve_polarity;
    c.pid = defaults.pid;
    return c;
}

}  // namespace

Comparison compare_controllers(const ScenarioConfig& a, const ScenarioConfig& b,
                               const RunOptions& options) {
    if (!(plant_side(a) == plant_side(b)))
        throw ConfigError("compared scenarios must share plant, disturbance and reference settings");
    const SimResult ra = run_scenario(a, options);
    const SimResult rb = run_scenario(b, options);
    Comparison c;
    c.labels = {a.name + " (" + to_string(a.controller) + ")",
                b.name + " (" + to_string(b.controller) + ")"};
    for (std::size_t i = 0; i < ra.summary.wheels.size(); ++i) {
        const WheelSummary& x = ra.summary.wheels[i];
        const WheelSummary& y = rb.summary.wheels[i];
        c.rows.push_back({x.wheel,
                          {x.rms_error, y.rms_error},
                          {x.peak_tau_m, y.peak_tau_m},
                          {x.status.tripped(), y.status.tripped()}});
    }
    return c;
}

}  // namespace rtovc
