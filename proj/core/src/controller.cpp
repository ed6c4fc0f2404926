#include "rtovc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rtovc {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace

void Gains::validate() const {
    const double ks[] = {k1, k2, k3, k4, k5, k6, k7, k8, k9};
    for (int i = 0; i < 9; ++i)
        require(std::isfinite(ks[i]) && ks[i] > 0, "gain k" + std::to_string(i + 1) + " must be positive");
}

void Gains::validate_dominance(double inertia_over_radius) const {
    require(k5 >= inertia_over_radius,
            "k5 = " + std::to_string(k5) + " must be at least J_w/r = " +
                std::to_string(inertia_over_radius));
}

void Gains::validate_step(double dt) const {
    require(dt * k3 * k4 < 1.0, "dt*k3*k4 must be below 1");
    require(dt * k8 * k9 < 1.0, "dt*k8*k9 must be below 1");
}

void SafetyBounds::validate() const {
    require(std::isfinite(eps1) && std::isfinite(v_max) && std::isfinite(alpha1) &&
                std::isfinite(tau_max) && std::isfinite(u_hi) && std::isfinite(u_lo),
            "safety bounds must be finite");
    require(v_max > 0 && v_max < eps1, "v_max must lie in (0, eps1)");
    require(std::abs(alpha1 - (eps1 - v_max)) <= 1e-12 * eps1, "alpha1 must equal eps1 - v_max");
    require(tau_max > 0, "tau_max must be positive");
    require(u_lo < 0 && u_hi > 0, "valve bounds must satisfy u_lo < 0 < u_hi");
    require(guard_fraction > 0 && guard_fraction <= 1, "guard fraction must lie in (0, 1]");
}

TrackingError tracking_error(double v_w, double v_d, double radius) {
    const double v_e = v_w - v_d;
    return {v_e, v_e / radius};
}

double beta1(double v_e, double alpha1, double guard_fraction) {
    if (!(std::abs(v_e) < guard_fraction * alpha1))
        throw BarrierViolation(BarrierCause::TrackingError, std::abs(v_e) / alpha1);
    return v_e / (alpha1 * alpha1 - v_e * v_e);
}

double adapt1_rate(const Gains& g, double psi1_hat, double b1) {
    return -g.k3 * g.k4 * psi1_hat + 0.5 * g.k2 * g.k3 * b1 * b1;
}

double required_wheel_torque(const Gains& g, double v_e, double psi1_hat, double b1, double g1) {
    return -0.5 * (g.k1 * v_e + g.k2 * psi1_hat * b1) - g.k5 * b1 * g1 * g1;
}

double required_motor_torque(double tau_w_hat, double gear_ratio) { return tau_w_hat / gear_ratio; }

double beta2(double tau_m_hat, double tau_max, double guard_fraction) {
    if (!(std::abs(tau_m_hat) < guard_fraction * tau_max))
        throw BarrierViolation(BarrierCause::TorqueBound, std::abs(tau_m_hat) / tau_max);
    return tau_m_hat / (tau_max * tau_max - tau_m_hat * tau_m_hat);
}

double adapt2_rate(const Gains& g, double psi2_hat, double b2) {
    return -g.k8 * g.k9 * psi2_hat + 0.5 * g.k7 * g.k8 * b2 * b2;
}

double valve_signal(const Gains& g, double tau_m_hat, double psi2_hat, double b2) {
    return -0.5 * (g.k6 * tau_m_hat + g.k7 * psi2_hat * b2);
}

Saturation saturate(double u_raw, double u_hi, double u_lo) {
    if (u_raw >= u_hi) {
        const double l1 = 1.0 / (std::abs(u_raw) + 1.0);
        return {u_hi, l1, u_hi - u_raw * l1};
    }
    if (u_raw <= u_lo) {
        const double l1 = 1.0 / (std::abs(u_raw) + 1.0);
        return {u_lo, l1, u_lo - u_raw * l1};
    }
    return {u_raw, 1.0, 0.0};
}

StepResult step_controller(const Gains& g, const SafetyBounds& b, const ControllerConstants& c,
                           const AdaptiveState& adaptive, double v_w, double v_d,
                           double g1_nominal, double dt) {
    if (!(dt > 0)) throw std::invalid_argument("controller step needs dt > 0");
    if (!(adaptive.psi1_hat > 0 && adaptive.psi2_hat > 0))
        throw std::logic_error("adaptive parameters lost positivity");

    StepResult r;
    r.adaptive = adaptive;
    ControlOutput& o = r.output;
    const TrackingError e = tracking_error(v_w, v_d, c.radius);
    o.v_e = e.v_e;
    o.omega_e = e.omega_e;
    o.margins.tracking = 1.0 - std::abs(e.v_e) / b.alpha1;
    o.margins.velocity = 1.0 - std::abs(v_w) / b.eps1;

    try {
        if (!(std::abs(v_w) < b.guard_fraction * b.eps1))
            throw BarrierViolation(BarrierCause::VelocityBound, std::abs(v_w) / b.eps1);
        o.beta1 = beta1(e.v_e, b.alpha1, b.guard_fraction);
        r.adaptive.psi1_hat += dt * adapt1_rate(g, adaptive.psi1_hat, o.beta1);
        o.tau_w_hat = required_wheel_torque(g, e.v_e, r.adaptive.psi1_hat, o.beta1, g1_nominal);
        o.tau_m_hat = required_motor_torque(o.tau_w_hat, c.gear_ratio);
        o.margins.torque = 1.0 - std::abs(o.tau_m_hat) / b.tau_max;
        o.beta2 = beta2(o.tau_m_hat, b.tau_max, b.guard_fraction);
        r.adaptive.psi2_hat += dt * adapt2_rate(g, adaptive.psi2_hat, o.beta2);
        o.u_raw = valve_signal(g, o.tau_m_hat, r.adaptive.psi2_hat, o.beta2);
        const Saturation s = saturate(o.u_raw, b.u_hi, b.u_lo);
        o.u_sat = s.u_sat;
        o.lambda1 = s.lambda1;
        o.lambda2 = s.lambda2;
    } catch (const BarrierViolation& v) {
        r.adaptive = adaptive;
        o.beta1 = o.beta2 = 0.0;
        o.u_raw = o.u_sat = 0.0;
        o.lambda1 = 1.0;
        o.lambda2 = 0.0;
        r.status = {BarrierState::Tripped, v.cause(), v.ratio()};
        return r;
    }
    if (!(r.adaptive.psi1_hat > 0 && r.adaptive.psi2_hat > 0))
        throw std::logic_error("adaptive parameters lost positivity");
    return r;
}

RtovcController::RtovcController(Gains gains, SafetyBounds bounds, ControllerConstants constants,
                                 AdaptiveState initial)
    : gains_(gains), bounds_(bounds), constants_(constants), initial_(initial), adaptive_(initial) {
    gains_.validate();
    bounds_.validate();
    if (!(initial_.psi1_hat > 0 && initial_.psi2_hat > 0))
        throw ConfigError("initial adaptive parameters must be positive");
}

ControlOutput RtovcController::step(double v_w, double v_d, double g1_nominal, double dt) {
    if (status_.tripped()) {
        ControlOutput o;
        const TrackingError e = tracking_error(v_w, v_d, constants_.radius);
        o.v_e = e.v_e;
        o.omega_e = e.omega_e;
        o.margins.tracking = 1.0 - std::abs(e.v_e) / bounds_.alpha1;
        o.margins.velocity = 1.0 - std::abs(v_w) / bounds_.eps1;
        return o;
    }
    StepResult r = step_controller(gains_, bounds_, constants_, adaptive_, v_w, v_d, g1_nominal, dt);
    adaptive_ = r.adaptive;
    status_ = r.status;
    return r.output;
}

void RtovcController::reset() {
    adaptive_ = initial_;
    status_ = {};
}

}  // namespace rtovc
