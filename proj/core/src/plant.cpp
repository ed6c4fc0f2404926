#include "rtovc/plant.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rtovc/errors.hpp"

namespace rtovc {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
}

bool finite_all(std::initializer_list<double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

void WheelParams::validate() const {
    require(finite_all({radius, inertia, damping, coulomb_friction, normal_force, gear_ratio,
                        friction_smoothing}),
            "wheel parameters must be finite");
    require(radius > 0, "wheel radius must be positive");
    require(inertia > 0, "wheel inertia must be positive");
    require(gear_ratio > 0, "gear ratio must be positive");
    require(damping >= 0, "wheel damping must be non-negative");
    require(coulomb_friction >= 0, "coulomb friction must be non-negative");
    require(normal_force >= 0, "normal force must be non-negative");
    require(friction_smoothing > 0, "friction smoothing must be positive");
}

double lumped_disturbance(const WheelParams& p, const DisturbanceSample& d) noexcept {
    return p.control_gain() * d.wheel_torque - d.slip_rate + d.model_error;
}

double smoothed_friction(const WheelParams& p, double omega_w) noexcept {
    return p.coulomb_friction * std::tanh(omega_w / p.friction_smoothing);
}

double known_term_g1(const WheelParams& p, const WheelState& s) noexcept {
    return p.control_gain() *
           (-p.radius * p.normal_force - p.damping * s.omega_w - smoothed_friction(p, s.omega_w));
}

double wheel_acceleration(const WheelParams& p, const WheelState& s, double tau_w,
                          const DisturbanceSample& d) {
    if (!finite_all({s.omega_w, tau_w, d.wheel_torque, d.slip_rate, d.model_error,
                     d.normal_force_shift}))
        throw PlantFault("non-finite input to wheel dynamics");
    const double shift = p.control_gain() * (-p.radius * d.normal_force_shift);
    const double acc = p.control_gain() * tau_w + known_term_g1(p, s) + shift +
                       lumped_disturbance(p, d);
    if (!std::isfinite(acc)) throw PlantFault("non-finite wheel acceleration");
    return acc;
}

double HydraulicParams::coeff_a() const noexcept {
    return bulk_modulus * eta_hm * flow_coefficient / (2.0 * kPi);
}

double HydraulicParams::coeff_c() const noexcept {
    return bulk_modulus * eta_hm * displacement * eta_vol / (2.0 * kPi * kPi);
}

double HydraulicParams::leakage_rate() const noexcept {
    return bulk_modulus * leakage / displacement;
}

double HydraulicParams::torque_per_pressure() const noexcept {
    return displacement * eta_hm / (2.0 * kPi);
}

void HydraulicParams::validate() const {
    require(finite_all({displacement, bulk_modulus, eta_hm, eta_vol, flow_coefficient,
                        supply_pressure, tank_pressure, guard_offset, leakage}),
            "hydraulic parameters must be finite");
    require(displacement > 0, "motor displacement must be positive");
    require(bulk_modulus > 0, "bulk modulus must be positive");
    require(eta_hm > 0 && eta_hm <= 1, "eta_hm must lie in (0, 1]");
    require(eta_vol > 0 && eta_vol <= 1, "eta_vol must lie in (0, 1]");
    require(flow_coefficient > 0, "valve flow coefficient must be positive");
    require(tank_pressure >= 0, "tank pressure must be non-negative");
    require(supply_pressure > tank_pressure, "supply pressure must exceed tank pressure");
    require(guard_offset > 0, "guard offset must be positive");
    require(leakage >= 0, "leakage must be non-negative");
}

int signum(double x) noexcept { return (x > 0) - (x < 0); }

double motor_torque_from_pressure(const HydraulicParams& h, double delta_p) noexcept {
    return delta_p * h.torque_per_pressure();
}

double pressure_from_motor_torque(const HydraulicParams& h, double tau_m) noexcept {
    return tau_m / h.torque_per_pressure();
}

double flow_radicand(const HydraulicParams& h, double delta_p, int spool_sign) noexcept {
    return 2.0 * (h.supply_pressure - spool_sign * delta_p + h.guard_offset);
}

Clamped pressure_factor(const HydraulicParams& h, double delta_p, int spool_sign) {
    const double rad = flow_radicand(h, delta_p, spool_sign);
    Clamped out;
    if (rad < 0) {
        out.value = std::sqrt(h.guard_offset);
        out.clamped = true;
    } else {
        out.value = std::sqrt(rad);
    }
    if (std::abs(delta_p) <= h.supply_pressure &&
        out.value > std::sqrt(2.0 * (2.0 * h.supply_pressure + h.guard_offset)))
        throw std::logic_error("pressure factor exceeds its supply bound");
    return out;
}

double valve_flow(const HydraulicParams& h, double spool, double delta_p, int spool_sign) {
    const double rad = flow_radicand(h, delta_p, spool_sign);
    if (rad < 0) throw PressureDomainViolation(rad);
    return h.flow_coefficient * spool * pressure_factor(h, delta_p, spool_sign).value;
}

Clamped valve_flow_clamped(const HydraulicParams& h, double spool, double delta_p) {
    const Clamped b = pressure_factor(h, delta_p, signum(spool));
    return {h.flow_coefficient * spool * b.value, b.clamped};
}

double leakage_flow(const HydraulicParams& h, double delta_p) noexcept {
    return h.leakage * delta_p;
}

double pressure_rate(const HydraulicParams& h, double flow, double omega_m) noexcept {
    return (h.bulk_modulus / h.displacement) *
           (flow - omega_m * (h.displacement / kPi) * h.eta_vol);
}

double torque_rate(const HydraulicParams& h, double spool, double delta_p, double omega_m) {
    const int sgn = signum(spool);
    if (flow_radicand(h, delta_p, sgn) < 0)
        throw PressureDomainViolation(flow_radicand(h, delta_p, sgn));
    const double b = pressure_factor(h, delta_p, sgn).value;
    return h.coeff_a() * b * spool - h.coeff_c() * omega_m -
           h.leakage_rate() * motor_torque_from_pressure(h, delta_p);
}

double torque_rate_chained(const HydraulicParams& h, double spool, double delta_p,
                           double omega_m) {
    const double q = valve_flow(h, spool, delta_p, signum(spool)) - leakage_flow(h, delta_p);
    return h.torque_per_pressure() * pressure_rate(h, q, omega_m);
}

}  // namespace rtovc
