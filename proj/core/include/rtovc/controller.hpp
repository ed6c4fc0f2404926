#pragma once

#include "rtovc/errors.hpp"

namespace rtovc {

struct Gains {
    double k1 = 3.0, k2 = 1.0, k3 = 1.0, k4 = 1.0, k5 = 100.0;
    double k6 = 3.0, k7 = 1.0, k8 = 1.0, k9 = 1.0;

    void validate() const;
    /// Throws ConfigError unless k5 >= inertia_over_radius.
    void validate_dominance(double inertia_over_radius) const;
    /// Throws ConfigError unless the Euler decay of both adaptive laws stays positive.
    void validate_step(double dt) const;
    bool operator==(const Gains&) const = default;
};

struct SafetyBounds {
    double eps1 = 0.5;      // m/s
    double v_max = 0.25;    // m/s
    double alpha1 = 0.25;   // m/s
    double tau_max = 290.0; // N m
    double u_hi = 0.44;
    double u_lo = -0.44;
    double guard_fraction = 0.999;

    void validate() const;
    bool operator==(const SafetyBounds&) const = default;
};

struct AdaptiveState {
    double psi1_hat = 0.1;
    double psi2_hat = 0.1;
    bool operator==(const AdaptiveState&) const = default;
};

struct BarrierMargins {
    double tracking = 1.0;  // 1 - |v_e|/alpha1
    double torque = 1.0;    // 1 - |tau_m_hat|/tau_max
    double velocity = 1.0;  // 1 - |v_w|/eps1
};

struct ControlOutput {
    double v_e = 0.0;
    double omega_e = 0.0;
    double beta1 = 0.0;
    double tau_w_hat = 0.0;
    double tau_m_hat = 0.0;
    double beta2 = 0.0;
    double u_raw = 0.0;
    double u_sat = 0.0;
    double lambda1 = 1.0;
    double lambda2 = 0.0;
    BarrierMargins margins;
};

enum class BarrierState { Nominal, Tripped };

struct BarrierStatus {
    BarrierState state = BarrierState::Nominal;
    BarrierCause cause = BarrierCause::None;
    double margin_at_trip = 0.0;  // |x|/bound when the guard fired

    bool tripped() const noexcept { return state == BarrierState::Tripped; }
};

struct TrackingError {
    double v_e;
    double omega_e;
};

TrackingError tracking_error(double v_w, double v_d, double radius);

/// Throws BarrierViolation(TrackingError) once |v_e| reaches the guard fraction of alpha1.
double beta1(double v_e, double alpha1, double guard_fraction = 0.999);
double adapt1_rate(const Gains& g, double psi1_hat, double beta1);
double required_wheel_torque(const Gains& g, double v_e, double psi1_hat, double beta1, double g1);
double required_motor_torque(double tau_w_hat, double gear_ratio);
/// Throws BarrierViolation(TorqueBound) once |tau_m_hat| reaches the guard fraction of tau_max.
double beta2(double tau_m_hat, double tau_max, double guard_fraction = 0.999);
double adapt2_rate(const Gains& g, double psi2_hat, double beta2);
double valve_signal(const Gains& g, double tau_m_hat, double psi2_hat, double beta2);

struct Saturation {
    double u_sat;
    double lambda1;
    double lambda2;
};

Saturation saturate(double u_raw, double u_hi, double u_lo);

/// Nominal plant constants the controller is allowed to know.
struct ControllerConstants {
    double radius = 0.854;
    double gear_ratio = 17.7;
};

struct StepResult {
    ControlOutput output;
    AdaptiveState adaptive;
    BarrierStatus status;
};

/// One pass of the control algorithm. A barrier violation yields a Tripped status and u_sat = 0.
StepResult step_controller(const Gains& g, const SafetyBounds& b, const ControllerConstants& c,
                           const AdaptiveState& adaptive, double v_w, double v_d,
                           double g1_nominal, double dt);

/// Per-wheel controller with the emergency-stop latch.
class RtovcController {
public:
    RtovcController(Gains gains, SafetyBounds bounds, ControllerConstants constants,
                    AdaptiveState initial = {});

    ControlOutput step(double v_w, double v_d, double g1_nominal, double dt);
    void reset();

    const AdaptiveState& adaptive() const noexcept { return adaptive_; }
    const BarrierStatus& status() const noexcept { return status_; }
    const Gains& gains() const noexcept { return gains_; }
    const SafetyBounds& bounds() const noexcept { return bounds_; }

private:
    Gains gains_;
    SafetyBounds bounds_;
    ControllerConstants constants_;
    AdaptiveState initial_;
    AdaptiveState adaptive_;
    BarrierStatus status_;
};

}  // namespace rtovc
