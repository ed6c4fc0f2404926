#pragma once

// Wheel motion and valve-controlled hydraulic motor models.

namespace rtovc {

inline constexpr double kPi = 3.14159265358979323846;

struct WheelParams {
    double radius = 0.854;          // m
    double inertia = 80.0;          // kg m^2
    double damping = 50.0;          // N m s/rad
    double coulomb_friction = 20.0; // N m
    double normal_force = 0.0;      // N
    double gear_ratio = 17.7;       // motor -> wheel
    double friction_smoothing = 0.01; // rad/s

    double control_gain() const noexcept { return radius / inertia; }
    void validate() const;  // throws ConfigError
    bool operator==(const WheelParams&) const = default;
};

struct WheelState {
    double omega_w = 0.0;  // rad/s

    double linear_velocity(const WheelParams& p) const noexcept { return p.radius * omega_w; }
};

/// One disturbance sample, already evaluated at a time instant.
struct DisturbanceSample {
    double wheel_torque = 0.0;  // d_w, N m
    double slip_rate = 0.0;     // lumped slip term, m/s^2 (enters with minus sign)
    double model_error = 0.0;   // additive, m/s^2
    double normal_force_shift = 0.0;  // N, from the load redistribution hook
};

/// Lumped unknown acceleration from a disturbance sample.
double lumped_disturbance(const WheelParams& p, const DisturbanceSample& d) noexcept;

double smoothed_friction(const WheelParams& p, double omega_w) noexcept;

/// Known modelling term of the wheel acceleration, m/s^2.
double known_term_g1(const WheelParams& p, const WheelState& s) noexcept;

/// Linear wheel acceleration a1*tau_w + G1 + F1, m/s^2. Throws PlantFault on non-finite input.
double wheel_acceleration(const WheelParams& p, const WheelState& s, double tau_w,
                          const DisturbanceSample& d);

struct HydraulicParams {
    double displacement = 1e-4;    // m^3/rev
    double bulk_modulus = 1e9;     // Pa
    double eta_hm = 0.9;
    double eta_vol = 0.95;
    double flow_coefficient = 2.52e-7;  // m^3/(s sqrt(Pa))
    double supply_pressure = 20e6;  // Pa
    double tank_pressure = 0.0;     // Pa
    double guard_offset = 1e3;      // Pa
    double leakage = 0.0;           // cross-port, m^3/(s Pa)

    /// gamma*eta_hm*K_u/(2 pi)
    double coeff_a() const noexcept;
    /// Back-emf coefficient of the reduced torque model.
    double coeff_c() const noexcept;
    /// Leakage decay rate of the reduced torque model, 1/s.
    double leakage_rate() const noexcept;
    /// N m per Pa.
    double torque_per_pressure() const noexcept;
    void validate() const;
    bool operator==(const HydraulicParams&) const = default;
};

struct HydraulicState {
    double delta_p = 0.0;   // Pa
    double tau_m = 0.0;     // N m
    double omega_m = 0.0;   // rad/s
    double flow = 0.0;      // m^3/s
    double spool = 0.0;     // normalised
};

int signum(double x) noexcept;

double motor_torque_from_pressure(const HydraulicParams& h, double delta_p) noexcept;
double pressure_from_motor_torque(const HydraulicParams& h, double tau_m) noexcept;

/// 2(p_s - sign*dp + delta); negative means the supply pressure is exceeded.
double flow_radicand(const HydraulicParams& h, double delta_p, int spool_sign) noexcept;

/// Valve flow. Throws PressureDomainViolation on a negative radicand.
double valve_flow(const HydraulicParams& h, double spool, double delta_p, int spool_sign);

struct Clamped {
    double value = 0.0;
    bool clamped = false;
};

/// Valve flow with the radicand clamped to the guard offset instead of throwing.
Clamped valve_flow_clamped(const HydraulicParams& h, double spool, double delta_p);

/// sqrt of the (clamped) radicand.
Clamped pressure_factor(const HydraulicParams& h, double delta_p, int spool_sign);

double leakage_flow(const HydraulicParams& h, double delta_p) noexcept;

/// Differential pressure rate for a net load flow Q, Pa/s.
double pressure_rate(const HydraulicParams& h, double flow, double omega_m) noexcept;

/// Reduced torque dynamics A B(dp) x_u - C omega_m (minus leakage). Throws PressureDomainViolation.
double torque_rate(const HydraulicParams& h, double spool, double delta_p, double omega_m);

/// Same rate obtained by chaining valve flow, pressure dynamics and the torque map.
double torque_rate_chained(const HydraulicParams& h, double spool, double delta_p, double omega_m);

}  // namespace rtovc
