#pragma once

#include <span>
#include <vector>

#include "rtovc/controller.hpp"

namespace rtovc {

struct StabilityAssumptions {
    double a1_lower = 0.0;
    double a2_lower = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    double m1_bound = 0.0;
    double m2_bound = 0.0;
    double rho1 = 1.0, rho2 = 1.0, rho3 = 1.0, rho4 = 1.0;

    double psi1_star(const Gains& g) const noexcept;
    double psi2_star(const Gains& g) const noexcept;
    void validate() const;
};

/// Log-barrier value log(alpha^2 / (alpha^2 - x^2)). Throws BarrierViolation when |x| >= alpha.
double theta(double x, double alpha);

struct InequalityCheck {
    bool holds;
    double margin;  // x^2/Q - theta
};

InequalityCheck log_inequality_check(double x, double alpha);

/// Controller/plant snapshot needed for the barrier functions.
struct BlfInput {
    double t = 0.0;
    double v_e = 0.0;
    double tau_m_hat = 0.0;
    double psi1_hat = 0.0;
    double psi2_hat = 0.0;
};

struct BlfSample {
    double t = 0.0;
    double theta1 = 0.0;
    double theta2 = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;
    double v1 = 0.0;
    double v2 = 0.0;
    double v_bar = 0.0;
};

BlfSample blf_values(const BlfInput& in, const StabilityAssumptions& a, const Gains& g,
                     const SafetyBounds& b);

struct DecayConstants {
    double omega11 = 0.0;
    double omega12 = 0.0;
    double omega21 = 0.0;
    double omega22 = 0.0;
    double omega = 0.0;
    double omega_bar = 0.0;
};

DecayConstants decay_constants(const Gains& g, const StabilityAssumptions& a);

struct LyapunovReport {
    std::size_t steps_checked = 0;
    std::size_t steps_strict = 0;      // inequality holds without slack
    std::size_t steps_with_slack = 0;  // holds once the discretisation slack is added
    double worst_margin = 0.0;         // min of rhs - vdot (negative = violated)
    double worst_margin_with_slack = 0.0;
    double worst_time = 0.0;

    double strict_fraction() const noexcept;
    bool all_within_slack() const noexcept { return steps_with_slack == steps_checked; }
};

/// Central-difference check of Vdot <= -Omega V + 1/4 sum m_i^2/rho_i + Omega_bar per step.
/// m1, m2 hold the bounding-function values m_i(t) sampled with the BLF series.
LyapunovReport lyapunov_decrease_check(std::span<const BlfSample> series, const DecayConstants& k,
                                       std::span<const double> m1, std::span<const double> m2,
                                       const StabilityAssumptions& a, double dt);

struct EnvelopeFit {
    double c_bar = 1.0;
    double b_bar = 0.0;
    double zeta = 0.0;
    double fit_residual = 0.0;
    bool decaying = false;

    bool valid() const noexcept { return fit_residual <= 0.0 && b_bar > 0.0; }
};

/// Fits |theta(t)| <= c e^{-b (t - t0)} |theta(t0)| + zeta. The series starts at t0 and is sampled
/// every dt. Minimises zeta first, then maximises b at that zeta.
EnvelopeFit envelope_fit(std::span<const double> theta_norm, double dt);

/// Torque-level disturbance of the observer state: d/dt tau_m_hat - a2 * u_raw, by forward
/// differences of the recorded series.
std::vector<double> torque_level_disturbance(std::span<const double> tau_m_hat,
                                             std::span<const double> u_raw,
                                             std::span<const double> a2, double dt);

/// Disturbance bound constants measured from one wheel's recorded series.
struct MeasuredBounds {
    StabilityAssumptions assumptions;
    std::vector<double> m1;
    std::vector<double> m2;
};

/// f1_star: lumped velocity-error disturbance per step; f2: torque-level disturbance per step;
/// a2: true hydraulic input gain per step; a1_true: plant r/J_w.
MeasuredBounds measure_bounds(std::span<const double> f1_star, std::span<const double> f2,
                              std::span<const double> a2, double a1_true,
                              double lower_bound_fraction = 0.9);

struct WheelSeries {
    std::vector<BlfSample> blf;
    DecayConstants constants;
};

struct VehicleAggregate {
    std::vector<double> v_total;          // sum over wheels of V_bar
    double omega = 0.0;                   // min over wheels
    std::vector<EnvelopeFit> theta1_fits; // one per wheel
    std::vector<EnvelopeFit> theta2_fits;
    EnvelopeFit total_fit;                // fit of the summed theta norms
};

/// Throws ConfigError when the wheel series differ in length.
VehicleAggregate vehicle_aggregate(std::span<const WheelSeries> wheels, double dt);

}  // namespace rtovc
