#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rtovc/controller.hpp"
#include "rtovc/plant.hpp"

namespace rtovc {

inline constexpr std::size_t kWheelCount = 4;
inline constexpr std::array<const char*, kWheelCount> kWheelNames{"FL", "FR", "RL", "RR"};

enum class PulseShape { Trapezoid, HalfSine };
enum class ControllerKind { Rtovc, Pid };
enum class HydraulicModel { Reduced, Pressure };

const char* to_string(PulseShape s) noexcept;
const char* to_string(ControllerKind k) noexcept;
const char* to_string(HydraulicModel m) noexcept;

/// Bounded pulse on [start, end]. Trapezoids ramp over `ramp` seconds at each side.
struct Pulse {
    double start = 0.0;
    double end = 0.0;
    double amplitude = 0.0;
    PulseShape shape = PulseShape::Trapezoid;
    double ramp = 0.5;

    double value(double t) const noexcept;
    bool operator==(const Pulse&) const = default;
};

/// Pulses drawn from the scenario seed.
struct RandomSlip {
    int count = 0;
    double window_start = 0.0;
    double window_end = 0.0;
    double amplitude_min = 0.0;
    double amplitude_max = 0.0;
    double length_min = 1.0;
    double length_max = 1.0;
    bool operator==(const RandomSlip&) const = default;
};

/// Bounded model error: offset + amplitude sin(2 pi f t).
struct ModelError {
    double offset = 0.0;
    double amplitude = 0.0;
    double frequency = 0.0;

    double value(double t) const noexcept;
    double bound() const noexcept;
    bool operator==(const ModelError&) const = default;
};

struct DisturbanceModel {
    std::vector<Pulse> wheel_torque;  // d_w, N m
    std::vector<Pulse> slip_events;   // m/s^2
    RandomSlip random_slip;
    ModelError model_error;
    bool operator==(const DisturbanceModel&) const = default;
};

/// Disturbance schedule with random pulses already drawn.
struct DisturbanceSchedule {
    std::vector<Pulse> wheel_torque;
    std::vector<Pulse> slip_events;
    ModelError model_error;

    double slip(double t) const noexcept;
    double torque(double t) const noexcept;
};

DisturbanceSchedule realise(const DisturbanceModel& d, std::uint64_t seed, std::size_t wheel);

struct Knot {
    double t;
    double v;
    bool operator==(const Knot&) const = default;
};

/// Piecewise-linear reference velocity, held after the last knot.
struct ReferenceProfile {
    std::vector<Knot> knots;

    double value(double t) const noexcept;
    double slope(double t) const noexcept;
    double max_abs() const noexcept;
    bool operator==(const ReferenceProfile&) const = default;
};

struct PidGains {
    double kp = 2.0;
    double ki = 0.5;
    double kd = 0.0;
    double integral_clamp = 0.44;
    bool operator==(const PidGains&) const = default;
};

struct WheelConfig {
    bool enabled = true;
    WheelParams plant;
    HydraulicParams hydraulics;
    double initial_velocity = 0.0;  // m/s
    double static_load = 16310.0;   // N, used only by the load redistribution hook
    DisturbanceModel disturbance;
    bool operator==(const WheelConfig&) const = default;
};

struct CouplingConfig {
    bool enabled = false;
    double gain = 0.0;  // N per (m/s^2) of slip imbalance
    bool operator==(const CouplingConfig&) const = default;
};

/// Free constants of the stability analysis.
struct AnalysisConfig {
    double rho1 = 1.0, rho2 = 1.0, rho3 = 1.0, rho4 = 1.0;
    double lower_bound_fraction = 0.9;  // gain lower bounds as a fraction of the true values
    bool operator==(const AnalysisConfig&) const = default;
};

struct ScenarioConfig {
    std::string name = "scenario";
    double duration = 10.0;
    double dt = 1e-3;
    int plant_substeps = 1;
    std::uint64_t seed = 1;
    ControllerKind controller = ControllerKind::Rtovc;
    HydraulicModel hydraulic_model = HydraulicModel::Reduced;
    bool stop_on_trip = true;
    double metrics_start = 0.0;  // s, RMS is taken from here on

    ReferenceProfile reference;
    Gains gains;
    SafetyBounds bounds;
    AdaptiveState adaptive_init;
    double valve_polarity = -1.0;  // spool = polarity * u_sat for the RTOVC law
    PidGains pid;
    double nominal_mismatch = 0.1;  // relative error of the controller's damping/friction model
    CouplingConfig coupling;
    AnalysisConfig analysis;
    std::array<WheelConfig, kWheelCount> wheels;

    std::size_t step_count() const;
    /// Nominal parameters the controller uses for its model term.
    WheelParams nominal_params(std::size_t wheel) const;
    /// Throws ConfigError with a description of the first violated invariant.
    void validate() const;
    bool operator==(const ScenarioConfig&) const = default;
};

}  // namespace rtovc
