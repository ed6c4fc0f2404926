#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rtovc/controller.hpp"
#include "rtovc/plant.hpp"
#include "rtovc/scenario.hpp"

namespace rtovc {

struct PidState {
    double integral = 0.0;
    double previous_error = 0.0;
    bool primed = false;
};

struct PidOutput {
    double u_raw;
    double u_sat;
};

/// PID on the velocity error with a clamped integral term; output saturated to the valve bounds.
PidOutput pid_controller(const PidGains& pid, const SafetyBounds& bounds, double v_e, double dt,
                         PidState& state);

struct WheelPlantState {
    double omega_w = 0.0;
    double tau_m = 0.0;
    double delta_p = 0.0;
};

struct VehicleState {
    std::array<WheelPlantState, kWheelCount> wheels{};
};

/// True plant of one wheel with its realised disturbance schedule.
struct WheelPlant {
    WheelParams params;
    HydraulicParams hydraulics;
    HydraulicModel model = HydraulicModel::Reduced;
    DisturbanceSchedule schedule;

    DisturbanceSample disturbance(double t, double load_shift) const noexcept;
};

struct VehicleModel {
    std::array<WheelPlant, kWheelCount> wheels;
    std::array<bool, kWheelCount> enabled{true, true, true, true};
};

VehicleModel build_vehicle(const ScenarioConfig& cfg);

/// Continuous-time derivative of (omega_w, hydraulic state). Counts radicand clamps.
std::array<double, 2> plant_derivative(const WheelPlant& plant, const std::array<double, 2>& x,
                                       double spool, double t, double load_shift, int* clamps);

/// One RK4 step of a wheel under a held spool command.
WheelPlantState integrate_wheel(const WheelPlant& plant, const WheelPlantState& s, double spool,
                                double load_shift, double t, double dt, int* clamps = nullptr);

/// One RK4 step of every enabled wheel.
VehicleState integrate_step(const VehicleModel& model, const VehicleState& s,
                            const std::array<double, kWheelCount>& spool,
                            const std::array<double, kWheelCount>& load_shift, double t, double dt);

struct TraceRow {
    double t;
    std::uint32_t wheel;
    double v_d, v_w, v_e, omega_w;
    double tau_m, delta_p;
    double tau_w_hat, tau_m_hat, beta1, beta2;
    double u_raw, u_sat, lambda1, lambda2, spool;
    double psi1_hat, psi2_hat;
    double g1_nominal, disturbance, f1_star, a2;
    std::uint32_t status;  // 0 nominal, 1 tripped
    std::uint32_t cause;   // BarrierCause
    std::uint32_t pressure_clamps;
};

struct WheelSummary {
    std::uint32_t wheel = 0;
    double rms_error = 0.0;
    double max_abs_v_e = 0.0;
    double max_abs_v_w = 0.0;
    double max_abs_u_sat = 0.0;
    double peak_tau_m_hat = 0.0;
    double peak_tau_m = 0.0;
    BarrierStatus status;
};

struct RunSummary {
    std::vector<WheelSummary> wheels;
    bool tripped = false;
    double trip_time = 0.0;
    std::uint32_t trip_wheel = 0;
    BarrierCause trip_cause = BarrierCause::None;
    std::size_t steps = 0;
};

struct SimTrace {
    std::vector<std::uint32_t> wheels;  // enabled wheel indices, row order within a step
    std::size_t stride = 1;
    double dt = 1e-3;
    std::vector<TraceRow> rows;

    std::vector<double> series(std::uint32_t wheel, double TraceRow::*field) const;
};

struct RunOptions {
    bool parallel = false;
    std::size_t record_stride = 1;
};

struct SimResult {
    SimTrace trace;
    RunSummary summary;
};

SimResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

struct ComparisonRow {
    std::uint32_t wheel;
    std::array<double, 2> rms;
    std::array<double, 2> peak_torque;  // plant motor torque
    std::array<bool, 2> tripped;
};

struct Comparison {
    std::array<std::string, 2> labels;
    std::vector<ComparisonRow> rows;
};

/// Runs both configs; they must differ only in controller selection and controller settings.
Comparison compare_controllers(const ScenarioConfig& a, const ScenarioConfig& b,
                               const RunOptions& options = {});

}  // namespace rtovc
