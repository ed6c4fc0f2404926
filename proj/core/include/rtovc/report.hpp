#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rtovc/scenario.hpp"
#include "rtovc/simulator.hpp"
#include "rtovc/stability.hpp"

namespace rtovc {

inline constexpr int kReportVersion = 1;

struct Check {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    double margin = 0.0;  // positive when the check passes
    bool pass = false;
};

/// Upper-bound check: value < limit (or <= when inclusive).
Check upper_check(std::string name, double value, double limit, bool inclusive = false);
/// Lower-bound check: value >= limit.
Check lower_check(std::string name, double value, double limit);

struct WheelVerification {
    std::uint32_t wheel = 0;
    std::size_t samples = 0;
    StabilityAssumptions assumptions;
    DecayConstants constants;
    double psi1_star = 0.0;
    double psi2_star = 0.0;
    LyapunovReport lyapunov;
    EnvelopeFit theta1_fit;
    EnvelopeFit theta2_fit;
    std::size_t inequality_samples = 0;
    std::size_t inequality_failures = 0;
    double worst_inequality_margin = 0.0;
    double min_psi1 = 0.0;
    double min_psi2 = 0.0;
    std::vector<BlfSample> blf;
    std::vector<Check> checks;
};

struct VerificationReport {
    std::string config_hash;
    std::string scenario;
    bool ended_nominal = true;
    std::vector<Check> constraints;
    std::vector<WheelVerification> wheels;
    VehicleAggregate aggregate;
    std::vector<Check> aggregate_checks;

    bool pass() const;
};

/// Rows of one wheel up to (not including) its first tripped sample.
std::vector<TraceRow> nominal_rows(const SimTrace& trace, std::uint32_t wheel);

/// Stability chain on one wheel's nominal samples.
WheelVerification analyse_wheel(const ScenarioConfig& cfg, const SimTrace& trace, std::uint32_t wheel);

/// Constraint suite plus stability chain for every wheel and the vehicle aggregate.
VerificationReport verify_trace(const ScenarioConfig& cfg, const SimTrace& trace);

void write_report(std::ostream& out, const VerificationReport& report);
void write_summary(std::ostream& out, const ScenarioConfig& cfg, const RunSummary& summary);
void write_comparison(std::ostream& out, const Comparison& cmp);

}  // namespace rtovc
