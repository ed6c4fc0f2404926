#include "rtovc/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "rtovc/config_io.hpp"
#include "rtovc/errors.hpp"

namespace rtovc {

Check upper_check(std::string name, double value, double limit, bool inclusive) {
    const double margin = limit - value;
    return {std::move(name), value, limit, margin, inclusive ? margin >= 0 : margin > 0};
}

Check lower_check(std::string name, double value, double limit) {
    const double margin = value - limit;
    return {std::move(name), value, limit, margin, margin >= 0};
}

bool VerificationReport::pass() const {
    auto all = [](const std::vector<Check>& cs) {
        return std::all_of(cs.begin(), cs.end(), [](const Check& c) { return c.pass; });
    };
    if (!all(constraints) || !all(aggregate_checks)) return false;
    return std::all_of(wheels.begin(), wheels.end(), [&](const WheelVerification& w) { return all(w.checks); });
}

std::vector<TraceRow> nominal_rows(const SimTrace& trace, std::uint32_t wheel) {
    std::vector<TraceRow> out;
    for (const TraceRow& r : trace.rows) {
        if (r.wheel != wheel) continue;
        if (r.status != 0) break;
        out.push_back(r);
    }
    return out;
}

namespace {

template <class F>
std::vector<double> column(const std::vector<TraceRow>& rows, F f) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const TraceRow& r : rows) out.push_back(f(r));
    return out;
}

}  // namespace

WheelVerification analyse_wheel(const ScenarioConfig& cfg, const SimTrace& trace, std::uint32_t wheel) {
    WheelVerification v;
    v.wheel = wheel;
    const std::vector<TraceRow> rows = nominal_rows(trace, wheel);
    v.samples = rows.size();
    if (rows.empty()) return v;
    const double dt = cfg.dt * static_cast<double>(trace.stride);

    const auto tau_hat = column(rows, [](const TraceRow& r) { return r.tau_m_hat; });
    const auto u_raw = column(rows, [](const TraceRow& r) { return r.u_raw; });
    const auto a2 = column(rows, [](const TraceRow& r) { return r.a2; });
    const auto f1 = column(rows, [](const TraceRow& r) { return r.f1_star; });
    const auto f2 = torque_level_disturbance(tau_hat, u_raw, a2, dt);

    MeasuredBounds mb = measure_bounds(f1, f2, a2, cfg.wheels[wheel].plant.control_gain(),
                                       cfg.analysis.lower_bound_fraction);
    StabilityAssumptions& a = mb.assumptions;
    a.rho1 = cfg.analysis.rho1;
    a.rho2 = cfg.analysis.rho2;
    a.rho3 = cfg.analysis.rho3;
    a.rho4 = cfg.analysis.rho4;
    v.assumptions = a;
    v.psi1_star = a.psi1_star(cfg.gains);
    v.psi2_star = a.psi2_star(cfg.gains);
    v.constants = decay_constants(cfg.gains, a);

    v.min_psi1 = v.min_psi2 = std::numeric_limits<double>::infinity();
    v.worst_inequality_margin = std::numeric_limits<double>::infinity();
    v.blf.reserve(rows.size());
    for (const TraceRow& r : rows) {
        v.blf.push_back(blf_values({r.t, r.v_e, r.tau_m_hat, r.psi1_hat, r.psi2_hat}, a, cfg.gains, cfg.bounds));
        v.min_psi1 = std::min(v.min_psi1, r.psi1_hat);
        v.min_psi2 = std::min(v.min_psi2, r.psi2_hat);
        const std::pair<double, double> pairs[] = {{r.v_e, cfg.bounds.alpha1}, {r.tau_m_hat, cfg.bounds.tau_max}};
        for (const auto& [x, alpha] : pairs) {
            if (x == 0.0) continue;
            const InequalityCheck c = log_inequality_check(x, alpha);
            ++v.inequality_samples;
            if (!(c.margin > -1e-12)) ++v.inequality_failures;
            v.worst_inequality_margin = std::min(v.worst_inequality_margin, c.margin);
        }
    }
    v.lyapunov = lyapunov_decrease_check(v.blf, v.constants, mb.m1, mb.m2, a, dt);

    if (v.inequality_samples > 0)
        v.checks.push_back(lower_check("log_inequality_worst_margin", v.worst_inequality_margin, -1e-12));
    if (cfg.controller == ControllerKind::Rtovc) {
        v.checks.push_back(lower_check("min_psi1_hat_positive", v.min_psi1, 0.0));
        v.checks.back().pass = v.min_psi1 > 0;
        v.checks.push_back(lower_check("min_psi2_hat_positive", v.min_psi2, 0.0));
        v.checks.back().pass = v.min_psi2 > 0;
    }
    if (v.lyapunov.steps_checked > 0) {
        v.checks.push_back(lower_check("lyapunov_strict_fraction", v.lyapunov.strict_fraction(), 0.999));
        v.checks.push_back(lower_check("lyapunov_worst_margin_with_slack", v.lyapunov.worst_margin_with_slack, 0.0));
    }
    if (rows.size() >= 100) {
        std::vector<double> t1, t2;
        for (const BlfSample& s : v.blf) {
            t1.push_back(s.theta1);
            t2.push_back(s.theta2);
        }
        v.theta1_fit = envelope_fit(t1, dt);
        v.theta2_fit = envelope_fit(t2, dt);
        for (const auto& [name, fit] : {std::pair{"theta1", v.theta1_fit}, std::pair{"theta2", v.theta2_fit}}) {
            v.checks.push_back(lower_check(std::string("envelope_") + name + "_rate_positive", fit.b_bar, 0.0));
            v.checks.back().pass = fit.b_bar > 0;
            v.checks.push_back(upper_check(std::string("envelope_") + name + "_fit_residual", fit.fit_residual, 0.0, true));
        }
    }
    return v;
}

VerificationReport verify_trace(const ScenarioConfig& cfg, const SimTrace& trace) {
    VerificationReport rep;
    rep.config_hash = config_hash(cfg);
    rep.scenario = cfg.name;
    double v_w = 0, v_e = 0, tau = 0, u_hi = -std::numeric_limits<double>::infinity(),
           u_lo = std::numeric_limits<double>::infinity();
    for (const TraceRow& r : trace.rows) {
        if (r.status != 0) {
            rep.ended_nominal = false;
            continue;
        }
        v_w = std::max(v_w, std::abs(r.v_w));
        v_e = std::max(v_e, std::abs(r.v_e));
        tau = std::max(tau, std::abs(r.tau_m_hat));
        u_hi = std::max(u_hi, r.u_sat);
        u_lo = std::min(u_lo, r.u_sat);
    }
    const SafetyBounds& b = cfg.bounds;
    rep.constraints.push_back(upper_check("max_abs_v_w", v_w, b.eps1));
    rep.constraints.push_back(upper_check("max_abs_v_e", v_e, b.alpha1));
    rep.constraints.push_back(upper_check("max_abs_tau_m_hat", tau, b.tau_max));
    rep.constraints.push_back(upper_check("max_u_sat", u_hi, b.u_hi, true));
    rep.constraints.push_back(lower_check("min_u_sat", u_lo, b.u_lo));

    std::vector<WheelSeries> series;
    std::size_t shortest = std::numeric_limits<std::size_t>::max();
    for (std::uint32_t w : trace.wheels) {
        rep.wheels.push_back(analyse_wheel(cfg, trace, w));
        shortest = std::min(shortest, rep.wheels.back().blf.size());
    }
    if (!rep.wheels.empty() && shortest >= 100) {
        for (const WheelVerification& w : rep.wheels) {
            WheelSeries s;
            s.blf.assign(w.blf.begin(), w.blf.begin() + static_cast<std::ptrdiff_t>(shortest));
            s.constants = w.constants;
            series.push_back(std::move(s));
        }
        rep.aggregate = vehicle_aggregate(series, cfg.dt * static_cast<double>(trace.stride));
        rep.aggregate_checks.push_back(lower_check("aggregate_omega_positive", rep.aggregate.omega, 0.0));
        rep.aggregate_checks.back().pass = rep.aggregate.omega > 0;
        rep.aggregate_checks.push_back(lower_check("aggregate_envelope_rate_positive", rep.aggregate.total_fit.b_bar, 0.0));
        rep.aggregate_checks.back().pass = rep.aggregate.total_fit.b_bar > 0;
        rep.aggregate_checks.push_back(
            upper_check("aggregate_envelope_fit_residual", rep.aggregate.total_fit.fit_residual, 0.0, true));
    }
    return rep;
}

namespace {

void write_check(std::ostream& out, const Check& c) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << format_double(c.value)
        << " limit=" << format_double(c.limit) << " margin=" << format_double(c.margin) << '\n';
}

void write_fit(std::ostream& out, const char* name, const EnvelopeFit& f) {
    out << "envelope " << name << " c_bar=" << format_double(f.c_bar) << " b_bar=" << format_double(f.b_bar)
        << " zeta=" << format_double(f.zeta) << " fit_residual=" << format_double(f.fit_residual)
        << " decaying=" << (f.decaying ? "yes" : "no") << '\n';
}

// Display form for tables; full precision stays in the trace and report lines.
std::string brief(double v) {
    std::ostringstream ss;
    ss << std::setprecision(6) << v;
    return ss.str();
}

}  // namespace

void write_report(std::ostream& out, const VerificationReport& r) {
    out << "rtovc-report v" << kReportVersion << '\n';
    out << "scenario " << r.scenario << '\n';
    out << "config_hash " << r.config_hash << '\n';
    out << "status " << (r.ended_nominal ? "NOMINAL" : "TRIPPED") << '\n';
    out << "[constraints]\n";
    for (const Check& c : r.constraints) write_check(out, c);
    for (const WheelVerification& w : r.wheels) {
        out << "[wheel " << kWheelNames[w.wheel] << "]\n";
        out << "samples " << w.samples << '\n';
        const StabilityAssumptions& a = w.assumptions;
        out << "assumptions a1_lower=" << format_double(a.a1_lower) << " a2_lower=" << format_double(a.a2_lower)
            << " mu1=" << format_double(a.mu1) << " mu2=" << format_double(a.mu2)
            << " m1_bound=" << format_double(a.m1_bound) << " m2_bound=" << format_double(a.m2_bound)
            << " psi1_star=" << format_double(w.psi1_star) << " psi2_star=" << format_double(w.psi2_star) << '\n';
        const DecayConstants& k = w.constants;
        out << "constants omega11=" << format_double(k.omega11) << " omega12=" << format_double(k.omega12)
            << " omega21=" << format_double(k.omega21) << " omega22=" << format_double(k.omega22)
            << " omega=" << format_double(k.omega) << " omega_bar=" << format_double(k.omega_bar) << '\n';
        const LyapunovReport& l = w.lyapunov;
        out << "lyapunov steps=" << l.steps_checked << " strict=" << l.steps_strict
            << " with_slack=" << l.steps_with_slack << " worst_margin=" << format_double(l.worst_margin)
            << " worst_margin_with_slack=" << format_double(l.worst_margin_with_slack)
            << " worst_time=" << format_double(l.worst_time) << '\n';
        out << "log_inequality samples=" << w.inequality_samples << " failures=" << w.inequality_failures << '\n';
        if (w.samples >= 100) {
            write_fit(out, "theta1", w.theta1_fit);
            write_fit(out, "theta2", w.theta2_fit);
        }
        for (const Check& c : w.checks) write_check(out, c);
    }
    if (!r.aggregate_checks.empty()) {
        out << "[aggregate]\n";
        double peak = 0.0;
        for (double v : r.aggregate.v_total) peak = std::max(peak, v);
        out << "omega " << format_double(r.aggregate.omega) << '\n';
        out << "max_v_total " << format_double(peak) << '\n';
        write_fit(out, "theta_total", r.aggregate.total_fit);
        for (const Check& c : r.aggregate_checks) write_check(out, c);
    }
    out << "result " << (r.pass() ? "PASS" : "FAIL") << '\n';
}

void write_summary(std::ostream& out, const ScenarioConfig& cfg, const RunSummary& s) {
    out << "scenario " << cfg.name << " controller " << to_string(cfg.controller) << " steps " << s.steps << '\n';
    out << std::left << std::setw(6) << "wheel" << std::setw(16) << "rms_error_m/s" << std::setw(18)
        << "peak_tau_m_hat" << std::setw(14) << "peak_tau_m" << "status\n";
    for (const WheelSummary& w : s.wheels) {
        out << std::left << std::setw(6) << kWheelNames[w.wheel] << std::setw(16) << brief(w.rms_error)
            << std::setw(18) << brief(w.peak_tau_m_hat) << std::setw(14) << brief(w.peak_tau_m)
            << (w.status.tripped() ? std::string("TRIPPED ") + to_string(w.status.cause) : std::string("NOMINAL"))
            << '\n';
    }
    if (s.tripped)
        out << "trip t=" << brief(s.trip_time) << " wheel=" << kWheelNames[s.trip_wheel]
            << " cause=" << to_string(s.trip_cause) << '\n';
}

void write_comparison(std::ostream& out, const Comparison& c) {
    out << "A = " << c.labels[0] << '\n' << "B = " << c.labels[1] << '\n';
    out << std::left << std::setw(6) << "wheel" << std::setw(14) << "rms_A_m/s" << std::setw(14) << "rms_B_m/s"
        << std::setw(16) << "peak_tau_A_Nm" << std::setw(16) << "peak_tau_B_Nm" << "tripped\n";
    for (const ComparisonRow& r : c.rows) {
        std::string tripped = r.tripped[0] ? "A" : "";
        if (r.tripped[1]) tripped += tripped.empty() ? "B" : ",B";
        out << std::left << std::setw(6) << kWheelNames[r.wheel] << std::setw(14) << brief(r.rms[0])
            << std::setw(14) << brief(r.rms[1]) << std::setw(16) << brief(r.peak_torque[0])
            << std::setw(16) << brief(r.peak_torque[1]) << (tripped.empty() ? "-" : tripped) << '\n';
    }
}

}  // namespace rtovc
