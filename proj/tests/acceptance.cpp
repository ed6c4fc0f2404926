// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rtovc/config_io.hpp"
#include "rtovc/controller.hpp"
#include "rtovc/plant.hpp"
#include "rtovc/report.hpp"
#include "rtovc/simulator.hpp"
#include "rtovc/stability.hpp"
#include "rtovc/trace_io.hpp"
#include "test_support.hpp"

namespace {

using namespace rtovc;

const std::vector<std::string> kScenarios{"exp1_snow",     "exp2_ice",          "regulation",
                                          "ramp_tracking", "ramp_tracking_pid", "standard_slip",
                                          "standard_slip_pid", "severe_slip",   "severe_slip_pid"};

struct Shipped {
    ScenarioConfig cfg;
    SimResult run;
    double seconds = 0.0;
};

std::map<std::string, Shipped>& shipped() {
    static std::map<std::string, Shipped> runs = [] {
        std::map<std::string, Shipped> m;
        for (const std::string& n : kScenarios) {
            Shipped s;
            s.cfg = testing::load_scenario(n);
            const auto t0 = std::chrono::steady_clock::now();
            s.run = run_scenario(s.cfg);
            s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            m.emplace(n, std::move(s));
        }
        return m;
    }();
    return runs;
}

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... v) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, v...);
    return buf;
}

std::vector<TraceRow> nominal(const SimTrace& t) {
    std::vector<TraceRow> out;
    for (const TraceRow& r : t.rows)
        if (r.status == 0) out.push_back(r);
    return out;
}

void constraint_suite() {
    bool pass = true;
    double vw = 0, ve = 0, tm = 0, u = 0, slowest = 0;
    std::size_t checked = 0;
    for (auto& [name, s] : shipped()) {
        const double budget = 30.0 * s.cfg.duration / 120.0;
        slowest = std::max(slowest, s.seconds / budget);
        if (s.seconds >= budget) pass = false;
        if (s.run.summary.tripped) continue;
        ++checked;
        for (const TraceRow& r : s.run.trace.rows) {
            vw = std::max(vw, std::abs(r.v_w));
            ve = std::max(ve, std::abs(r.v_e));
            tm = std::max(tm, std::abs(r.tau_m_hat));
            u = std::max(u, std::abs(r.u_sat));
        }
    }
    const SafetyBounds b;
    pass = pass && checked >= 7 && vw < b.eps1 && ve < b.alpha1 && tm < b.tau_max && u <= b.u_hi;
    report(1, "constraint_suite", pass,
           fmt("%zu nominal scenarios; max|v_w|=%.4g<0.5 max|v_e|=%.4g<0.25 max|tau_m_hat|=%.4g<290 "
               "max|u_sat|=%.4g<=0.44; worst runtime %.3g of the 30 s per 120 s budget",
               checked, vw, ve, tm, u, slowest));
}

void saturation_identity() {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    const double u_hi = 0.44, u_lo = -0.44, cap = std::max(std::abs(u_lo) + 1.0, std::abs(u_hi) + 1.0);
    double worst = 0.0;
    bool bounded = true;
    for (int i = 0; i < 100'000; ++i) {
        const double x = dist(rng);
        const Saturation s = saturate(x, u_hi, u_lo);
        worst = std::max(worst, std::abs(std::clamp(x, u_lo, u_hi) - (s.lambda1 * x + s.lambda2)));
        bounded = bounded && s.lambda1 >= 0 && s.lambda1 <= 1 && std::abs(s.lambda2) <= cap &&
                  s.u_sat == std::clamp(x, u_lo, u_hi);
    }
    report(2, "saturation_identity", bounded && worst <= 1e-12,
           fmt("1e5 samples; max|Sat(u)-(l1 u+l2)|=%.3g<=1e-12; lambda ranges %s", worst,
               bounded ? "hold" : "violated"));
}

void log_inequality() {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> alpha(1e-3, 1e3), frac(-1.0, 1.0);
    double worst_random = INFINITY;
    for (int i = 0; i < 1'000'000; ++i) {
        const double a = alpha(rng), x = frac(rng) * a * (1 - 1e-9);
        if (x != 0.0) worst_random = std::min(worst_random, log_inequality_check(x, a).margin);
    }
    double worst_trace = INFINITY;
    std::size_t samples = 0;
    for (auto& [name, s] : shipped()) {
        for (const TraceRow& r : nominal(s.run.trace)) {
            worst_trace = std::min(worst_trace, log_inequality_check(r.v_e, s.cfg.bounds.alpha1).margin);
            worst_trace = std::min(worst_trace, log_inequality_check(r.tau_m_hat, s.cfg.bounds.tau_max).margin);
            samples += 2;
        }
    }
    report(3, "log_inequality", worst_random > 0 && worst_trace > -1e-12,
           fmt("random worst margin %.3g>0 over 1e6 pairs; trace worst margin %.3g>-1e-12 over %zu samples",
               worst_random, worst_trace, samples));
}

void hydraulic_equivalence() {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> spool(-1, 1), frac(-0.95, 0.95), omega(-50, 50), leak(0, 1e-10),
        bulk(1e8, 2e9);
    double worst = 0.0;
    for (int i = 0; i < 10'000; ++i) {
        HydraulicParams h;
        h.bulk_modulus = bulk(rng);
        h.leakage = leak(rng);
        const double u = spool(rng), dp = frac(rng) * h.supply_pressure, w = omega(rng);
        const double a = torque_rate(h, u, dp, w), c = torque_rate_chained(h, u, dp, w);
        worst = std::max(worst, std::abs(a - c) / std::max({std::abs(a), std::abs(c), 1e-300}));
    }
    report(4, "hydraulic_model_equivalence", worst <= 1e-9,
           fmt("1e4 states; max relative difference %.3g<=1e-9", worst));
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j);
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

void exponential_convergence() {
    const Shipped& reg = shipped().at("regulation");
    bool regulated = !reg.run.summary.tripped;
    double worst_zeta = 0.0, min_rate = INFINITY;
    for (std::uint32_t w : reg.run.trace.wheels) {
        const WheelVerification v = analyse_wheel(reg.cfg, reg.run.trace, w);
        regulated = regulated && v.theta1_fit.valid() && v.theta1_fit.b_bar > 0;
        worst_zeta = std::max(worst_zeta, v.theta1_fit.zeta);
        min_rate = std::min(min_rate, v.theta1_fit.b_bar);
    }
    regulated = regulated && worst_zeta <= 1e-3;

    std::vector<double> amplitude, zeta;
    bool valid = true;
    for (int i = 1; i <= 10; ++i) {
        ScenarioConfig cfg = reg.cfg;
        cfg.wheels[0].disturbance.slip_events = {{0.0, cfg.duration, 0.5 * i, PulseShape::Trapezoid, 0.0}};
        for (std::size_t w = 1; w < kWheelCount; ++w) cfg.wheels[w].enabled = false;
        const SimResult r = run_scenario(cfg);
        const WheelVerification v = analyse_wheel(cfg, r.trace, 0);
        valid = valid && !r.summary.tripped && v.theta1_fit.valid();
        amplitude.push_back(0.5 * i);
        zeta.push_back(v.theta1_fit.zeta);
    }
    const double rho = spearman(amplitude, zeta);
    report(5, "exponential_convergence", regulated && valid && rho > 0.9,
           fmt("regulation b_bar>=%.4g>0 zeta<=%.3g<=1e-3; constant slip 0.5..5 m/s^2 zeta %.3g..%.3g, "
               "Spearman %.4f>0.9",
               min_rate, worst_zeta, zeta.front(), zeta.back(), rho));
}

void lyapunov_decrease() {
    bool pass = true;
    double worst_fraction = 1.0, worst_slack = INFINITY;
    std::size_t steps = 0;
    for (auto& [name, s] : shipped()) {
        for (std::uint32_t w : s.run.trace.wheels) {
            const WheelVerification v = analyse_wheel(s.cfg, s.run.trace, w);
            steps += v.lyapunov.steps_checked;
            worst_fraction = std::min(worst_fraction, v.lyapunov.strict_fraction());
            worst_slack = std::min(worst_slack, v.lyapunov.worst_margin_with_slack);
            pass = pass && v.lyapunov.strict_fraction() >= 0.999 && v.lyapunov.all_within_slack();
        }
    }
    report(6, "lyapunov_decrease", pass,
           fmt("%zu steps; worst strict fraction %.6f>=0.999; worst margin with slack %.3g>=0", steps,
               worst_fraction, worst_slack));
}

void controller_comparison() {
    const Comparison std_cmp =
        compare_controllers(shipped().at("standard_slip").cfg, shipped().at("standard_slip_pid").cfg);
    bool ordered = true;
    double worst_gap = INFINITY;
    for (const ComparisonRow& r : std_cmp.rows) {
        ordered = ordered && !r.tripped[0] && r.rms[0] <= r.rms[1];
        worst_gap = std::min(worst_gap, r.rms[1] - r.rms[0]);
    }
    const Shipped& sev = shipped().at("severe_slip");
    const Shipped& sev_pid = shipped().at("severe_slip_pid");
    double rtovc_rms = 0, pid_rms = 0;
    for (const auto& w : sev.run.summary.wheels) rtovc_rms = std::max(rtovc_rms, w.rms_error);
    for (const auto& w : sev_pid.run.summary.wheels) pid_rms = std::max(pid_rms, w.rms_error);
    const bool severe = !sev.run.summary.tripped && rtovc_rms <= 0.125 &&
                        (sev_pid.run.summary.tripped || pid_rms > 0.2);
    report(7, "controller_comparison", ordered && severe,
           fmt("standard slip: RTOVC<=PID on all wheels, smallest gap %.3g m/s; severe slip: RTOVC rms %.4g<=0.125, "
               "PID %s (rms %.4g)",
               worst_gap, rtovc_rms, sev_pid.run.summary.tripped ? "tripped" : "nominal", pid_rms));
}

SimResult forced_trip_run() {
    ScenarioConfig cfg = shipped().at("standard_slip").cfg;
    cfg.duration = 20.0;
    cfg.stop_on_trip = false;
    cfg.wheels[0].disturbance.slip_events = {{10.0, 12.0, 150.0, PulseShape::Trapezoid, 0.05}};
    return run_scenario(cfg);
}

void positivity_and_latching() {
    double min_psi = INFINITY;
    for (auto& [name, s] : shipped()) {
        if (s.cfg.controller != ControllerKind::Rtovc) continue;
        for (const TraceRow& r : s.run.trace.rows) min_psi = std::min({min_psi, r.psi1_hat, r.psi2_hat});
    }
    const SimResult a = forced_trip_run();
    const SimResult b = forced_trip_run();
    const SafetyBounds bounds;
    bool latched = a.summary.tripped, within_one_step = true;
    bool seen = false;
    for (const TraceRow& r : a.trace.rows) {
        if (r.wheel != 0) continue;
        const bool at_guard = std::abs(r.v_e) >= bounds.guard_fraction * bounds.alpha1 ||
                              std::abs(r.v_w) >= bounds.guard_fraction * bounds.eps1;
        if (at_guard && r.status == 0) within_one_step = false;
        if (r.status == 1) seen = true;
        if (seen && (r.u_sat != 0.0 || r.status != 1)) latched = false;
    }
    const bool repeatable = a.summary.trip_time == b.summary.trip_time &&
                            a.summary.trip_cause == b.summary.trip_cause && a.trace.rows.size() == b.trace.rows.size();
    report(8, "adaptive_positivity_and_latching", min_psi > 0 && seen && latched && within_one_step && repeatable,
           fmt("min adaptive estimate %.3g>0; forced trip at t=%.3f (%s), u_sat=0 afterwards %s, repeatable %s",
               min_psi, a.summary.trip_time, to_string(a.summary.trip_cause), latched ? "yes" : "no",
               repeatable ? "yes" : "no"));
}

void integrator_order() {
    ScenarioConfig cfg = shipped().at("ramp_tracking").cfg;
    cfg.duration = 1.0;
    cfg.metrics_start = 0.0;
    cfg.reference.knots = {{0.0, 0.0}, {1.0, 0.25}};
    auto final_v = [&](int n) {
        ScenarioConfig c = cfg;
        c.plant_substeps = n;
        return run_scenario(c).trace.rows.back().v_w;
    };
    const double ref = final_v(64);
    const double e1 = std::abs(final_v(1) - ref), e2 = std::abs(final_v(2) - ref);
    const double ratio = e1 / e2;
    report(9, "integrator_order", e2 > 0 && ratio >= 12.0,
           fmt("1 s disturbance-free ramp; |e(dt)|=%.3g |e(dt/2)|=%.3g ratio %.3g>=12", e1, e2, ratio));
}

std::string trace_text(const ScenarioConfig& cfg, bool parallel) {
    std::ostringstream out;
    write_trace(out, cfg, run_scenario(cfg, {parallel, 1}).trace);
    return out.str();
}

void determinism() {
    bool pass = true;
    std::size_t bytes = 0;
    for (const char* n : {"exp1_snow", "exp2_ice"}) {
        ScenarioConfig cfg = shipped().at(n).cfg;
        const std::string a = trace_text(cfg, false);
        pass = pass && a == trace_text(cfg, false) && a == trace_text(cfg, true);
        cfg.coupling = {true, 200.0};
        const std::string c = trace_text(cfg, false);
        pass = pass && c == trace_text(cfg, true);
        bytes += a.size();
    }
    report(10, "determinism", pass,
           fmt("sequential, repeated and parallel traces byte-identical (%zu bytes compared per mode), "
               "coupled runs included",
               bytes));
}

}  // namespace

int main() {
    const std::pair<const char*, void (*)()> criteria[] = {
        {"constraint_suite", constraint_suite},
        {"saturation_identity", saturation_identity},
        {"log_inequality", log_inequality},
        {"hydraulic_model_equivalence", hydraulic_equivalence},
        {"exponential_convergence", exponential_convergence},
        {"lyapunov_decrease", lyapunov_decrease},
        {"controller_comparison", controller_comparison},
        {"adaptive_positivity_and_latching", positivity_and_latching},
        {"integrator_order", integrator_order},
        {"determinism", determinism},
    };
    int id = 0;
    for (const auto& [name, check] : criteria) {
        ++id;
        try {
            check();
        } catch (const std::exception& e) {
            report(id, name, false, std::string("exception: ") + e.what());
        }
    }
    std::printf("%s %d/10 criteria passed\n", failures == 0 ? "PASS" : "FAIL", 10 - failures);
    return failures == 0 ? 0 : 1;
}
