#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "rtovc/config_io.hpp"
#include "rtovc/errors.hpp"
#include "rtovc/report.hpp"
#include "rtovc/simulator.hpp"
#include "rtovc/trace_io.hpp"
#include "rtovc/tuning.hpp"

namespace rtovc::cli {

namespace {

struct Args {
    std::string config;
    std::string config_b;
    std::string trace;
    std::string out;
    std::string signal;
    std::string wheel = "FL";
    bool parallel = false;
    std::size_t stride = 1;
    double threshold = 0.02;
    double factor = 1.5;
    int max_iterations = 20;
    bool refine = false;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Writes to the named file, or to `fallback` when the name is empty.
template <class F>
void emit(const std::string& path, std::ostream& fallback, F&& f) {
    if (path.empty()) {
        f(fallback);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw UsageError(path + ": cannot open for writing");
    f(file);
}

int simulate(const Args& a, std::ostream& out) {
    const ScenarioConfig cfg = parse_config(a.config);
    const SimResult r = run_scenario(cfg, {a.parallel, a.stride});
    if (!a.out.empty()) write_trace_file(a.out, cfg, r.trace);
    write_summary(out, cfg, r.summary);
    return r.summary.tripped ? kBarrierTrip : kOk;
}

int compare(const Args& a, std::ostream& out) {
    const ScenarioConfig x = parse_config(a.config);
    const ScenarioConfig y = parse_config(a.config_b);
    const Comparison c = compare_controllers(x, y, {a.parallel, 1});
    emit(a.out, out, [&](std::ostream& o) { write_comparison(o, c); });
    return kOk;
}

int verify(const Args& a, std::ostream& out) {
    const TraceFile tf = read_trace_file(a.trace);
    const ScenarioConfig cfg = tf.config();
    if (!a.config.empty()) {
        const ScenarioConfig given = parse_config(a.config);
        if (config_hash(given) != tf.config_hash)
            throw UsageError("trace " + a.trace + " was produced by a different config (hash " + tf.config_hash +
                             ", given " + config_hash(given) + ")");
    }
    const VerificationReport rep = verify_trace(cfg, tf.trace);
    emit(a.out, out, [&](std::ostream& o) { write_report(o, rep); });
    return rep.pass() ? kOk : kCheckFailed;
}

int tune(const Args& a, std::ostream& out, std::ostream& err) {
    ScenarioConfig cfg = parse_config(a.config);
    if (cfg.controller != ControllerKind::Rtovc) throw UsageError("tune needs an rtovc scenario");
    double inertia_over_radius = 0.0;
    for (std::size_t w = 0; w < kWheelCount; ++w) {
        if (!cfg.wheels[w].enabled) continue;
        const WheelParams p = cfg.nominal_params(w);
        inertia_over_radius = std::max(inertia_over_radius, p.inertia / p.radius);
    }
    TuneOptions opt;
    opt.initial = cfg.gains;
    opt.initial.k5 = std::max(opt.initial.k5, inertia_over_radius);
    opt.inertia_over_radius = inertia_over_radius;
    opt.rms_threshold = a.threshold;
    opt.ramp_factor = a.factor;
    opt.max_iterations = a.max_iterations;
    opt.refine_rates = a.refine;
    opt.dt = cfg.dt;
    const TuneProbe probe = [&](const Gains& g) {
        ScenarioConfig c = cfg;
        c.gains = g;
        const SimResult r = run_scenario(c, {a.parallel, 1});
        if (r.summary.tripped) return std::numeric_limits<double>::infinity();
        double worst = 0.0;
        for (const WheelSummary& w : r.summary.wheels) worst = std::max(worst, w.rms_error);
        return worst;
    };
    try {
        const TuneResult t = auto_tune(probe, opt);
        cfg.gains = t.gains;
        err << "tuned after " << t.iterations << " iterations, probe rms " << format_double(t.rms) << " m/s\n";
        emit(a.out, out, [&](std::ostream& o) { o << serialize_config(cfg); });
        return kOk;
    } catch (const TuningFailed& f) {
        cfg.gains = f.best();
        err << f.what() << "; best-so-far gains written\n";
        emit(a.out, out, [&](std::ostream& o) { o << serialize_config(cfg); });
        return kCheckFailed;
    }
}

int plotdata(const Args& a, std::ostream& out) {
    const TraceFile tf = read_trace_file(a.trace);
    std::uint32_t wheel = kWheelCount;
    for (std::uint32_t w = 0; w < kWheelCount; ++w)
        if (a.wheel == kWheelNames[w]) wheel = w;
    if (wheel == kWheelCount) throw UsageError("unknown wheel '" + a.wheel + "'");
    std::vector<std::pair<double, double>> s;
    try {
        s = tf.signal(a.signal, wheel);
    } catch (const std::out_of_range& e) {
        throw UsageError(e.what());
    }
    emit(a.out, out, [&](std::ostream& o) {
        o << "# t " << a.signal << " wheel=" << a.wheel << '\n';
        for (const auto& [t, v] : s) o << format_double(t) << ' ' << format_double(v) << '\n';
    });
    return kOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"RTOVC wheel-drive controller simulator and stability checker", "rtovc"};
    app.require_subcommand(1);
    Args a;

    auto* sim = app.add_subcommand("simulate", "Run a scenario and write its trace");
    sim->add_option("config", a.config, "Scenario config file")->required();
    sim->add_option("-o,--out", a.out, "Trace output file");
    sim->add_flag("--parallel", a.parallel, "Advance the wheels on separate threads");
    sim->add_option("--stride", a.stride, "Record every Nth step")->check(CLI::PositiveNumber);

    auto* cmp = app.add_subcommand("compare", "Compare two controllers on the same plant");
    cmp->add_option("config_a", a.config, "First scenario config")->required();
    cmp->add_option("config_b", a.config_b, "Second scenario config")->required();
    cmp->add_option("-o,--out", a.out, "Table output file");
    cmp->add_flag("--parallel", a.parallel, "Advance the wheels on separate threads");

    auto* ver = app.add_subcommand("verify", "Check the stability chain on a trace");
    ver->add_option("trace", a.trace, "Trace file")->required();
    ver->add_option("-c,--config", a.config, "Config the trace must have been produced by");
    ver->add_option("-o,--out", a.out, "Report output file");

    auto* tun = app.add_subcommand("tune", "Ramp the tracking gains until the probe RMS is small");
    tun->add_option("config", a.config, "Probe scenario config")->required();
    tun->add_option("-o,--out", a.out, "Tuned config output file");
    tun->add_option("--threshold", a.threshold, "Target RMS error, m/s")->check(CLI::PositiveNumber);
    tun->add_option("--factor", a.factor, "Multiplicative gain ramp")->check(CLI::Range(1.0001, 100.0));
    tun->add_option("--max-iter", a.max_iterations, "Iteration cap")->check(CLI::PositiveNumber);
    tun->add_flag("--refine", a.refine, "Also raise the adaptation rates");
    tun->add_flag("--parallel", a.parallel, "Advance the wheels on separate threads");

    auto* plt = app.add_subcommand("plotdata", "Print one trace signal as two columns");
    plt->add_option("trace", a.trace, "Trace file")->required();
    plt->add_option("--signal", a.signal, "Column name")->required();
    plt->add_option("--wheel", a.wheel, "FL, FR, RL or RR");
    plt->add_option("-o,--out", a.out, "Output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*sim) return simulate(a, out);
        if (*cmp) return compare(a, out);
        if (*ver) return verify(a, out);
        if (*tun) return tune(a, out, err);
        if (*plt) return plotdata(a, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const PlantFault& e) {
        err << "plant fault: " << e.what() << '\n';
        return kCheckFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kCheckFailed;
    }
    return kUsage;
}

}  // namespace rtovc::cli
