#include "rtovc/config_io.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "rtovc/errors.hpp"

namespace rtovc {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& n, const std::string& what) const {
        const YAML::Mark m = n.Mark();
        if (m.line >= 0)
            throw ConfigError(source_ + ":" + std::to_string(m.line + 1) + ": " + what);
        throw ConfigError(source_ + ": " + what);
    }

    void map(const YAML::Node& n, const std::string& where,
             std::initializer_list<std::pair<const char*, std::function<void(const YAML::Node&)>>> fields) {
        if (!n.IsMap()) fail(n, where + " must be a mapping");
        std::set<std::string> known;
        for (const auto& f : fields) known.insert(f.first);
        for (const auto& kv : n) {
            const std::string key = kv.first.as<std::string>();
            if (!known.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
        }
        for (const auto& f : fields)
            if (const YAML::Node v = n[f.first]) f.second(v);
    }

    double real(const YAML::Node& n, const std::string& key) const {
        if (!n.IsScalar()) fail(n, key + " must be a number");
        const std::string& s = n.Scalar();
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            fail(n, key + " must be a number, got '" + s + "'");
        return v;
    }

    std::uint64_t natural(const YAML::Node& n, const std::string& key) const {
        if (!n.IsScalar()) fail(n, key + " must be a non-negative integer");
        const std::string& s = n.Scalar();
        std::uint64_t v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            fail(n, key + " must be a non-negative integer, got '" + s + "'");
        return v;
    }

    bool boolean(const YAML::Node& n, const std::string& key) const {
        if (n.IsScalar() && n.Scalar() == "true") return true;
        if (n.IsScalar() && n.Scalar() == "false") return false;
        fail(n, key + " must be true or false");
    }

    std::string text(const YAML::Node& n, const std::string& key) const {
        if (!n.IsScalar()) fail(n, key + " must be a string");
        return n.Scalar();
    }

    std::pair<double, double> range(const YAML::Node& n, const std::string& key) const {
        if (!n.IsSequence() || n.size() != 2) fail(n, key + " must be a [low, high] pair");
        return {real(n[0], key), real(n[1], key)};
    }

    template <class F>
    void checked(const YAML::Node& n, F&& f) const {
        try {
            f();
        } catch (const ConfigError& e) {
            fail(n, e.what());
        }
    }

private:
    std::string source_;
};

void read_wheel_params(Reader& r, const YAML::Node& n, WheelParams& p) {
    r.map(n, "wheel", {
        {"radius", [&](const YAML::Node& v) { p.radius = r.real(v, "radius"); }},
        {"inertia", [&](const YAML::Node& v) { p.inertia = r.real(v, "inertia"); }},
        {"damping", [&](const YAML::Node& v) { p.damping = r.real(v, "damping"); }},
        {"coulomb_friction", [&](const YAML::Node& v) { p.coulomb_friction = r.real(v, "coulomb_friction"); }},
        {"normal_force", [&](const YAML::Node& v) { p.normal_force = r.real(v, "normal_force"); }},
        {"gear_ratio", [&](const YAML::Node& v) { p.gear_ratio = r.real(v, "gear_ratio"); }},
        {"friction_smoothing", [&](const YAML::Node& v) { p.friction_smoothing = r.real(v, "friction_smoothing"); }},
    });
    r.checked(n, [&] { p.validate(); });
}

void read_hydraulics(Reader& r, const YAML::Node& n, HydraulicParams& h) {
    r.map(n, "hydraulics", {
        {"displacement", [&](const YAML::Node& v) { h.displacement = r.real(v, "displacement"); }},
        {"bulk_modulus", [&](const YAML::Node& v) { h.bulk_modulus = r.real(v, "bulk_modulus"); }},
        {"eta_hm", [&](const YAML::Node& v) { h.eta_hm = r.real(v, "eta_hm"); }},
        {"eta_vol", [&](const YAML::Node& v) { h.eta_vol = r.real(v, "eta_vol"); }},
        {"flow_coefficient", [&](const YAML::Node& v) { h.flow_coefficient = r.real(v, "flow_coefficient"); }},
        {"supply_pressure", [&](const YAML::Node& v) { h.supply_pressure = r.real(v, "supply_pressure"); }},
        {"tank_pressure", [&](const YAML::Node& v) { h.tank_pressure = r.real(v, "tank_pressure"); }},
        {"guard_offset", [&](const YAML::Node& v) { h.guard_offset = r.real(v, "guard_offset"); }},
        {"leakage", [&](const YAML::Node& v) { h.leakage = r.real(v, "leakage"); }},
    });
    r.checked(n, [&] { h.validate(); });
}

PulseShape read_shape(Reader& r, const YAML::Node& n) {
    const std::string s = r.text(n, "shape");
    if (s == "trapezoid") return PulseShape::Trapezoid;
    if (s == "half_sine") return PulseShape::HalfSine;
    r.fail(n, "shape must be trapezoid or half_sine");
}

std::vector<Pulse> read_pulses(Reader& r, const YAML::Node& n, const std::string& where) {
    if (!n.IsSequence()) r.fail(n, where + " must be a list");
    std::vector<Pulse> out;
    for (const YAML::Node& e : n) {
        Pulse p;
        r.map(e, where + " entry", {
            {"start", [&](const YAML::Node& v) { p.start = r.real(v, "start"); }},
            {"end", [&](const YAML::Node& v) { p.end = r.real(v, "end"); }},
            {"amplitude", [&](const YAML::Node& v) { p.amplitude = r.real(v, "amplitude"); }},
            {"shape", [&](const YAML::Node& v) { p.shape = read_shape(r, v); }},
            {"ramp", [&](const YAML::Node& v) { p.ramp = r.real(v, "ramp"); }},
        });
        if (!(p.end > p.start)) r.fail(e, where + ": end must follow start");
        if (!(p.ramp >= 0)) r.fail(e, where + ": ramp must be non-negative");
        out.push_back(p);
    }
    return out;
}

void read_wheel(Reader& r, const YAML::Node& n, WheelConfig& w, const std::string& name) {
    DisturbanceModel& d = w.disturbance;
    r.map(n, "wheel " + name, {
        {"enabled", [&](const YAML::Node& v) { w.enabled = r.boolean(v, "enabled"); }},
        {"initial_velocity", [&](const YAML::Node& v) { w.initial_velocity = r.real(v, "initial_velocity"); }},
        {"static_load", [&](const YAML::Node& v) { w.static_load = r.real(v, "static_load"); }},
        {"wheel", [&](const YAML::Node& v) { read_wheel_params(r, v, w.plant); }},
        {"hydraulics", [&](const YAML::Node& v) { read_hydraulics(r, v, w.hydraulics); }},
        {"slip_events", [&](const YAML::Node& v) { d.slip_events = read_pulses(r, v, "slip_events"); }},
        {"wheel_torque", [&](const YAML::Node& v) { d.wheel_torque = read_pulses(r, v, "wheel_torque"); }},
        {"random_slip", [&](const YAML::Node& v) {
             RandomSlip& s = d.random_slip;
             r.map(v, "random_slip", {
                 {"count", [&](const YAML::Node& x) { s.count = static_cast<int>(r.natural(x, "count")); }},
                 {"window", [&](const YAML::Node& x) { std::tie(s.window_start, s.window_end) = r.range(x, "window"); }},
                 {"amplitude", [&](const YAML::Node& x) { std::tie(s.amplitude_min, s.amplitude_max) = r.range(x, "amplitude"); }},
                 {"length", [&](const YAML::Node& x) { std::tie(s.length_min, s.length_max) = r.range(x, "length"); }},
             });
         }},
        {"model_error", [&](const YAML::Node& v) {
             ModelError& m = d.model_error;
             r.map(v, "model_error", {
                 {"offset", [&](const YAML::Node& x) { m.offset = r.real(x, "offset"); }},
                 {"amplitude", [&](const YAML::Node& x) { m.amplitude = r.real(x, "amplitude"); }},
                 {"frequency", [&](const YAML::Node& x) { m.frequency = r.real(x, "frequency"); }},
             });
         }},
    });
}

}  // namespace

ScenarioConfig parse_config_string(std::string_view text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root || root.IsNull()) throw ConfigError(source + ": empty configuration");

    Reader r(source);
    ScenarioConfig c;
    WheelConfig shared;
    bool has_shared = false;
    YAML::Node wheels_node;
    bool has_wheels = false;

    r.map(root, "scenario", {
        {"name", [&](const YAML::Node& v) { c.name = r.text(v, "name"); }},
        {"duration", [&](const YAML::Node& v) { c.duration = r.real(v, "duration"); }},
        {"dt", [&](const YAML::Node& v) { c.dt = r.real(v, "dt"); }},
        {"plant_substeps", [&](const YAML::Node& v) { c.plant_substeps = static_cast<int>(r.natural(v, "plant_substeps")); }},
        {"seed", [&](const YAML::Node& v) { c.seed = r.natural(v, "seed"); }},
        {"controller", [&](const YAML::Node& v) {
             const std::string s = r.text(v, "controller");
             if (s == "rtovc") c.controller = ControllerKind::Rtovc;
             else if (s == "pid") c.controller = ControllerKind::Pid;
             else r.fail(v, "controller must be rtovc or pid");
         }},
        {"hydraulic_model", [&](const YAML::Node& v) {
             const std::string s = r.text(v, "hydraulic_model");
             if (s == "reduced") c.hydraulic_model = HydraulicModel::Reduced;
             else if (s == "pressure") c.hydraulic_model = HydraulicModel::Pressure;
             else r.fail(v, "hydraulic_model must be reduced or pressure");
         }},
        {"stop_on_trip", [&](const YAML::Node& v) { c.stop_on_trip = r.boolean(v, "stop_on_trip"); }},
        {"metrics_start", [&](const YAML::Node& v) { c.metrics_start = r.real(v, "metrics_start"); }},
        {"nominal_mismatch", [&](const YAML::Node& v) { c.nominal_mismatch = r.real(v, "nominal_mismatch"); }},
        {"valve_polarity", [&](const YAML::Node& v) { c.valve_polarity = r.real(v, "valve_polarity"); }},
        {"reference", [&](const YAML::Node& v) {
             if (!v.IsSequence()) r.fail(v, "reference must be a list of [t, v] knots");
             for (const YAML::Node& k : v) {
                 const auto [t, vel] = r.range(k, "reference knot");
                 if (!c.reference.knots.empty() && !(t > c.reference.knots.back().t))
                     r.fail(k, "reference knot times must increase");
                 c.reference.knots.push_back({t, vel});
             }
         }},
        {"gains", [&](const YAML::Node& v) {
             Gains& g = c.gains;
             r.map(v, "gains", {
                 {"k1", [&](const YAML::Node& x) { g.k1 = r.real(x, "k1"); }},
                 {"k2", [&](const YAML::Node& x) { g.k2 = r.real(x, "k2"); }},
                 {"k3", [&](const YAML::Node& x) { g.k3 = r.real(x, "k3"); }},
                 {"k4", [&](const YAML::Node& x) { g.k4 = r.real(x, "k4"); }},
                 {"k5", [&](const YAML::Node& x) { g.k5 = r.real(x, "k5"); }},
                 {"k6", [&](const YAML::Node& x) { g.k6 = r.real(x, "k6"); }},
                 {"k7", [&](const YAML::Node& x) { g.k7 = r.real(x, "k7"); }},
                 {"k8", [&](const YAML::Node& x) { g.k8 = r.real(x, "k8"); }},
                 {"k9", [&](const YAML::Node& x) { g.k9 = r.real(x, "k9"); }},
             });
             r.checked(v, [&] { g.validate(); });
         }},
        {"bounds", [&](const YAML::Node& v) {
             SafetyBounds& b = c.bounds;
             r.map(v, "bounds", {
                 {"eps1", [&](const YAML::Node& x) { b.eps1 = r.real(x, "eps1"); }},
                 {"v_max", [&](const YAML::Node& x) { b.v_max = r.real(x, "v_max"); }},
                 {"alpha1", [&](const YAML::Node& x) { b.alpha1 = r.real(x, "alpha1"); }},
                 {"tau_max", [&](const YAML::Node& x) { b.tau_max = r.real(x, "tau_max"); }},
                 {"u_hi", [&](const YAML::Node& x) { b.u_hi = r.real(x, "u_hi"); }},
                 {"u_lo", [&](const YAML::Node& x) { b.u_lo = r.real(x, "u_lo"); }},
                 {"guard_fraction", [&](const YAML::Node& x) { b.guard_fraction = r.real(x, "guard_fraction"); }},
             });
             r.checked(v, [&] { b.validate(); });
         }},
        {"adaptive_init", [&](const YAML::Node& v) {
             r.map(v, "adaptive_init", {
                 {"psi1_hat", [&](const YAML::Node& x) { c.adaptive_init.psi1_hat = r.real(x, "psi1_hat"); }},
                 {"psi2_hat", [&](const YAML::Node& x) { c.adaptive_init.psi2_hat = r.real(x, "psi2_hat"); }},
             });
         }},
        {"pid", [&](const YAML::Node& v) {
             PidGains& p = c.pid;
             r.map(v, "pid", {
                 {"kp", [&](const YAML::Node& x) { p.kp = r.real(x, "kp"); }},
                 {"ki", [&](const YAML::Node& x) { p.ki = r.real(x, "ki"); }},
                 {"kd", [&](const YAML::Node& x) { p.kd = r.real(x, "kd"); }},
                 {"integral_clamp", [&](const YAML::Node& x) { p.integral_clamp = r.real(x, "integral_clamp"); }},
             });
         }},
        {"coupling", [&](const YAML::Node& v) {
             r.map(v, "coupling", {
                 {"enabled", [&](const YAML::Node& x) { c.coupling.enabled = r.boolean(x, "enabled"); }},
                 {"gain", [&](const YAML::Node& x) { c.coupling.gain = r.real(x, "gain"); }},
             });
         }},
        {"analysis", [&](const YAML::Node& v) {
             AnalysisConfig& a = c.analysis;
             r.map(v, "analysis", {
                 {"rho1", [&](const YAML::Node& x) { a.rho1 = r.real(x, "rho1"); }},
                 {"rho2", [&](const YAML::Node& x) { a.rho2 = r.real(x, "rho2"); }},
                 {"rho3", [&](const YAML::Node& x) { a.rho3 = r.real(x, "rho3"); }},
                 {"rho4", [&](const YAML::Node& x) { a.rho4 = r.real(x, "rho4"); }},
                 {"lower_bound_fraction", [&](const YAML::Node& x) { a.lower_bound_fraction = r.real(x, "lower_bound_fraction"); }},
             });
         }},
        {"plant", [&](const YAML::Node& v) {
             has_shared = true;
             read_wheel(r, v, shared, "defaults");
         }},
        {"wheels", [&](const YAML::Node& v) {
             wheels_node = v;
             has_wheels = true;
         }},
    });

    if (has_shared)
        for (WheelConfig& w : c.wheels) w = shared;
    if (has_wheels) {
        if (!wheels_node.IsMap()) r.fail(wheels_node, "wheels must be a mapping of FL/FR/RL/RR");
        for (const auto& kv : wheels_node) {
            const std::string key = kv.first.as<std::string>();
            std::size_t idx = kWheelCount;
            for (std::size_t w = 0; w < kWheelCount; ++w)
                if (key == kWheelNames[w]) idx = w;
            if (idx == kWheelCount) r.fail(kv.first, "unknown wheel '" + key + "'");
            read_wheel(r, kv.second, c.wheels[idx], key);
        }
    }
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return c;
}

ScenarioConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_string(ss.str(), path);
}

namespace {

struct Writer {
    std::ostringstream out;

    void kv(const std::string& ind, const char* key, const std::string& v) { out << ind << key << ": " << v << '\n'; }
    void num(const std::string& ind, const char* key, double v) { kv(ind, key, format_double(v)); }

    static std::string flow(std::initializer_list<std::pair<const char*, double>> items) {
        std::string s = "{";
        bool first = true;
        for (const auto& [k, v] : items) {
            if (!first) s += ", ";
            first = false;
            s += k;
            s += ": ";
            s += format_double(v);
        }
        return s + "}";
    }

    void pulses(const std::string& ind, const char* key, const std::vector<Pulse>& ps) {
        if (ps.empty()) {
            kv(ind, key, "[]");
            return;
        }
        out << ind << key << ":\n";
        for (const Pulse& p : ps)
            out << ind << "  - {start: " << format_double(p.start) << ", end: " << format_double(p.end)
                << ", amplitude: " << format_double(p.amplitude) << ", shape: " << to_string(p.shape)
                << ", ramp: " << format_double(p.ramp) << "}\n";
    }
};

}  // namespace

std::string serialize_config(const ScenarioConfig& c) {
    Writer w;
    w.kv("", "name", "\"" + c.name + "\"");
    w.num("", "duration", c.duration);
    w.num("", "dt", c.dt);
    w.kv("", "plant_substeps", std::to_string(c.plant_substeps));
    w.kv("", "seed", std::to_string(c.seed));
    w.kv("", "controller", to_string(c.controller));
    w.kv("", "hydraulic_model", to_string(c.hydraulic_model));
    w.kv("", "stop_on_trip", c.stop_on_trip ? "true" : "false");
    w.num("", "metrics_start", c.metrics_start);
    w.num("", "nominal_mismatch", c.nominal_mismatch);
    w.num("", "valve_polarity", c.valve_polarity);
    w.out << "reference:\n";
    for (const Knot& k : c.reference.knots)
        w.out << "  - [" << format_double(k.t) << ", " << format_double(k.v) << "]\n";
    const Gains& g = c.gains;
    w.kv("", "gains", Writer::flow({{"k1", g.k1}, {"k2", g.k2}, {"k3", g.k3}, {"k4", g.k4}, {"k5", g.k5},
                                    {"k6", g.k6}, {"k7", g.k7}, {"k8", g.k8}, {"k9", g.k9}}));
    const SafetyBounds& b = c.bounds;
    w.kv("", "bounds", Writer::flow({{"eps1", b.eps1}, {"v_max", b.v_max}, {"alpha1", b.alpha1},
                                     {"tau_max", b.tau_max}, {"u_hi", b.u_hi}, {"u_lo", b.u_lo},
                                     {"guard_fraction", b.guard_fraction}}));
    w.kv("", "adaptive_init",
         Writer::flow({{"psi1_hat", c.adaptive_init.psi1_hat}, {"psi2_hat", c.adaptive_init.psi2_hat}}));
    w.kv("", "pid", Writer::flow({{"kp", c.pid.kp}, {"ki", c.pid.ki}, {"kd", c.pid.kd},
                                  {"integral_clamp", c.pid.integral_clamp}}));
    w.kv("", "coupling", std::string("{enabled: ") + (c.coupling.enabled ? "true" : "false") +
                             ", gain: " + format_double(c.coupling.gain) + "}");
    const AnalysisConfig& a = c.analysis;
    w.kv("", "analysis", Writer::flow({{"rho1", a.rho1}, {"rho2", a.rho2}, {"rho3", a.rho3}, {"rho4", a.rho4},
                                       {"lower_bound_fraction", a.lower_bound_fraction}}));
    w.out << "wheels:\n";
    for (std::size_t i = 0; i < kWheelCount; ++i) {
        const WheelConfig& wc = c.wheels[i];
        const WheelParams& p = wc.plant;
        const HydraulicParams& h = wc.hydraulics;
        const DisturbanceModel& d = wc.disturbance;
        w.out << "  " << kWheelNames[i] << ":\n";
        const std::string ind = "    ";
        w.kv(ind, "enabled", wc.enabled ? "true" : "false");
        w.num(ind, "initial_velocity", wc.initial_velocity);
        w.num(ind, "static_load", wc.static_load);
        w.kv(ind, "wheel", Writer::flow({{"radius", p.radius}, {"inertia", p.inertia}, {"damping", p.damping},
                                         {"coulomb_friction", p.coulomb_friction},
                                         {"normal_force", p.normal_force}, {"gear_ratio", p.gear_ratio},
                                         {"friction_smoothing", p.friction_smoothing}}));
        w.kv(ind, "hydraulics",
             Writer::flow({{"displacement", h.displacement}, {"bulk_modulus", h.bulk_modulus},
                           {"eta_hm", h.eta_hm}, {"eta_vol", h.eta_vol},
                           {"flow_coefficient", h.flow_coefficient}, {"supply_pressure", h.supply_pressure},
                           {"tank_pressure", h.tank_pressure}, {"guard_offset", h.guard_offset},
                           {"leakage", h.leakage}}));
        w.pulses(ind, "slip_events", d.slip_events);
        w.pulses(ind, "wheel_torque", d.wheel_torque);
        const RandomSlip& rs = d.random_slip;
        w.kv(ind, "random_slip",
             "{count: " + std::to_string(rs.count) + ", window: [" + format_double(rs.window_start) + ", " +
                 format_double(rs.window_end) + "], amplitude: [" + format_double(rs.amplitude_min) + ", " +
                 format_double(rs.amplitude_max) + "], length: [" + format_double(rs.length_min) + ", " +
                 format_double(rs.length_max) + "]}");
        w.kv(ind, "model_error", Writer::flow({{"offset", d.model_error.offset},
                                               {"amplitude", d.model_error.amplitude},
                                               {"frequency", d.model_error.frequency}}));
    }
    return w.out.str();
}

std::string config_hash(const ScenarioConfig& cfg) { return fnv1a_hex(serialize_config(cfg)); }

}  // namespace rtovc
