#pragma once

#include <filesystem>
#include <string>

#include "rtovc/config_io.hpp"
#include "rtovc/scenario.hpp"

namespace rtovc::testing {

inline std::string scenario_path(const std::string& name) {
    return (std::filesystem::path(RTOVC_SCENARIO_DIR) / (name + ".cfg")).string();
}

inline ScenarioConfig load_scenario(const std::string& name) { return parse_config(scenario_path(name)); }

/// Desk-scale wheel used by the shipped scenarios.
inline void desk_plant(ScenarioConfig& cfg) {
    for (auto& w : cfg.wheels) {
        w.plant.inertia = 70.0;
        w.plant.damping = 5.0;
        w.plant.coulomb_friction = 20.0;
        w.hydraulics.bulk_modulus = 2.0e8;
        w.hydraulics.leakage = 3.0e-11;
    }
}

inline ScenarioConfig small_scenario(double duration = 2.0) {
    ScenarioConfig cfg;
    cfg.name = "small";
    cfg.duration = duration;
    cfg.reference.knots = {{0.0, 0.0}, {1.0, 0.2}};
    desk_plant(cfg);
    return cfg;
}

}  // namespace rtovc::testing
