#pragma once

#include <functional>
#include <stdexcept>

#include "rtovc/controller.hpp"

namespace rtovc {

/// Runs a probe scenario with the candidate gains and returns its tracking RMS (m/s).
/// A tripped probe should return +infinity.
using TuneProbe = std::function<double(const Gains&)>;

struct TuneOptions {
    Gains initial;
    double inertia_over_radius = 0.0;  // nominal J_w / r
    double rms_threshold = 0.02;       // m/s
    double ramp_factor = 1.5;
    int max_iterations = 20;
    bool refine_rates = false;
    double dt = 1e-3;
};

struct TuneResult {
    Gains gains;
    double rms = 0.0;
    int iterations = 0;
};

class TuningFailed : public std::runtime_error {
public:
    TuningFailed(const Gains& best, double best_rms, int iterations);
    const Gains& best() const noexcept { return best_; }
    double best_rms() const noexcept { return best_rms_; }
    int iterations() const noexcept { return iterations_; }

private:
    Gains best_;
    double best_rms_;
    int iterations_;
};

/// Gain ramp: fix k5 above J_w/r, grow k1 and k6 until the probe RMS falls under the threshold.
TuneResult auto_tune(const TuneProbe& probe, const TuneOptions& options);

}  // namespace rtovc
