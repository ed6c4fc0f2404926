#include "rtovc/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rtovc {

TuningFailed::TuningFailed(const Gains& best, double best_rms, int iterations)
    : std::runtime_error("gain tuning did not reach the RMS threshold after " +
                         std::to_string(iterations) + " iterations (best " +
                         std::to_string(best_rms) + " m/s)"),
      best_(best),
      best_rms_(best_rms),
      iterations_(iterations) {}

namespace {

double evaluate(const TuneProbe& probe, const Gains& g) {
    const double rms = probe(g);
    return std::isfinite(rms) ? rms : std::numeric_limits<double>::infinity();
}

// Raise the adaptation rates while the probe does not get worse.
Gains refine(const TuneProbe& probe, Gains g, double& rms, const TuneOptions& o) {
    for (int i = 0; i < o.max_iterations; ++i) {
        Gains next = g;
        next.k3 *= o.ramp_factor;
        next.k8 *= o.ramp_factor;
        if (o.dt * next.k3 * next.k4 >= 1.0 || o.dt * next.k8 * next.k9 >= 1.0) break;
        const double r = evaluate(probe, next);
        if (!(r <= rms)) break;
        g = next;
        rms = r;
    }
    return g;
}

}  // namespace

TuneResult auto_tune(const TuneProbe& probe, const TuneOptions& o) {
    if (!(o.ramp_factor > 1.0)) throw std::invalid_argument("ramp factor must exceed 1");
    if (o.max_iterations < 1) throw std::invalid_argument("iteration cap must be positive");

    Gains g = o.initial;
    g.validate();
    g.k5 = std::max(g.k5, o.inertia_over_radius);

    Gains best = g;
    double best_rms = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= o.max_iterations; ++it) {
        const double rms = evaluate(probe, g);
        if (rms < best_rms) {
            best_rms = rms;
            best = g;
        }
        if (rms < o.rms_threshold) {
            double final_rms = rms;
            if (o.refine_rates) g = refine(probe, g, final_rms, o);
            return {g, final_rms, it};
        }
        g.k1 *= o.ramp_factor;
        g.k6 *= o.ramp_factor;
    }
    throw TuningFailed(best, best_rms, o.max_iterations);
}

}  // namespace rtovc
