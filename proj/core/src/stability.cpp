#include "rtovc/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rtovc/errors.hpp"

namespace rtovc {

double StabilityAssumptions::psi1_star(const Gains& g) const noexcept {
    return (2.0 / g.k2) * (rho1 * mu1 * mu1 / a1_lower);
}

double StabilityAssumptions::psi2_star(const Gains& g) const noexcept {
    return (2.0 / g.k7) * (rho2 * mu2 * mu2 / (a2_lower * a2_lower));
}

void StabilityAssumptions::validate() const {
    if (!(a1_lower > 0 && a2_lower > 0)) throw ConfigError("gain lower bounds must be positive");
    if (!(mu1 >= 0 && mu2 >= 0 && m1_bound >= 0 && m2_bound >= 0))
        throw ConfigError("disturbance bounds must be non-negative");
    if (!(rho1 > 0 && rho2 > 0 && rho3 > 0 && rho4 > 0))
        throw ConfigError("rho constants must be positive");
}

double theta(double x, double alpha) {
    if (!(std::abs(x) < alpha)) throw BarrierViolation(BarrierCause::TrackingError, std::abs(x) / alpha);
    const double r = x / alpha;
    return -std::log1p(-r * r);
}

InequalityCheck log_inequality_check(double x, double alpha) {
    const double th = theta(x, alpha);
    const double r2 = (x / alpha) * (x / alpha);
    double margin;
    if (r2 < 1e-3) {
        // x^2/Q - theta = sum_{n>=2} (1 - 1/n) r^{2n}
        margin = 0.0;
        double p = r2;
        for (int n = 2; n <= 8; ++n) {
            p *= r2;
            margin += (1.0 - 1.0 / n) * p;
        }
    } else {
        margin = x * x / (alpha * alpha - x * x) - th;
    }
    return {margin > 0.0, margin};
}

BlfSample blf_values(const BlfInput& in, const StabilityAssumptions& a, const Gains& g,
                     const SafetyBounds& b) {
    BlfSample s;
    s.t = in.t;
    s.q1 = b.alpha1 * b.alpha1 - in.v_e * in.v_e;
    s.q2 = b.tau_max * b.tau_max - in.tau_m_hat * in.tau_m_hat;
    s.theta1 = theta(in.v_e, b.alpha1);
    try {
        s.theta2 = theta(in.tau_m_hat, b.tau_max);
    } catch (const BarrierViolation& v) {
        throw BarrierViolation(BarrierCause::TorqueBound, v.ratio());
    }
    const double e1 = in.psi1_hat - a.psi1_star(g);
    const double e2 = in.psi2_hat - a.psi2_star(g);
    s.v1 = s.theta1 / (2.0 * a.a1_lower) + e1 * e1 / (2.0 * g.k3);
    s.v2 = s.theta2 / (2.0 * a.a2_lower) + e2 * e2 / (2.0 * g.k8);
    s.v_bar = s.v1 + s.v2;
    return s;
}

DecayConstants decay_constants(const Gains& g, const StabilityAssumptions& a) {
    DecayConstants k;
    const double p1 = a.psi1_star(g);
    const double p2 = a.psi2_star(g);
    k.omega11 = std::min(a.a1_lower * g.k1, g.k3 * g.k4);
    k.omega12 = 0.5 * g.k4 * p1 * p1;
    k.omega21 = std::min(a.a2_lower * g.k6, g.k8 * g.k9);
    k.omega22 = 0.5 * g.k9 * p2 * p2;
    k.omega = std::min(k.omega11, k.omega21);
    k.omega_bar = k.omega12 + k.omega22;
    return k;
}

double LyapunovReport::strict_fraction() const noexcept {
    return steps_checked == 0 ? 1.0
                              : static_cast<double>(steps_strict) / static_cast<double>(steps_checked);
}

LyapunovReport lyapunov_decrease_check(std::span<const BlfSample> v, const DecayConstants& k,
                                       std::span<const double> m1, std::span<const double> m2,
                                       const StabilityAssumptions& a, double dt) {
    const std::size_t n = v.size();
    if (m1.size() != n || m2.size() != n)
        throw std::invalid_argument("bounding series must match the BLF series length");
    if (!(dt > 0)) throw std::invalid_argument("dt must be positive");

    LyapunovReport r;
    r.worst_margin = r.worst_margin_with_slack = std::numeric_limits<double>::infinity();
    if (n < 3) return r;

    std::vector<double> curvature(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i)
        curvature[i] = std::abs(v[i + 1].v_bar - 2.0 * v[i].v_bar + v[i - 1].v_bar) / (dt * dt);
    curvature[0] = curvature[1];
    curvature[n - 1] = curvature[n - 2];

    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!std::isfinite(v[i].v_bar)) throw std::invalid_argument("non-finite BLF value");
        const double vdot = (v[i + 1].v_bar - v[i - 1].v_bar) / (2.0 * dt);
        const double residual =
            0.25 * (m1[i] * m1[i] / a.rho1 + m2[i] * m2[i] / a.rho2) + k.omega_bar;
        const double margin = -k.omega * v[i].v_bar + residual - vdot;
        const double slack =
            10.0 * dt * std::max({curvature[i - 1], curvature[i], curvature[i + 1]});
        ++r.steps_checked;
        if (margin >= 0) ++r.steps_strict;
        if (margin + slack >= 0) ++r.steps_with_slack;
        if (margin < r.worst_margin) {
            r.worst_margin = margin;
            r.worst_time = v[i].t;
        }
        r.worst_margin_with_slack = std::min(r.worst_margin_with_slack, margin + slack);
    }
    return r;
}

namespace {

struct EnvelopeProblem {
    std::span<const double> x;
    double dt;
    double scale;  // c_bar * theta(t0)

    // sup_k (x_k - scale e^{-b t_k})
    double residual(double b) const {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < x.size(); ++k)
            worst = std::max(worst, x[k] - scale * std::exp(-b * dt * static_cast<double>(k)));
        return worst;
    }
};

}  // namespace

EnvelopeFit envelope_fit(std::span<const double> x, double dt) {
    if (x.size() < 100) throw std::invalid_argument("envelope fit needs at least 100 samples");
    if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
    for (double v : x)
        if (!std::isfinite(v) || v < 0)
            throw NotExponentiallyBounded("series must be finite and non-negative");

    constexpr double kRateLo = 1e-6;
    const double rate_hi = 10.0 / dt;
    const double x0 = x.front();
    const double peak = *std::max_element(x.begin(), x.end());
    const std::size_t tail = std::max<std::size_t>(10, x.size() / 10);
    const double floor = *std::max_element(x.end() - static_cast<std::ptrdiff_t>(tail), x.end());

    EnvelopeFit fit;
    if (x0 == 0.0 || peak == 0.0) {
        fit.c_bar = 1.0;
        fit.b_bar = rate_hi;
        fit.zeta = peak;
        fit.fit_residual = 0.0;
        fit.decaying = peak == 0.0;
        return fit;
    }

    fit.c_bar = std::max(1.0, peak / x0);
    const EnvelopeProblem prob{x, dt, fit.c_bar * x0};
    const double tol = 1e-12 * peak;
    auto zeta_at = [&](double b) { return std::max(floor, prob.residual(b)); };

    const double zeta_min = zeta_at(kRateLo);
    auto feasible = [&](double b) { return zeta_at(b) <= zeta_min + tol; };

    constexpr int kGrid = 241;
    const double ratio = std::log(rate_hi / kRateLo);
    auto grid = [&](int i) { return kRateLo * std::exp(ratio * i / (kGrid - 1)); };
    int lo = 0, hi = kGrid - 1;
    if (feasible(grid(hi))) {
        lo = hi;
    } else {
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            (feasible(grid(mid)) ? lo : hi) = mid;
        }
    }
    double b_lo = grid(lo);
    if (lo < kGrid - 1) {
        double b_hi = grid(lo + 1);
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (b_lo + b_hi);
            (feasible(mid) ? b_lo : b_hi) = mid;
        }
    }
    fit.b_bar = b_lo;
    const double res = prob.residual(fit.b_bar);
    fit.zeta = std::max(floor, res);
    fit.fit_residual = res - fit.zeta;
    fit.decaying = fit.zeta < x0;
    return fit;
}

std::vector<double> torque_level_disturbance(std::span<const double> tau_m_hat,
                                             std::span<const double> u_raw,
                                             std::span<const double> a2, double dt) {
    const std::size_t n = tau_m_hat.size();
    if (u_raw.size() != n || a2.size() != n)
        throw std::invalid_argument("series lengths differ");
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double rate = k + 1 < n ? (tau_m_hat[k + 1] - tau_m_hat[k]) / dt
                                      : (n > 1 ? (tau_m_hat[k] - tau_m_hat[k - 1]) / dt : 0.0);
        out[k] = rate - a2[k] * u_raw[k];
    }
    return out;
}

MeasuredBounds measure_bounds(std::span<const double> f1_star, std::span<const double> f2,
                              std::span<const double> a2, double a1_true,
                              double lower_bound_fraction) {
    if (f1_star.size() != f2.size() || f2.size() != a2.size() || a2.empty())
        throw std::invalid_argument("disturbance series lengths differ or are empty");
    MeasuredBounds out;
    StabilityAssumptions& a = out.assumptions;
    a.a1_lower = lower_bound_fraction * a1_true;
    a.a2_lower = lower_bound_fraction * *std::min_element(a2.begin(), a2.end());

    auto sup_abs = [](std::span<const double> s) {
        double m = 0.0;
        for (double v : s) m = std::max(m, std::abs(v));
        return m;
    };
    a.mu1 = sup_abs(f1_star);
    a.mu2 = sup_abs(f2);
    auto normalise = [](std::span<const double> s, double mu, std::vector<double>& m) {
        m.resize(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) m[k] = mu > 0 ? std::abs(s[k]) / mu : 0.0;
    };
    normalise(f1_star, a.mu1, out.m1);
    normalise(f2, a.mu2, out.m2);
    a.m1_bound = out.m1.empty() ? 0.0 : *std::max_element(out.m1.begin(), out.m1.end());
    a.m2_bound = out.m2.empty() ? 0.0 : *std::max_element(out.m2.begin(), out.m2.end());
    a.validate();
    return out;
}

VehicleAggregate vehicle_aggregate(std::span<const WheelSeries> wheels, double dt) {
    VehicleAggregate agg;
    if (wheels.empty()) return agg;
    const std::size_t n = wheels.front().blf.size();
    for (const WheelSeries& w : wheels)
        if (w.blf.size() != n) throw ConfigError("wheel traces differ in length");

    agg.v_total.assign(n, 0.0);
    agg.omega = std::numeric_limits<double>::infinity();
    std::vector<double> total_norm(n, 0.0);
    for (const WheelSeries& w : wheels) {
        agg.omega = std::min(agg.omega, w.constants.omega);
        std::vector<double> t1(n), t2(n);
        for (std::size_t k = 0; k < n; ++k) {
            agg.v_total[k] += w.blf[k].v_bar;
            t1[k] = w.blf[k].theta1;
            t2[k] = w.blf[k].theta2;
            total_norm[k] += t1[k] * t1[k] + t2[k] * t2[k];
        }
        agg.theta1_fits.push_back(envelope_fit(t1, dt));
        agg.theta2_fits.push_back(envelope_fit(t2, dt));
    }
    for (double& v : total_norm) v = std::sqrt(v);
    agg.total_fit = envelope_fit(total_norm, dt);
    return agg;
}

}  // namespace rtovc
