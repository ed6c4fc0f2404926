#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rtovc/report.hpp"
#include "rtovc/simulator.hpp"
#include "rtovc/stability.hpp"
#include "test_support.hpp"

namespace rtovc {
namespace {

TEST(LogBarrier, Values) {
    EXPECT_EQ(theta(0.0, 0.25), 0.0);
    EXPECT_NEAR(theta(0.1, 0.25), std::log(0.0625 / 0.0525), 1e-14);
    EXPECT_NEAR(theta(0.1, 0.25), 0.174353, 1e-6);
    EXPECT_EQ(theta(-0.13, 0.25), theta(0.13, 0.25));
    EXPECT_THROW(theta(0.25, 0.25), BarrierViolation);
}

TEST(LogBarrier, InequalityExamples) {
    const InequalityCheck c = log_inequality_check(0.1, 0.25);
    const double lhs = 0.01 / 0.0525;
    EXPECT_NEAR(c.margin, lhs - std::log(0.0625 / 0.0525), 1e-14);
    EXPECT_NEAR(c.margin, 0.016123, 1e-6);
    EXPECT_TRUE(c.holds);
    const InequalityCheck tiny = log_inequality_check(1e-6, 0.25);
    EXPECT_TRUE(tiny.holds);
    EXPECT_GT(tiny.margin, 0.0);
    EXPECT_LT(tiny.margin, 1e-20);
}

TEST(LogBarrier, InequalityHoldsOnRandomPairs) {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> alpha(1e-3, 1e3), frac(-1.0, 1.0);
    double worst = INFINITY;
    for (int i = 0; i < 1'000'000; ++i) {
        const double a = alpha(rng);
        const double x = frac(rng) * a * (1.0 - 1e-9);
        if (x == 0.0) continue;
        const InequalityCheck c = log_inequality_check(x, a);
        worst = std::min(worst, c.margin);
        ASSERT_GT(c.margin, -1e-12) << "x=" << x << " alpha=" << a;
    }
    EXPECT_GT(worst, 0.0);
}

TEST(LogBarrier, SeriesBranchAgreesWithLongDouble) {
    for (double r : {3e-3, 0.01, 0.03, 0.0316}) {
        const long double r2 = static_cast<long double>(r) * r;
        const long double oracle = r2 / (1.0L - r2) + std::log1p(-r2);
        const double m = log_inequality_check(r, 1.0).margin;
        EXPECT_NEAR(m, static_cast<double>(oracle), 1e-10 * static_cast<double>(oracle));
    }
}

StabilityAssumptions assumptions(double a1, double a2) {
    StabilityAssumptions a;
    a.a1_lower = a1;
    a.a2_lower = a2;
    return a;
}

TEST(BarrierFunctions, Values) {
    const Gains g;
    const SafetyBounds b;
    const StabilityAssumptions a = assumptions(0.00854, 1.0);
    const BlfSample zero = blf_values({0.0, 0.0, 0.0, 0.0, 0.0}, a, g, b);
    EXPECT_EQ(zero.v_bar, 0.0);
    const BlfSample s = blf_values({0.0, 0.1, 0.0, 0.0, 0.0}, a, g, b);
    EXPECT_NEAR(s.v1, std::log(0.0625 / 0.0525) / (2.0 * 0.00854), 1e-9);
    EXPECT_NEAR(s.v1, 10.2081, 1e-4);
    EXPECT_NEAR(s.q1, 0.0525, 1e-15);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ve(-0.24, 0.24), tm(-280.0, 280.0), psi(0.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const BlfSample r = blf_values({0.0, ve(rng), tm(rng), psi(rng), psi(rng)}, a, g, b);
        ASSERT_GE(r.v1, 0.0);
        ASSERT_GE(r.v2, 0.0);
        ASSERT_GE(r.v_bar, std::max(r.v1, r.v2));
    }
}

TEST(DecayRates, Examples) {
    const Gains g;
    const DecayConstants k = decay_constants(g, assumptions(0.00854, 5.0));
    EXPECT_NEAR(k.omega11, std::min(0.00854 * 3.0, 1.0), 1e-15);
    EXPECT_NEAR(k.omega11, 0.02562, 1e-12);
    EXPECT_EQ(k.omega_bar, 0.0);
    EXPECT_LE(k.omega, k.omega11);
    EXPECT_LE(k.omega, k.omega21);

    StabilityAssumptions d = assumptions(0.00854, 5.0);
    d.mu1 = 0.2;
    d.mu2 = 3.0;
    const DecayConstants kd = decay_constants(g, d);
    const double p1 = (2.0 / g.k2) * d.mu1 * d.mu1 / d.a1_lower;
    const double p2 = (2.0 / g.k7) * d.mu2 * d.mu2 / (d.a2_lower * d.a2_lower);
    EXPECT_NEAR(kd.omega_bar, 0.5 * g.k4 * p1 * p1 + 0.5 * g.k9 * p2 * p2, 1e-12);
}

TEST(LyapunovCheck, ZeroTrajectoryHolds) {
    std::vector<BlfSample> v(50);
    for (std::size_t i = 0; i < v.size(); ++i) v[i].t = 1e-3 * static_cast<double>(i);
    std::vector<double> m(50, 0.5);
    const StabilityAssumptions a = assumptions(1.0, 1.0);
    DecayConstants k;
    k.omega = 0.3;
    k.omega_bar = 0.1;
    const LyapunovReport r = lyapunov_decrease_check(v, k, m, m, a, 1e-3);
    EXPECT_EQ(r.steps_checked, 48u);
    EXPECT_EQ(r.steps_strict, 48u);
    EXPECT_NEAR(r.worst_margin, 0.25 * (0.25 + 0.25) + 0.1, 1e-15);
}

TEST(LyapunovCheck, GrowthIsFlagged) {
    std::vector<BlfSample> v(100);
    for (std::size_t i = 0; i < v.size(); ++i) v[i].v_bar = 0.01 * static_cast<double>(i);
    std::vector<double> m(100, 0.0);
    DecayConstants k;
    k.omega = 1.0;
    const LyapunovReport r = lyapunov_decrease_check(v, k, m, m, assumptions(1.0, 1.0), 1e-3);
    EXPECT_EQ(r.steps_strict, 0u);
    EXPECT_LT(r.worst_margin, 0.0);
}

TEST(Envelope, RecoversExponentialRate) {
    const double dt = 1e-3;
    std::vector<double> x(20'000);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = 0.3 * std::exp(-dt * static_cast<double>(k));
    const EnvelopeFit f = envelope_fit(x, dt);
    EXPECT_TRUE(f.valid());
    EXPECT_TRUE(f.decaying);
    EXPECT_NEAR(f.b_bar, 1.0, 0.05);
    EXPECT_LT(f.zeta, 1e-6 * 0.3);
    EXPECT_DOUBLE_EQ(f.c_bar, 1.0);
}

TEST(Envelope, RateScalesWithDecay) {
    const double dt = 1e-3;
    for (double rate : {0.5, 4.0, 30.0}) {
        std::vector<double> x(30'000);
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::exp(-rate * dt * static_cast<double>(k));
        EXPECT_NEAR(envelope_fit(x, dt).b_bar, rate, 0.05 * rate);
    }
}

TEST(Envelope, ConstantSeriesIsNotDecaying) {
    std::vector<double> x(500, 0.7);
    const EnvelopeFit f = envelope_fit(x, 1e-3);
    EXPECT_GE(f.zeta, 0.7);
    EXPECT_FALSE(f.decaying);
    EXPECT_GT(f.b_bar, 0.0);
}

TEST(Envelope, ZeroSeries) {
    std::vector<double> x(500, 0.0);
    const EnvelopeFit f = envelope_fit(x, 1e-3);
    EXPECT_TRUE(f.valid());
    EXPECT_EQ(f.zeta, 0.0);
}

TEST(Envelope, ResidualFloorFromTail) {
    const double dt = 1e-3;
    std::vector<double> x(10'000);
    for (std::size_t k = 0; k < x.size(); ++k)
        x[k] = 0.05 + 0.2 * std::exp(-2.0 * dt * static_cast<double>(k));
    const EnvelopeFit f = envelope_fit(x, dt);
    EXPECT_TRUE(f.valid());
    EXPECT_NEAR(f.zeta, 0.05, 0.01);
    EXPECT_GT(f.b_bar, 0.0);
    for (std::size_t k = 0; k < x.size(); ++k)
        ASSERT_LE(x[k], f.c_bar * x[0] * std::exp(-f.b_bar * dt * static_cast<double>(k)) + f.zeta +
                            1e-12);
}

TEST(Envelope, RejectsBadInput) {
    std::vector<double> small(10, 1.0);
    EXPECT_THROW(envelope_fit(small, 1e-3), std::invalid_argument);
    std::vector<double> bad(200, 1.0);
    bad[50] = NAN;
    EXPECT_THROW(envelope_fit(bad, 1e-3), NotExponentiallyBounded);
}

TEST(DisturbanceBounds, Measurement) {
    const std::vector<double> f1{0.1, -0.4, 0.2}, f2{1.0, 2.0, -3.0}, a2{5.0, 4.0, 6.0};
    const MeasuredBounds m = measure_bounds(f1, f2, a2, 0.01, 0.9);
    EXPECT_DOUBLE_EQ(m.assumptions.mu1, 0.4);
    EXPECT_DOUBLE_EQ(m.assumptions.mu2, 3.0);
    EXPECT_DOUBLE_EQ(m.assumptions.a1_lower, 0.009);
    EXPECT_DOUBLE_EQ(m.assumptions.a2_lower, 3.6);
    EXPECT_DOUBLE_EQ(m.m1[1], 1.0);
    EXPECT_DOUBLE_EQ(m.m2[0], 1.0 / 3.0);
    EXPECT_LE(m.assumptions.m1_bound, 1.0);

    const std::vector<double> tau{0.0, 1.0, 3.0}, u{0.5, 0.5, 0.5}, gain{2.0, 2.0, 2.0};
    const std::vector<double> f = torque_level_disturbance(tau, u, gain, 0.5);
    EXPECT_DOUBLE_EQ(f[0], 2.0 - 1.0);
    EXPECT_DOUBLE_EQ(f[1], 4.0 - 1.0);
    EXPECT_DOUBLE_EQ(f[2], 4.0 - 1.0);
}

WheelSeries synthetic_series(double scale, double omega) {
    WheelSeries w;
    w.constants.omega = omega;
    for (int k = 0; k < 400; ++k) {
        BlfSample s;
        s.t = 1e-3 * k;
        s.theta1 = scale * std::exp(-1e-2 * k);
        s.theta2 = 0.5 * s.theta1;
        s.v_bar = s.theta1 + s.theta2;
        w.blf.push_back(s);
    }
    return w;
}

TEST(VehicleAggregation, IdenticalWheelsSumFourfold) {
    const WheelSeries one = synthetic_series(0.2, 0.7);
    const std::vector<WheelSeries> four(4, one);
    const VehicleAggregate agg = vehicle_aggregate(four, 1e-3);
    for (std::size_t k = 0; k < one.blf.size(); ++k) ASSERT_DOUBLE_EQ(agg.v_total[k], 4.0 * one.blf[k].v_bar);
    EXPECT_EQ(agg.omega, 0.7);
    EXPECT_TRUE(agg.total_fit.valid());
}

TEST(VehicleAggregation, SlowestWheelSetsRate) {
    std::vector<WheelSeries> w{synthetic_series(0.2, 0.05), synthetic_series(0.0, 0.9),
                               synthetic_series(0.0, 0.8), synthetic_series(0.0, 0.7)};
    EXPECT_EQ(vehicle_aggregate(w, 1e-3).omega, 0.05);
    std::vector<WheelSeries> quiet(4, synthetic_series(0.0, 1.0));
    const VehicleAggregate q = vehicle_aggregate(quiet, 1e-3);
    for (double v : q.v_total) ASSERT_EQ(v, 0.0);
    w[2].blf.pop_back();
    EXPECT_THROW(vehicle_aggregate(w, 1e-3), ConfigError);
}

TEST(StabilityChain, DisturbanceFreeDecay) {
    ScenarioConfig cfg = testing::small_scenario(8.0);
    cfg.reference.knots = {{0.0, 0.0}};
    cfg.nominal_mismatch = 0.0;
    for (auto& w : cfg.wheels) w.initial_velocity = 0.2;
    const SimResult r = run_scenario(cfg);
    const WheelVerification v = analyse_wheel(cfg, r.trace, 0);
    ASSERT_GT(v.blf.size(), 1000u);
    EXPECT_LT(v.blf.back().theta1, 1e-6 * v.blf.front().theta1);
    EXPECT_TRUE(v.theta1_fit.valid());
    EXPECT_TRUE(v.theta1_fit.decaying);
    EXPECT_LE(v.theta1_fit.zeta, 1e-3);
    EXPECT_EQ(v.lyapunov.steps_strict, v.lyapunov.steps_checked);
}

}  // namespace
}  // namespace rtovc
