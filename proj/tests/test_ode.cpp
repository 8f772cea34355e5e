#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fwescape/ode.hpp"

using namespace fwescape;

namespace {

void decay(double, const OdeState<1>& y, OdeState<1>& dy) { dy[0] = -y[0]; }

void oscillator(double, const OdeState<2>& y, OdeState<2>& dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
}

}  // namespace

TEST(Dopri5, ExponentialDecayHitsTolerance) {
    OdeOptions opt;
    const auto res = integrate<1>(decay, {1.0}, 0.0, 1.0, opt, [](const DenseSegment<1>&) {});
    EXPECT_EQ(res.status, OdeStatus::reached_end);
    EXPECT_DOUBLE_EQ(res.t, 1.0);
    EXPECT_NEAR(res.y[0], std::exp(-1.0), 1e-10);
}

TEST(Dopri5, HarmonicOscillatorTenPeriods) {
    OdeOptions opt;
    const double T = 20.0 * M_PI;
    const auto res = integrate<2>(oscillator, {1.0, 0.0}, 0.0, T, opt,
                                  [](const DenseSegment<2>&) {});
    EXPECT_EQ(res.status, OdeStatus::reached_end);
    EXPECT_NEAR(res.y[0], 1.0, 1e-7);
    EXPECT_NEAR(res.y[1], 0.0, 1e-7);
}

TEST(Dopri5, DenseOutputInterpolatesInsideSteps) {
    OdeOptions opt;
    double worst = 0.0;
    integrate<1>(decay, {1.0}, 0.0, 2.0, opt, [&](const DenseSegment<1>& seg) {
        for (int k = 1; k < 4; ++k) {
            const double t = seg.t0 + k * (seg.t1 - seg.t0) / 4.0;
            worst = std::max(worst, std::abs(seg.eval(t)[0] - std::exp(-t)));
        }
    });
    EXPECT_LT(worst, 1e-7);
}

TEST(Dopri5, EventLocatedOnRisingCrossing) {
    OdeOptions opt;
    std::vector<OdeEvent<1>> events(1);
    events[0].g = [](double, const OdeState<1>& y) { return y[0] - 0.5; };
    events[0].direction = +1;
    auto rhs = [](double t, const OdeState<1>&, OdeState<1>& dy) { dy[0] = std::cos(t); };
    const auto res = integrate<1>(rhs, {0.0}, 0.0, 10.0, opt, events, [](const DenseSegment<1>&) {});
    ASSERT_EQ(res.status, OdeStatus::event);
    EXPECT_EQ(res.event_index, 0);
    // sin(t) = 1/2 first at t = pi/6; location accuracy is limited by the
    // cubic interpolant, not by the bisection width.
    EXPECT_NEAR(res.t, M_PI / 6.0, 5e-7);
    EXPECT_NEAR(res.y[0], 0.5, 5e-7);
}

TEST(Dopri5, FallingOnlyEventIgnoresRisingCrossing) {
    OdeOptions opt;
    std::vector<OdeEvent<1>> events(1);
    events[0].g = [](double, const OdeState<1>& y) { return y[0] - 0.5; };
    events[0].direction = -1;
    auto rhs = [](double t, const OdeState<1>&, OdeState<1>& dy) { dy[0] = std::cos(t); };
    const auto res = integrate<1>(rhs, {0.0}, 0.0, 10.0, opt, events, [](const DenseSegment<1>&) {});
    ASSERT_EQ(res.status, OdeStatus::event);
    // First falling crossing of 1/2 is at 5 pi / 6.
    EXPECT_NEAR(res.t, 5.0 * M_PI / 6.0, 5e-7);
}

TEST(Dopri5, EarliestOfSeveralEventsWins) {
    OdeOptions opt;
    std::vector<OdeEvent<1>> events(2);
    events[0].g = [](double, const OdeState<1>& y) { return y[0] - 0.9; };
    events[1].g = [](double, const OdeState<1>& y) { return y[0] - 0.4; };
    auto rhs = [](double, const OdeState<1>&, OdeState<1>& dy) { dy[0] = 1.0; };
    // Force one big accepted step so both crossings land in the same segment.
    opt.h_init = 2.0;
    const auto res = integrate<1>(rhs, {0.0}, 0.0, 2.0, opt, events, [](const DenseSegment<1>&) {});
    ASSERT_EQ(res.status, OdeStatus::event);
    EXPECT_EQ(res.event_index, 1);
    EXPECT_NEAR(res.t, 0.4, 1e-8);
}

TEST(Dopri5, StepBudgetIsReported) {
    OdeOptions opt;
    opt.max_steps = 3;
    const auto res = integrate<2>(oscillator, {1.0, 0.0}, 0.0, 1e6, opt,
                                  [](const DenseSegment<2>&) {});
    EXPECT_EQ(res.status, OdeStatus::max_steps);
    EXPECT_LT(res.t, 1e6);
}
