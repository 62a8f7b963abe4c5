#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "sgn/error.hpp"
#include "sgn/processes.hpp"

using namespace sgn;

namespace {

double sample_mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double sample_variance(const std::vector<double>& v) {
    const double m = sample_mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / (v.size() - 1);
}

}  // namespace

// =============================================================================
// Closed-form and recursion examples
// =============================================================================

TEST(Processes, HarmonicQuarterPeriods) {
    RngStream rng(1);
    const auto s = generate(Harmonic{1.0, 1.0, 0.0}, 3, std::numbers::pi / 2, rng);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_NEAR(s.values[0], 1.0, 1e-12);
    EXPECT_NEAR(s.values[1], 0.0, 1e-12);
    EXPECT_NEAR(s.values[2], -1.0, 1e-12);
}

TEST(Processes, LogisticHitsOneThenZero) {
    RngStream rng(1);
    const auto s = generate(Logistic{4.0, 0.5}, 3, 1.0, rng);
    EXPECT_EQ(s.values, (std::vector<double>{0.5, 1.0, 0.0}));
}

TEST(Processes, NoiseFreeOUStep) {
    RngStream rng(1);
    const auto s = generate(OU{0.1, 0.0, 0.0, 1.0}, 2, 1.0, rng);
    EXPECT_DOUBLE_EQ(s.values[0], 1.0);
    EXPECT_NEAR(s.values[1], 0.9048374180359595, 1e-15);
}

TEST(Processes, NoiseFreeAR1Recursion) {
    RngStream rng(1);
    const auto s = generate(AR1{0.5, 1.0, 0.0, 0.0}, 4, 1.0, rng);
    EXPECT_EQ(s.values, (std::vector<double>{0.0, 1.0, 1.5, 1.75}));
    EXPECT_EQ(s.dt, 1.0);
}

TEST(Processes, JumpDiffusionWithoutNoiseGrowsExponentially) {
    RngStream rng(1);
    JumpDiffusion p;
    p.alpha = 0.05;
    p.lambda = 0.0;
    p.sigma = 0.0;
    p.x0 = 1.0;
    const auto s = generate(p, 2, 1.0, rng);
    EXPECT_DOUBLE_EQ(s.values[0], 1.0);
    EXPECT_NEAR(s.values[1], 1.0512710963760241, 1e-15);
}

TEST(Processes, DampedOverdampedAndCriticalMatchInitialConditions) {
    RngStream rng(1);
    for (double b : {2.0, 3.0}) {  // critical, overdamped for a = 1
        const auto s = generate(Damped{1.0, b, 1.0, 0.5}, 2, 1e-6, rng);
        EXPECT_NEAR(s.values[0], 1.0, 1e-12);
        EXPECT_NEAR((s.values[1] - s.values[0]) / 1e-6, 0.5, 1e-5);
    }
}

TEST(Processes, DiscreteTimeIgnoresDt) {
    RngStream a(3), b(3);
    const auto s1 = generate(AR1{}, 50, 1.0, a);
    const auto s2 = generate(AR1{}, 50, 0.25, b);
    EXPECT_EQ(s1.values, s2.values);
    EXPECT_EQ(s2.dt, 1.0);
}

// =============================================================================
// Stationary moments
// =============================================================================

TEST(Processes, OUStationaryVariance) {
    RngStream rng(2024);
    const auto s = generate(OU{0.1, 0.0, 0.2, 0.0}, 100000, 1.0, rng);
    // sigma^2 / (2 theta)
    EXPECT_NEAR(sample_variance(s.values), 0.2, 0.05 * 0.2);
}

TEST(Processes, OULongRunMean) {
    RngStream rng(77);
    const std::size_t n = 1000000;
    const auto s = generate(OU{0.1, 0.0, 0.2, 0.0}, n, 1.0, rng);
    // Standard error of the mean of an AR(1) with phi = e^{-0.1}.
    const double phi = std::exp(-0.1);
    const double se = std::sqrt(0.2 * (1 + phi) / (1 - phi) / n);
    EXPECT_LT(std::abs(sample_mean(s.values)), 3 * se);
}

TEST(Processes, ArchWithoutFeedbackHasVarianceC) {
    RngStream rng(5);
    const auto s = generate(ARCH1{1.0, 0.0, 0.0}, 100000, 1.0, rng);
    EXPECT_NEAR(sample_variance(s.values), 1.0, 0.05);
}

// =============================================================================
// Invariants
// =============================================================================

TEST(Processes, SameStreamIsBitIdentical) {
    for (const auto& name : process_names()) {
        const ProcessSpec spec = default_process(name);
        RngStream a(9, 4), b(9, 4);
        EXPECT_EQ(generate(spec, 500, default_dt(spec), a).values, generate(spec, 500, default_dt(spec), b).values)
            << name;
    }
}

TEST(Processes, DeterministicVariantsIgnoreSeed) {
    for (const auto& name : {"harmonic", "damped", "logistic", "lorenz"}) {
        const ProcessSpec spec = default_process(name);
        RngStream a(1), b(999);
        EXPECT_EQ(generate(spec, 300, default_dt(spec), a).values, generate(spec, 300, default_dt(spec), b).values)
            << name;
    }
}

TEST(Processes, UndampedMatchesHarmonic) {
    RngStream rng(1);
    const auto h = generate(Harmonic{2.5, 0.3, -1.2}, 1000, 0.05, rng);
    const auto d = generate(Damped{2.5, 0.0, 0.3, -1.2}, 1000, 0.05, rng);
    for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(h.values[i], d.values[i], 1e-12);
}

TEST(Processes, ArmaWithoutMaTermIsAR1) {
    RngStream a(31), b(31);
    const auto ar = generate(AR1{0.7, 0.3, 1.5, 0.2}, 2000, 1.0, a);
    const auto arma = generate(ARMA11{0.7, 0.0, 0.3, 1.5, 0.2}, 2000, 1.0, b);
    EXPECT_EQ(ar.values, arma.values);
}

TEST(Processes, DistinctStreamsDiffer) {
    RngStream a(1, 0), b(1, 1);
    EXPECT_NE(generate(AR1{}, 100, 1.0, a).values, generate(AR1{}, 100, 1.0, b).values);
}

// =============================================================================
// Validation
// =============================================================================

TEST(Processes, RejectsOutOfRangeParameters) {
    RngStream rng(1);
    EXPECT_THROW(generate(Harmonic{0.0, 1.0, 0.0}, 10, 0.1, rng), ValidationError);
    EXPECT_THROW(generate(Damped{1.0, -0.1, 1.0, 0.0}, 10, 0.1, rng), ValidationError);
    EXPECT_THROW(generate(Logistic{4.5, 0.3}, 10, 1.0, rng), ValidationError);
    EXPECT_THROW(generate(Logistic{4.0, 1.0}, 10, 1.0, rng), ValidationError);
    EXPECT_THROW(generate(OU{0.0, 0.0, 0.2, 0.0}, 10, 1.0, rng), ValidationError);
    EXPECT_THROW(generate(OU{0.1, 0.0, -0.2, 0.0}, 10, 1.0, rng), ValidationError);
    JumpDiffusion jd;
    jd.x0 = 0.0;
    EXPECT_THROW(generate(jd, 10, 1.0, rng), ValidationError);
    EXPECT_THROW(generate(ARCH1{0.0, 0.5, 0.0}, 10, 1.0, rng), ValidationError);
    EXPECT_THROW(generate(ARCH1{1.0, 1.0, 0.0}, 10, 1.0, rng), ValidationError);
    EXPECT_THROW(generate(AR1{0.5, 0.0, -1.0, 0.0}, 10, 1.0, rng), ValidationError);
}

TEST(Processes, RejectsZeroLengthAndBadDt) {
    RngStream rng(1);
    EXPECT_THROW(generate(AR1{}, 0, 1.0, rng), ValidationError);
    EXPECT_THROW(generate(Harmonic{}, 10, 0.0, rng), ValidationError);
    EXPECT_THROW(generate(Harmonic{}, 10, -1.0, rng), ValidationError);
}

TEST(Processes, NamedParameterOverrides) {
    ProcessSpec spec = default_process("ou");
    set_parameter(spec, "theta", 0.25);
    EXPECT_DOUBLE_EQ(std::get<OU>(spec).theta, 0.25);
    EXPECT_DOUBLE_EQ(parameters(spec).at("theta"), 0.25);
    EXPECT_THROW(set_parameter(spec, "nosuch", 1.0), ValidationError);
    EXPECT_THROW(default_process("nosuch"), ValidationError);

    ProcessSpec lorenz = default_process("lorenz");
    set_parameter(lorenz, "component", 2);
    EXPECT_EQ(std::get<Lorenz>(lorenz).component, LorenzComponent::Z);
    EXPECT_THROW(set_parameter(lorenz, "component", 3), ValidationError);
}

// =============================================================================
// RK4
// =============================================================================

TEST(RK4, ZeroFieldIsIdentity) {
    const std::vector<double> s{1.0};
    const auto out = rk4_step(s, [](std::span<const double> x) { return std::vector<double>(x.size(), 0.0); }, 0.1);
    EXPECT_EQ(out, s);
}

TEST(RK4, ExponentialGrowth) {
    const std::vector<double> s{1.0};
    const auto out = rk4_step(s, [](std::span<const double> x) { return std::vector<double>(x.begin(), x.end()); }, 0.1);
    EXPECT_NEAR(out[0], 1.1051709180756477, 1e-7);
}

TEST(RK4, FifthOrderLocalError) {
    const Derivative f = [](std::span<const double> x) { return std::vector<double>(x.begin(), x.end()); };
    const std::vector<double> s{1.0};
    const double e1 = std::abs(rk4_step(s, f, 0.1)[0] - std::exp(0.1));
    const double e2 = std::abs(rk4_step(s, f, 0.05)[0] - std::exp(0.05));
    EXPECT_NEAR(std::log2(e1 / e2), 5.0, 0.2);
}

TEST(RK4, LorenzTrajectoryStaysOnAttractor) {
    RngStream rng(1);
    Lorenz p;
    const auto coarse = generate(p, 10001, 0.01, rng);
    // Oracle: same system at a tenth of the step.
    const auto fine = generate(p, 100001, 0.001, rng);
    double max_coarse = 0.0, max_fine = 0.0;
    for (double v : coarse.values) max_coarse = std::max(max_coarse, std::abs(v));
    for (double v : fine.values) max_fine = std::max(max_fine, std::abs(v));
    EXPECT_LT(max_coarse, 25.0);
    EXPECT_LT(max_fine, 25.0);
    // Before chaos separates them the two trajectories agree.
    for (std::size_t i = 0; i <= 100; ++i) EXPECT_NEAR(coarse.values[i], fine.values[10 * i], 1e-3);
}
