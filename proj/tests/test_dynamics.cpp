#include <gtest/gtest.h>

#include <cmath>

#include "cbo/dynamics.hpp"

using namespace cbo;

namespace {

Objective identity_1d() {
    return Objective("identity", 1, [](std::span<const double> x) { return x[0]; }, 0.0, 1.0, 1.0);
}

}  // namespace

TEST(Consensus, AlphaZeroIsArithmeticMean) {
    const Ensemble e = Ensemble::from_rows({{0.0}, {2.0}});
    EXPECT_EQ(consensus_point(e, 0.0, identity_1d()), (Point{1.0}));
}

TEST(Consensus, SingleParticleIsItself) {
    const Objective f = make_builtin("gauss-well", 2, {});
    const Ensemble e = Ensemble::from_rows({{0.3, -1.7}});
    for (double a : {0.0, 1.0, 50.0}) EXPECT_EQ(consensus_point(e, a, f), (Point{0.3, -1.7}));
}

TEST(Consensus, HandEvaluatedWeights) {
    const Ensemble e = Ensemble::from_rows({{0.0}, {1.0}});
    EXPECT_NEAR(consensus_point(e, std::log(3.0), identity_1d())[0], 0.25, 1e-15);
}

TEST(Consensus, StableForHugeAlpha) {
    const Ensemble e = Ensemble::from_rows({{0.0}, {1.0}});
    const Point m = consensus_point(e, 1e6, identity_1d());
    EXPECT_TRUE(std::isfinite(m[0]));
    EXPECT_NEAR(m[0], 0.0, 1e-300);
}

TEST(Consensus, WeightsSumToOne) {
    const Objective f = make_builtin("gauss-well", 2, {});
    const Ensemble e = Ensemble::from_rows({{0.0, 1.0}, {2.0, -1.0}, {0.5, 0.5}});
    const auto w = consensus_weights(e, 3.0, f);
    double s = 0.0;
    for (double x : w) s += x;
    EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(MeanPoint, Examples) {
    EXPECT_EQ(mean_point(Ensemble::from_rows({{-1.0}, {1.0}})), (Point{0.0}));
    EXPECT_EQ(mean_point(Ensemble::from_rows({{1.0, 2.0}, {3.0, 4.0}})), (Point{2.0, 3.0}));
}

TEST(Noise, Examples) {
    EXPECT_EQ(noise_factor(NoiseKind::isotropic, Point{3.0, 4.0}, Point{1.0, 0.0}), (Point{5.0, 0.0}));
    EXPECT_EQ(noise_factor(NoiseKind::anisotropic, Point{3.0, 4.0}, Point{1.0, 1.0}), (Point{3.0, 4.0}));
    for (NoiseKind k : {NoiseKind::isotropic, NoiseKind::anisotropic})
        EXPECT_EQ(noise_factor(k, Point{0.0, 0.0}, Point{0.7, -2.0}), (Point{0.0, 0.0}));
}

TEST(Noise, Prefactor) {
    EXPECT_EQ(noise_prefactor(NoiseKind::isotropic, 3), 3.0);
    EXPECT_EQ(noise_prefactor(NoiseKind::anisotropic, 3), 1.0);
    EXPECT_EQ(parse_noise_kind("isotropic"), NoiseKind::isotropic);
    EXPECT_THROW(parse_noise_kind("diagonal"), ConfigError);
}

TEST(EmStep, DeterministicContraction) {
    CboParams p;
    p.alpha = 0.0;
    p.sigma = 0.0;
    p.dt = 0.1;
    const Ensemble next = em_step(Ensemble::from_rows({{-1.0}, {1.0}}), p, identity_1d(), Matrix(2, 1));
    EXPECT_NEAR(next[0][0], -0.9, 1e-15);
    EXPECT_NEAR(next[1][0], 0.9, 1e-15);
}

TEST(EmStep, LoneParticleIsStationary) {
    CboParams p;
    p.sigma = 5.0;
    p.alpha = 3.0;
    const Objective f = make_builtin("gauss-well", 2, {});
    const Ensemble e = Ensemble::from_rows({{0.4, 1.1}});
    const Matrix dw = brownian_increments(RngStream{1, 0, 0, StreamDomain::increments}, 1, 2, p.dt);
    EXPECT_EQ(em_step(e, p, f, dw)[0][0], 0.4);
    EXPECT_EQ(em_step(e, p, f, dw)[0][1], 1.1);
}

TEST(EmStep, AnisotropicZeroComponentGetsNoNoise) {
    CboParams p;
    p.alpha = 0.0;
    p.sigma = 1.0;
    // Mean is (0, 0); particle 0 has a zero first component relative to it.
    const Ensemble e = Ensemble::from_rows({{0.0, 1.0}, {0.0, -1.0}});
    Matrix dw(2, 2, 0.3);
    const Ensemble next = em_step(e, p, make_builtin("gauss-well", 2, {}), dw);
    EXPECT_EQ(next[0][0], 0.0);
    EXPECT_EQ(next[1][0], 0.0);
    EXPECT_NE(next[0][1], 1.0 - p.dt);
}

TEST(EmStep, ShapeMismatchThrows) {
    CboParams p;
    EXPECT_THROW(em_step(Ensemble::from_rows({{0.0}}), p, identity_1d(), Matrix(2, 1)), InputError);
}

TEST(EmStep, NonFiniteAborts) {
    CboParams p;
    p.alpha = 0.0;
    p.sigma = 1.0;
    Matrix dw(2, 1);
    dw(0, 0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(em_step(Ensemble::from_rows({{-1.0}, {1.0}}), p, identity_1d(), dw), NumericError);
}

TEST(Simulate, ZeroHorizonReturnsInit) {
    CboParams p;
    p.horizon = 0.0;
    const Ensemble init = Ensemble::from_rows({{1.0}, {2.0}});
    const Ensemble out = simulate(init, p, identity_1d(), RngStream{});
    EXPECT_EQ(out.positions, init.positions);
    EXPECT_EQ(out.time, 0.0);
}

TEST(Simulate, DeterministicSpreadMatchesLinearOde) {
    CboParams p;
    p.alpha = 0.0;
    p.sigma = 0.0;
    p.dt = 1e-3;
    p.horizon = 1.0;
    const Ensemble init = Ensemble::from_rows({{-1.0}, {0.0}, {4.0}});
    const Ensemble out = simulate(init, p, identity_1d(), RngStream{});
    const double m = 1.0;
    for (std::size_t j = 0; j < 3; ++j) {
        const double expected = m + (init[j][0] - m) * std::exp(-1.0);
        EXPECT_NEAR(out[j][0], expected, 5e-3 * std::abs(init[j][0] - m) + 1e-15);
        // Exact for the discrete scheme.
        EXPECT_NEAR(out[j][0], m + (init[j][0] - m) * std::pow(1.0 - p.dt, 1000.0), 1e-12);
    }
    EXPECT_NEAR(out.time, 1.0, 1e-12);
}

TEST(Simulate, ObserversFireOnStrideAndFinalStep) {
    CboParams p;
    p.dt = 0.1;
    p.horizon = 1.05;   // 11 steps
    std::vector<std::size_t> seen;
    simulate(Ensemble::from_rows({{0.0}, {1.0}}), p, identity_1d(), RngStream{},
             {[&seen](const Ensemble&, std::size_t n) { seen.push_back(n); }}, SimulationOptions{5});
    EXPECT_EQ(seen, (std::vector<std::size_t>{0, 5, 10, 11}));
}

TEST(Simulate, RepeatableForSameStream) {
    CboParams p;
    p.sigma = 0.5;
    p.horizon = 1.0;
    const Objective f = make_builtin("gauss-well", 2, {});
    const Ensemble init = Ensemble::from_rows({{0.0, 1.0}, {2.0, -1.0}, {0.5, 0.5}});
    const RngStream s{77, 2, 0, StreamDomain::increments};
    EXPECT_EQ(simulate(init, p, f, s).positions, simulate(init, p, f, s).positions);
    EXPECT_NE(simulate(init, p, f, s).positions, simulate(init, p, f, s.for_replicate(3)).positions);
}

TEST(Params, Validation) {
    CboParams p;
    p.dt = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = CboParams{};
    p.sigma = -1.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = CboParams{};
    p.dt = 0.01;
    p.horizon = 10.0;
    EXPECT_EQ(p.step_count(), 1000u);
}
