#include <gtest/gtest.h>

#include <cmath>

#include "cbo/objectives.hpp"

using namespace cbo;

TEST(Builtins, SaturatingNormValues) {
    const Objective f = make_builtin("saturating-norm", 1, {0.0});
    const auto v = eval_batch(f, {{0.0}, {1.0}});
    EXPECT_EQ(v[0], 0.0);
    EXPECT_DOUBLE_EQ(v[1], 0.5);
    EXPECT_EQ(f.lipschitz(), 1.0);
}

TEST(Builtins, GaussWellValuesAndConstants) {
    const Objective f = make_builtin("gauss-well", 2, {});
    const Point origin{0.0, 0.0};
    EXPECT_EQ(f(origin), 0.0);
    EXPECT_NEAR(f.lipschitz(), std::exp(-0.5), 1e-15);
    EXPECT_NEAR(f.lipschitz(), 0.60653, 1e-5);
    EXPECT_EQ(f.upper_bound(), 1.0);
    EXPECT_EQ(f.lower_bound(), 0.0);
}

TEST(Builtins, MinimizerShiftsTheWell) {
    const Objective f = make_builtin("gauss-well", 2, {1.0, -2.0});
    EXPECT_EQ(f(Point{1.0, -2.0}), 0.0);
    EXPECT_NEAR(f(Point{2.0, -2.0}), 1.0 - std::exp(-0.5), 1e-15);
    ASSERT_TRUE(f.known_minimizer());
    EXPECT_EQ(*f.known_minimizer(), (Point{1.0, -2.0}));
}

TEST(Builtins, SoftRastriginHasNumericLipschitz) {
    const Objective f = make_builtin("soft-rastrigin", 2, {}, 10.0);
    EXPECT_TRUE(f.lipschitz_is_numeric());
    EXPECT_EQ(f(Point{0.0, 0.0}), 0.0);
    EXPECT_GT(f(Point{0.5, 0.0}), 0.0);
    EXPECT_LT(f(Point{0.5, 0.0}), 1.0);
}

TEST(Builtins, UnknownNameAndBadDimension) {
    EXPECT_THROW(make_builtin("ackley", 2, {}), ConfigError);
    EXPECT_THROW(make_builtin("gauss-well", 0, {}), ConfigError);
    EXPECT_THROW(make_builtin("gauss-well", 2, {1.0}), ConfigError);
}

TEST(Builtins, DimensionMismatchOnEvaluation) {
    const Objective f = make_builtin("gauss-well", 2, {});
    EXPECT_THROW(f(Point{1.0}), InputError);
}

TEST(Certification, BuiltinsPass) {
    for (const char* name : {"saturating-norm", "gauss-well", "soft-rastrigin"}) {
        const CertificationReport rep = certify_objective(make_builtin(name, 2, {}), 10000, 11);
        EXPECT_TRUE(rep.pass) << name << " max quotient " << rep.max_difference_quotient;
        EXPECT_EQ(rep.samples, 10000u);
    }
}

TEST(Certification, UnderstatedLipschitzFailsWithWitness) {
    const Objective base = make_builtin("saturating-norm", 1, {});
    const Objective lying("liar", 1, [&base](std::span<const double> x) { return base(x); }, 0.0, 1.0, 0.1);
    const CertificationReport rep = certify_objective(lying, 10000, 3);
    EXPECT_FALSE(rep.pass);
    ASSERT_FALSE(rep.witness_x.empty());
    const double dq = std::abs(base(rep.witness_x) - base(rep.witness_y)) /
                      std::sqrt(squared_distance(rep.witness_x, rep.witness_y));
    EXPECT_GT(dq, 0.1);
}

TEST(Certification, ViolatedBoundFails) {
    const Objective unbounded("unbounded", 1, [](std::span<const double> x) { return x[0] * x[0]; }, 0.0, 1.0, 100.0);
    EXPECT_FALSE(certify_objective(unbounded, 1000, 1).pass);
}
