#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cbo/analysis.hpp"
#include "cbo/assignment.hpp"

using namespace cbo;

namespace {

Ensemble random_ensemble(std::mt19937_64& gen, std::size_t J, std::size_t d, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Ensemble e(J, d);
    for (double& x : e.positions.data()) x = n(gen);
    return e;
}

// Brute-force W2 over all permutations.
double brute_w2(const Ensemble& a, const Ensemble& b) {
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) c += squared_distance(a[j], b[perm[j]]);
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::sqrt(best / static_cast<double>(a.size()));
}

MomentSeries series(std::vector<double> t, std::vector<double> v) {
    MomentSeries s;
    s.times = std::move(t);
    s.values = std::move(v);
    return s;
}

}  // namespace

TEST(Moments, Examples) {
    EXPECT_EQ(centered_moment(Ensemble::from_rows({{3.0, 1.0}}), 2.0), 0.0);
    EXPECT_EQ(centered_moment(Ensemble::from_rows({{-1.0}, {1.0}}), 2.0), 1.0);
    EXPECT_EQ(raw_moment(Ensemble::from_rows({{0.0}, {0.0}}), 3.0), 0.0);
    EXPECT_EQ(raw_moment(Ensemble::from_rows({{-1.0}, {1.0}}), 4.0), 1.0);
}

TEST(Moments, TranslationInvariance) {
    std::mt19937_64 gen(1);
    for (int i = 0; i < 50; ++i) {
        Ensemble e = random_ensemble(gen, 20, 3);
        Ensemble shifted = e;
        for (std::size_t j = 0; j < e.size(); ++j)
            for (std::size_t k = 0; k < 3; ++k) shifted.positions(j, k) += 5.0 * static_cast<double>(k + 1);
        for (double p : {2.0, 3.0, 4.0})
            EXPECT_NEAR(centered_moment(shifted, p), centered_moment(e, p), 1e-9 * centered_moment(e, p));
    }
}

TEST(Huygens, Examples) {
    EXPECT_EQ(huygens_residual(Ensemble::from_rows({{-1.0}, {1.0}})), 0.0);
    EXPECT_EQ(huygens_residual(Ensemble::from_rows({{0.0}, {2.0}})), 0.0);
    EXPECT_NEAR(huygens_residual(Ensemble::from_rows({{1.5, -2.0}})), 0.0, 1e-15);
}

TEST(W2, Examples) {
    const Ensemble a = Ensemble::from_rows({{0.0}, {1.0}});
    EXPECT_EQ(exact_w2(a, a), 0.0);
    EXPECT_NEAR(exact_w2(Ensemble::from_rows({{0.0, 0.0}}), Ensemble::from_rows({{3.0, 4.0}})), 5.0, 1e-15);
    EXPECT_NEAR(exact_w2(a, Ensemble::from_rows({{1.0}, {2.0}})), 1.0, 1e-15);
}

TEST(W2, PermutationInvariantAndBelowIdentityPairing) {
    std::mt19937_64 gen(4);
    for (int i = 0; i < 30; ++i) {
        const Ensemble a = random_ensemble(gen, 12, 2), b = random_ensemble(gen, 12, 2);
        Ensemble c = b;
        std::vector<Point> rows;
        for (std::size_t j = 0; j < c.size(); ++j) rows.emplace_back(c[j].begin(), c[j].end());
        std::reverse(rows.begin(), rows.end());
        EXPECT_NEAR(exact_w2(a, b), exact_w2(a, Ensemble::from_rows(rows)), 1e-12);
        EXPECT_LE(exact_w2(a, b), identity_pairing_w2(a, b) + 1e-12);
    }
}

TEST(W2, SizeLimits) {
    EXPECT_THROW(exact_w2(Ensemble(513, 1), Ensemble(513, 1)), ScaleError);
    EXPECT_THROW(exact_w2(Ensemble(3, 1), Ensemble(4, 1)), InputError);
}

TEST(Assignment, MatchesBruteForceOnRandomCosts) {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + trial % 7;
        Matrix cost(n, n);
        for (double& x : cost.data()) x = u(gen);
        const Assignment a = solve_assignment(cost);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        do {
            double c = 0.0;
            for (std::size_t j = 0; j < n; ++j) c += cost(j, perm[j]);
            best = std::min(best, c);
        } while (std::next_permutation(perm.begin(), perm.end()));
        EXPECT_NEAR(a.cost, best, 1e-9);
        std::vector<std::size_t> cols = a.row_to_col;
        std::sort(cols.begin(), cols.end());
        for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(cols[j], j);
    }
}

TEST(W2, MatchesBruteForceSmall) {
    std::mt19937_64 gen(9);
    for (int i = 0; i < 40; ++i) {
        const std::size_t J = 1 + i % 6;
        const Ensemble a = random_ensemble(gen, J, 2), b = random_ensemble(gen, J, 2);
        EXPECT_NEAR(exact_w2(a, b), brute_w2(a, b), 1e-12);
    }
}

TEST(Fits, ExactExponential) {
    std::vector<double> t, v;
    for (int i = 0; i <= 10; ++i) {
        t.push_back(0.1 * i);
        v.push_back(std::exp(-2.0 * 0.1 * i));
    }
    const FitResult f = fit_exp_decay(series(t, v), 0, t.size());
    EXPECT_NEAR(f.estimate, 2.0, 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    EXPECT_EQ(f.window_lo, 0u);
    EXPECT_EQ(f.window_hi, 11u);
}

TEST(Fits, ConstantAndNoisyExponential) {
    std::vector<double> t, flat, noisy;
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i <= 10; ++i) {
        t.push_back(0.1 * i);
        flat.push_back(3.0);
        noisy.push_back(std::exp(-0.2 * i) * (1.0 + 0.01 * u(gen)));
    }
    EXPECT_NEAR(fit_exp_decay(series(t, flat), 0, 11).estimate, 0.0, 1e-14);
    const double r = fit_exp_decay(series(t, noisy), 0, 11).estimate;
    EXPECT_GE(r, 1.9);
    EXPECT_LE(r, 2.1);
}

TEST(Fits, RejectsNonpositiveAndShortWindows) {
    EXPECT_THROW(fit_exp_decay(series({0, 1, 2}, {1.0, 0.0, 0.5}), 0, 3), FitError);
    EXPECT_THROW(fit_exp_decay(series({0, 1, 2}, {1.0, 0.5, 0.25}), 1, 2), FitError);
}

TEST(Fits, PowerLaws) {
    std::vector<double> J{16, 32, 64, 128}, inv, half, flat;
    for (double j : J) {
        inv.push_back(1.0 / j);
        half.push_back(1.0 / std::sqrt(j));
        flat.push_back(0.3);
    }
    const FitResult a = fit_power_law(J, inv);
    EXPECT_NEAR(a.estimate, -1.0, 1e-12);
    EXPECT_NEAR(a.r_squared, 1.0, 1e-12);
    EXPECT_NEAR(fit_power_law(J, half).estimate, -0.5, 1e-12);
    EXPECT_NEAR(fit_power_law(J, flat).estimate, 0.0, 1e-12);
}

TEST(Excursions, Examples) {
    std::vector<MomentSeries> runs{series({0.0, 1.0}, {1.0, 0.5}), series({0.0, 1.0}, {2.0, 1.0}),
                                   series({0.0, 1.0}, {3.0, 0.1})};
    EXPECT_EQ(excursion_probability(runs, 0.0, 1e300, 0.0), 0.0);
    EXPECT_EQ(excursion_probability(runs, 0.0, 0.0, 0.0), 1.0);
    EXPECT_NEAR(excursion_probability(runs, 0.0, 2.0, 0.5), 1.0 / 3.0, 1e-15);
    // The weight e^{κ t} lifts late values: run 1 reaches e^{ln 4} 1 = 4, run 0 only 2.
    EXPECT_NEAR(excursion_probability(runs, std::log(4.0), 3.5, 0.0), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(excursion_probability(runs, std::log(4.0), 2.5, 0.0), 2.0 / 3.0, 1e-15);
}

TEST(Excursions, RelativeBaseline) {
    std::vector<MomentSeries> runs{series({0.0, 1.0}, {1.0, 0.5}), series({0.0, 1.0}, {1.0, 3.0})};
    EXPECT_EQ(excursion_probability_relative(runs, 0.0, 1.0), 0.5);
    EXPECT_EQ(excursion_probability_relative(runs, 0.0, 1e9), 0.0);
}

TEST(Jensen, HoldsOnRandomEnsembles) {
    std::mt19937_64 gen(12);
    const Objective f = make_builtin("saturating-norm", 3, {});
    for (int i = 0; i < 100; ++i) {
        const Ensemble e = random_ensemble(gen, 15, 3, 2.0);
        for (double q : {2.0, 4.0}) {
            const auto [lhs, rhs] = jensen_gap(e, 2.0, f, q);
            EXPECT_LE(lhs, rhs * (1.0 + 1e-12));
        }
    }
}

TEST(WmStability, Examples) {
    std::mt19937_64 gen(3);
    const Objective f = make_builtin("gauss-well", 2, {});
    const Ensemble a = random_ensemble(gen, 8, 2), b = random_ensemble(gen, 8, 2);
    const auto [l0, r0] = wm_stability_gap(a, b, 0.0, f);
    EXPECT_NEAR(l0, 0.0, 1e-15);
    EXPECT_EQ(r0, 0.0);
    const auto [l1, r1] = wm_stability_gap(a, a, 1.0, f);
    EXPECT_EQ(l1, 0.0);
    EXPECT_EQ(r1, 0.0);
    const auto [l2, r2] = wm_stability_gap(a, b, 1.0, f);
    EXPECT_LE(l2, r2);
}

TEST(WmMc, AlphaZeroMatchesSampleMeanVariance) {
    const InitialLaw law{LawKind::gaussian, {0.0}, 1.0};
    const Objective f = make_builtin("gauss-well", 1, {});
    const std::size_t J = 32;
    const Estimate e = wm_mc_error(law, f, 0.0, J, 100 * J, 1000, RngStream{4, 0, 0, StreamDomain::sampling});
    EXPECT_EQ(e.n, 1000u);
    // The reference mean adds its own variance 1/N to the expectation.
    EXPECT_NEAR(e.mean, 1.0 / J + 1.0 / (100.0 * J), 3.0 * e.std_error + 1.0 / (100.0 * J));
}

TEST(WmMc, Preconditions) {
    const InitialLaw law{LawKind::gaussian, {0.0}, 1.0};
    const Objective f = make_builtin("gauss-well", 1, {});
    EXPECT_THROW(wm_mc_error(law, f, 1.0, 64, 6399, 10, RngStream{}), ConfigError);
    EXPECT_THROW(wm_mc_error(law, make_builtin("gauss-well", 2, {}), 1.0, 4, 400, 10, RngStream{}), ConfigError);
}

TEST(Summaries, Estimate) {
    const Estimate e = summarize({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(e.mean, 2.5);
    EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
    EXPECT_EQ(summarize({7.0}).std_error, 0.0);
}
