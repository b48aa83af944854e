#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cbo/constants.hpp"

using namespace cbo;

namespace {

ProblemProfile profile(double sigma, double spread, NoiseKind noise = NoiseKind::anisotropic, std::size_t d = 1) {
    ProblemProfile p;
    p.alpha = 1.0;
    p.sigma = sigma;
    p.noise = noise;
    p.dim = d;
    p.f_lower = 0.0;
    p.f_upper = spread;
    return p;
}

void expect_rel(double got, double want, double tol = 1e-12) {
    EXPECT_LE(std::abs(got - want), tol * std::abs(want)) << "got " << got << " want " << want;
}

// Independent transcriptions used as oracles.
double oracle_lambda(double p, double tau, double s, double a) {
    const double b = 1.0 + std::exp(a / p);
    return p * (1.0 - 0.5 * (p - 2.0 + tau) * s * s * b * b);
}

double oracle_bdg_upper(double p) {
    if (p < 2.0) return std::pow(32.0 / p, p / 2.0);
    if (p == 2.0) return 4.0;
    return std::pow(std::pow(p, p + 1.0) / (2.0 * std::pow(p - 1.0, p - 1.0)), p / 2.0);
}

}  // namespace

TEST(Lambda, SpotValues) {
    for (double p : {2.0, 4.0, 8.0}) EXPECT_EQ(lambda_p(profile(0.0, 1.0), p), p);
    expect_rel(lambda_p(profile(0.5, 0.0), 2.0), 1.0);
    expect_rel(lambda_p(profile(0.1, 0.0, NoiseKind::isotropic, 3), 8.0), 6.56);
}

TEST(Lambda, DecreasingInSigma) {
    const ProblemProfile a = profile(0.1, 1.0), b = profile(0.2, 1.0);
    for (double p : {2.0, 3.0, 8.0}) EXPECT_GT(lambda_p(a, p), lambda_p(b, p));
}

TEST(SigmaTilde, SpotValues) {
    expect_rel(sigma_tilde(profile(0.0, 0.0)), std::sqrt(1.0 / 18.0));
    expect_rel(sigma_tilde(profile(0.0, 0.0, NoiseKind::isotropic, 2)), std::sqrt(1.0 / 24.0));
    EXPECT_NEAR(sigma_tilde(profile(0.0, 0.0)), 0.235702, 1e-6);
    double prev = sigma_tilde(profile(0.0, 0.0));
    for (double a : {0.5, 1.0, 5.0, 20.0}) {
        const double s = sigma_tilde(profile(0.0, a));
        EXPECT_LT(s, prev);
        prev = s;
    }
}

TEST(Bdg, SpotValues) {
    EXPECT_EQ(bdg_constants(2.0).lower, 1.0);
    EXPECT_EQ(bdg_constants(2.0).upper, 4.0);
    expect_rel(bdg_constants(4.0).upper, std::pow(1024.0 / 54.0, 2.0));
    EXPECT_NEAR(bdg_constants(4.0).upper, 359.594, 0.01);
    expect_rel(bdg_constants(1.0).upper, std::sqrt(32.0));
    expect_rel(bdg_constants(1.0).lower, 0.5);
    expect_rel(bdg_constants(4.0).lower, 1.0 / 64.0);
    for (double p : {0.5, 1.5, 3.0, 8.0}) expect_rel(bdg_constants(p).upper, oracle_bdg_upper(p));
    EXPECT_THROW(bdg_constants(0.0), InputError);
}

TEST(Cm, SpotValues) {
    ProblemProfile p = profile(0.1, 1.0);
    p.alpha = 0.0;
    EXPECT_EQ(c_m(p), 0.0);
    ProblemProfile q = profile(0.1, 0.0);
    q.lipschitz = 1.0;
    expect_rel(c_m(q), 2.0);
    ProblemProfile r = profile(0.1, 1.0);
    r.lipschitz = std::exp(-0.5);
    expect_rel(c_m(r), 2.0 * std::exp(1.5));
}

TEST(Cwm, SpotValues) {
    ProblemProfile p = profile(0.1, std::log(2.0));
    expect_rel(c_wm_p(p, 2.0), 4.0 * std::pow(1.0 + std::sqrt(2.0), 2.0));
    ProblemProfile z = profile(0.1, 0.0);
    z.c_mz[4.0] = 7.0;
    expect_rel(c_wm_p(z, 4.0), 7.0 * 16.0);
    ProblemProfile strict = profile(0.1, 1.0);
    strict.allow_default_c_mz = false;
    EXPECT_THROW(c_wm_p(strict, 4.0), ConfigError);
    EXPECT_LT(c_wm_p(profile(0.1, 0.5), 2.0), c_wm_p(profile(0.1, 1.0), 2.0));
}

TEST(Cmz, DefaultsAreConventional) {
    EXPECT_EQ(default_c_mz(2.0), 1.0);
    expect_rel(default_c_mz(4.0), std::pow(18.0 * 8.0 / std::sqrt(3.0), 4.0));
}

TEST(Craw, SpotValues) {
    ProblemProfile p = profile(0.0, 0.0);
    p.alpha = 0.0;
    expect_rel(c_raw_p(p, 2.0), 3.0);
    ProblemProfile q = profile(0.0, 2.0);
    expect_rel(c_raw_p(q, 4.0), 2.0 + std::exp(0.5));
    EXPECT_LT(c_raw_p(profile(0.05, 1.0), 4.0), c_raw_p(profile(0.1, 1.0), 4.0));
    EXPECT_THROW(c_raw_p(profile(2.0, 1.0), 4.0), PreconditionError);
}

TEST(CBad, ParticleOracleAndWindow) {
    ProblemProfile p = profile(0.1, 1.0);
    const double q = 4.0, kappa = 0.5;
    const double lam8 = oracle_lambda(8.0, 1.0, 0.1, 1.0);
    const double gap = lam8 - q * kappa;
    const double want = std::pow(2.0, 11.0) * default_c_mz(8.0) +
                        std::pow(2.0, 17.0) * oracle_bdg_upper(4.0) * std::pow(0.1, 4.0) * (2.0 / gap) *
                            std::sqrt(1.0 + std::exp(1.0)) / gap;
    expect_rel(c_bad_particle(p, q, kappa), want);
    EXPECT_THROW(c_bad_particle(p, q, 5.0), PreconditionError);
}

TEST(CBad, QEqualTwoUsesZeroPowerOne) {
    ProblemProfile p = profile(0.1, 1.0);
    const double gap = oracle_lambda(4.0, 1.0, 0.1, 1.0) - 2.0 * 0.3;
    const double want = 32.0 * default_c_mz(4.0) + 512.0 * 4.0 * 0.01 * std::sqrt(1.0 + std::exp(1.0)) / gap;
    expect_rel(c_bad_particle(p, 2.0, 0.3), want);
}

TEST(ConstantsReport, SigmaZeroAlphaZero) {
    ProblemProfile p = profile(0.0, 0.0);
    p.alpha = 0.0;
    const ConstantsReport r = theorem_constants(p, 2.0);
    EXPECT_EQ(r.kappa, 1.0);
    EXPECT_TRUE(r.subcritical);
    ASSERT_TRUE(r.c_mfl);
    EXPECT_EQ(r.c_m, 0.0);
}

TEST(ConstantsReport, InternalConsistency) {
    ProblemProfile p = profile(0.15, 1.0, NoiseKind::anisotropic, 2);
    p.lipschitz = std::exp(-0.5);
    p.centered_m2 = 2.0;
    p.centered_m2q = 8.0;
    p.raw_m8 = 384.0;
    p.centered_m2_b = 2.0;
    p.centered_m2q_b = 8.0;
    p.raw_m8_b = 500.0;
    const ConstantsReport r = theorem_constants(p, 2.0);
    ASSERT_TRUE(r.c1 && r.c2 && r.c_mfl && r.c_stab1 && r.c_stab2 && r.c_q && r.c_q_tilde);
    EXPECT_EQ(*r.c_mfl, std::exp(2.0 * *r.c1) * 2.0 * *r.c2);
    EXPECT_NEAR(r.kappa, r.lambda.at(8.0) / 8.0, 0.0);
    EXPECT_EQ(r.stability_exponent, 0.5);
    // Oracle chain from the reported intermediates.
    const double cm2 = r.c_m * r.c_m, tau = 1.0, s2 = 0.0225;
    expect_rel(*r.c_q, 2048.0 * std::sqrt(*r.c_bad_meanfield_4) * std::pow(*r.c_raw_8, 2.0) * 385.0);
    expect_rel(*r.c1, (2.0 * cm2 * *r.c_q * (1.0 + 2.0 * tau * s2) + 2.0) / r.kappa);
    expect_rel(*r.c2, (2.0 * cm2 * *r.c_q + r.c_wm.at(2.0) * 2.0) * (1.0 + 2.0 * tau * s2) / r.kappa);
    expect_rel(*r.c1_tilde, 1.0 + 2.0 * cm2 * *r.c_q_tilde * (1.0 + tau * s2));
    expect_rel(*r.log_c_stab1, 16.0 * *r.c1_tilde / r.lambda.at(8.0));
    EXPECT_EQ(r.c_mz_defaulted, true);
}

TEST(ConstantsReport, SupercriticalGivesPartialReport) {
    const ConstantsReport r = theorem_constants(profile(0.3, 1.0), 2.0);
    EXPECT_FALSE(r.subcritical);
    EXPECT_FALSE(r.c_mfl.has_value());
    EXPECT_FALSE(r.c_stab1.has_value());
    EXPECT_FALSE(r.notes.empty());
}

TEST(ConstantsReport, JsonRoundTrip) {
    ProblemProfile p = profile(0.15, 1.0, NoiseKind::anisotropic, 2);
    p.lipschitz = std::exp(-0.5);
    const ConstantsReport r = theorem_constants(p, 2.0);
    const ConstantsReport back = constants_report_from_json(nlohmann::json::parse(to_json(r).dump()));
    EXPECT_TRUE(back == r);
    const ConstantsReport partial = theorem_constants(profile(0.3, 1.0), 3.0);
    EXPECT_TRUE(constants_report_from_json(nlohmann::json::parse(to_json(partial).dump())) == partial);
    EXPECT_FALSE(to_text(r).empty());
}

TEST(ConstantsReport, SubcriticalGridScan) {
    std::mt19937_64 gen(2025);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t checked = 0;
    for (int i = 0; i < 10000; ++i) {
        const double spread = 10.0 * u(gen);
        const bool iso = u(gen) < 0.5;
        const std::size_t d = 1 + static_cast<std::size_t>(8.0 * u(gen));
        ProblemProfile p = profile(0.0, spread, iso ? NoiseKind::isotropic : NoiseKind::anisotropic, d);
        p.sigma = sigma_tilde(p) * u(gen) * (1.0 - 1e-12);
        const double l2 = lambda_p(p, 2.0), l8 = lambda_p(p, 8.0);
        EXPECT_GT(l8, 0.0);
        EXPECT_LT(l8, 8.0 * l2);
        ++checked;
    }
    EXPECT_EQ(checked, 10000u);
}
