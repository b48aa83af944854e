#include <gtest/gtest.h>

#include <cmath>

#include "cbo/analysis.hpp"
#include "cbo/laws.hpp"

using namespace cbo;

namespace {

// Monte Carlo oracle for E|X - origin|^p with X drawn by the law itself.
double mc_moment(const InitialLaw& law, const Point& origin, double p, std::size_t n) {
    const Matrix m = law.sample_rows(RngStream{99, 0, 0, StreamDomain::sampling}, n);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += std::pow(std::sqrt(squared_distance(m.row(j), origin)), p);
    return acc / static_cast<double>(n);
}

}  // namespace

TEST(Laws, GaussianClosedForms) {
    // Standard Gaussian in d dimensions: E|X|^2 = d, E|X|^4 = d(d+2), E|X|^8 = d(d+2)(d+4)(d+6).
    const InitialLaw g{LawKind::gaussian, {0.0, 0.0, 0.0}, 1.0};
    EXPECT_NEAR(law_centered_moment(g, 2.0), 3.0, 1e-12);
    EXPECT_NEAR(law_centered_moment(g, 4.0), 15.0, 1e-12);
    EXPECT_NEAR(law_raw_moment(g, 8.0), 3.0 * 5.0 * 7.0 * 9.0, 1e-9);
}

TEST(Laws, ShiftedGaussianRawMoment) {
    // X = c + sZ in d=1: E X^2 = c^2 + s^2, E X^4 = c^4 + 6c^2 s^2 + 3 s^4.
    const InitialLaw g{LawKind::gaussian, {0.5}, 2.0};
    EXPECT_NEAR(law_raw_moment(g, 2.0), 0.25 + 4.0, 1e-12);
    EXPECT_NEAR(law_raw_moment(g, 4.0), 0.0625 + 6.0 * 0.25 * 4.0 + 3.0 * 16.0, 1e-12);
    EXPECT_NEAR(law_centered_moment(g, 2.0), 4.0, 1e-12);
}

TEST(Laws, UniformBoxClosedForms) {
    // Uniform on [-s, s]: E X^2 = s^2 / 3, E X^4 = s^4 / 5.
    const InitialLaw u{LawKind::uniform_box, {0.0}, 2.0};
    EXPECT_NEAR(law_centered_moment(u, 2.0), 4.0 / 3.0, 1e-12);
    EXPECT_NEAR(law_centered_moment(u, 4.0), 16.0 / 5.0, 1e-12);
}

TEST(Laws, AnalyticMomentsAgreeWithSampling) {
    for (const InitialLaw& law : {InitialLaw{LawKind::gaussian, {0.5, -1.0}, 1.5},
                                  InitialLaw{LawKind::uniform_box, {1.0, 0.0}, 0.7}}) {
        const double m8 = law_raw_moment(law, 8.0);
        const double mc = mc_moment(law, {0.0, 0.0}, 8.0, 400000);
        EXPECT_NEAR(mc / m8, 1.0, 0.05);
        const double c4 = law_centered_moment(law, 4.0);
        EXPECT_NEAR(mc_moment(law, law.location, 4.0, 400000) / c4, 1.0, 0.02);
    }
}

TEST(Laws, NonEvenOrderUsesSampling) {
    const InitialLaw g{LawKind::gaussian, {0.0}, 1.0};
    // E|Z|^3 = 2 sqrt(2/pi).
    EXPECT_NEAR(law_centered_moment(g, 3.0), 2.0 * std::sqrt(2.0 / M_PI), 0.01);
}

TEST(Laws, SamplingIsRepeatableAndStaysInBox) {
    const InitialLaw u{LawKind::uniform_box, {1.0, -1.0}, 0.5};
    const RngStream s{5, 0, 0, StreamDomain::initial};
    EXPECT_EQ(u.sample_rows(s, 100), u.sample_rows(s, 100));
    const Matrix m = u.sample_rows(s, 1000);
    for (std::size_t j = 0; j < m.rows(); ++j) {
        EXPECT_LE(std::abs(m(j, 0) - 1.0), 0.5);
        EXPECT_LE(std::abs(m(j, 1) + 1.0), 0.5);
    }
}

TEST(Laws, Validation) {
    EXPECT_THROW((InitialLaw{LawKind::gaussian, {}, 1.0}.validate()), ConfigError);
    EXPECT_THROW((InitialLaw{LawKind::gaussian, {0.0}, 0.0}.validate()), ConfigError);
    EXPECT_THROW(parse_law_kind("cauchy"), ConfigError);
    EXPECT_EQ(parse_law_kind("uniform-box"), LawKind::uniform_box);
}
