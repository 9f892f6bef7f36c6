#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "scpkit/errors.hpp"
#include "scpkit/verify.hpp"

namespace {

TEST(GammaTailIdentity, ExponentialIntegrand) {
    // m = 1: int exp(-k r^alpha) 2 pi r dr = pi Gamma(1 + 2/alpha) k^(-2/alpha)
    for (double alpha : {2.2, 3.0, 4.0, 6.5}) {
        for (double k : {1e-4, 1.0, 50.0}) EXPECT_LT(scp::lemma1_residual(1.0, alpha, k), 1e-8) << alpha << "," << k;
    }
}

TEST(GammaTailIdentity, GridBelowTolerance) {
    for (double m : {0.8, 3.7, 10.5}) {
        for (double alpha : {2.1, 2.5, 2.9}) {
            for (double k : {1e-6, 1.0, 1e3}) EXPECT_LT(scp::lemma1_residual(m, alpha, k), 1e-6);
        }
    }
    EXPECT_THROW(scp::lemma1_residual(1.0, 2.0, 1.0), scp::DomainError);
    EXPECT_THROW(scp::lemma1_residual(0.0, 3.0, 1.0), scp::DomainError);
}

TEST(MarcumIntegralAsymptotic, DeviationShrinksWithAHat) {
    double previous = INFINITY;
    for (double a : {2.0, 4.0, 6.0, 8.0, 10.0}) {
        const double dev = std::abs(scp::lemma2_residual(a, 1.0, 1.0, 2.5));
        EXPECT_LT(dev, previous) << a;
        previous = dev;
    }
    EXPECT_LT(previous, 0.05);
}

TEST(MarcumIntegralAsymptotic, SmallDensityLimitIsContinuous) {
    const double at_small = scp::lemma2_residual(5.0, 1.5, 1e-6, 2.3);
    const double smaller = scp::lemma2_residual(5.0, 1.5, 1e-7, 2.3);
    EXPECT_NEAR(at_small, smaller, 1e-5);
    EXPECT_TRUE(std::isfinite(at_small));
    EXPECT_THROW(scp::lemma2_residual(0.0, 1.0, 1.0, 2.5), scp::DomainError);
}

TEST(PoissonExponentialExpectation, VanishingCGivesOne) {
    const double rates[] = {1.0, 2.0};
    auto rng = scp::make_stream(1, 0);
    const auto r = scp::lemma3_check(rates, 1e-9, 1000, rng);
    EXPECT_NEAR(r.analytic, 1.0, 1e-15);
    EXPECT_NEAR(r.empirical, 1.0, 1e-15);
}

TEST(PoissonExponentialExpectation, ThreeRatesAgreeWithinThreeSigma) {
    const double rates[] = {1.0, 2.0, 3.0};
    auto rng = scp::make_stream(2, 0);
    const auto r = scp::lemma3_check(rates, 0.7, 1'000'000, rng);
    EXPECT_NEAR(r.analytic, 1.0 - std::pow(0.7 / 6.7, 3.0), 1e-15);
    EXPECT_LE(std::abs(r.empirical - r.analytic), 3.0 * r.standard_error);
    EXPECT_LE(r.z_score, 3.0);
    EXPECT_THROW(scp::lemma3_check({}, 1.0, 10, rng), scp::DomainError);
}

TEST(MarcumProductError, SingleHopRoutesAreExact) {
    const auto layers = scp::testbed_layers();
    auto rng = scp::make_stream(3, 0);
    const auto curve = scp::marcum_product_error(layers[0], 20, {1, 1}, rng);
    EXPECT_LT(curve.max_mean_abs_error, 1e-3);
    ASSERT_EQ(curve.grid.size(), curve.mean_abs_error.size());

    std::ostringstream csv;
    scp::write_error_csv(csv, curve);
    const std::string text = csv.str();
    EXPECT_EQ(text.rfind("grid_x,mean_abs_error\n", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 201);
}

TEST(MarcumProductError, MultiHopStaysSmall) {
    const auto layers = scp::testbed_layers();
    auto rng = scp::make_stream(4, 0);
    const auto curve = scp::marcum_product_error(layers[0], 50, {2, 7}, rng);
    EXPECT_GT(curve.max_mean_abs_error, 0.0);
    EXPECT_LT(curve.max_mean_abs_error, 0.1);
}

TEST(DefaultVerification, AllChecksPass) {
    const auto rows = scp::default_verification(1, 200'000);
    EXPECT_EQ(rows.size(), 80u + 60u + 20u);
    for (const auto& row : rows) EXPECT_TRUE(row.pass) << row.check << " " << row.parameters << " " << row.value;
}

}  // namespace
