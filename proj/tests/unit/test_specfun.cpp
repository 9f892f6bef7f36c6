#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "scpkit/errors.hpp"
#include "scpkit/random.hpp"
#include "scpkit/specfun.hpp"

namespace {

using scp::marcum_p1;
using scp::marcum_q1;

// Poisson mixture of chi-squared tails, in long double, summed until the remaining
// Poisson mass is below 1e-16.
long double marcum_series(long double a, long double b) {
    const long double mu = a * a / 2.0L;
    const long double nu = b * b / 2.0L;
    long double weight = std::exp(-mu);
    // Q(k + 1, nu) for integer k: e^-nu sum_{j<=k} nu^j / j!
    long double term = std::exp(-nu);
    long double upper = term;
    long double sum = 0.0L;
    long double mass = 0.0L;
    for (int k = 0; k < 5000; ++k) {
        sum += weight * upper;
        mass += weight;
        if (1.0L - mass < 1e-16L && k > mu) break;
        weight *= mu / (k + 1);
        term *= nu / (k + 1);
        upper += term;
    }
    return sum;
}

struct Frozen {
    double a, b, q, p;
};

// 40-digit quadrature of the Rician density.
constexpr Frozen kFrozen[] = {
    {2.0, 1.0, 0.91810769636940600391, 0.081892303630593996089},
    {1.0, 2.0, 0.26901206003590999668, 0.73098793996409000332},
    {5.0, 4.0, 0.86704979507792559765, 0.13295020492207440235},
    {5.0, 6.0, 0.18185042294514361678, 0.81814957705485638322},
    {10.0, 12.0, 0.025329474297941417811, 0.97467052570205858219},
    {3.0, 0.5, 0.99830023270553937367, 0.0016997672944606263335},
    {0.5, 3.0, 0.017843673386482211916, 0.98215632661351778808},
    {20.0, 18.0, 0.97863566247356292492, 0.021364337526437075084},
    {6.0, 0.01, 0.99999999999923817734, 7.6182266460333247622e-13},
};

TEST(MarcumQ1, ZeroNoncentralityIsGaussianTail) {
    for (double b : {0.01, 0.5, 1.0, 2.0, 5.0, 8.0, 12.0}) {
        const double expected = std::exp(-b * b / 2.0);
        EXPECT_NEAR(marcum_q1(0.0, b), expected, 1e-12 * expected) << "b=" << b;
    }
    EXPECT_NEAR(marcum_q1(0.0, 2.0), 0.1353352832366127, 1e-15);
}

TEST(MarcumQ1, ZeroThresholdIsOne) {
    EXPECT_EQ(marcum_q1(3.0, 0.0), 1.0);
    EXPECT_EQ(marcum_q1(0.0, 0.0), 1.0);
    EXPECT_EQ(marcum_p1(3.0, 0.0), 0.0);
}

TEST(MarcumQ1, MatchesFrozenValues) {
    for (const auto& f : kFrozen) {
        EXPECT_NEAR(marcum_q1(f.a, f.b), f.q, 1e-12) << f.a << "," << f.b;
        EXPECT_NEAR(marcum_p1(f.a, f.b), f.p, 1e-12 * std::max(f.p, 1e-3)) << f.a << "," << f.b;
    }
}

TEST(MarcumQ1, MatchesPoissonMixtureSeries) {
    for (double a : {0.1, 0.7, 2.0, 4.5, 9.0, 15.0}) {
        for (double b : {0.05, 0.6, 1.9, 3.3, 6.0, 10.0, 16.0}) {
            const double oracle = static_cast<double>(marcum_series(a, b));
            EXPECT_NEAR(marcum_q1(a, b), oracle, 1e-10) << a << "," << b;
        }
    }
}

TEST(MarcumQ1, MatchesDensityQuadrature) {
    using Kronrod = boost::math::quadrature::gauss_kronrod<double, 61>;
    for (double a : {0.5, 1.5, 3.0}) {
        for (double b : {0.4, 1.2, 2.5, 4.0}) {
            auto density = [a](double x) { return x * std::exp(-(x * x + a * a) / 2.0) * std::cyl_bessel_i(0.0, a * x); };
            const double oracle = 1.0 - Kronrod::integrate(density, 0.0, b, 15, 1e-13);
            EXPECT_NEAR(marcum_q1(a, b), oracle, 1e-11) << a << "," << b;
        }
    }
}

TEST(MarcumQ1, ComplementsSumToOne) {
    for (double a : {0.0, 0.3, 2.0, 7.0, 30.0, 50.0}) {
        for (double b : {0.001, 0.8, 2.0, 7.0, 29.0, 50.0}) {
            EXPECT_NEAR(marcum_q1(a, b) + marcum_p1(a, b), 1.0, 1e-13) << a << "," << b;
        }
    }
}

TEST(MarcumQ1, MonotoneInBothArguments) {
    double previous = 1.0;
    for (double b = 0.0; b <= 20.0; b += 0.25) {
        const double q = marcum_q1(4.0, b);
        EXPECT_LE(q, previous);
        previous = q;
    }
    previous = 0.0;
    for (double a = 0.0; a <= 20.0; a += 0.25) {
        const double q = marcum_q1(a, 6.0);
        EXPECT_GE(q, previous);
        previous = q;
    }
}

TEST(MarcumQ1, SmallThresholdKeepsRelativePrecision) {
    // 1 - Q1(a, b) -> e^{-a^2/2} b^2 / 2 as b -> 0
    for (double a : {1.0, 4.0, 8.0}) {
        const double b = 1e-6;
        const double leading = std::exp(-a * a / 2.0) * b * b / 2.0;
        EXPECT_NEAR(marcum_p1(a, b), leading, 1e-6 * leading) << a;
    }
}

TEST(MarcumQ1, RejectsBadArguments) {
    EXPECT_THROW(marcum_q1(-1.0, 1.0), scp::DomainError);
    EXPECT_THROW(marcum_q1(1.0, -1.0), scp::DomainError);
    EXPECT_THROW(marcum_q1(std::numeric_limits<double>::quiet_NaN(), 1.0), scp::DomainError);
    EXPECT_THROW(marcum_q1(1.0, std::numeric_limits<double>::infinity()), scp::DomainError);
}

TEST(IncompleteGamma, ClosedForms) {
    EXPECT_NEAR(scp::regularized_lower_gamma(1.0, 1.0), 1.0 - std::exp(-1.0), 1e-15);
    EXPECT_EQ(scp::regularized_lower_gamma(2.0, 0.0), 0.0);
    for (double x : {0.01, 0.3, 1.0, 4.0, 20.0}) {
        EXPECT_NEAR(scp::regularized_lower_gamma(0.5, x), std::erf(std::sqrt(x)), 1e-14) << x;
        // integer shape: Poisson CDF
        const double poisson = std::exp(-x) * (1.0 + x + x * x / 2.0);
        EXPECT_NEAR(scp::regularized_upper_gamma(3.0, x), poisson, 1e-14 * std::max(poisson, 1e-3)) << x;
    }
}

TEST(IncompleteGamma, MatchesQuadrature) {
    using Kronrod = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto f = [](double t) { return std::pow(t, 2.5) * std::exp(-t); };
    const double oracle = Kronrod::integrate(f, 0.0, 2.7, 15, 1e-14) / std::tgamma(3.5);
    EXPECT_NEAR(scp::regularized_lower_gamma(3.5, 2.7), oracle, 1e-13);
    EXPECT_NEAR(scp::regularized_lower_gamma(3.5, 2.7), 0.38872845706042072072, 1e-14);
}

TEST(IncompleteGamma, UpperTailKeepsRelativePrecision) {
    const double x = 200.0;
    // Q(1, x) = e^-x
    EXPECT_NEAR(scp::regularized_upper_gamma(1.0, x), std::exp(-x), 1e-13 * std::exp(-x));
}

TEST(IncompleteGamma, MonotoneAndSaturates) {
    double previous = 0.0;
    for (double x = 0.0; x < 60.0; x += 0.5) {
        const double p = scp::regularized_lower_gamma(4.2, x);
        EXPECT_GE(p, previous);
        previous = p;
    }
    EXPECT_NEAR(previous, 1.0, 1e-14);
}

TEST(IncompleteGamma, RejectsBadArguments) {
    EXPECT_THROW(scp::regularized_lower_gamma(0.0, 1.0), scp::DomainError);
    EXPECT_THROW(scp::regularized_lower_gamma(-1.0, 1.0), scp::DomainError);
    EXPECT_THROW(scp::regularized_lower_gamma(1.0, -1.0), scp::DomainError);
}

// Stirling series with terms up to x^-9, after pushing x above 20 with the recursion.
double stirling_ln_gamma(double x) {
    double shift = 0.0;
    while (x < 20.0) {
        shift -= std::log(x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double series = inv * (1.0 / 12 - inv2 * (1.0 / 360 - inv2 * (1.0 / 1260 - inv2 * (1.0 / 1680))));
    return shift + (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

TEST(LnGamma, KnownValues) {
    EXPECT_NEAR(scp::ln_gamma(1.0), 0.0, 1e-15);
    EXPECT_NEAR(scp::ln_gamma(2.0), 0.0, 1e-15);
    EXPECT_NEAR(scp::ln_gamma(0.5), std::log(std::sqrt(std::numbers::pi)), 1e-15);
    EXPECT_NEAR(scp::ln_gamma(7.3), 7.1478925230222486921, 1e-13);
}

TEST(LnGamma, MatchesStirlingWithRecursion) {
    for (double x : {0.05, 0.37, 1.5, 2.9, 7.3, 11.0, 42.5, 180.0}) {
        EXPECT_NEAR(scp::ln_gamma(x), stirling_ln_gamma(x), 1e-12 * std::max(1.0, std::abs(stirling_ln_gamma(x)))) << x;
    }
    EXPECT_THROW(scp::ln_gamma(0.0), scp::DomainError);
    EXPECT_THROW(scp::ln_gamma(-2.5), scp::DomainError);
}

// Direct series in 100-digit arithmetic, enough to absorb the cancellation at z = -150.
double kummer_series(double a, double b, double z) {
    using Big = boost::multiprecision::cpp_dec_float_100;
    Big term = 1;
    Big sum = 1;
    for (int n = 0; n < 2000; ++n) {
        term *= (Big(a) + n) * Big(z) / ((Big(b) + n) * (n + 1));
        sum += term;
        if (abs(term) < Big("1e-60") * abs(sum)) break;
    }
    return sum.convert_to<double>();
}

TEST(ConfluentM, TrivialValues) {
    EXPECT_EQ(scp::confluent_m(2.3, 1.7, 0.0), 1.0);
    EXPECT_EQ(scp::confluent_m(0.0, 1.0, -5.0), 1.0);
    for (double z : {-20.0, -3.0, 0.5, 9.0}) {
        EXPECT_NEAR(scp::confluent_m(1.4, 1.4, z), std::exp(z), 1e-12 * std::exp(z)) << z;
        EXPECT_NEAR(scp::confluent_m(1.0, 2.0, z), std::expm1(z) / z, 1e-12 * std::abs(std::expm1(z) / z)) << z;
        // Laguerre polynomial L_2
        const double l2 = 1.0 - 2.0 * z + z * z / 2.0;
        EXPECT_NEAR(scp::confluent_m(-2.0, 1.0, z), l2, 1e-12 * std::max(1.0, std::abs(l2))) << z;
    }
}

TEST(ConfluentM, MatchesExtendedPrecisionSeries) {
    EXPECT_NEAR(scp::confluent_m(0.8, 1.0, -12.0), 0.031718928435980045502, 1e-12);
    struct Case {
        double a, b, z;
    };
    for (const Case c : {Case{0.8, 1.0, -12.0}, Case{2.5, 3.5, 7.0}, Case{-1.3, 2.0, -40.0}, Case{3.0, 0.5, 15.0},
                         Case{0.2, 4.0, -150.0}, Case{12.0, 30.0, 80.0}}) {
        const double oracle = kummer_series(c.a, c.b, c.z);
        EXPECT_NEAR(scp::confluent_m(c.a, c.b, c.z), oracle, 1e-10 * std::abs(oracle)) << c.a << "," << c.b << "," << c.z;
    }
}

TEST(ConfluentM, RejectsUnsupportedRange) {
    EXPECT_THROW(scp::confluent_m(1.0, 0.0, 1.0), scp::UnsupportedRangeError);
    EXPECT_THROW(scp::confluent_m(1.0, 60.0, 1.0), scp::UnsupportedRangeError);
    EXPECT_THROW(scp::confluent_m(80.0, 2.0, 1.0), scp::UnsupportedRangeError);
    EXPECT_THROW(scp::confluent_m(1.0, 2.0, 500.0), scp::UnsupportedRangeError);
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

Moments rician_moments(double k, int samples, std::uint64_t seed) {
    scp::RandomStream rng = scp::make_stream(seed, 0);
    double mean = 0.0;
    double m2 = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = scp::sample_rician_power(k, rng);
        const double delta = x - mean;
        mean += delta / (i + 1);
        m2 += delta * (x - mean);
    }
    return {mean, m2 / (samples - 1)};
}

TEST(RicianSampler, RayleighLimitIsUnitExponential) {
    const Moments m = rician_moments(0.0, 1'000'000, 11);
    EXPECT_NEAR(m.mean, 1.0, 0.01);
    EXPECT_NEAR(m.variance, 1.0, 0.02);
}

TEST(RicianSampler, VarianceFollowsKFactor) {
    const Moments m = rician_moments(9.0, 1'000'000, 12);
    EXPECT_NEAR(m.mean, 1.0, 0.01);
    EXPECT_NEAR(m.variance, 0.19, 0.02 * 0.19);
}

TEST(RicianSampler, SurvivalMatchesMarcum) {
    const double k = 3.0;
    const int samples = 200'000;
    const double probes[] = {0.2, 0.6, 1.0, 1.6, 2.5};
    int above[5] = {};
    scp::RandomStream rng = scp::make_stream(13, 0);
    for (int i = 0; i < samples; ++i) {
        const double x = scp::sample_rician_power(k, rng);
        for (int j = 0; j < 5; ++j) above[j] += x > probes[j];
    }
    for (int j = 0; j < 5; ++j) {
        const double p = marcum_q1(std::sqrt(2.0 * k), std::sqrt(2.0 * (k + 1.0) * probes[j]));
        const double sigma = std::sqrt(p * (1.0 - p) / samples);
        EXPECT_NEAR(static_cast<double>(above[j]) / samples, p, 4.5 * sigma) << probes[j];
    }
}

TEST(RicianSampler, RejectsNegativeK) {
    scp::RandomStream rng = scp::make_stream(1, 0);
    EXPECT_THROW(scp::sample_rician_power(-0.1, rng), scp::DomainError);
}

TEST(RandomStreams, DistinctAndReproducible) {
    auto a = scp::make_stream(5, 0);
    auto b = scp::make_stream(5, 0);
    auto c = scp::make_stream(5, 1);
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
}

}  // namespace
