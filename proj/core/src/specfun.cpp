#include "scpkit/specfun.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "scpkit/errors.hpp"

namespace scp {
namespace {

using FastPolicy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

// Above this many series terms the Gaussian asymptotic takes over.
constexpr double kMaxMarcumTerms = 1e4;
// Exponential bounds: Q1(a,b) <= exp(-(b-a)^2/2) for b >= a, and
// 1 - Q1(a,b) <= exp(-(a-b)^2/2) / 2 for a >= b. Past this gap both tails are < 1e-17.
constexpr double kMarcumSaturationGap = 9.0;
constexpr double kTailEps = 1e-17;
// Below this a Poisson pmf carried by recursion has lost precision to subnormals.
constexpr double kPmfFloor = 1e-280;

void require_finite_nonnegative(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
        throw DomainError(std::string("marcum_q1: ") + name + " must be finite and >= 0");
    }
}

double poisson_log_pmf(double k, double mean) {
    if (mean == 0.0) return k == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return -mean + k * std::log(mean) - boost::math::lgamma(k + 1.0, FastPolicy());
}

// Walks from the Poisson(mu) mode toward one tail until the remaining mass there is
// below kTailEps. Returns the stopping index and its pmf, which never underflows
// because it starts from the mode rather than from a far tail.
struct PoissonAnchor {
    double k;
    double pmf;
};

PoissonAnchor poisson_lower_anchor(double mu) {
    double k = std::floor(mu);
    double p = std::exp(poisson_log_pmf(k, mu));
    while (k > 0.0) {
        const double ratio = k / mu;  // p(k-1) = p(k) * k / mu
        if (ratio < 1.0 && p * ratio / (1.0 - ratio) <= kTailEps) break;
        p *= ratio;
        k -= 1.0;
    }
    return {k, p};
}

PoissonAnchor poisson_upper_anchor(double mu) {
    double k = std::floor(mu);
    double p = std::exp(poisson_log_pmf(k, mu));
    for (;;) {
        const double ratio = mu / (k + 1.0);
        if (ratio < 1.0 && p * ratio / (1.0 - ratio) <= kTailEps) break;
        p *= ratio;
        k += 1.0;
    }
    return {k, p};
}

double term_count(double mu) { return 18.0 * std::sqrt(mu) + 40.0; }

// Q1 = sum_k p_mu(k) F_nu(k), F_nu(k) = P(N_nu <= k), recursing upward in k so that
// F only ever accumulates positive terms. Used when nu >= mu (Q1 is the small side).
double marcum_upper_sum(double mu, double nu) {
    const auto [k_lo, p_lo] = poisson_lower_anchor(mu);
    double p = p_lo;
    double pmf_nu = std::exp(poisson_log_pmf(k_lo, nu));
    double cdf_nu = boost::math::gamma_q(k_lo + 1.0, nu, FastPolicy());

    double sum = 0.0;
    for (double k = k_lo;; k += 1.0) {
        sum += p * cdf_nu;
        const double ratio = mu / (k + 1.0);
        // Remaining terms are bounded by a geometric series in p since F <= 1.
        if (ratio < 1.0 && p * ratio / (1.0 - ratio) <= kTailEps * sum) break;
        p *= ratio;
        if (pmf_nu < kPmfFloor) {
            // Far below the mode of Poisson(nu) the pmf underflows; restart from logs
            // until it is representable again.
            pmf_nu = std::exp(poisson_log_pmf(k + 1.0, nu));
            cdf_nu = boost::math::gamma_q(k + 2.0, nu, FastPolicy());
        } else {
            pmf_nu *= nu / (k + 1.0);
            cdf_nu = std::min(1.0, cdf_nu + pmf_nu);
        }
    }
    return sum;
}

// 1 - Q1 = sum_k p_mu(k) G_nu(k), G_nu(k) = P(N_nu > k), recursing downward in k
// (G grows as k falls). Used when nu < mu.
double marcum_lower_sum(double mu, double nu) {
    const auto [k_hi, p_hi] = poisson_upper_anchor(mu);
    double p = p_hi;
    double pmf_nu = std::exp(poisson_log_pmf(k_hi, nu));
    double tail_nu = boost::math::gamma_p(k_hi + 1.0, nu, FastPolicy());

    // G_nu(k) <= G_nu(0) = 1 - e^{-nu} bounds every remaining factor.
    const double g_max = -std::expm1(-nu);
    double sum = 0.0;
    for (double k = k_hi; k >= 0.0; k -= 1.0) {
        sum += p * tail_nu;
        if (k == 0.0) break;
        const double ratio = k / mu;
        if (ratio < 1.0 && p * ratio / (1.0 - ratio) * g_max <= kTailEps * sum) break;
        if (pmf_nu < kPmfFloor) {
            // Same underflow guard as the upward sum, for k far above nu.
            pmf_nu = std::exp(poisson_log_pmf(k - 1.0, nu));
            tail_nu = boost::math::gamma_p(k, nu, FastPolicy());
        } else {
            tail_nu = std::min(1.0, tail_nu + pmf_nu);
            pmf_nu *= k / nu;
        }
        p *= ratio;
    }
    return sum;
}

}  // namespace

double marcum_q1(MarcumParams params) {
    require_finite_nonnegative(params.a, "a");
    require_finite_nonnegative(params.b, "b");
    const double a = params.a;
    const double b = params.b;

    if (b == 0.0) return 1.0;
    if (a == 0.0) return std::exp(-0.5 * b * b);
    if (b - a > kMarcumSaturationGap) return 0.0;
    if (a - b > kMarcumSaturationGap) return 1.0;

    const double mu = 0.5 * a * a;
    const double nu = 0.5 * b * b;
    if (term_count(std::max(mu, nu)) > kMaxMarcumTerms) {
        // Large-argument limit Q1(a,b) ~ erfc((b - a)/sqrt 2)/2; the O(1/a) correction
        // is dropped. Only reachable for a, b in the hundreds.
        return 0.5 * boost::math::erfc((b - a) / std::numbers::sqrt2, FastPolicy());
    }
    if (nu >= mu) {
        return std::clamp(marcum_upper_sum(mu, nu), 0.0, 1.0);
    }
    return std::clamp(1.0 - marcum_lower_sum(mu, nu), 0.0, 1.0);
}

double marcum_p1(MarcumParams params) {
    require_finite_nonnegative(params.a, "a");
    require_finite_nonnegative(params.b, "b");
    const double a = params.a;
    const double b = params.b;

    if (b == 0.0) return 0.0;
    if (a == 0.0) return -std::expm1(-0.5 * b * b);
    if (b - a > kMarcumSaturationGap) return 1.0;
    if (a - b > kMarcumSaturationGap) return 0.0;

    const double mu = 0.5 * a * a;
    const double nu = 0.5 * b * b;
    if (term_count(std::max(mu, nu)) > kMaxMarcumTerms) {
        return 0.5 * boost::math::erfc((a - b) / std::numbers::sqrt2, FastPolicy());
    }
    if (nu >= mu) {
        return std::clamp(1.0 - marcum_upper_sum(mu, nu), 0.0, 1.0);
    }
    return std::clamp(marcum_lower_sum(mu, nu), 0.0, 1.0);
}

double regularized_lower_gamma(double shape, double x) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw DomainError("regularized_lower_gamma: shape must be > 0");
    }
    if (!(x >= 0.0)) throw DomainError("regularized_lower_gamma: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return boost::math::gamma_p(shape, x, FastPolicy());
}

double regularized_upper_gamma(double shape, double x) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw DomainError("regularized_upper_gamma: shape must be > 0");
    }
    if (!(x >= 0.0)) throw DomainError("regularized_upper_gamma: x must be >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(shape, x, FastPolicy());
}

double ln_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("ln_gamma: x must be finite and > 0");
    return boost::math::lgamma(x, FastPolicy());
}

double confluent_m(double a, double b, double z) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(z)) {
        throw UnsupportedRangeError("confluent_m: non-finite argument");
    }
    if (!(b > 0.0) || b > 50.0 || std::abs(a) > 50.0 || std::abs(z) > 200.0) {
        throw UnsupportedRangeError("confluent_m: supported for 0 < b <= 50, |a| <= 50, |z| <= 200");
    }
    if (z == 0.0 || a == 0.0) return 1.0;

    // Kummer: M(a, b, z) = e^z M(b - a, b, -z) turns an alternating series into one
    // whose tail terms share a sign.
    double prefactor = 1.0;
    if (z < 0.0) {
        prefactor = std::exp(z);
        a = b - a;
        z = -z;
    }

    double term = 1.0;
    double sum = 1.0;
    for (int k = 0; k < 5000; ++k) {
        term *= (a + k) / (b + k) * z / (k + 1.0);
        sum += term;
        if (term == 0.0) break;
        if (k > z && std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    return prefactor * sum;
}

double sample_rician_power(double k_factor, RandomStream& rng) {
    if (!(k_factor >= 0.0) || !std::isfinite(k_factor)) {
        throw DomainError("sample_rician_power: K-factor must be finite and >= 0");
    }
    // One Box-Muller pair gives both arms.
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double u1 = 1.0 - uniform(rng);
    const double u2 = uniform(rng);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;

    const double sigma = std::sqrt(0.5 / (k_factor + 1.0));
    const double los = std::sqrt(0.5 * k_factor / (k_factor + 1.0));
    const double in_phase = los + sigma * radius * std::cos(angle);
    const double quadrature = los + sigma * radius * std::sin(angle);
    return in_phase * in_phase + quadrature * quadrature;
}

}  // namespace scp
