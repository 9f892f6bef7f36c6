#pragma once

#include "scpkit/random.hpp"

namespace scp {

/// Arguments of the first-order Marcum Q-function Q1(a, b).
struct MarcumParams {
    double a = 0.0;  ///< non-centrality amplitude
    double b = 0.0;  ///< threshold amplitude
};

/// Q1(a, b) = P(X > b^2) for X non-central chi-squared with 2 degrees of freedom
/// and non-centrality a^2. Absolute accuracy better than 1e-10 for a, b <= 50.
/// Returns exactly 0 for b - a > 9 and exactly 1 for a - b > 9, where the neglected
/// tail is below 1e-17. Q1(0, b) is exp(-b^2/2) computed directly.
///
/// Evaluated as P(N_nu <= N_mu) for independent Poisson variables with means
/// mu = a^2/2 and nu = b^2/2, summing whichever of Q1 and 1 - Q1 is the tail.
/// Throws DomainError for negative or non-finite arguments.
double marcum_q1(MarcumParams p);
inline double marcum_q1(double a, double b) { return marcum_q1(MarcumParams{a, b}); }

/// 1 - Q1(a, b), computed without cancellation when Q1 is close to 1.
double marcum_p1(MarcumParams p);
inline double marcum_p1(double a, double b) { return marcum_p1(MarcumParams{a, b}); }

/// gamma(shape, x) / Gamma(shape). Throws DomainError for shape <= 0 or x < 0.
double regularized_lower_gamma(double shape, double x);

/// Gamma(shape, x) / Gamma(shape), computed directly (not as 1 - P) so that
/// small upper tails keep their relative accuracy.
double regularized_upper_gamma(double shape, double x);

/// ln Gamma(x) for x > 0.
double ln_gamma(double x);

/// Kummer's confluent hypergeometric function M(a, b, z).
/// Supported for b in (0, 50], |a| <= 50, |z| <= 200; relative accuracy ~1e-10
/// there. Negative z goes through Kummer's transformation so the series has no
/// cancellation. Throws UnsupportedRangeError outside that range.
double confluent_m(double a, double b, double z);

/// Unit-mean Rician power gain |h|^2 for linear K-factor k_factor.
/// The line-of-sight amplitude is split equally between the I and Q arms.
double sample_rician_power(double k_factor, RandomStream& rng);

}  // namespace scp
