#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "scpkit/closedform.hpp"
#include "scpkit/model.hpp"
#include "scpkit/random.hpp"

namespace scp {

/// |2 pi int_0^inf Q(m, k r^alpha) r dr - pi Gamma(m + 2/alpha) / Gamma(m) k^(-2/alpha)| / RHS,
/// where Q is the regularized upper incomplete gamma function. The left side is integrated
/// numerically in r.
double lemma1_residual(double m, double alpha, double k);

/// Signed relative deviation (LHS - RHS) / RHS of
///   int_0^inf x^(-2/alpha - 1) exp(-lc x^(-2/alpha)) [1 - Q1(a_hat, b_hat sqrt x)] dx
///   ~ alpha / (2 lc) [1 - exp(-lc (b_hat^2 / a_hat^2)^(2/alpha))].
double lemma2_residual(double a_hat, double b_hat, double lambda_c, double alpha);

struct Lemma3Result {
    double analytic = 0.0;
    double empirical = 0.0;
    double standard_error = 0.0;
    /// |empirical - analytic| / standard_error, formed from the complements so that
    /// values near 1 keep their precision.
    double z_score = 0.0;
};

/// E[sum_{i<N} e^{-cX} (cX)^i / i!] with X the minimum of independent exponentials of the
/// given rates and N the number of rates, against 1 - (c / (c + sum rates))^N.
Lemma3Result lemma3_check(std::span<const double> rates, double c, std::uint64_t samples,
                          RandomStream& rng);

struct MarcumErrorCurve {
    std::vector<double> grid;
    std::vector<double> mean_abs_error;
    double max_mean_abs_error = 0.0;
};

/// Pointwise mean of |prod_i Q1 - collapsed Q1| over `trials` random routes inside `layer`.
MarcumErrorCurve marcum_product_error(const Layer& layer, int trials, HopCountRange hop_count,
                                      RandomStream& rng, const FitOptions& options = {});

/// CSV with header grid_x,mean_abs_error.
void write_error_csv(std::ostream& out, const MarcumErrorCurve& curve);

/// One line of the verification table printed by the CLI.
struct VerifyRow {
    std::string check;
    std::string parameters;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

std::vector<VerifyRow> default_verification(std::uint64_t seed, std::uint64_t lemma3_samples = 1000000);

}  // namespace scp
