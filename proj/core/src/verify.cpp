#include "scpkit/verify.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "scpkit/errors.hpp"
#include "scpkit/specfun.hpp"

namespace scp {
namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 61>;

constexpr unsigned kMaxDepth = 15;

template <class F>
double integrate_piece(F&& f, double lo, double hi, double scale, const char* what) {
    // Boost's error estimate has an absolute floor, so pieces are mapped onto [0, 1].
    const double width = hi - lo;
    auto unit = [&](double t) { return f(lo + width * t); };
    // Boost's tolerance is relative to the piece itself; pieces far smaller than the
    // whole integral only need to be accurate relative to `scale`.
    const double target = 1e-13 * scale;
    double error = 0.0;
    double l1 = 0.0;
    Kronrod::integrate(unit, 0.0, 1.0, 0, 1.0, &error, &l1);
    const double rel = std::clamp(target / std::max(width * l1, 1e-300), 1e-12, 1e-3);
    double value = Kronrod::integrate(unit, 0.0, 1.0, kMaxDepth, rel, &error, &l1);
    value *= width;
    error *= width;
    l1 *= width;
    if (!std::isfinite(value) || error > std::max(1e3 * target, 1e-10 * l1)) {
        std::ostringstream msg;
        msg << what << ": quadrature did not converge on [" << lo << ", " << hi << "] (error " << error << ")";
        throw QuadratureError(msg.str());
    }
    return value;
}

// int_x^inf Q(m, s) ds = m Q(m + 1, x) - x Q(m, x)
double upper_gamma_q_tail(double m, double x) {
    return m * regularized_upper_gamma(m + 1.0, x) - x * regularized_upper_gamma(m, x);
}

std::string format_params(std::initializer_list<std::pair<const char*, double>> items) {
    std::ostringstream os;
    os.precision(6);
    bool first = true;
    for (const auto& [name, value] : items) {
        if (!first) os << ' ';
        os << name << '=' << value;
        first = false;
    }
    return os.str();
}

}  // namespace

double lemma1_residual(double m, double alpha, double k) {
    if (!(m > 0.0) || !(alpha > 2.0) || !(k > 0.0)) {
        throw DomainError("lemma1_residual: need m > 0, alpha > 2, k > 0");
    }
    const double rhs = std::numbers::pi * std::exp(ln_gamma(m + 2.0 / alpha) - ln_gamma(m)) *
                       std::pow(k, -2.0 / alpha);

    // The integral is cut where Q(m, s) is negligible; what remains is bounded by
    // (2 pi / alpha) k^(-2/alpha) T^(2/alpha - 1) int_T^inf Q(m, s) ds.
    double s_max = m + 50.0 + 12.0 * std::sqrt(m);
    auto tail_bound = [&](double t) {
        return 2.0 * std::numbers::pi / alpha * std::pow(k, -2.0 / alpha) * std::pow(t, 2.0 / alpha - 1.0) *
               upper_gamma_q_tail(m, t);
    };
    while (tail_bound(s_max) > 1e-12 * rhs) s_max *= 2.0;

    auto r_of = [&](double s) { return std::pow(s / k, 1.0 / alpha); };
    auto integrand = [&](double r) {
        return 2.0 * std::numbers::pi * r * regularized_upper_gamma(m, k * std::pow(r, alpha));
    };

    double lhs = 0.0;
    double s_lo = 0.0;
    for (double s_hi = m * std::pow(2.0, -12.0); s_lo < s_max; s_hi *= 2.0) {
        s_hi = std::min(s_hi, s_max);
        lhs += integrate_piece(integrand, r_of(s_lo), r_of(s_hi), rhs, "lemma1_residual");
        s_lo = s_hi;
    }
    return std::abs(lhs - rhs) / rhs;
}

double lemma2_residual(double a_hat, double b_hat, double lambda_c, double alpha) {
    if (!(a_hat > 0.0) || !(b_hat > 0.0) || !(lambda_c > 0.0) || !(alpha > 2.0)) {
        throw DomainError("lemma2_residual: need a_hat, b_hat, lambda_c > 0 and alpha > 2");
    }
    const double u0 = std::pow(b_hat * b_hat / (a_hat * a_hat), 2.0 / alpha);
    const double rhs = -alpha / (2.0 * lambda_c) * std::expm1(-lambda_c * u0);

    // With u = x^(-2/alpha) the left side is (alpha/2) int_0^inf e^(-lc u) [1 - Q1(a, b u^(-alpha/4))] du.
    auto integrand = [&](double u) {
        if (u == 0.0) return 1.0;
        return std::exp(-lambda_c * u) * marcum_p1(a_hat, b_hat * std::pow(u, -0.25 * alpha));
    };
    // 1 - Q1(a, b) <= b^2 / 2, and e^(-lc u) <= 1.
    auto tail_bound = [&](double u) {
        const double by_exp = std::exp(-lambda_c * u) / lambda_c;
        const double by_power = 0.5 * b_hat * b_hat * std::pow(u, 1.0 - 0.5 * alpha) / (0.5 * alpha - 1.0);
        return std::min(by_exp, by_power);
    };

    const double scale = 2.0 * rhs / alpha;
    double integral = 0.0;
    double lo = 0.0;
    double hi = u0 * std::pow(2.0, -30.0);
    for (;;) {
        integral += integrate_piece(integrand, lo, hi, scale, "lemma2_residual");
        if (hi > u0 && tail_bound(hi) <= 1e-12 * scale) break;
        if (hi > 1e300) throw QuadratureError("lemma2_residual: integrand tail does not decay");
        lo = hi;
        hi *= 2.0;
    }
    const double lhs = 0.5 * alpha * integral;
    return (lhs - rhs) / rhs;
}

Lemma3Result lemma3_check(std::span<const double> rates, double c, std::uint64_t samples, RandomStream& rng) {
    if (rates.empty()) throw DomainError("lemma3_check: rates must be nonempty");
    if (!(c > 0.0)) throw DomainError("lemma3_check: c must be > 0");
    if (samples < 2) throw DomainError("lemma3_check: need at least two samples");
    double total = 0.0;
    std::vector<std::exponential_distribution<double>> draws;
    for (double rate : rates) {
        if (!(rate > 0.0)) throw DomainError("lemma3_check: rates must be > 0");
        total += rate;
        draws.emplace_back(rate);
    }
    const std::size_t n = rates.size();

    Lemma3Result out;
    out.analytic = 1.0 - std::pow(c / (c + total), static_cast<double>(n));

    // Tail P(Poisson(cX) >= N) = P(N, cX); averaged directly so it keeps relative precision.
    const double analytic_tail = std::pow(c / (c + total), static_cast<double>(n));
    double mean = 0.0;
    double m2 = 0.0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        double x = std::numeric_limits<double>::infinity();
        for (auto& draw : draws) x = std::min(x, draw(rng));
        const double value = regularized_lower_gamma(static_cast<double>(n), c * x);
        const double delta = value - mean;
        mean += delta / static_cast<double>(s + 1);
        m2 += delta * (value - mean);
    }
    out.empirical = 1.0 - mean;
    out.standard_error = std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples));
    out.z_score = out.standard_error > 0.0 ? std::abs(mean - analytic_tail) / out.standard_error
                                           : (mean == analytic_tail ? 0.0 : std::numeric_limits<double>::infinity());
    return out;
}

MarcumErrorCurve marcum_product_error(const Layer& layer, int trials, HopCountRange hop_count, RandomStream& rng,
                                      const FitOptions& options) {
    layer.validate();
    if (trials < 1) throw DomainError("marcum_product_error: trials must be >= 1");
    MarcumErrorCurve curve;
    curve.grid = fit_grid(options);
    curve.mean_abs_error.assign(curve.grid.size(), 0.0);
    const std::vector<Layer> only{layer};
    for (int t = 0; t < trials; ++t) {
        const Route route = random_route(only, hop_count, rng);
        const MarcumCollapse fit = fit_marcum_a_hat(route.hops(), layer, options);
        const MarcumCurves curves = marcum_curves(route.hops(), layer, fit.a_hat, options);
        for (std::size_t g = 0; g < curve.grid.size(); ++g) {
            curve.mean_abs_error[g] += std::abs(curves.exact[g] - curves.collapsed[g]);
        }
    }
    for (double& e : curve.mean_abs_error) {
        e /= trials;
        curve.max_mean_abs_error = std::max(curve.max_mean_abs_error, e);
    }
    return curve;
}

void write_error_csv(std::ostream& out, const MarcumErrorCurve& curve) {
    out << "grid_x,mean_abs_error\n";
    const auto old_precision = out.precision(17);
    for (std::size_t g = 0; g < curve.grid.size(); ++g) {
        out << curve.grid[g] << ',' << curve.mean_abs_error[g] << '\n';
    }
    out.precision(old_precision);
}

std::vector<VerifyRow> default_verification(std::uint64_t seed, std::uint64_t lemma3_samples) {
    std::vector<VerifyRow> rows;

    for (double m : {0.8, 1.0, 2.0, 5.0, 10.5}) {
        for (double alpha : {2.1, 2.3, 2.5, 2.9}) {
            for (double k : {1e-6, 1e-3, 1.0, 1e3}) {
                const double r = lemma1_residual(m, alpha, k);
                rows.push_back({"lemma1", format_params({{"m", m}, {"alpha", alpha}, {"k", k}}), r, 1e-6, r < 1e-6});
            }
        }
    }

    // Deviation should shrink as a_hat grows with the other parameters held fixed.
    for (double b_hat : {1.0, 2.0}) {
        for (double lambda_c : {0.01, 0.1}) {
            for (double alpha : {2.1, 2.5, 2.9}) {
                double previous = std::numeric_limits<double>::infinity();
                for (double a_hat : {2.0, 4.0, 6.0, 8.0, 10.0}) {
                    const double dev = std::abs(lemma2_residual(a_hat, b_hat, lambda_c, alpha));
                    rows.push_back({"lemma2",
                                    format_params({{"a_hat", a_hat}, {"b_hat", b_hat}, {"lambda_c", lambda_c},
                                                   {"alpha", alpha}}),
                                    dev, previous, dev < previous});
                    previous = dev;
                }
            }
        }
    }

    RandomStream rng = make_stream(seed, 3);
    std::uniform_int_distribution<int> count(1, 7);
    std::uniform_real_distribution<double> rate(0.1, 5.0);
    std::uniform_real_distribution<double> log_c(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        std::vector<double> rates(static_cast<std::size_t>(count(rng)));
        for (double& r : rates) r = rate(rng);
        const double c = std::pow(10.0, log_c(rng));
        const Lemma3Result res = lemma3_check(rates, c, lemma3_samples, rng);
        const double z = res.z_score;
        rows.push_back({"lemma3", format_params({{"N", static_cast<double>(rates.size())}, {"c", c}}), z, 3.0, z <= 3.0});
    }
    return rows;
}

}  // namespace scp
