#include "scpkit/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "scpkit/errors.hpp"
#include "scpkit/specfun.hpp"

namespace scp {
namespace {

constexpr double kGoldenRatio = 0.6180339887498949;
constexpr int kCoarseScanPoints = 32;

void require_hops(std::span<const Hop> hops, const char* where) {
    if (hops.empty()) throw DomainError(std::string(where) + ": hop list is empty");
}

void require_alpha(const Layer& layer, const char* where) {
    if (!(layer.alpha > 2.0)) {
        throw DomainError(std::string(where) + ": path-loss exponent must be > 2");
    }
}

// (sum_i w_i d_i^alpha)^(2/alpha), factored through the longest hop so satellite
// distances in meters cannot overflow.
double distance_aggregate(std::span<const Hop> hops, double alpha, bool weight_by_k) {
    double d_max = 0.0;
    for (const auto& hop : hops) d_max = std::max(d_max, hop.distance_m);
    double sum = 0.0;
    for (const auto& hop : hops) {
        const double w = weight_by_k ? hop.k_factor + 1.0 : 1.0;
        sum += w * std::pow(hop.distance_m / d_max, alpha);
    }
    return d_max * d_max * std::pow(sum, 2.0 / alpha);
}

LayerScp finish(double kappa, double aggregate) {
    LayerScp out;
    out.kappa = kappa;
    out.exponent = kappa * aggregate;
    out.scp = std::exp(-out.exponent);
    return out;
}

struct FitProblem {
    std::vector<double> grid;
    std::vector<double> exact;
    double beta_hat = 0.0;  // sum of reference-normalised b_i^2

    double collapsed(double a_hat, double x) const { return marcum_q1(a_hat, std::sqrt(beta_hat * x)); }

    double objective(double a_hat) const {
        double sse = 0.0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const double diff = exact[g] - collapsed(a_hat, grid[g]);
            sse += diff * diff;
        }
        return sse;
    }
};

FitProblem make_fit_problem(std::span<const Hop> hops, const Layer& layer, const FitOptions& options) {
    FitProblem problem;
    problem.grid = fit_grid(options);
    problem.exact.assign(problem.grid.size(), 1.0);
    for (const auto& hop : hops) {
        const double a = std::sqrt(2.0 * hop.k_factor);
        const double beta =
            2.0 * (hop.k_factor + 1.0) * std::pow(hop.distance_m / options.reference_distance_m, layer.alpha);
        problem.beta_hat += beta;
        for (std::size_t g = 0; g < problem.grid.size(); ++g) {
            problem.exact[g] *= marcum_q1(a, std::sqrt(beta * problem.grid[g]));
        }
    }
    return problem;
}

double log_gamma_ratio(double shifted, double base) { return ln_gamma(shifted) - ln_gamma(base); }

}  // namespace

std::string_view to_string(ScpModel model) {
    switch (model) {
        case ScpModel::rician: return "rician";
        case ScpModel::rayleigh_multi: return "rayleigh_multi";
        case ScpModel::rayleigh_single: return "rayleigh_single";
        case ScpModel::erlang: return "erlang";
    }
    return "unknown";
}

ScpModel parse_scp_model(std::string_view name) {
    for (auto model : kAllScpModels) {
        if (to_string(model) == name) return model;
    }
    throw InputError("unknown model '" + std::string(name) + "'");
}

GammaSurrogate moment_match(std::span<const Hop> hops) {
    require_hops(hops, "moment_match");
    const double mean = static_cast<double>(hops.size());
    double variance = 0.0;
    for (const auto& hop : hops) {
        const double k = hop.k_factor;
        variance += (2.0 * k + 1.0) / ((k + 1.0) * (k + 1.0));
    }
    return {mean * mean / variance, variance / mean};
}

std::vector<double> fit_grid(const FitOptions& options) {
    if (!(options.grid_min > 0.0) || !(options.grid_max > options.grid_min) || options.grid_points < 2) {
        throw DomainError("fit grid: need 0 < grid_min < grid_max and at least two points");
    }
    std::vector<double> grid(static_cast<std::size_t>(options.grid_points));
    const double lo = std::log10(options.grid_min);
    const double step = (std::log10(options.grid_max) - lo) / (options.grid_points - 1);
    for (int i = 0; i < options.grid_points; ++i) {
        grid[static_cast<std::size_t>(i)] = std::pow(10.0, lo + step * i);
    }
    return grid;
}

MarcumCollapse fit_marcum_a_hat(std::span<const Hop> hops, const Layer& layer, const FitOptions& options) {
    require_hops(hops, "fit_marcum_a_hat");
    const FitProblem problem = make_fit_problem(hops, layer, options);

    MarcumCollapse out;
    for (const auto& hop : hops) {
        out.b_hat_sq_coeff += 2.0 * (hop.k_factor + 1.0) * layer.noise_power_w *
                              std::pow(hop.distance_m, layer.alpha) / layer.tx_power_w;
    }
    out.grid_truncated = problem.exact.front() < 0.99 || problem.exact.back() > 0.01;

    double a_max = 0.0;
    for (const auto& hop : hops) a_max = std::max(a_max, std::sqrt(2.0 * hop.k_factor));
    const double upper = 3.0 * a_max;

    if (upper > 0.0) {
        // The objective is unimodal in every regime we have looked at; the scan only
        // guards the golden-section bracket against a flat start.
        const double h = upper / (kCoarseScanPoints - 1);
        int best = 0;
        double best_value = problem.objective(0.0);
        for (int i = 1; i < kCoarseScanPoints; ++i) {
            const double v = problem.objective(h * i);
            if (v < best_value) {
                best_value = v;
                best = i;
            }
        }
        double lo = h * std::max(0, best - 1);
        double hi = h * std::min(kCoarseScanPoints - 1, best + 1);
        double x1 = hi - kGoldenRatio * (hi - lo);
        double x2 = lo + kGoldenRatio * (hi - lo);
        double f1 = problem.objective(x1);
        double f2 = problem.objective(x2);
        while (hi - lo > options.tolerance) {
            if (f1 <= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - kGoldenRatio * (hi - lo);
                f1 = problem.objective(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + kGoldenRatio * (hi - lo);
                f2 = problem.objective(x2);
            }
        }
        out.a_hat = 0.5 * (lo + hi);
        out.upper_bracket_hit = out.a_hat >= upper - options.tolerance;
    }

    double sse = 0.0;
    for (std::size_t g = 0; g < problem.grid.size(); ++g) {
        const double diff = std::abs(problem.exact[g] - problem.collapsed(out.a_hat, problem.grid[g]));
        sse += diff * diff;
        out.max_abs_error = std::max(out.max_abs_error, diff);
    }
    out.residual = sse;
    return out;
}

MarcumCurves marcum_curves(std::span<const Hop> hops, const Layer& layer, double a_hat,
                           const FitOptions& options) {
    require_hops(hops, "marcum_curves");
    FitProblem problem = make_fit_problem(hops, layer, options);
    MarcumCurves curves;
    curves.collapsed.reserve(problem.grid.size());
    for (double x : problem.grid) curves.collapsed.push_back(problem.collapsed(a_hat, x));
    curves.grid = std::move(problem.grid);
    curves.exact = std::move(problem.exact);
    return curves;
}

double kappa_rician(const GammaSurrogate& surrogate, const MarcumCollapse& collapse, const Layer& layer) {
    require_alpha(layer, "kappa_rician");
    if (layer.eve_density == 0.0) return 0.0;
    if (collapse.a_hat == 0.0) {
        throw SingularCoefficientError(
            "kappa_rician: a_hat is zero (Rayleigh regime); use the Erlang or Rayleigh baseline");
    }
    const double two_over_alpha = 2.0 / layer.alpha;
    return std::numbers::pi * layer.eve_density *
           std::exp(log_gamma_ratio(surrogate.shape + two_over_alpha, surrogate.shape)) *
           std::pow(2.0 * surrogate.scale / (collapse.a_hat * collapse.a_hat), two_over_alpha);
}

double kappa_rayleigh(const Layer& layer) {
    require_alpha(layer, "kappa_rayleigh");
    const double t = 2.0 / layer.alpha;
    return std::numbers::pi * layer.eve_density * std::exp(ln_gamma(1.0 + t) + ln_gamma(1.0 - t));
}

double kappa_erlang(const Layer& layer, std::size_t hop_count) {
    require_alpha(layer, "kappa_erlang");
    if (hop_count == 0) throw DomainError("kappa_erlang: hop count must be >= 1");
    const double t = 2.0 / layer.alpha;
    const double n = static_cast<double>(hop_count);
    return std::numbers::pi * layer.eve_density * std::exp(ln_gamma(1.0 - t) + log_gamma_ratio(n + t, n));
}

LayerScp layer_scp_rician(std::span<const Hop> hops, const Layer& layer, const FitOptions& options) {
    require_hops(hops, "layer_scp_rician");
    require_alpha(layer, "layer_scp_rician");
    return layer_scp_rician(hops, layer, fit_marcum_a_hat(hops, layer, options));
}

LayerScp layer_scp_rician(std::span<const Hop> hops, const Layer& layer, const MarcumCollapse& collapse) {
    require_hops(hops, "layer_scp_rician");
    const double kappa = kappa_rician(moment_match(hops), collapse, layer);
    return finish(kappa, distance_aggregate(hops, layer.alpha, true));
}

LayerScp layer_scp_rayleigh_multihop(std::span<const Hop> hops, const Layer& layer) {
    require_hops(hops, "layer_scp_rayleigh_multihop");
    return finish(kappa_rayleigh(layer), distance_aggregate(hops, layer.alpha, false));
}

LayerScp layer_scp_rayleigh_singlehop(std::span<const Hop> hops, const Layer& layer) {
    require_hops(hops, "layer_scp_rayleigh_singlehop");
    double sum_sq = 0.0;
    for (const auto& hop : hops) sum_sq += hop.distance_m * hop.distance_m;
    return finish(kappa_rayleigh(layer), sum_sq);
}

LayerScp layer_scp_erlang_multihop(std::span<const Hop> hops, const Layer& layer) {
    require_hops(hops, "layer_scp_erlang_multihop");
    return finish(kappa_erlang(layer, hops.size()), distance_aggregate(hops, layer.alpha, false));
}

double end_to_end_scp(const Scenario& scenario, ScpModel model, const FitOptions& options) {
    scenario.validate();
    double exponent = 0.0;
    for (const auto& group : scenario.group_by_layer()) {
        switch (model) {
            case ScpModel::rician:
                exponent += layer_scp_rician(group.hops, group.layer, options).exponent;
                break;
            case ScpModel::rayleigh_multi:
                exponent += layer_scp_rayleigh_multihop(group.hops, group.layer).exponent;
                break;
            case ScpModel::rayleigh_single:
                exponent += layer_scp_rayleigh_singlehop(group.hops, group.layer).exponent;
                break;
            case ScpModel::erlang:
                exponent += layer_scp_erlang_multihop(group.hops, group.layer).exponent;
                break;
        }
    }
    return std::exp(-exponent);
}

double end_to_end_scp_rician(const Scenario& scenario, const FitOptions& options) {
    return end_to_end_scp(scenario, ScpModel::rician, options);
}
double scp_rayleigh_multihop(const Scenario& scenario) {
    return end_to_end_scp(scenario, ScpModel::rayleigh_multi);
}
double scp_rayleigh_singlehop(const Scenario& scenario) {
    return end_to_end_scp(scenario, ScpModel::rayleigh_single);
}
double scp_erlang_multihop(const Scenario& scenario) { return end_to_end_scp(scenario, ScpModel::erlang); }

ScpReport evaluate_closed_forms(const Scenario& scenario, const FitOptions& options) {
    scenario.validate();
    ScpReport report;
    std::array<double, kAllScpModels.size()> exponent{};
    std::array<bool, kAllScpModels.size()> singular{};

    for (const auto& group : scenario.group_by_layer()) {
        ScpReport::LayerEntry entry;
        entry.id = group.layer.id;
        entry.hop_count = group.hops.size();
        entry.surrogate = moment_match(group.hops);
        entry.collapse = fit_marcum_a_hat(group.hops, group.layer, options);
        if (entry.collapse.upper_bracket_hit) {
            report.warnings.push_back("layer '" + entry.id.value +
                                      "': a_hat fit hit the upper search bracket");
        }
        if (entry.collapse.grid_truncated) {
            report.warnings.push_back("layer '" + entry.id.value +
                                      "': Marcum product does not span the fitting grid");
        }

        for (std::size_t m = 0; m < kAllScpModels.size(); ++m) {
            const ScpModel model = kAllScpModels[m];
            std::optional<LayerScp> value;
            switch (model) {
                case ScpModel::rician:
                    try {
                        value = layer_scp_rician(group.hops, group.layer, entry.collapse);
                    } catch (const SingularCoefficientError& e) {
                        report.warnings.push_back("layer '" + entry.id.value + "': " + e.what());
                    }
                    break;
                case ScpModel::rayleigh_multi:
                    value = layer_scp_rayleigh_multihop(group.hops, group.layer);
                    break;
                case ScpModel::rayleigh_single:
                    value = layer_scp_rayleigh_singlehop(group.hops, group.layer);
                    break;
                case ScpModel::erlang:
                    value = layer_scp_erlang_multihop(group.hops, group.layer);
                    break;
            }
            if (value) {
                exponent[m] += value->exponent;
            } else {
                singular[m] = true;
            }
            entry.models.push_back({model, value});
        }
        report.layers.push_back(std::move(entry));
    }

    for (std::size_t m = 0; m < kAllScpModels.size(); ++m) {
        std::optional<double> scp;
        if (!singular[m]) scp = std::exp(-exponent[m]);
        report.end_to_end.emplace_back(kAllScpModels[m], scp);
    }
    return report;
}

}  // namespace scp
