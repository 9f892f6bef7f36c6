#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scpkit/model.hpp"

namespace scp {

/// Moment-matched gamma law for the sum of eavesdropper power gains of one layer.
struct GammaSurrogate {
    double shape = 1.0;  ///< (E[Y])^2 / Var(Y)
    double scale = 1.0;  ///< Var(Y) / E[Y]
};

/// Single Marcum Q1(a_hat, b_hat sqrt(x)) standing in for the product of per-hop Q1 terms.
struct MarcumCollapse {
    double a_hat = 0.0;
    /// b_hat^2 without the x factor: sum_i 2 (K_i + 1) n_0 d_i^alpha / P, in 1/SNR units.
    double b_hat_sq_coeff = 0.0;
    /// Sum of squared deviations over the fitting grid at a_hat.
    double residual = 0.0;
    /// Largest pointwise |product - collapsed| over the fitting grid.
    double max_abs_error = 0.0;
    /// The minimizer sits on the upper end of the search bracket.
    bool upper_bracket_hit = false;
    /// The exact product does not run from ~1 to ~0 across the grid, so the fit is
    /// constrained only by part of the CDF.
    bool grid_truncated = false;
};

/// Fitting grid for a_hat. Grid values are SNR thresholds expressed relative to the mean
/// SNR of a reference link: x_snr = x * P / (n_0 * reference_distance^alpha). With the
/// 1 km default the grid is independent of P, n_0 and of the distance unit.
struct FitOptions {
    double grid_min = 1e-9;
    double grid_max = 1e-2;
    int grid_points = 200;
    double reference_distance_m = 1000.0;
    double tolerance = 1e-4;  ///< absolute tolerance on a_hat
};

struct LayerScp {
    double kappa = 0.0;
    double scp = 1.0;
    /// kappa times the distance aggregate; scp = exp(-exponent).
    double exponent = 0.0;
};

enum class ScpModel { rician, rayleigh_multi, rayleigh_single, erlang };

inline constexpr std::array<ScpModel, 4> kAllScpModels = {
    ScpModel::erlang, ScpModel::rayleigh_multi, ScpModel::rayleigh_single, ScpModel::rician};

std::string_view to_string(ScpModel model);
/// Throws InputError for unknown names.
ScpModel parse_scp_model(std::string_view name);

GammaSurrogate moment_match(std::span<const Hop> hops);

/// Log-spaced grid of FitOptions::grid_points values in [grid_min, grid_max].
std::vector<double> fit_grid(const FitOptions& options = {});

/// Fits a_hat by least squares of the collapsed Q1 against the exact product over the grid.
/// Coarse scan of [0, 3 max_i sqrt(2 K_i)], then golden-section refinement.
MarcumCollapse fit_marcum_a_hat(std::span<const Hop> hops, const Layer& layer,
                                const FitOptions& options = {});

/// Exact product of per-hop Q1 terms and the collapsed Q1 on the fitting grid.
struct MarcumCurves {
    std::vector<double> grid;
    std::vector<double> exact;
    std::vector<double> collapsed;
};
MarcumCurves marcum_curves(std::span<const Hop> hops, const Layer& layer, double a_hat,
                           const FitOptions& options = {});

/// pi lambda Gamma(m + 2/alpha) / Gamma(m) (2 theta / a_hat^2)^(2/alpha).
/// Zero when lambda is zero; SingularCoefficientError when a_hat is zero.
double kappa_rician(const GammaSurrogate& surrogate, const MarcumCollapse& collapse,
                    const Layer& layer);

double kappa_rayleigh(const Layer& layer);
double kappa_erlang(const Layer& layer, std::size_t hop_count);

LayerScp layer_scp_rician(std::span<const Hop> hops, const Layer& layer,
                          const FitOptions& options = {});
/// Same, reusing an earlier fit (the fit does not depend on lambda).
LayerScp layer_scp_rician(std::span<const Hop> hops, const Layer& layer,
                          const MarcumCollapse& collapse);
LayerScp layer_scp_rayleigh_multihop(std::span<const Hop> hops, const Layer& layer);
LayerScp layer_scp_rayleigh_singlehop(std::span<const Hop> hops, const Layer& layer);
LayerScp layer_scp_erlang_multihop(std::span<const Hop> hops, const Layer& layer);

double end_to_end_scp_rician(const Scenario& scenario, const FitOptions& options = {});
double scp_rayleigh_multihop(const Scenario& scenario);
double scp_rayleigh_singlehop(const Scenario& scenario);
double scp_erlang_multihop(const Scenario& scenario);
double end_to_end_scp(const Scenario& scenario, ScpModel model, const FitOptions& options = {});

/// Per-layer and end-to-end values for all four closed forms.
struct ScpReport {
    struct ModelResult {
        ScpModel model;
        std::optional<LayerScp> value;  ///< empty when the coefficient is singular
    };
    struct LayerEntry {
        LayerId id;
        std::size_t hop_count = 0;
        GammaSurrogate surrogate;
        MarcumCollapse collapse;
        std::vector<ModelResult> models;
    };
    std::vector<LayerEntry> layers;
    std::vector<std::pair<ScpModel, std::optional<double>>> end_to_end;
    std::vector<std::string> warnings;
};

ScpReport evaluate_closed_forms(const Scenario& scenario, const FitOptions& options = {});

}  // namespace scp
