#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scpkit/closedform.hpp"
#include "scpkit/model.hpp"
#include "scpkit/montecarlo.hpp"

namespace scp {

enum class SweepParameter { eve_density, k_factor_db, avg_link_distance, hop_count };

std::string_view to_string(SweepParameter parameter);

/// Optional pool of random routes drawn from the scenario's layers. Closed forms are
/// averaged over the pool and Monte-Carlo trials cycle through it.
struct RoutePool {
    int count = 1;
    HopCountRange hop_count;
};

// Sweep files:
//   {"parameter": "eve_density",
//    "values": {"from": 1e-15, "to": 1e-10, "count": 11, "spacing": "log"},
//    "models": ["rician", "rayleigh_multi", "monte_carlo"],
//    "trials": 20000, "mode": "common",
//    "random_routes": {"count": 200, "hop_count": [2, 7]}}
// "values" may also be a plain list. Units: eve_density per m^2, k_factor_db in dB,
// avg_link_distance in km, hop_count an integer.
struct SweepSpec {
    SweepParameter parameter = SweepParameter::eve_density;
    std::vector<double> values;
    /// Sorted by name; "monte_carlo" selects the simulator.
    std::vector<std::string> models;
    std::optional<std::uint64_t> trials;
    EveGeometry geometry = EveGeometry::common_distance;
    std::optional<RoutePool> random_routes;

    /// Throws InputError naming the offending field.
    void validate() const;
};

SweepSpec sweep_spec_from_json(std::string_view text);

/// Expands (from, to, count, spacing) into explicit values.
std::vector<double> spaced_values(double from, double to, int count, bool log_spacing);

/// Copy of `scenario` with the parameter set to `value`:
///   eve_density: every layer's density;
///   k_factor_db: every hop's K and every layer's K distribution (variance 0);
///   avg_link_distance: all hop distances scaled by one factor so their mean is value km;
///   hop_count: not applicable to a fixed route (throws DomainError).
Scenario apply_sweep_value(const Scenario& scenario, SweepParameter parameter, double value);

struct SweepRow {
    double parameter_value = 0.0;
    std::string model;
    std::optional<double> scp;  ///< empty when the model is singular for this point
    std::optional<double> mc_half_width;
};

struct SweepOptions {
    unsigned threads = 0;
    std::optional<std::uint64_t> trials_override;
    std::optional<std::uint64_t> seed_override;
    FitOptions fit;
};

/// Rows ordered by value, then model name. A hop_count sweep draws a fresh pool of
/// random routes with exactly that many hops for each value (one route if the sweep has
/// no random_routes).
std::vector<SweepRow> run_sweep(const Scenario& scenario, const SweepSpec& spec, const SweepOptions& options = {});

/// parameter_value,model,scp,mc_half_width
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace scp
