#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "scpkit/closedform.hpp"
#include "scpkit/model.hpp"
#include "scpkit/montecarlo.hpp"

namespace scp {

// Scenario files use field-friendly units: distances in km, powers in dBm, densities per
// m^2 and K-factors linear on hops. Everything is converted to SI on load.
//
//   {
//     "seed": 7,
//     "layers": [{"id": "Ground", "alpha": 2.9, "eve_density": 1e-11,
//                 "tx_power_dbm": 40, "noise_power_dbm": -100,
//                 "k_db_mean": 7.0, "k_db_var": 4.0, "link_distance_km": [10, 30]}],
//     "route": {"hops": [{"layer": "Ground", "distance_km": 12.5, "k_factor": 5.0}]}
//   }
//
// tx_power_dbm and noise_power_dbm default to 40 and -100; seed defaults to 0.

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Throws InputError naming the offending field.
Scenario scenario_from_json(std::string_view text);
std::string scenario_to_json(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);

/// Reads a whole file; InputError if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

std::string report_to_json(const ScpReport& report);
std::string estimate_to_json(const McEstimate& estimate, const McConfig& config);
std::string fit_to_json(const LayerId& layer, const GammaSurrogate& surrogate, const MarcumCollapse& collapse,
                        const std::vector<std::string>& warnings);

}  // namespace scp
