#include "scpkit/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "scpkit/errors.hpp"

namespace scp {
namespace {

using Json = nlohmann::ordered_json;

constexpr double kDefaultTxPowerDbm = 40.0;
constexpr double kDefaultNoisePowerDbm = -100.0;

const Json& field(const Json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) throw InputError(where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw InputError(where + "." + key + ": missing");
    return *it;
}

double number(const Json& value, const std::string& where) {
    if (!value.is_number()) throw InputError(where + ": expected a number");
    return value.get<double>();
}

double number_field(const Json& obj, const std::string& key, const std::string& where) {
    return number(field(obj, key, where), where + "." + key);
}

double number_or(const Json& obj, const std::string& key, double fallback, const std::string& where) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : number(*it, where + "." + key);
}

std::string string_field(const Json& obj, const std::string& key, const std::string& where) {
    const Json& value = field(obj, key, where);
    if (!value.is_string()) throw InputError(where + "." + key + ": expected a string");
    return value.get<std::string>();
}

Layer parse_layer(const Json& j, const std::string& where) {
    Layer layer;
    layer.id = LayerId(string_field(j, "id", where));
    layer.alpha = number_field(j, "alpha", where);
    layer.eve_density = number_field(j, "eve_density", where);
    layer.tx_power_w = dbm_to_watts(number_or(j, "tx_power_dbm", kDefaultTxPowerDbm, where));
    layer.noise_power_w = dbm_to_watts(number_or(j, "noise_power_dbm", kDefaultNoisePowerDbm, where));
    layer.k_db_mean = number_field(j, "k_db_mean", where);
    layer.k_db_var = number_field(j, "k_db_var", where);
    const Json& range = field(j, "link_distance_km", where);
    if (!range.is_array() || range.size() != 2) {
        throw InputError(where + ".link_distance_km: expected [min, max]");
    }
    layer.link_distance_m = {number(range[0], where + ".link_distance_km[0]") * kMetersPerKm,
                             number(range[1], where + ".link_distance_km[1]") * kMetersPerKm};
    return layer;
}

Hop parse_hop(const Json& j, const std::string& where) {
    Hop hop;
    hop.layer_id = LayerId(string_field(j, "layer", where));
    hop.distance_m = number_field(j, "distance_km", where) * kMetersPerKm;
    hop.k_factor = number_field(j, "k_factor", where);
    return hop;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

Scenario scenario_from_json(std::string_view text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(std::string("scenario: malformed JSON: ") + e.what());
    }
    Scenario scenario;
    if (auto it = root.find("seed"); it != root.end()) {
        if (!it->is_number_integer()) throw InputError("seed: expected an integer");
        scenario.seed = it->get<std::uint64_t>();
    }
    const Json& layers = field(root, "layers", "scenario");
    if (!layers.is_array()) throw InputError("layers: expected an array");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        scenario.layers.push_back(parse_layer(layers[i], "layers[" + std::to_string(i) + "]"));
    }
    const Json& hops = field(field(root, "route", "scenario"), "hops", "route");
    if (!hops.is_array()) throw InputError("route.hops: expected an array");
    std::vector<Hop> parsed;
    for (std::size_t i = 0; i < hops.size(); ++i) {
        parsed.push_back(parse_hop(hops[i], "route.hops[" + std::to_string(i) + "]"));
    }
    scenario.route = Route(std::move(parsed));
    try {
        scenario.validate();
    } catch (const DomainError& e) {
        throw InputError(e.what());
    }
    return scenario;
}

std::string scenario_to_json(const Scenario& scenario) {
    Json root;
    root["seed"] = scenario.seed;
    root["layers"] = Json::array();
    for (const auto& layer : scenario.layers) {
        Json j;
        j["id"] = layer.id.value;
        j["alpha"] = layer.alpha;
        j["eve_density"] = layer.eve_density;
        j["tx_power_dbm"] = watts_to_dbm(layer.tx_power_w);
        j["noise_power_dbm"] = watts_to_dbm(layer.noise_power_w);
        j["k_db_mean"] = layer.k_db_mean;
        j["k_db_var"] = layer.k_db_var;
        j["link_distance_km"] = {layer.link_distance_m.min_m / kMetersPerKm, layer.link_distance_m.max_m / kMetersPerKm};
        root["layers"].push_back(std::move(j));
    }
    Json hops = Json::array();
    for (const auto& hop : scenario.route.hops()) {
        hops.push_back({{"layer", hop.layer_id.value}, {"distance_km", hop.distance_m / kMetersPerKm},
                        {"k_factor", hop.k_factor}});
    }
    root["route"] = {{"hops", std::move(hops)}};
    return root.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path.string() + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Scenario load_scenario(const std::filesystem::path& path) { return scenario_from_json(read_text_file(path)); }

std::string report_to_json(const ScpReport& report) {
    Json root;
    root["layers"] = Json::array();
    for (const auto& entry : report.layers) {
        Json j;
        j["id"] = entry.id.value;
        j["hops"] = entry.hop_count;
        j["gamma_shape"] = entry.surrogate.shape;
        j["gamma_scale"] = entry.surrogate.scale;
        j["a_hat"] = entry.collapse.a_hat;
        j["b_hat_sq_coeff"] = entry.collapse.b_hat_sq_coeff;
        j["fit_max_abs_error"] = entry.collapse.max_abs_error;
        Json models = Json::object();
        for (const auto& result : entry.models) {
            if (result.value) {
                models[std::string(to_string(result.model))] = {{"kappa", result.value->kappa},
                                                                {"scp", result.value->scp}};
            } else {
                models[std::string(to_string(result.model))] = nullptr;
            }
        }
        j["models"] = std::move(models);
        root["layers"].push_back(std::move(j));
    }
    Json e2e = Json::object();
    for (const auto& [model, value] : report.end_to_end) e2e[std::string(to_string(model))] = optional_number(value);
    root["end_to_end"] = std::move(e2e);
    root["warnings"] = report.warnings;
    return root.dump(2) + "\n";
}

std::string estimate_to_json(const McEstimate& estimate, const McConfig& config) {
    Json root;
    root["scp_hat"] = estimate.scp_hat;
    root["half_width_95"] = estimate.half_width_95;
    root["trials"] = estimate.trials;
    root["secure_trials"] = estimate.secure_trials;
    root["seed"] = config.seed;
    root["mode"] = config.geometry == EveGeometry::common_distance ? "common" : "exact";
    Json per_layer = Json::object();
    for (const auto& [id, value] : estimate.per_layer_scp_hat) per_layer[id.value] = value;
    root["per_layer_scp_hat"] = std::move(per_layer);
    return root.dump(2) + "\n";
}

std::string fit_to_json(const LayerId& layer, const GammaSurrogate& surrogate, const MarcumCollapse& collapse,
                        const std::vector<std::string>& warnings) {
    Json root;
    root["layer"] = layer.value;
    root["a_hat"] = collapse.a_hat;
    root["b_hat_sq_coeff"] = collapse.b_hat_sq_coeff;
    root["residual"] = collapse.residual;
    root["max_abs_error"] = collapse.max_abs_error;
    root["gamma_shape"] = surrogate.shape;
    root["gamma_scale"] = surrogate.scale;
    root["warnings"] = warnings;
    return root.dump(2) + "\n";
}

}  // namespace scp
