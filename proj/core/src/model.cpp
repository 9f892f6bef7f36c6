#include "scpkit/model.hpp"

#include <cmath>
#include <set>
#include <string>

#include "scpkit/errors.hpp"

namespace scp {
namespace {

void require(bool ok, const std::string& where, const char* what) {
    if (!ok) throw DomainError(where + ": " + what);
}

}  // namespace

void Layer::validate() const {
    const std::string where = "layer '" + id.value + "'";
    require(!id.value.empty(), where, "id must be non-empty");
    require(std::isfinite(alpha) && alpha > 2.0, where + ".alpha", "must be > 2");
    require(std::isfinite(eve_density) && eve_density >= 0.0, where + ".eve_density", "must be >= 0");
    require(std::isfinite(tx_power_w) && tx_power_w > 0.0, where + ".tx_power", "must be > 0");
    require(std::isfinite(noise_power_w) && noise_power_w > 0.0, where + ".noise_power", "must be > 0");
    require(std::isfinite(k_db_mean), where + ".k_db_mean", "must be finite");
    require(std::isfinite(k_db_var) && k_db_var >= 0.0, where + ".k_db_var", "must be >= 0");
    require(std::isfinite(link_distance_m.min_m) && link_distance_m.min_m > 0.0,
            where + ".link_distance.min", "must be > 0");
    require(std::isfinite(link_distance_m.max_m) && link_distance_m.max_m >= link_distance_m.min_m,
            where + ".link_distance.max", "must be >= min");
}

void Hop::validate() const {
    const std::string where = "hop in layer '" + layer_id.value + "'";
    require(std::isfinite(distance_m) && distance_m > 0.0, where + ".distance", "must be > 0");
    require(std::isfinite(k_factor) && k_factor >= 0.0, where + ".k_factor", "must be >= 0");
}

Route::Route(std::vector<Hop> hops) : hops_(std::move(hops)) {}

void Scenario::validate() const {
    std::set<LayerId> ids;
    for (const auto& layer : layers) {
        layer.validate();
        if (!ids.insert(layer.id).second) {
            throw DomainError("layer '" + layer.id.value + "': duplicate id");
        }
    }
    if (route.empty()) throw DomainError("route: must contain at least one hop");
    for (const auto& hop : route.hops()) {
        hop.validate();
        if (!ids.contains(hop.layer_id)) {
            throw DomainError("hop layer '" + hop.layer_id.value + "': no such layer");
        }
    }
}

const Layer& Scenario::layer(const LayerId& id) const {
    for (const auto& layer : layers) {
        if (layer.id == id) return layer;
    }
    throw DomainError("no layer with id '" + id.value + "'");
}

std::vector<LayerGroup> Scenario::group_by_layer() const {
    std::vector<LayerGroup> groups;
    for (const auto& layer : layers) {
        LayerGroup group{layer, {}};
        for (const auto& hop : route.hops()) {
            if (hop.layer_id == layer.id) group.hops.push_back(hop);
        }
        if (!group.hops.empty()) groups.push_back(std::move(group));
    }
    return groups;
}

double sample_k_factor(const Layer& layer, RandomStream& rng) {
    if (layer.k_db_var == 0.0) return std::pow(10.0, layer.k_db_mean / 10.0);
    std::normal_distribution<double> k_db(layer.k_db_mean, std::sqrt(layer.k_db_var));
    return std::pow(10.0, k_db(rng) / 10.0);
}

double legit_snr(const Hop& hop, const Layer& layer, double power_gain) {
    return layer.tx_power_w * power_gain /
           (layer.noise_power_w * std::pow(hop.distance_m, layer.alpha));
}

Route random_route(std::span<const Layer> layers, HopCountRange hop_count, RandomStream& rng) {
    if (layers.empty()) throw DomainError("random_route: layer list is empty");
    if (hop_count.min < 1 || hop_count.max < hop_count.min) {
        throw DomainError("random_route: hop count range must satisfy 1 <= min <= max");
    }
    std::uniform_int_distribution<int> count_dist(hop_count.min, hop_count.max);
    std::uniform_int_distribution<std::size_t> layer_dist(0, layers.size() - 1);

    const int count = count_dist(rng);
    std::vector<Hop> hops;
    hops.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const Layer& layer = layers[layer_dist(rng)];
        std::uniform_real_distribution<double> distance(layer.link_distance_m.min_m,
                                                        layer.link_distance_m.max_m);
        Hop hop;
        hop.layer_id = layer.id;
        hop.distance_m = layer.link_distance_m.min_m == layer.link_distance_m.max_m
                             ? layer.link_distance_m.min_m
                             : distance(rng);
        hop.k_factor = sample_k_factor(layer, rng);
        hops.push_back(std::move(hop));
    }
    return Route(std::move(hops));
}

std::vector<Layer> testbed_layers(double eve_density_per_m2) {
    auto make = [&](const char* id, double dmin_km, double dmax_km, double k_mean, double k_var,
                    double alpha) {
        Layer layer;
        layer.id = LayerId(id);
        layer.alpha = alpha;
        layer.eve_density = eve_density_per_m2;
        layer.k_db_mean = k_mean;
        layer.k_db_var = k_var;
        layer.link_distance_m = {dmin_km * kMetersPerKm, dmax_km * kMetersPerKm};
        return layer;
    };
    return {
        make("LEO", 200.0, 550.0, 13.5, 1.8, 2.1),
        make("HAPS", 20.0, 380.0, 13.5, 1.8, 2.3),
        make("Ground", 10.0, 30.0, 7.0, 4.0, 2.9),
        make("Sea", 10.0, 30.0, 12.7, 1.2, 2.5),
    };
}

}  // namespace scp
