#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "scpkit/random.hpp"

namespace scp {

/// Name of a network layer ("LEO", "Ground", ...).
struct LayerId {
    std::string value;

    LayerId() = default;
    explicit LayerId(std::string v) : value(std::move(v)) {}

    friend auto operator<=>(const LayerId&, const LayerId&) = default;
};

struct DistanceRange {
    double min_m = 0.0;
    double max_m = 0.0;
};

/// Physics shared by every node of one network layer. SI units throughout.
struct Layer {
    LayerId id;
    double alpha = 2.5;            ///< path-loss exponent, > 2
    double eve_density = 0.0;      ///< eavesdroppers per m^2
    double tx_power_w = 10.0;      ///< transmit power P_l
    double noise_power_w = 1e-13;  ///< noise power n_0
    double k_db_mean = 0.0;        ///< mean of the K-factor in dB
    double k_db_var = 0.0;         ///< variance of the K-factor in dB^2
    DistanceRange link_distance_m;

    /// Throws DomainError naming the violated field.
    void validate() const;
};

/// One legitimate link.
struct Hop {
    LayerId layer_id;
    double distance_m = 0.0;
    double k_factor = 0.0;  ///< linear scale

    void validate() const;
};

/// Hops of a route that fall in one layer, in route order.
struct LayerGroup {
    Layer layer;
    std::vector<Hop> hops;
};

class Route {
public:
    Route() = default;
    explicit Route(std::vector<Hop> hops);

    std::span<const Hop> hops() const { return hops_; }
    std::size_t size() const { return hops_.size(); }
    bool empty() const { return hops_.empty(); }

private:
    std::vector<Hop> hops_;
};

struct Scenario {
    std::vector<Layer> layers;
    Route route;
    std::uint64_t seed = 0;

    /// Checks every layer, every hop, unique layer ids and that each hop's layer exists.
    void validate() const;

    /// Throws DomainError when the id is unknown.
    const Layer& layer(const LayerId& id) const;

    /// Partition of the route by layer. Groups follow the order of `layers` and only
    /// layers with at least one hop appear. Hop counts over all groups sum to the route size.
    std::vector<LayerGroup> group_by_layer() const;
};

struct HopCountRange {
    int min = 2;
    int max = 7;
};

/// K_dB ~ Normal(k_db_mean, k_db_var); returns 10^(K_dB / 10).
double sample_k_factor(const Layer& layer, RandomStream& rng);

/// P_l * gain / (n_0 * d^alpha_l).
double legit_snr(const Hop& hop, const Layer& layer, double power_gain);

/// Uniform hop count in `hop_count`, uniform layer per hop, uniform distance within
/// the layer's range and a K-factor from sample_k_factor.
Route random_route(std::span<const Layer> layers, HopCountRange hop_count, RandomStream& rng);

/// The four layers of the space-air-ground-sea testbed with a common eavesdropper density
/// (per m^2). Transmit power 10 W and noise power 1e-13 W unless overridden.
std::vector<Layer> testbed_layers(double eve_density_per_m2 = 0.0);

constexpr double kMetersPerKm = 1000.0;
constexpr double kSquareMetersPerSquareKm = 1e6;

}  // namespace scp

template <>
struct std::hash<scp::LayerId> {
    std::size_t operator()(const scp::LayerId& id) const noexcept {
        return std::hash<std::string>{}(id.value);
    }
};
