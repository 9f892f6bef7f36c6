#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "scpkit/model.hpp"
#include "scpkit/random.hpp"

namespace scp {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// How an eavesdropper's distance to the hops of a layer is measured.
///   common_distance: one distance, from the layer's first transmitter, for every hop.
///   exact: distance to each hop's transmitter, transmitters placed on a line.
enum class EveGeometry { common_distance, exact };

struct McConfig {
    std::uint64_t trials = 100000;
    /// Fixed per-layer window radius in meters. Layers not listed get a per-trial window
    /// large enough that the missed breach probability is negligible (see README).
    std::map<LayerId, double> truncation_radius_m;
    EveGeometry geometry = EveGeometry::common_distance;
    std::uint64_t seed = 0;
    /// Worker threads; 0 picks the hardware concurrency. Results do not depend on it.
    unsigned threads = 0;

    void validate() const;
};

struct McEstimate {
    double scp_hat = 1.0;
    double half_width_95 = 0.0;  ///< 1.96 sqrt(p (1 - p) / trials)
    std::map<LayerId, double> per_layer_scp_hat;
    std::uint64_t trials = 0;
    std::uint64_t secure_trials = 0;
};

/// HPPP of the given density on a disc centred at the origin. Points come out in order of
/// increasing radius. Returns true if the visitor stopped the walk early.
bool visit_hppp_disc(double density, double radius, RandomStream& rng,
                     const std::function<bool(const Point2&)>& visitor);
std::vector<Point2> sample_hppp_disc(double density, double radius, RandomStream& rng);

/// Upper bound on the q-quantile of the sum of unit-mean Rician powers with the given
/// K-factors, from the Chernoff bound on the upper tail.
double eve_fade_upper_quantile(std::span<const double> k_factors, double q = 0.9999);

/// Secrecy test for the hops of one layer.
class LayerSimulator {
public:
    LayerSimulator(LayerGroup group, EveGeometry geometry, double fixed_radius_m = 0.0);

    const Layer& layer() const { return group_.layer; }

    /// One trial: fresh legitimate fades, fresh HPPP of eavesdroppers with fresh fades.
    bool secure(RandomStream& rng) const;

    /// Same test against the given eavesdropper positions instead of an HPPP.
    bool secure_against(std::span<const Point2> eves, RandomStream& rng) const;

private:
    double min_legit_margin(RandomStream& rng) const;
    bool breaches(const Point2& eve, double margin, RandomStream& rng) const;
    double window_radius(double margin) const;

    LayerGroup group_;
    EveGeometry geometry_;
    double fixed_radius_m_;
    std::vector<double> tx_x_;  // transmitter positions along the x axis
    double max_distance_ = 0.0;
    double span_ = 0.0;
    double fade_quantile_ = 0.0;
};

struct TrialOutcome {
    std::vector<std::pair<LayerId, bool>> per_layer;
    bool secure = true;
};

TrialOutcome simulate_trial(const Scenario& scenario, const McConfig& config, RandomStream& rng);

/// Runs config.trials trials; trial t uses make_stream(config.seed, t).
McEstimate estimate_scp(const Scenario& scenario, const McConfig& config);

/// Trial t runs scenario pool[t % pool.size()]. Per-layer fractions count only the trials
/// whose route uses the layer.
McEstimate estimate_scp(std::span<const Scenario> pool, const McConfig& config);

}  // namespace scp
