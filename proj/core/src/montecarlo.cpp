#include "scpkit/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "scpkit/errors.hpp"
#include "scpkit/specfun.hpp"

namespace scp {
namespace {

constexpr double kWindowFloorFactor = 10.0;

double log_rician_mgf(double k, double t) {
    const double s = k + 1.0 - t;
    return std::log((k + 1.0) / s) + k * t / s;
}

unsigned worker_count(const McConfig& config, std::uint64_t trials) {
    unsigned n = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::uint64_t>(n, std::max<std::uint64_t>(trials, 1)));
}

struct Counts {
    std::uint64_t secure = 0;
    std::vector<std::uint64_t> layer_secure;
    std::vector<std::uint64_t> layer_seen;
};

struct PoolEntry {
    std::vector<LayerSimulator> layers;
    std::vector<std::size_t> slots;  // index of each layer in the merged per-layer table
};

}  // namespace

void McConfig::validate() const {
    if (trials < 1) throw DomainError("mc.trials: must be >= 1");
    for (const auto& [id, radius] : truncation_radius_m) {
        if (!(radius > 0.0) || !std::isfinite(radius)) {
            throw DomainError("mc.truncation_radius['" + id.value + "']: must be > 0");
        }
    }
}

bool visit_hppp_disc(double density, double radius, RandomStream& rng,
                     const std::function<bool(const Point2&)>& visitor) {
    if (!(density >= 0.0) || !std::isfinite(density)) throw DomainError("hppp: density must be >= 0");
    if (!(radius > 0.0)) throw DomainError("hppp: radius must be > 0");
    if (density == 0.0) return false;

    // Squared radii of an HPPP seen from the origin form a Poisson process of rate
    // lambda * pi on the half line.
    std::exponential_distribution<double> gap(density * std::numbers::pi);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const double r2_max = radius * radius;
    double r2 = 0.0;
    for (;;) {
        r2 += gap(rng);
        if (r2 > r2_max) return false;
        const double r = std::sqrt(r2);
        const double phi = angle(rng);
        if (visitor({r * std::cos(phi), r * std::sin(phi)})) return true;
    }
}

std::vector<Point2> sample_hppp_disc(double density, double radius, RandomStream& rng) {
    std::vector<Point2> points;
    visit_hppp_disc(density, radius, rng, [&](const Point2& p) {
        points.push_back(p);
        return false;
    });
    return points;
}

double eve_fade_upper_quantile(std::span<const double> k_factors, double q) {
    if (k_factors.empty()) throw DomainError("eve_fade_upper_quantile: no K-factors");
    if (!(q > 0.0 && q < 1.0)) throw DomainError("eve_fade_upper_quantile: q must be in (0,1)");
    double t_max = std::numeric_limits<double>::infinity();
    for (double k : k_factors) t_max = std::min(t_max, k + 1.0);
    const double log_tail = std::log1p(-q);

    // P(Y >= y) <= exp(-t y) prod M_i(t); the bound hits 1 - q at y(t) below.
    auto y_of = [&](double t) {
        double log_mgf = 0.0;
        for (double k : k_factors) log_mgf += log_rician_mgf(k, t);
        return (log_mgf - log_tail) / t;
    };
    double lo = 1e-9 * t_max;
    double hi = (1.0 - 1e-9) * t_max;
    constexpr double g = 0.6180339887498949;
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = y_of(x1);
    double f2 = y_of(x2);
    for (int i = 0; i < 100; ++i) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = y_of(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = y_of(x2);
        }
    }
    // Any t gives a valid bound, so the approximate minimizer is still an upper bound.
    return std::min(f1, f2);
}

LayerSimulator::LayerSimulator(LayerGroup group, EveGeometry geometry, double fixed_radius_m)
    : group_(std::move(group)), geometry_(geometry), fixed_radius_m_(fixed_radius_m) {
    if (group_.hops.empty()) throw DomainError("LayerSimulator: hop list is empty");
    std::vector<double> ks;
    double x = 0.0;
    for (const auto& hop : group_.hops) {
        tx_x_.push_back(x);
        x += hop.distance_m;
        max_distance_ = std::max(max_distance_, hop.distance_m);
        ks.push_back(hop.k_factor);
    }
    span_ = tx_x_.back();
    fade_quantile_ = eve_fade_upper_quantile(ks);
}

// min_i g_i / d_i^alpha: the worst legitimate SNR without the common P / n0 factor.
double LayerSimulator::min_legit_margin(RandomStream& rng) const {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& hop : group_.hops) {
        const double gain = sample_rician_power(hop.k_factor, rng);
        margin = std::min(margin, gain / std::pow(hop.distance_m, group_.layer.alpha));
    }
    return margin;
}

bool LayerSimulator::breaches(const Point2& eve, double margin, RandomStream& rng) const {
    const double alpha = group_.layer.alpha;
    double combined = 0.0;
    if (geometry_ == EveGeometry::common_distance) {
        const double path_loss = std::pow(std::hypot(eve.x, eve.y), alpha);
        for (const auto& hop : group_.hops) {
            combined += sample_rician_power(hop.k_factor, rng) / path_loss;
        }
    } else {
        for (std::size_t i = 0; i < group_.hops.size(); ++i) {
            const double d = std::hypot(eve.x - tx_x_[i], eve.y);
            combined += sample_rician_power(group_.hops[i].k_factor, rng) / std::pow(d, alpha);
        }
    }
    return combined >= margin;
}

// Beyond this radius an eavesdropper breaches only if its fade sum exceeds the
// 99.99% Chernoff quantile.
double LayerSimulator::window_radius(double margin) const {
    if (fixed_radius_m_ > 0.0) return fixed_radius_m_;
    double reach = std::pow(fade_quantile_ / margin, 1.0 / group_.layer.alpha);
    if (geometry_ == EveGeometry::exact) reach += span_;
    return std::max(kWindowFloorFactor * max_distance_, reach);
}

bool LayerSimulator::secure(RandomStream& rng) const {
    const double density = group_.layer.eve_density;
    if (density == 0.0) return true;
    const double margin = min_legit_margin(rng);
    if (!(margin > 0.0)) return false;
    const double radius = window_radius(margin);
    if (!std::isfinite(radius)) return false;
    const bool breached =
        visit_hppp_disc(density, radius, rng, [&](const Point2& eve) { return breaches(eve, margin, rng); });
    return !breached;
}

bool LayerSimulator::secure_against(std::span<const Point2> eves, RandomStream& rng) const {
    const double margin = min_legit_margin(rng);
    for (const auto& eve : eves) {
        if (breaches(eve, margin, rng)) return false;
    }
    return true;
}

namespace {

std::vector<LayerSimulator> build_simulators(const Scenario& scenario, const McConfig& config) {
    std::vector<LayerSimulator> sims;
    for (auto& group : scenario.group_by_layer()) {
        double fixed = 0.0;
        if (auto it = config.truncation_radius_m.find(group.layer.id); it != config.truncation_radius_m.end()) {
            fixed = it->second;
        }
        sims.emplace_back(std::move(group), config.geometry, fixed);
    }
    return sims;
}

McEstimate run_pool(std::span<const PoolEntry> pool, const std::vector<LayerId>& ids, const McConfig& config) {
    const std::uint64_t trials = config.trials;
    const unsigned workers = worker_count(config, trials);
    std::vector<Counts> partial(workers);

    auto work = [&](unsigned w) {
        Counts& c = partial[w];
        c.layer_secure.assign(ids.size(), 0);
        c.layer_seen.assign(ids.size(), 0);
        const std::uint64_t begin = trials * w / workers;
        const std::uint64_t end = trials * (w + 1) / workers;
        for (std::uint64_t t = begin; t < end; ++t) {
            const PoolEntry& entry = pool[t % pool.size()];
            RandomStream rng = make_stream(config.seed, t);
            bool all = true;
            for (std::size_t l = 0; l < entry.layers.size(); ++l) {
                const bool ok = entry.layers[l].secure(rng);
                ++c.layer_seen[entry.slots[l]];
                if (ok) ++c.layer_secure[entry.slots[l]];
                all = all && ok;
            }
            if (all) ++c.secure;
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> threads;
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
    }

    McEstimate out;
    out.trials = trials;
    std::vector<std::uint64_t> layer_secure(ids.size(), 0);
    std::vector<std::uint64_t> layer_seen(ids.size(), 0);
    for (const auto& c : partial) {
        out.secure_trials += c.secure;
        for (std::size_t l = 0; l < ids.size(); ++l) {
            layer_secure[l] += c.layer_secure[l];
            layer_seen[l] += c.layer_seen[l];
        }
    }
    const double n = static_cast<double>(trials);
    out.scp_hat = static_cast<double>(out.secure_trials) / n;
    out.half_width_95 = 1.96 * std::sqrt(out.scp_hat * (1.0 - out.scp_hat) / n);
    for (std::size_t l = 0; l < ids.size(); ++l) {
        if (layer_seen[l] > 0) {
            out.per_layer_scp_hat[ids[l]] =
                static_cast<double>(layer_secure[l]) / static_cast<double>(layer_seen[l]);
        }
    }
    return out;
}

}  // namespace

TrialOutcome simulate_trial(const Scenario& scenario, const McConfig& config, RandomStream& rng) {
    scenario.validate();
    TrialOutcome out;
    for (const auto& sim : build_simulators(scenario, config)) {
        const bool ok = sim.secure(rng);
        out.per_layer.emplace_back(sim.layer().id, ok);
        out.secure = out.secure && ok;
    }
    return out;
}

McEstimate estimate_scp(const Scenario& scenario, const McConfig& config) {
    return estimate_scp(std::span<const Scenario>(&scenario, 1), config);
}

McEstimate estimate_scp(std::span<const Scenario> pool, const McConfig& config) {
    config.validate();
    if (pool.empty()) throw DomainError("estimate_scp: scenario pool is empty");
    std::vector<LayerId> ids;
    std::vector<PoolEntry> entries;
    for (const auto& scenario : pool) {
        scenario.validate();
        PoolEntry entry;
        entry.layers = build_simulators(scenario, config);
        for (const auto& sim : entry.layers) {
            auto it = std::find(ids.begin(), ids.end(), sim.layer().id);
            if (it == ids.end()) it = ids.insert(ids.end(), sim.layer().id);
            entry.slots.push_back(static_cast<std::size_t>(it - ids.begin()));
        }
        entries.push_back(std::move(entry));
    }
    return run_pool(entries, ids, config);
}

}  // namespace scp
