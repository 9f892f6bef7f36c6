#include "scpkit/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "scpkit/errors.hpp"

namespace scp {
namespace {

using Json = nlohmann::json;

constexpr std::string_view kMonteCarlo = "monte_carlo";
constexpr std::uint64_t kPoolStream = 0x706f6f6cULL;

bool is_known_model(std::string_view name) {
    if (name == kMonteCarlo) return true;
    for (auto model : kAllScpModels) {
        if (to_string(model) == name) return true;
    }
    return false;
}

double json_number(const Json& v, const std::string& where) {
    if (!v.is_number()) throw InputError(where + ": expected a number");
    return v.get<double>();
}

struct Prepared {
    std::vector<LayerGroup> groups;
    std::vector<std::optional<MarcumCollapse>> fits;
};

Prepared prepare(const Scenario& scenario) {
    Prepared p;
    p.groups = scenario.group_by_layer();
    p.fits.resize(p.groups.size());
    return p;
}

std::optional<double> closed_form(ScpModel model, Prepared& p, const FitOptions& fit) {
    double exponent = 0.0;
    for (std::size_t l = 0; l < p.groups.size(); ++l) {
        const auto& g = p.groups[l];
        switch (model) {
            case ScpModel::rician: {
                if (g.layer.eve_density == 0.0) break;
                if (!p.fits[l]) p.fits[l] = fit_marcum_a_hat(g.hops, g.layer, fit);
                try {
                    exponent += layer_scp_rician(g.hops, g.layer, *p.fits[l]).exponent;
                } catch (const SingularCoefficientError&) {
                    return std::nullopt;
                }
                break;
            }
            case ScpModel::rayleigh_multi: exponent += layer_scp_rayleigh_multihop(g.hops, g.layer).exponent; break;
            case ScpModel::rayleigh_single: exponent += layer_scp_rayleigh_singlehop(g.hops, g.layer).exponent; break;
            case ScpModel::erlang: exponent += layer_scp_erlang_multihop(g.hops, g.layer).exponent; break;
        }
    }
    return std::exp(-exponent);
}

std::vector<Scenario> draw_pool(const Scenario& scenario, const RoutePool& pool, std::uint64_t stream) {
    RandomStream rng = make_stream(scenario.seed, stream);
    std::vector<Scenario> out;
    for (int i = 0; i < pool.count; ++i) {
        Scenario s = scenario;
        s.route = random_route(scenario.layers, pool.hop_count, rng);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

std::string_view to_string(SweepParameter parameter) {
    switch (parameter) {
        case SweepParameter::eve_density: return "eve_density";
        case SweepParameter::k_factor_db: return "k_factor_db";
        case SweepParameter::avg_link_distance: return "avg_link_distance";
        case SweepParameter::hop_count: return "hop_count";
    }
    return "unknown";
}

void SweepSpec::validate() const {
    if (values.empty()) throw InputError("values: must be nonempty");
    for (double v : values) {
        if (!std::isfinite(v)) throw InputError("values: must be finite");
        if (parameter == SweepParameter::hop_count && (v < 1.0 || v != std::floor(v))) {
            throw InputError("values: hop_count values must be positive integers");
        }
        if (parameter == SweepParameter::eve_density && v < 0.0) throw InputError("values: densities must be >= 0");
        if (parameter == SweepParameter::avg_link_distance && !(v > 0.0)) {
            throw InputError("values: distances must be > 0");
        }
    }
    if (models.empty()) throw InputError("models: must be nonempty");
    for (const auto& m : models) {
        if (!is_known_model(m)) throw InputError("models: unknown model '" + m + "'");
    }
    if (std::find(models.begin(), models.end(), kMonteCarlo) != models.end() && (!trials || *trials < 1)) {
        throw InputError("trials: required (>= 1) when monte_carlo is selected");
    }
    if (random_routes) {
        if (random_routes->count < 1) throw InputError("random_routes.count: must be >= 1");
        if (random_routes->hop_count.min < 1 || random_routes->hop_count.max < random_routes->hop_count.min) {
            throw InputError("random_routes.hop_count: need 1 <= min <= max");
        }
    }
}

std::vector<double> spaced_values(double from, double to, int count, bool log_spacing) {
    if (count < 1) throw InputError("values.count: must be >= 1");
    if (log_spacing && !(from > 0.0 && to > 0.0)) throw InputError("values: log spacing needs positive bounds");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out.push_back(log_spacing ? std::pow(10.0, std::log10(from) + t * (std::log10(to) - std::log10(from)))
                                  : from + t * (to - from));
    }
    return out;
}

SweepSpec sweep_spec_from_json(std::string_view text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(std::string("sweep: malformed JSON: ") + e.what());
    }
    if (!root.is_object()) throw InputError("sweep: expected an object");
    SweepSpec spec;

    auto param = root.find("parameter");
    if (param == root.end() || !param->is_string()) throw InputError("parameter: missing or not a string");
    const auto name = param->get<std::string>();
    bool found = false;
    for (auto p : {SweepParameter::eve_density, SweepParameter::k_factor_db, SweepParameter::avg_link_distance,
                   SweepParameter::hop_count}) {
        if (to_string(p) == name) {
            spec.parameter = p;
            found = true;
        }
    }
    if (!found) throw InputError("parameter: unknown value '" + name + "'");

    auto values = root.find("values");
    if (values == root.end()) throw InputError("values: missing");
    if (values->is_array()) {
        for (std::size_t i = 0; i < values->size(); ++i) {
            spec.values.push_back(json_number((*values)[i], "values[" + std::to_string(i) + "]"));
        }
    } else if (values->is_object()) {
        for (const char* key : {"from", "to", "count"}) {
            if (!values->contains(key)) throw InputError(std::string("values.") + key + ": missing");
        }
        const std::string spacing = values->value("spacing", std::string("linear"));
        if (spacing != "linear" && spacing != "log") throw InputError("values.spacing: expected linear or log");
        const Json& count = values->at("count");
        if (!count.is_number_integer()) throw InputError("values.count: expected an integer");
        spec.values = spaced_values(json_number(values->at("from"), "values.from"),
                                    json_number(values->at("to"), "values.to"), count.get<int>(), spacing == "log");
    } else {
        throw InputError("values: expected a list or {from, to, count, spacing}");
    }

    auto models = root.find("models");
    if (models == root.end()) {
        for (auto m : kAllScpModels) spec.models.emplace_back(to_string(m));
    } else {
        if (!models->is_array()) throw InputError("models: expected a list");
        for (const auto& m : *models) {
            if (!m.is_string()) throw InputError("models: expected strings");
            spec.models.push_back(m.get<std::string>());
        }
    }
    std::sort(spec.models.begin(), spec.models.end());
    spec.models.erase(std::unique(spec.models.begin(), spec.models.end()), spec.models.end());

    if (auto t = root.find("trials"); t != root.end()) {
        if (!t->is_number_unsigned()) throw InputError("trials: expected a positive integer");
        spec.trials = t->get<std::uint64_t>();
    }
    if (auto mode = root.find("mode"); mode != root.end()) {
        const std::string m = mode->is_string() ? mode->get<std::string>() : "";
        if (m == "common") {
            spec.geometry = EveGeometry::common_distance;
        } else if (m == "exact") {
            spec.geometry = EveGeometry::exact;
        } else {
            throw InputError("mode: expected common or exact");
        }
    }
    if (auto rr = root.find("random_routes"); rr != root.end()) {
        if (!rr->is_object()) throw InputError("random_routes: expected an object");
        RoutePool pool;
        if (auto c = rr->find("count"); c != rr->end()) {
            if (!c->is_number_integer()) throw InputError("random_routes.count: expected an integer");
            pool.count = c->get<int>();
        }
        if (auto h = rr->find("hop_count"); h != rr->end()) {
            if (!h->is_array() || h->size() != 2 || !(*h)[0].is_number_integer() || !(*h)[1].is_number_integer()) {
                throw InputError("random_routes.hop_count: expected [min, max]");
            }
            pool.hop_count = {(*h)[0].get<int>(), (*h)[1].get<int>()};
        }
        spec.random_routes = pool;
    }
    return spec;
}

Scenario apply_sweep_value(const Scenario& scenario, SweepParameter parameter, double value) {
    Scenario out = scenario;
    switch (parameter) {
        case SweepParameter::eve_density:
            for (auto& layer : out.layers) layer.eve_density = value;
            break;
        case SweepParameter::k_factor_db: {
            const double k = std::pow(10.0, value / 10.0);
            for (auto& layer : out.layers) {
                layer.k_db_mean = value;
                layer.k_db_var = 0.0;
            }
            std::vector<Hop> hops(scenario.route.hops().begin(), scenario.route.hops().end());
            for (auto& hop : hops) hop.k_factor = k;
            out.route = Route(std::move(hops));
            break;
        }
        case SweepParameter::avg_link_distance: {
            std::vector<Hop> hops(scenario.route.hops().begin(), scenario.route.hops().end());
            if (hops.empty()) throw DomainError("avg_link_distance: route is empty");
            double mean = 0.0;
            for (const auto& hop : hops) mean += hop.distance_m;
            mean /= static_cast<double>(hops.size());
            const double factor = value * kMetersPerKm / mean;
            for (auto& hop : hops) hop.distance_m *= factor;
            out.route = Route(std::move(hops));
            break;
        }
        case SweepParameter::hop_count:
            throw DomainError("hop_count: a fixed route cannot be resized; use random_routes");
    }
    return out;
}

std::vector<SweepRow> run_sweep(const Scenario& scenario, const SweepSpec& sweep, const SweepOptions& options) {
    SweepSpec spec = sweep;
    if (options.trials_override) spec.trials = options.trials_override;
    spec.validate();
    scenario.validate();
    const std::uint64_t seed = options.seed_override.value_or(scenario.seed);
    Scenario base = scenario;
    base.seed = seed;

    std::vector<Scenario> base_pool;
    if (spec.parameter != SweepParameter::hop_count) {
        if (spec.random_routes) {
            base_pool = draw_pool(base, *spec.random_routes, kPoolStream);
        } else {
            base_pool = {base};
        }
    }
    // The fit does not depend on the density, so a density sweep reuses one fit per route.
    std::vector<Prepared> density_cache;
    if (spec.parameter == SweepParameter::eve_density) {
        for (const auto& s : base_pool) density_cache.push_back(prepare(s));
    }

    std::vector<SweepRow> rows;
    for (double value : spec.values) {
        std::vector<Scenario> pool;
        if (spec.parameter == SweepParameter::hop_count) {
            RoutePool rp = spec.random_routes.value_or(RoutePool{});
            const int n = static_cast<int>(value);
            rp.hop_count = {n, n};
            pool = draw_pool(base, rp, kPoolStream + static_cast<std::uint64_t>(n));
        } else {
            for (const auto& s : base_pool) pool.push_back(apply_sweep_value(s, spec.parameter, value));
        }

        std::vector<Prepared> prepared;
        if (spec.parameter == SweepParameter::eve_density) {
            prepared = density_cache;
            for (auto& p : prepared) {
                for (auto& g : p.groups) g.layer.eve_density = value;
            }
        } else {
            for (const auto& s : pool) prepared.push_back(prepare(s));
        }

        for (const auto& name : spec.models) {
            SweepRow row;
            row.parameter_value = value;
            row.model = name;
            if (name == kMonteCarlo) {
                McConfig config;
                config.trials = *spec.trials;
                config.geometry = spec.geometry;
                config.seed = seed;
                config.threads = options.threads;
                const McEstimate est = estimate_scp(pool, config);
                row.scp = est.scp_hat;
                row.mc_half_width = est.half_width_95;
            } else {
                const ScpModel model = parse_scp_model(name);
                double sum = 0.0;
                bool singular = false;
                for (std::size_t i = 0; i < prepared.size() && !singular; ++i) {
                    auto v = closed_form(model, prepared[i], options.fit);
                    if (v) {
                        sum += *v;
                    } else {
                        singular = true;
                    }
                }
                if (!singular) row.scp = sum / static_cast<double>(prepared.size());
            }
            rows.push_back(std::move(row));
        }
        if (spec.parameter == SweepParameter::eve_density) {
            // Keep fits computed on this pass for the next density.
            for (std::size_t i = 0; i < prepared.size(); ++i) density_cache[i].fits = prepared[i].fits;
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    out << "parameter_value,model,scp,mc_half_width\n";
    for (const auto& row : rows) {
        out << fmt(row.parameter_value) << ',' << row.model << ',' << (row.scp ? fmt(*row.scp) : "") << ','
            << (row.mc_half_width ? fmt(*row.mc_half_width) : "") << '\n';
    }
}

}  // namespace scp
