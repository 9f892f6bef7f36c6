#include "scpkit/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <ostream>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "scpkit/errors.hpp"

namespace scp {
namespace {

constexpr double kWgs84A = 6378137.0;
constexpr double kWgs84F = 1.0 / 298.257223563;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::vector<std::string>> csv_rows(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

double parse_double(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw InputError(where + ": expected a number, got '" + text + "'");
    }
}

struct Label {
    double scp;
    std::vector<std::size_t> path;

    bool operator<(const Label& other) const {
        if (scp != other.scp) return scp < other.scp;
        return path > other.path;  // ties go to the lexicographically smaller path
    }
};

class RouteEvaluator {
public:
    RouteEvaluator(const std::vector<Layer>& layers, std::vector<std::size_t> node_layer,
                   std::vector<Ecef> positions, const FitOptions& fit)
        : layers_(layers), node_layer_(std::move(node_layer)), positions_(std::move(positions)), fit_(fit) {}

    std::optional<double> scp(const std::vector<std::size_t>& path, ScpModel model) {
        std::map<std::size_t, std::vector<Hop>> groups;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            const std::size_t l = node_layer_[path[i]];
            Hop hop;
            hop.layer_id = layers_[l].id;
            hop.distance_m = ecef_distance(positions_[path[i]], positions_[path[i + 1]]);
            hop.k_factor = std::pow(10.0, layers_[l].k_db_mean / 10.0);
            if (!(hop.distance_m > 0.0)) throw InputError("edge between co-located nodes");
            groups[l].push_back(hop);
        }
        double exponent = 0.0;
        for (const auto& [l, hops] : groups) {
            const Layer& layer = layers_[l];
            switch (model) {
                case ScpModel::rician: {
                    if (layer.eve_density == 0.0) break;
                    try {
                        exponent += layer_scp_rician(hops, layer, fit(l, hops)).exponent;
                    } catch (const SingularCoefficientError&) {
                        return std::nullopt;
                    }
                    break;
                }
                case ScpModel::rayleigh_multi: exponent += layer_scp_rayleigh_multihop(hops, layer).exponent; break;
                case ScpModel::rayleigh_single: exponent += layer_scp_rayleigh_singlehop(hops, layer).exponent; break;
                case ScpModel::erlang: exponent += layer_scp_erlang_multihop(hops, layer).exponent; break;
            }
        }
        return std::exp(-exponent);
    }

private:
    const MarcumCollapse& fit(std::size_t layer, const std::vector<Hop>& hops) {
        std::vector<double> key{static_cast<double>(layer)};
        for (const auto& hop : hops) key.push_back(hop.distance_m);
        auto it = fits_.find(key);
        if (it == fits_.end()) it = fits_.emplace(key, fit_marcum_a_hat(hops, layers_[layer], fit_)).first;
        return it->second;
    }

    const std::vector<Layer>& layers_;
    std::vector<std::size_t> node_layer_;
    std::vector<Ecef> positions_;
    FitOptions fit_;
    std::map<std::vector<double>, MarcumCollapse> fits_;
};

}  // namespace

void NodeDataset::validate() const {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        const std::string where = "nodes[" + std::to_string(i) + "]";
        if (n.id.empty()) throw InputError(where + ".id: must be non-empty");
        if (!index.emplace(n.id, i).second) throw InputError(where + ".id: duplicate '" + n.id + "'");
        if (!(n.lat_deg >= -90.0 && n.lat_deg <= 90.0)) throw InputError(where + ".lat: must be in [-90, 90]");
        if (!(n.lon_deg >= -180.0 && n.lon_deg <= 360.0)) throw InputError(where + ".lon: must be in [-180, 360]");
        if (!std::isfinite(n.alt_m)) throw InputError(where + ".alt: must be finite");
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        for (const auto* id : {&edges[i].first, &edges[i].second}) {
            if (!index.contains(*id)) {
                throw InputError("edges[" + std::to_string(i) + "]: unknown node '" + *id + "'");
            }
        }
    }
}

NodeDataset parse_node_dataset(std::string_view nodes_csv, std::string_view edges_csv) {
    NodeDataset dataset;
    const auto node_rows = csv_rows(nodes_csv);
    if (node_rows.empty()) throw InputError("nodes: file is empty");
    for (std::size_t r = 1; r < node_rows.size(); ++r) {
        const auto& f = node_rows[r];
        const std::string where = "nodes line " + std::to_string(r + 1);
        if (f.size() != 5) throw InputError(where + ": expected id,layer,lat,lon,alt");
        dataset.nodes.push_back({f[0], LayerId(f[1]), parse_double(f[2], where + ".lat"),
                                 parse_double(f[3], where + ".lon"), parse_double(f[4], where + ".alt")});
    }
    const auto edge_rows = csv_rows(edges_csv);
    if (edge_rows.empty()) throw InputError("edges: adjacency file is empty");
    for (std::size_t r = 1; r < edge_rows.size(); ++r) {
        const auto& f = edge_rows[r];
        if (f.size() != 2) throw InputError("edges line " + std::to_string(r + 1) + ": expected id_a,id_b");
        dataset.edges.emplace_back(f[0], f[1]);
    }
    dataset.validate();
    return dataset;
}

Ecef geodetic_to_ecef(double lat_deg, double lon_deg, double alt_m) {
    const double lat = lat_deg * std::numbers::pi / 180.0;
    const double lon = lon_deg * std::numbers::pi / 180.0;
    const double e2 = kWgs84F * (2.0 - kWgs84F);
    const double s = std::sin(lat);
    const double n = kWgs84A / std::sqrt(1.0 - e2 * s * s);
    return {(n + alt_m) * std::cos(lat) * std::cos(lon), (n + alt_m) * std::cos(lat) * std::sin(lon),
            (n * (1.0 - e2) + alt_m) * s};
}

double ecef_distance(const Ecef& a, const Ecef& b) {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

std::vector<NodeClass> classify_nodes(const NodeDataset& dataset, const std::vector<Layer>& layers,
                                      const ClassifyOptions& options) {
    dataset.validate();
    if (options.hop_bound < 1) throw InputError("hop-bound: must be >= 1");
    if (options.beam < 1) throw InputError("beam: must be >= 1");
    if (!(options.threshold >= 0.0 && options.threshold <= 1.0)) throw InputError("threshold: must be in [0, 1]");
    if (dataset.edges.empty()) throw InputError("edges: adjacency list is required");
    for (const auto& layer : layers) {
        try {
            layer.validate();
        } catch (const DomainError& e) {
            throw InputError(e.what());
        }
    }

    const std::size_t n = dataset.nodes.size();
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index.emplace(dataset.nodes[i].id, i);
    auto src = index.find(options.source);
    if (src == index.end()) throw InputError("source: unknown node '" + options.source + "'");

    std::vector<std::size_t> node_layer(n);
    std::vector<Ecef> positions(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = dataset.nodes[i];
        std::size_t l = 0;
        while (l < layers.size() && layers[l].id != node.layer) ++l;
        if (l == layers.size()) throw InputError("nodes[" + std::to_string(i) + "].layer: unknown layer '" + node.layer.value + "'");
        node_layer[i] = l;
        positions[i] = geodetic_to_ecef(node.lat_deg, node.lon_deg, node.alt_m);
    }
    std::vector<std::vector<std::size_t>> adjacency(n);
    for (const auto& [a, b] : dataset.edges) {
        const std::size_t ia = index.at(a);
        const std::size_t ib = index.at(b);
        if (ia == ib) continue;
        adjacency[ia].push_back(ib);
        adjacency[ib].push_back(ia);
    }
    for (auto& list : adjacency) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }

    RouteEvaluator evaluator(layers, node_layer, positions, options.fit);
    std::vector<NodeClass> rows(n * options.models.size());

    for (std::size_t m = 0; m < options.models.size(); ++m) {
        const ScpModel model = options.models[m];
        std::vector<int> visits(n, 0);
        std::vector<std::optional<std::pair<double, int>>> best(n);
        std::priority_queue<Label> queue;
        queue.push({1.0, {src->second}});
        while (!queue.empty()) {
            Label label = queue.top();
            queue.pop();
            const std::size_t v = label.path.back();
            if (visits[v] >= options.beam) continue;
            ++visits[v];
            const int hops = static_cast<int>(label.path.size()) - 1;
            if (!best[v] || label.scp > best[v]->first) best[v] = {label.scp, hops};
            if (hops >= options.hop_bound) continue;
            for (std::size_t w : adjacency[v]) {
                if (visits[w] >= options.beam) continue;
                if (std::find(label.path.begin(), label.path.end(), w) != label.path.end()) continue;
                std::vector<std::size_t> path = label.path;
                path.push_back(w);
                if (auto value = evaluator.scp(path, model)) queue.push({*value, std::move(path)});
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            NodeClass& row = rows[i * options.models.size() + m];
            row.node = dataset.nodes[i].id;
            row.layer = dataset.nodes[i].layer;
            row.model = model;
            if (best[i]) {
                row.reachable = true;
                row.best_scp = best[i]->first;
                row.hops = best[i]->second;
                row.secure = row.best_scp >= options.threshold;
            }
        }
    }
    return rows;
}

void write_classification_csv(std::ostream& out, const std::vector<NodeClass>& rows) {
    out << "node,layer,model,reachable,best_scp,hops,secure\n";
    for (const auto& row : rows) {
        char scp[32] = "";
        if (row.reachable) std::snprintf(scp, sizeof scp, "%.10g", row.best_scp);
        out << row.node << ',' << row.layer.value << ',' << to_string(row.model) << ',' << (row.reachable ? 1 : 0)
            << ',' << scp << ',' << (row.reachable ? std::to_string(row.hops) : "") << ',' << (row.secure ? 1 : 0)
            << '\n';
    }
}

std::string classification_to_json(const std::vector<NodeClass>& rows, const ClassifyOptions& options) {
    nlohmann::ordered_json root;
    root["source"] = options.source;
    root["threshold"] = options.threshold;
    root["hop_bound"] = options.hop_bound;
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    for (auto model : options.models) summary[std::string(to_string(model))] = 0;
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        if (row.secure) summary[std::string(to_string(row.model))] = summary[std::string(to_string(row.model))].get<int>() + 1;
        nlohmann::ordered_json j;
        j["node"] = row.node;
        j["layer"] = row.layer.value;
        j["model"] = to_string(row.model);
        j["reachable"] = row.reachable;
        j["best_scp"] = row.reachable ? nlohmann::ordered_json(row.best_scp) : nlohmann::ordered_json(nullptr);
        j["hops"] = row.hops;
        j["secure"] = row.secure;
        nodes.push_back(std::move(j));
    }
    root["secure_counts"] = std::move(summary);
    root["nodes"] = std::move(nodes);
    return root.dump(2) + "\n";
}

}  // namespace scp
