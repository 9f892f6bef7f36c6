#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scpkit/closedform.hpp"
#include "scpkit/model.hpp"

namespace scp {

struct Node {
    std::string id;
    LayerId layer;
    double lat_deg = 0.0;
    double lon_deg = 0.0;
    double alt_m = 0.0;
};

struct NodeDataset {
    std::vector<Node> nodes;
    std::vector<std::pair<std::string, std::string>> edges;

    /// Edge endpoints must exist, latitudes lie in [-90, 90] and longitudes in [-180, 360].
    void validate() const;
};

/// Nodes CSV: header then id,layer,lat,lon,alt. Adjacency CSV: header then id_a,id_b.
NodeDataset parse_node_dataset(std::string_view nodes_csv, std::string_view edges_csv);

/// WGS84 geodetic to Earth-centred Cartesian coordinates in meters.
struct Ecef {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};
Ecef geodetic_to_ecef(double lat_deg, double lon_deg, double alt_m);
double ecef_distance(const Ecef& a, const Ecef& b);

struct ClassifyOptions {
    std::string source;
    double threshold = 0.99;
    int hop_bound = 7;
    /// Labels kept per node. With one label the search is exact for models whose SCP
    /// can only drop when a hop is added.
    int beam = 4;
    std::vector<ScpModel> models{kAllScpModels.begin(), kAllScpModels.end()};
    FitOptions fit;
};

struct NodeClass {
    std::string node;
    LayerId layer;
    ScpModel model = ScpModel::rician;
    bool reachable = false;
    double best_scp = 0.0;
    int hops = 0;
    bool secure = false;
};

/// For every node and model: best SCP over routes from the source with at most
/// hop_bound hops. A hop takes the layer of its transmitting node and that layer's
/// mean K-factor. Rows follow dataset order, then model order of `options.models`.
std::vector<NodeClass> classify_nodes(const NodeDataset& dataset, const std::vector<Layer>& layers,
                                      const ClassifyOptions& options);

/// node,layer,model,reachable,best_scp,hops,secure
void write_classification_csv(std::ostream& out, const std::vector<NodeClass>& rows);
std::string classification_to_json(const std::vector<NodeClass>& rows, const ClassifyOptions& options);

}  // namespace scp
