// model.hpp - Static description of a cloud network and the service chains it hosts.
//
// A CloudNetwork is a directed graph whose nodes own a processing resource menu and whose
// edges own a transmission resource menu. Services are chains of functions; a commodity
// (d, phi, m) is the stage-m output of service phi destined to node d. The CommodityIndex
// fixes one global (d, phi, m) order that every downstream tie-break relies on.
//
// Internally nodes, services and functions are 0-based. Function m of a service (1-based,
// as in the chain) lives at functions[m - 1]; a commodity of stage m < M is processed by
// functions[m].
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcnc {

using Index = Eigen::Index;

// Row-major so that one node's backlog over all commodities is contiguous.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

/// Raised for any malformed network, service, client or arrival description.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a policy emits a decision that breaks a capacity, host or chaining rule.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct ResourceLevel {
    double capacity = 0.0;
    double setup_cost = 0.0;

    friend bool operator==(const ResourceLevel&, const ResourceLevel&) = default;
};

/// Allocation choices k = 0..K of one interface. levels[0] is always (0, 0).
struct ResourceMenu {
    std::vector<ResourceLevel> levels{ResourceLevel{}};
    double unit_cost = 0.0;

    int max_level() const { return static_cast<int>(levels.size()) - 1; }
    double max_capacity() const { return levels.back().capacity; }

    /// Throws ConfigError naming `what` if the menu breaks any invariant.
    void validate(const std::string& what) const;

    /// Two-level menu {(0, 0), (capacity, setup_cost)}.
    static ResourceMenu on_off(double capacity, double setup_cost, double unit_cost);
    /// Menu with `steps` equal increments up to the given totals (levels 0..steps).
    static ResourceMenu uniform_steps(int steps, double max_capacity, double max_setup_cost,
                                      double unit_cost);

    friend bool operator==(const ResourceMenu&, const ResourceMenu&) = default;
};

struct Edge {
    int from = 0;
    int to = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

class CloudNetwork {
public:
    CloudNetwork() = default;
    CloudNetwork(int node_count, std::vector<Edge> edges, std::vector<ResourceMenu> processing,
                 std::vector<ResourceMenu> transmission);

    int node_count() const { return node_count_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }

    const ResourceMenu& processing(int node) const { return processing_[static_cast<std::size_t>(node)]; }
    const ResourceMenu& transmission(int e) const { return transmission_[static_cast<std::size_t>(e)]; }
    const std::vector<ResourceMenu>& processing_menus() const { return processing_; }
    const std::vector<ResourceMenu>& transmission_menus() const { return transmission_; }

    /// Edge indices leaving / entering a node, ascending.
    const std::vector<int>& out_edges(int node) const { return out_[static_cast<std::size_t>(node)]; }
    const std::vector<int>& in_edges(int node) const { return in_[static_cast<std::size_t>(node)]; }

    /// Index of edge (from, to) or -1.
    int find_edge(int from, int to) const;

    /// max over nodes of in-degree + out-degree.
    int max_degree() const;

    friend bool operator==(const CloudNetwork& a, const CloudNetwork& b) {
        return a.node_count_ == b.node_count_ && a.edges_ == b.edges_ &&
               a.processing_ == b.processing_ && a.transmission_ == b.transmission_;
    }

private:
    int node_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<ResourceMenu> processing_;
    std::vector<ResourceMenu> transmission_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;
};

struct ServiceFunction {
    double scaling = 1.0;          // output flow units per input flow unit
    double processing_ratio = 1.0; // processing flow units per transmission flow unit
    std::vector<int> hosts;        // empty means every node

    bool hosted_at(int node) const;

    friend bool operator==(const ServiceFunction&, const ServiceFunction&) = default;
};

struct ServiceSpec {
    std::vector<ServiceFunction> functions;

    int function_count() const { return static_cast<int>(functions.size()); }

    friend bool operator==(const ServiceSpec&, const ServiceSpec&) = default;
};

struct Client {
    int source = 0;
    int destination = 0;
    int service = 0;

    friend bool operator==(const Client&, const Client&) = default;
};

struct CommodityId {
    int destination = 0;
    int service = 0;
    int stage = 0;

    friend auto operator<=>(const CommodityId&, const CommodityId&) = default;
};

/// Every commodity of the clients' (destination, service) pairs in (d, phi, m) order, with the
/// per-commodity chain data the policies need precomputed.
class CommodityIndex {
public:
    CommodityIndex() = default;

    int size() const { return static_cast<int>(ids_.size()); }
    bool empty() const { return ids_.empty(); }
    const CommodityId& id(int c) const { return ids_[static_cast<std::size_t>(c)]; }
    const std::vector<CommodityId>& ids() const { return ids_; }

    /// -1 if absent.
    int find(const CommodityId& id) const;

    bool is_final(int c) const { return next_[static_cast<std::size_t>(c)] < 0; }
    bool is_source(int c) const { return id(c).stage == 0; }
    /// Commodity produced by processing c, or -1 for a final commodity.
    int next(int c) const { return next_[static_cast<std::size_t>(c)]; }
    /// Commodity whose processing produces c, or -1 for a source commodity.
    int prev(int c) const { return prev_[static_cast<std::size_t>(c)]; }

    /// Scaling / processing ratio of the function that processes c (1 for final commodities).
    double next_scaling(int c) const { return next_scaling_[static_cast<std::size_t>(c)]; }
    double next_ratio(int c) const { return next_ratio_[static_cast<std::size_t>(c)]; }
    /// Scaling of the function that produced c (0 for source commodities).
    double own_scaling(int c) const { return own_scaling_[static_cast<std::size_t>(c)]; }

    /// hostable(i, c) is true iff node i may process commodity c.
    bool hostable(int node, int c) const { return host_(node, c) != 0; }

private:
    std::vector<CommodityId> ids_;
    std::vector<int> next_;
    std::vector<int> prev_;
    std::vector<double> next_scaling_;
    std::vector<double> next_ratio_;
    std::vector<double> own_scaling_;
    Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> host_;

    friend CommodityIndex build_commodities(const CloudNetwork&, const std::vector<ServiceSpec>&,
                                            const std::vector<Client>&);
};

/// Enumerates (d, phi, m), 0 <= m <= M_phi, for every destination d requested with phi.
CommodityIndex build_commodities(const CloudNetwork& network, const std::vector<ServiceSpec>& services,
                                 const std::vector<Client>& clients);

/// Throws ConfigError on a malformed service list.
void validate_services(const CloudNetwork& network, const std::vector<ServiceSpec>& services);

/// All-pairs minimum hop counts by BFS; kUnreachable where no directed path exists.
Matrix shortest_hops(const CloudNetwork& network);

struct BiasTable {
    Matrix hops;   // N x J shortest transmission-plus-processing distance
    double eta = 0.0;

    /// Q + eta * hops, or Q itself when eta is zero.
    Matrix biased(const Matrix& backlog) const;
};

/// Shortest transmission-plus-processing distance for every (node, commodity).
BiasTable stpd_bias(const CloudNetwork& network, const std::vector<ServiceSpec>& services,
                    const CommodityIndex& commodities, double eta);

struct DriftConstants {
    double b0 = 0.0;        // per-node second-moment bound
    double b_upsilon = 0.0; // per-node bias term bound
    double b1 = 0.0;        // b0 + eta * b_upsilon
};

/// Inputs of the drift bound, split out so the formula can be evaluated directly.
struct DriftInputs {
    int max_degree = 0;
    double max_transmission = 0.0;
    double max_processing = 0.0;
    double max_scaling = 0.0;
    double min_ratio = 0.0;
    double max_arrival = 0.0;
};

DriftInputs drift_inputs(const CloudNetwork& network, const std::vector<ServiceSpec>& services,
                         double max_arrival);
DriftConstants drift_bound_constants(const DriftInputs& in, double eta);
DriftConstants drift_bound_constants(const CloudNetwork& network,
                                     const std::vector<ServiceSpec>& services, double max_arrival,
                                     double eta);

std::string to_string(const CommodityId& id);

} // namespace dcnc
