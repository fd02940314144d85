#include "dcnc/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace dcnc {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

} // namespace

void ResourceMenu::validate(const std::string& what) const {
    if (levels.empty())
        throw ConfigError(what + ": resource menu has no levels");
    if (levels.front().capacity != 0.0 || levels.front().setup_cost != 0.0)
        throw ConfigError(what + ": level 0 must be (capacity 0, setup cost 0)");
    if (!finite_nonneg(unit_cost))
        throw ConfigError(what + ": unit cost must be finite and nonnegative");
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const auto& l = levels[k];
        if (!finite_nonneg(l.capacity) || !finite_nonneg(l.setup_cost))
            throw ConfigError(what + ": level " + std::to_string(k) + " has a negative or non-finite value");
        if (k > 0 && (l.capacity < levels[k - 1].capacity || l.setup_cost < levels[k - 1].setup_cost))
            throw ConfigError(what + ": capacities and setup costs must be nondecreasing in k");
    }
}

ResourceMenu ResourceMenu::on_off(double capacity, double setup_cost, double unit_cost) {
    ResourceMenu m;
    m.levels = {ResourceLevel{}, ResourceLevel{capacity, setup_cost}};
    m.unit_cost = unit_cost;
    return m;
}

ResourceMenu ResourceMenu::uniform_steps(int steps, double max_capacity, double max_setup_cost,
                                         double unit_cost) {
    ResourceMenu m;
    m.levels.clear();
    m.levels.reserve(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k)
        m.levels.push_back({max_capacity * k / steps, max_setup_cost * k / steps});
    m.unit_cost = unit_cost;
    return m;
}

CloudNetwork::CloudNetwork(int node_count, std::vector<Edge> edges, std::vector<ResourceMenu> processing,
                           std::vector<ResourceMenu> transmission)
    : node_count_(node_count), edges_(std::move(edges)), processing_(std::move(processing)),
      transmission_(std::move(transmission)) {
    if (node_count_ < 1)
        throw ConfigError("network must have at least one node");
    if (processing_.size() != static_cast<std::size_t>(node_count_))
        throw ConfigError("network needs one processing menu per node");
    if (transmission_.size() != edges_.size())
        throw ConfigError("network needs one transmission menu per edge");

    out_.assign(static_cast<std::size_t>(node_count_), {});
    in_.assign(static_cast<std::size_t>(node_count_), {});
    std::set<std::pair<int, int>> seen;
    for (int e = 0; e < edge_count(); ++e) {
        const Edge& ed = edges_[static_cast<std::size_t>(e)];
        if (ed.from < 0 || ed.from >= node_count_ || ed.to < 0 || ed.to >= node_count_)
            throw ConfigError("edge " + std::to_string(e + 1) + " references an unknown node");
        if (ed.from == ed.to)
            throw ConfigError("edge " + std::to_string(e + 1) + " is a self-loop");
        if (!seen.emplace(ed.from, ed.to).second)
            throw ConfigError("duplicate edge " + std::to_string(ed.from + 1) + "->" + std::to_string(ed.to + 1));
        out_[static_cast<std::size_t>(ed.from)].push_back(e);
        in_[static_cast<std::size_t>(ed.to)].push_back(e);
    }
    for (int i = 0; i < node_count_; ++i)
        processing_[static_cast<std::size_t>(i)].validate("node " + std::to_string(i + 1));
    for (int e = 0; e < edge_count(); ++e)
        transmission_[static_cast<std::size_t>(e)].validate("edge " + std::to_string(e + 1));
}

int CloudNetwork::find_edge(int from, int to) const {
    if (from < 0 || from >= node_count_)
        return -1;
    for (int e : out_edges(from))
        if (edge(e).to == to)
            return e;
    return -1;
}

int CloudNetwork::max_degree() const {
    std::size_t best = 0;
    for (int i = 0; i < node_count_; ++i)
        best = std::max(best, out_edges(i).size() + in_edges(i).size());
    return static_cast<int>(best);
}

bool ServiceFunction::hosted_at(int node) const {
    return hosts.empty() || std::find(hosts.begin(), hosts.end(), node) != hosts.end();
}

void validate_services(const CloudNetwork& network, const std::vector<ServiceSpec>& services) {
    for (std::size_t s = 0; s < services.size(); ++s) {
        const std::string name = "service " + std::to_string(s + 1);
        if (services[s].functions.empty())
            throw ConfigError(name + ": a service needs at least one function");
        for (std::size_t m = 0; m < services[s].functions.size(); ++m) {
            const auto& f = services[s].functions[m];
            const std::string fname = name + " function " + std::to_string(m + 1);
            if (!(f.scaling > 0.0) || !std::isfinite(f.scaling))
                throw ConfigError(fname + ": scaling factor must be positive");
            if (!(f.processing_ratio > 0.0) || !std::isfinite(f.processing_ratio))
                throw ConfigError(fname + ": processing ratio must be positive");
            for (int h : f.hosts)
                if (h < 0 || h >= network.node_count())
                    throw ConfigError(fname + ": host " + std::to_string(h + 1) + " is not a node");
        }
    }
}

int CommodityIndex::find(const CommodityId& id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id)
        return -1;
    return static_cast<int>(it - ids_.begin());
}

CommodityIndex build_commodities(const CloudNetwork& network, const std::vector<ServiceSpec>& services,
                                 const std::vector<Client>& clients) {
    validate_services(network, services);
    std::set<std::pair<int, int>> dest_service;
    for (const Client& cl : clients) {
        if (cl.service < 0 || cl.service >= static_cast<int>(services.size()))
            throw ConfigError("client references unknown service " + std::to_string(cl.service + 1));
        if (cl.source < 0 || cl.source >= network.node_count() || cl.destination < 0 ||
            cl.destination >= network.node_count())
            throw ConfigError("client references an unknown node");
        dest_service.emplace(cl.destination, cl.service);
    }

    CommodityIndex idx;
    for (auto [d, phi] : dest_service)
        for (int m = 0; m <= services[static_cast<std::size_t>(phi)].function_count(); ++m)
            idx.ids_.push_back({d, phi, m});

    const int J = idx.size();
    idx.next_.assign(static_cast<std::size_t>(J), -1);
    idx.prev_.assign(static_cast<std::size_t>(J), -1);
    idx.next_scaling_.assign(static_cast<std::size_t>(J), 1.0);
    idx.next_ratio_.assign(static_cast<std::size_t>(J), 1.0);
    idx.own_scaling_.assign(static_cast<std::size_t>(J), 0.0);
    idx.host_.setZero(network.node_count(), J);
    for (int c = 0; c < J; ++c) {
        const CommodityId& id = idx.ids_[static_cast<std::size_t>(c)];
        const auto& svc = services[static_cast<std::size_t>(id.service)];
        if (id.stage > 0) {
            idx.prev_[static_cast<std::size_t>(c)] = c - 1;
            idx.own_scaling_[static_cast<std::size_t>(c)] =
                svc.functions[static_cast<std::size_t>(id.stage - 1)].scaling;
        }
        if (id.stage < svc.function_count()) {
            const auto& f = svc.functions[static_cast<std::size_t>(id.stage)];
            idx.next_[static_cast<std::size_t>(c)] = c + 1;
            idx.next_scaling_[static_cast<std::size_t>(c)] = f.scaling;
            idx.next_ratio_[static_cast<std::size_t>(c)] = f.processing_ratio;
            for (int i = 0; i < network.node_count(); ++i)
                idx.host_(i, c) = f.hosted_at(i) ? 1 : 0;
        }
    }
    return idx;
}

Matrix shortest_hops(const CloudNetwork& network) {
    const int N = network.node_count();
    Matrix H = Matrix::Constant(N, N, kUnreachable);
    for (int s = 0; s < N; ++s) {
        H(s, s) = 0.0;
        std::deque<int> frontier{s};
        while (!frontier.empty()) {
            const int u = frontier.front();
            frontier.pop_front();
            for (int e : network.out_edges(u)) {
                const int v = network.edge(e).to;
                if (H(s, v) == kUnreachable) {
                    H(s, v) = H(s, u) + 1.0;
                    frontier.push_back(v);
                }
            }
        }
    }
    return H;
}

Matrix BiasTable::biased(const Matrix& backlog) const {
    if (eta == 0.0)
        return backlog;
    return backlog + eta * hops;
}

BiasTable stpd_bias(const CloudNetwork& network, const std::vector<ServiceSpec>& services,
                    const CommodityIndex& commodities, double eta) {
    if (!(eta >= 0.0) || !std::isfinite(eta))
        throw ConfigError("bias weight eta must be finite and nonnegative");
    const Matrix H = shortest_hops(network);
    const int N = network.node_count();
    BiasTable table;
    table.eta = eta;
    table.hops.resize(N, commodities.size());
    for (int c = 0; c < commodities.size(); ++c) {
        const CommodityId& id = commodities.id(c);
        const auto& fn = services[static_cast<std::size_t>(id.service)].functions;
        for (int i = 0; i < N; ++i) {
            double y = kUnreachable;
            if (commodities.is_final(c)) {
                y = H(i, id.destination);
            } else {
                const auto& f = fn[static_cast<std::size_t>(id.stage)];
                for (int j = 0; j < N; ++j)
                    if (f.hosted_at(j))
                        y = std::min(y, H(i, j) + 1.0);
            }
            if (y == kUnreachable)
                throw ConfigError("no finite distance bias for commodity " + to_string(id) + " at node " +
                                  std::to_string(i + 1));
            table.hops(i, c) = y;
        }
    }
    return table;
}

DriftInputs drift_inputs(const CloudNetwork& network, const std::vector<ServiceSpec>& services,
                         double max_arrival) {
    DriftInputs in;
    in.max_degree = network.max_degree();
    for (int i = 0; i < network.node_count(); ++i)
        in.max_processing = std::max(in.max_processing, network.processing(i).max_capacity());
    for (int e = 0; e < network.edge_count(); ++e)
        in.max_transmission = std::max(in.max_transmission, network.transmission(e).max_capacity());
    in.min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& s : services)
        for (const auto& f : s.functions) {
            in.max_scaling = std::max(in.max_scaling, f.scaling);
            in.min_ratio = std::min(in.min_ratio, f.processing_ratio);
        }
    if (services.empty())
        in.min_ratio = 1.0;
    in.max_arrival = max_arrival;
    return in;
}

DriftConstants drift_bound_constants(const DriftInputs& in, double eta) {
    if (!(in.min_ratio > 0.0))
        throw ConfigError("minimum processing ratio must be positive");
    if (!(in.max_arrival >= 0.0))
        throw ConfigError("arrival bound must be nonnegative");
    const double tx = in.max_degree * in.max_transmission;
    const double pr = in.max_processing / in.min_ratio;
    const double out = tx + pr;
    const double inflow = tx + in.max_scaling * pr + in.max_arrival;
    DriftConstants k;
    k.b0 = 0.5 * (out * out + inflow * inflow);
    k.b_upsilon = out;
    k.b1 = k.b0 + eta * k.b_upsilon;
    return k;
}

DriftConstants drift_bound_constants(const CloudNetwork& network,
                                     const std::vector<ServiceSpec>& services, double max_arrival,
                                     double eta) {
    return drift_bound_constants(drift_inputs(network, services, max_arrival), eta);
}

std::string to_string(const CommodityId& id) {
    std::ostringstream os;
    os << '(' << id.destination + 1 << ',' << id.service + 1 << ',' << id.stage << ')';
    return os.str();
}

} // namespace dcnc
