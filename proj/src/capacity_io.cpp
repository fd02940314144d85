#include "dcnc/capacity.hpp"

#include <cmath>

namespace dcnc {

using nlohmann::json;

namespace {

json commodity_json(const CommodityId& id) { return json::array({id.destination + 1, id.service + 1, id.stage}); }

int commodity_from_json(const CommodityIndex& commodities, const json& j) {
    if (!j.is_array() || j.size() != 3)
        throw ConfigError("commodity must be [destination, service, stage]");
    const CommodityId id{j[0].get<int>() - 1, j[1].get<int>() - 1, j[2].get<int>()};
    const int c = commodities.find(id);
    if (c < 0)
        throw ConfigError("unknown commodity " + j.dump());
    return c;
}

json schedule_json(const CommodityIndex& commodities, const InterfaceSchedule& s) {
    json levels = json::array();
    for (std::size_t k = 1; k < s.alpha.size(); ++k) {
        if (s.alpha[k] == 0.0)
            continue;
        json beta = json::array();
        for (int c = 0; c < commodities.size(); ++c)
            if (s.beta(static_cast<Index>(k), c) != 0.0)
                beta.push_back({{"commodity", commodity_json(commodities.id(c))},
                                {"p", s.beta(static_cast<Index>(k), c)}});
        levels.push_back({{"level", k}, {"alpha", s.alpha[k]}, {"beta", std::move(beta)}});
    }
    return levels;
}

InterfaceSchedule schedule_from_json(const CommodityIndex& commodities, const ResourceMenu& menu, const json& levels,
                                     const std::string& where) {
    InterfaceSchedule s;
    s.alpha.assign(menu.levels.size(), 0.0);
    s.beta = Matrix::Zero(static_cast<Index>(menu.levels.size()), commodities.size());
    for (const json& lv : levels) {
        const int k = lv.at("level").get<int>();
        if (k < 1 || k > menu.max_level())
            throw ConfigError(where + ": level " + std::to_string(k) + " out of range");
        s.alpha[static_cast<std::size_t>(k)] = lv.at("alpha").get<double>();
        for (const json& b : lv.value("beta", json::array()))
            s.beta(k, commodity_from_json(commodities, b.at("commodity"))) = b.at("p").get<double>();
    }
    return s;
}

} // namespace

json certificate_to_json(const CloudNetwork& network, const CommodityIndex& commodities,
                         const CapacityCertificate& cert) {
    json doc;
    doc["feasible"] = cert.feasible;
    doc["status"] = cert.status;
    doc["min_cost"] = std::isfinite(cert.min_cost) ? json(cert.min_cost) : json(nullptr);
    doc["margin"] = cert.margin;
    if (!cert.feasible)
        return doc;
    json nodes = json::array();
    for (int i = 0; i < network.node_count(); ++i)
        nodes.push_back({{"node", i + 1}, {"levels", schedule_json(commodities, cert.nodes[static_cast<std::size_t>(i)])}});
    json edges = json::array();
    for (int e = 0; e < network.edge_count(); ++e)
        edges.push_back({{"from", network.edge(e).from + 1},
                         {"to", network.edge(e).to + 1},
                         {"levels", schedule_json(commodities, cert.edges[static_cast<std::size_t>(e)])}});
    json processing = json::array();
    for (int i = 0; i < network.node_count(); ++i)
        for (int c = 0; c < commodities.size(); ++c)
            if (cert.processing_flow(i, c) != 0.0)
                processing.push_back({{"node", i + 1},
                                      {"commodity", commodity_json(commodities.id(c))},
                                      {"flow", cert.processing_flow(i, c)}});
    json transmission = json::array();
    for (int e = 0; e < network.edge_count(); ++e)
        for (int c = 0; c < commodities.size(); ++c)
            if (cert.transmission_flow(e, c) != 0.0)
                transmission.push_back({{"from", network.edge(e).from + 1},
                                        {"to", network.edge(e).to + 1},
                                        {"commodity", commodity_json(commodities.id(c))},
                                        {"flow", cert.transmission_flow(e, c)}});
    doc["nodes"] = std::move(nodes);
    doc["edges"] = std::move(edges);
    doc["processing_flow"] = std::move(processing);
    doc["transmission_flow"] = std::move(transmission);
    return doc;
}

CapacityCertificate certificate_from_json(const CloudNetwork& network, const CommodityIndex& commodities,
                                          const json& doc) {
    try {
        CapacityCertificate cert;
        cert.feasible = doc.at("feasible").get<bool>();
        cert.status = doc.value("status", std::string{});
        cert.margin = doc.value("margin", 0.0);
        cert.min_cost = doc.contains("min_cost") && !doc["min_cost"].is_null()
                            ? doc["min_cost"].get<double>()
                            : std::numeric_limits<double>::infinity();
        if (!cert.feasible)
            return cert;
        const int N = network.node_count();
        const int E = network.edge_count();
        const int J = commodities.size();
        cert.nodes.resize(static_cast<std::size_t>(N));
        cert.edges.resize(static_cast<std::size_t>(E));
        for (int i = 0; i < N; ++i)
            cert.nodes[static_cast<std::size_t>(i)] = schedule_from_json(commodities, network.processing(i), json::array(), "");
        for (int e = 0; e < E; ++e)
            cert.edges[static_cast<std::size_t>(e)] = schedule_from_json(commodities, network.transmission(e), json::array(), "");
        for (const json& n : doc.at("nodes")) {
            const int i = n.at("node").get<int>() - 1;
            if (i < 0 || i >= N)
                throw ConfigError("certificate names unknown node " + std::to_string(i + 1));
            cert.nodes[static_cast<std::size_t>(i)] =
                schedule_from_json(commodities, network.processing(i), n.at("levels"), "node " + std::to_string(i + 1));
        }
        for (const json& l : doc.at("edges")) {
            const int e = network.find_edge(l.at("from").get<int>() - 1, l.at("to").get<int>() - 1);
            if (e < 0)
                throw ConfigError("certificate names unknown edge " + l.at("from").dump() + "->" + l.at("to").dump());
            cert.edges[static_cast<std::size_t>(e)] =
                schedule_from_json(commodities, network.transmission(e), l.at("levels"), "edge " + std::to_string(e + 1));
        }
        cert.processing_flow = Matrix::Zero(N, J);
        cert.transmission_flow = Matrix::Zero(E, J);
        for (const json& f : doc.value("processing_flow", json::array())) {
            const int i = f.at("node").get<int>() - 1;
            if (i < 0 || i >= N)
                throw ConfigError("certificate flow at unknown node");
            cert.processing_flow(i, commodity_from_json(commodities, f.at("commodity"))) = f.at("flow").get<double>();
        }
        for (const json& f : doc.value("transmission_flow", json::array())) {
            const int e = network.find_edge(f.at("from").get<int>() - 1, f.at("to").get<int>() - 1);
            if (e < 0)
                throw ConfigError("certificate flow on unknown edge");
            cert.transmission_flow(e, commodity_from_json(commodities, f.at("commodity"))) = f.at("flow").get<double>();
        }
        return cert;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("malformed certificate: ") + ex.what());
    }
}

} // namespace dcnc
