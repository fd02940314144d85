#include "dcnc/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dcnc {

namespace {

constexpr double kCapacitySlack = 1e-9;

bool over(double used, double cap) { return used > cap + kCapacitySlack * std::max(1.0, cap); }

} // namespace

Decision Decision::idle(int nodes, int edges, int commodities) {
    Decision d;
    d.node_level.assign(static_cast<std::size_t>(nodes), 0);
    d.edge_level.assign(static_cast<std::size_t>(edges), 0);
    d.processing = Matrix::Zero(nodes, commodities);
    d.transmission = Matrix::Zero(edges, commodities);
    return d;
}

void Decision::clear() {
    std::fill(node_level.begin(), node_level.end(), 0);
    std::fill(edge_level.begin(), edge_level.end(), 0);
    processing.setZero();
    transmission.setZero();
}

void check_decision(const CloudNetwork& network, const CommodityIndex& commodities, const Decision& d) {
    const int N = network.node_count();
    const int E = network.edge_count();
    const int J = commodities.size();
    if (static_cast<int>(d.node_level.size()) != N || static_cast<int>(d.edge_level.size()) != E ||
        d.processing.rows() != N || d.processing.cols() != J || d.transmission.rows() != E ||
        d.transmission.cols() != J)
        throw ContractViolation("decision has the wrong shape");

    for (int i = 0; i < N; ++i) {
        const auto& menu = network.processing(i);
        const int k = d.node_level[static_cast<std::size_t>(i)];
        if (k < 0 || k > menu.max_level())
            throw ContractViolation("node " + std::to_string(i + 1) + ": level out of range");
        double used = 0.0;
        for (int c = 0; c < J; ++c) {
            const double mu = d.processing(i, c);
            if (mu == 0.0)
                continue;
            if (!(mu > 0.0))
                throw ContractViolation("node " + std::to_string(i + 1) + ": negative processing flow");
            if (commodities.is_final(c))
                throw ContractViolation("node " + std::to_string(i + 1) + ": final commodity " +
                                        to_string(commodities.id(c)) + " assigned to the processor");
            if (!commodities.hostable(i, c))
                throw ContractViolation("node " + std::to_string(i + 1) + " does not host the function for " +
                                        to_string(commodities.id(c)));
            used += mu * commodities.next_ratio(c);
        }
        if (over(used, menu.levels[static_cast<std::size_t>(k)].capacity))
            throw ContractViolation("node " + std::to_string(i + 1) + ": processing capacity exceeded");
    }
    for (int e = 0; e < E; ++e) {
        const auto& menu = network.transmission(e);
        const int k = d.edge_level[static_cast<std::size_t>(e)];
        if (k < 0 || k > menu.max_level())
            throw ContractViolation("edge " + std::to_string(e + 1) + ": level out of range");
        if ((d.transmission.row(e).array() < 0.0).any())
            throw ContractViolation("edge " + std::to_string(e + 1) + ": negative transmission flow");
        if (over(d.transmission.row(e).sum(), menu.levels[static_cast<std::size_t>(k)].capacity))
            throw ContractViolation("edge " + std::to_string(e + 1) + ": transmission capacity exceeded");
    }
}

double slot_cost(const CloudNetwork& network, const CommodityIndex& commodities, const Decision& d) {
    double h = 0.0;
    const int J = commodities.size();
    for (int i = 0; i < network.node_count(); ++i) {
        const auto& menu = network.processing(i);
        const int k = d.node_level[static_cast<std::size_t>(i)];
        if (k == 0)
            continue;
        double load = 0.0;
        for (int c = 0; c < J; ++c)
            load += d.processing(i, c) * commodities.next_ratio(c);
        h += menu.levels[static_cast<std::size_t>(k)].setup_cost + menu.unit_cost * load;
    }
    for (int e = 0; e < network.edge_count(); ++e) {
        const auto& menu = network.transmission(e);
        const int k = d.edge_level[static_cast<std::size_t>(e)];
        if (k == 0)
            continue;
        h += menu.levels[static_cast<std::size_t>(k)].setup_cost + menu.unit_cost * d.transmission.row(e).sum();
    }
    return h;
}

void step(const CloudNetwork& network, const CommodityIndex& commodities, QueueState& state,
          const Decision& decision, const Matrix& arrivals, FlowAccounting& acct, bool validate) {
    const int N = network.node_count();
    const int E = network.edge_count();
    const int J = commodities.size();
    if (validate) {
        check_decision(network, commodities, decision);
        if (arrivals.rows() != N || arrivals.cols() != J)
            throw ContractViolation("arrival matrix has the wrong shape");
        for (int c = 0; c < J; ++c)
            if (!commodities.is_source(c) && (arrivals.col(c).array() != 0.0).any())
                throw ContractViolation("exogenous arrivals of intermediate commodity " +
                                        to_string(commodities.id(c)));
        if ((arrivals.array() < 0.0).any())
            throw ContractViolation("negative arrivals");
    }

    acct.processed.setZero(N, J);
    acct.transmitted.setZero(E, J);
    acct.produced.setZero(N, J);
    acct.cost = slot_cost(network, commodities, decision);
    acct.delivered = 0.0;

    Matrix& Q = state.backlog;
    // Drain: each queue serves its processor, then its outgoing links in ascending edge order.
    for (int i = 0; i < N; ++i) {
        auto avail = Q.row(i);
        for (int c = 0; c < J; ++c) {
            const double mu = decision.processing(i, c);
            if (mu > 0.0) {
                const double served = std::min(mu, avail(c));
                acct.processed(i, c) = served;
                avail(c) -= served;
            }
        }
        for (int e : network.out_edges(i)) {
            for (int c = 0; c < J; ++c) {
                const double mu = decision.transmission(e, c);
                if (mu > 0.0) {
                    const double served = std::min(mu, avail(c));
                    acct.transmitted(e, c) = served;
                    avail(c) -= served;
                }
            }
        }
    }

    // Fill: arrivals, received transmissions, processor output of this slot.
    Q += arrivals;
    for (int e = 0; e < E; ++e)
        Q.row(network.edge(e).to) += acct.transmitted.row(e);
    for (int i = 0; i < N; ++i)
        for (int c = 0; c < J; ++c) {
            const double served = acct.processed(i, c);
            if (served > 0.0) {
                const int nxt = commodities.next(c);
                const double out = commodities.next_scaling(c) * served;
                acct.produced(i, nxt) = out;
                Q(i, nxt) += out;
            }
        }

    // Net change from actual flows, independent of the update above.
    acct.net_change = arrivals + acct.produced - acct.processed;
    for (int e = 0; e < E; ++e) {
        acct.net_change.row(network.edge(e).to) += acct.transmitted.row(e);
        acct.net_change.row(network.edge(e).from) -= acct.transmitted.row(e);
    }

    // Final commodities exit at their destination.
    for (int c = 0; c < J; ++c)
        if (commodities.is_final(c)) {
            const int d = commodities.id(c).destination;
            acct.delivered += Q(d, c);
            acct.net_change(d, c) = 0.0;
            Q(d, c) = 0.0;
        }
    ++state.slot;
}

double second_moment_term(const CloudNetwork& network, const CommodityIndex& commodities,
                          const Decision& d, const Matrix& arrivals) {
    const int N = network.node_count();
    const int J = commodities.size();
    Matrix out = d.processing;
    Matrix in = arrivals;
    for (int i = 0; i < N; ++i)
        for (int c = 0; c < J; ++c)
            if (d.processing(i, c) > 0.0)
                in(i, commodities.next(c)) += commodities.next_scaling(c) * d.processing(i, c);
    for (int e = 0; e < network.edge_count(); ++e) {
        out.row(network.edge(e).from) += d.transmission.row(e);
        in.row(network.edge(e).to) += d.transmission.row(e);
    }
    return 0.5 * (out.squaredNorm() + in.squaredNorm());
}

} // namespace dcnc
