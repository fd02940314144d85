// queueing.hpp - One-slot evolution of the commodity queues.
//
// A Decision carries the resource level chosen at every node and link plus the flows assigned
// to each commodity. step() drains every queue against its assigned flows (processor first,
// then outgoing links in ascending edge order), treats any shortfall as null packets, and then
// fills queues with arrivals, received transmissions and the scaled output of last slot's
// processing. Final commodities reaching their destination leave the network.
#pragma once

#include "dcnc/model.hpp"

namespace dcnc {

struct QueueState {
    Matrix backlog; // N x J
    long long slot = 0;

    static QueueState zeros(int nodes, int commodities) {
        return {Matrix::Zero(nodes, commodities), 0};
    }
    double total() const { return backlog.sum(); }
};

struct Decision {
    std::vector<int> node_level; // chosen k per node
    std::vector<int> edge_level; // chosen k per edge
    Matrix processing;           // N x J assigned flow into the processor
    Matrix transmission;         // E x J assigned flow over the edge

    static Decision idle(int nodes, int edges, int commodities);
    void clear();
};

struct FlowAccounting {
    Matrix processed;    // N x J actual flow into the processor
    Matrix transmitted;  // E x J actual flow over the edge
    Matrix produced;     // N x J actual processor output (by produced commodity)
    Matrix net_change;   // N x J inflow + arrivals - outflow, actual flows
    double delivered = 0.0;
    double cost = 0.0;
};

/// Throws ContractViolation if the decision breaks a capacity, host or final-commodity rule.
void check_decision(const CloudNetwork& network, const CommodityIndex& commodities, const Decision& d);

/// Operational cost of a slot, charged on assigned flows.
double slot_cost(const CloudNetwork& network, const CommodityIndex& commodities, const Decision& d);

/// Applies one slot. `arrivals` is N x J and must be zero outside source commodities.
/// `acct` is overwritten; passing the same object every slot avoids reallocation.
void step(const CloudNetwork& network, const CommodityIndex& commodities, QueueState& state,
          const Decision& decision, const Matrix& arrivals, FlowAccounting& acct,
          bool validate = true);

inline FlowAccounting step(const CloudNetwork& network, const CommodityIndex& commodities,
                           QueueState& state, const Decision& decision, const Matrix& arrivals) {
    FlowAccounting acct;
    step(network, commodities, state, decision, arrivals, acct);
    return acct;
}

/// Second-moment term of the drift bound computed from assigned flows and arrivals.
double second_moment_term(const CloudNetwork& network, const CommodityIndex& commodities,
                          const Decision& d, const Matrix& arrivals);

} // namespace dcnc
