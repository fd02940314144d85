// capacity.hpp - Capacity region membership, stability margin and minimum stabilizing cost.
//
// The region is described by flow conservation over multi-commodity-chain flows, chaining,
// and time-shared capacity: an interface runs level k with probability alpha_k and, given k,
// serves commodity c with probability beta_k^c. The products alpha_k * beta_k^c are replaced by
// joint masses z_k^c with sum_c z_k^c <= alpha_k, which keeps the region exact and the problem
// linear. Each flow variable is then carried by its capacity share, f = sum_k z_k^c C_k (/ r for
// processing): any slack in f <= sum_k z_k C_k can be removed by scaling z down, which never
// raises cost, so the equality form describes the same region and the same minimum.
#pragma once

#include "dcnc/model.hpp"
#include "dcnc/simplex.hpp"

#include "json.hpp"

#include <optional>
#include <vector>

namespace dcnc {

/// Time-sharing schedule of one interface.
struct InterfaceSchedule {
    std::vector<double> alpha; // probability of level k, k = 0..K (alpha[0] unused, idle is the residual)
    Matrix beta;               // (K+1) x J conditional probability of serving c at level k

    double total_alpha() const;
};

struct CapacityCertificate {
    bool feasible = false;
    double margin = 0.0;   // kappa used to build the certificate (0 unless requested)
    double min_cost = 0.0; // cost units per slot
    std::vector<InterfaceSchedule> nodes;
    std::vector<InterfaceSchedule> edges;
    Matrix processing_flow;   // N x J  f_{i,pr}
    Matrix transmission_flow; // E x J  f_{ij}
    std::string status;       // LP status text
};

struct CapacityLpOptions {
    bool with_margin = false; // add kappa and maximize it
};

/// Variable and row bookkeeping of the linearized capacity LP.
struct CapacityLp {
    LpProblem<double> lp;
    // Variable index of z for (node, level, commodity) / (edge, level, commodity); -1 if absent.
    std::vector<std::vector<std::vector<int>>> node_z;
    std::vector<std::vector<std::vector<int>>> edge_z;
    std::vector<std::vector<int>> node_alpha; // [node][level], -1 for level 0
    std::vector<std::vector<int>> edge_alpha;
    int margin = -1;
    Matrix conservation_row; // N x J row index, -1 when exempt
};

/// Validates the rate matrix (N x J, supported on source commodities).
void validate_rates(const CloudNetwork& network, const CommodityIndex& commodities, const Matrix& rates);

/// Uniform per-client rate matrix: `rate` at (source, (d, phi, 0)) for every client.
Matrix client_rates(const CloudNetwork& network, const CommodityIndex& commodities,
                    const std::vector<Client>& clients, double rate);

CapacityLp build_lp(const CloudNetwork& network, const CommodityIndex& commodities,
                    const std::vector<Client>& clients, const Matrix& rates,
                    CapacityLpOptions options = {});

struct MarginResult {
    double kappa = 0.0; // -inf when rates are infeasible
    bool feasible = false;
    std::string status;
};

/// Largest uniform inflation kappa of every client source rate keeping the rates in the region.
MarginResult max_margin(const CloudNetwork& network, const CommodityIndex& commodities,
                        const std::vector<Client>& clients, const Matrix& rates,
                        const LpSolver& solver = default_lp_solver());

/// Minimum average cost and the stationary randomized schedule achieving it.
CapacityCertificate min_cost(const CloudNetwork& network, const CommodityIndex& commodities,
                             const std::vector<Client>& clients, const Matrix& rates,
                             const LpSolver& solver = default_lp_solver());

/// Recovers flows, alpha and beta = z / alpha from an LP solution.
CapacityCertificate certificate_from_solution(const CloudNetwork& network, const CommodityIndex& commodities,
                                              const CapacityLp& lp, const Vector& x);

/// Checks conservation, chaining, capacity, boundary and probability constraints of a
/// certificate against the rates; returns one message per violated constraint.
std::vector<std::string> replay_certificate(const CloudNetwork& network, const CommodityIndex& commodities,
                                            const Matrix& rates, const CapacityCertificate& cert,
                                            double tolerance = 1e-7);

/// Average cost of a schedule: sum_k alpha_k (w_k + e C_k sum_c beta_k^c).
double schedule_cost(const CloudNetwork& network, const CapacityCertificate& cert);

nlohmann::json certificate_to_json(const CloudNetwork& network, const CommodityIndex& commodities,
                                   const CapacityCertificate& cert);
CapacityCertificate certificate_from_json(const CloudNetwork& network, const CommodityIndex& commodities,
                                          const nlohmann::json& doc);

} // namespace dcnc
