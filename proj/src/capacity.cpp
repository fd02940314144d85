#include "dcnc/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dcnc {

double InterfaceSchedule::total_alpha() const {
    double s = 0.0;
    for (std::size_t k = 1; k < alpha.size(); ++k)
        s += alpha[k];
    return s;
}

void validate_rates(const CloudNetwork& network, const CommodityIndex& commodities, const Matrix& rates) {
    if (rates.rows() != network.node_count() || rates.cols() != commodities.size())
        throw ConfigError("rate matrix must be nodes x commodities");
    for (int i = 0; i < rates.rows(); ++i)
        for (int c = 0; c < rates.cols(); ++c) {
            const double v = rates(i, c);
            if (!std::isfinite(v) || v < 0.0)
                throw ConfigError("arrival rates must be finite and nonnegative");
            if (v != 0.0 && !commodities.is_source(c))
                throw ConfigError("exogenous rate on intermediate commodity " + to_string(commodities.id(c)) +
                                  " at node " + std::to_string(i + 1));
        }
}

Matrix client_rates(const CloudNetwork& network, const CommodityIndex& commodities,
                    const std::vector<Client>& clients, double rate) {
    Matrix r = Matrix::Zero(network.node_count(), commodities.size());
    for (const Client& cl : clients) {
        const int c = commodities.find({cl.destination, cl.service, 0});
        if (c < 0)
            throw ConfigError("client commodity missing from the index");
        r(cl.source, c) += rate;
    }
    return r;
}

CapacityLp build_lp(const CloudNetwork& network, const CommodityIndex& commodities,
                    const std::vector<Client>& clients, const Matrix& rates, CapacityLpOptions options) {
    validate_rates(network, commodities, rates);
    const int N = network.node_count();
    const int E = network.edge_count();
    const int J = commodities.size();
    const bool cost_objective = !options.with_margin;

    CapacityLp out;
    auto& lp = out.lp;
    lp.objective.resize(0);

    out.node_alpha.resize(static_cast<std::size_t>(N));
    out.node_z.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        const auto& menu = network.processing(i);
        out.node_alpha[static_cast<std::size_t>(i)].assign(menu.levels.size(), -1);
        out.node_z[static_cast<std::size_t>(i)].assign(menu.levels.size(), std::vector<int>(static_cast<std::size_t>(J), -1));
        for (int k = 1; k <= menu.max_level(); ++k) {
            const auto& lvl = menu.levels[static_cast<std::size_t>(k)];
            if (lvl.capacity <= 0.0)
                continue;
            out.node_alpha[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                lp.add_variable(cost_objective ? lvl.setup_cost : 0.0);
            for (int c = 0; c < J; ++c)
                if (!commodities.is_final(c) && commodities.hostable(i, c))
                    out.node_z[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)][static_cast<std::size_t>(c)] =
                        lp.add_variable(cost_objective ? menu.unit_cost * lvl.capacity : 0.0);
        }
    }
    out.edge_alpha.resize(static_cast<std::size_t>(E));
    out.edge_z.resize(static_cast<std::size_t>(E));
    for (int e = 0; e < E; ++e) {
        const auto& menu = network.transmission(e);
        const int from = network.edge(e).from;
        out.edge_alpha[static_cast<std::size_t>(e)].assign(menu.levels.size(), -1);
        out.edge_z[static_cast<std::size_t>(e)].assign(menu.levels.size(), std::vector<int>(static_cast<std::size_t>(J), -1));
        for (int k = 1; k <= menu.max_level(); ++k) {
            const auto& lvl = menu.levels[static_cast<std::size_t>(k)];
            if (lvl.capacity <= 0.0)
                continue;
            out.edge_alpha[static_cast<std::size_t>(e)][static_cast<std::size_t>(k)] =
                lp.add_variable(cost_objective ? lvl.setup_cost : 0.0);
            for (int c = 0; c < J; ++c) {
                // A final commodity never leaves its destination.
                if (commodities.is_final(c) && commodities.id(c).destination == from)
                    continue;
                out.edge_z[static_cast<std::size_t>(e)][static_cast<std::size_t>(k)][static_cast<std::size_t>(c)] =
                    lp.add_variable(cost_objective ? menu.unit_cost * lvl.capacity : 0.0);
            }
        }
    }
    if (options.with_margin)
        out.margin = lp.add_variable(-1.0);

    Matrix inflated = Matrix::Zero(N, J);
    if (options.with_margin)
        for (const Client& cl : clients) {
            const int c = commodities.find({cl.destination, cl.service, 0});
            if (c < 0)
                throw ConfigError("client commodity missing from the index");
            inflated(cl.source, c) = 1.0;
        }

    // Flow conservation: in + processor output + rate (+ kappa) <= out + processor input.
    out.conservation_row = Matrix::Constant(N, J, -1.0);
    for (int i = 0; i < N; ++i) {
        const auto& pmenu = network.processing(i);
        for (int c = 0; c < J; ++c) {
            if (commodities.is_final(c) && commodities.id(c).destination == i)
                continue;
            LpRow<double> row;
            row.sense = RowSense::less_equal;
            row.rhs = -rates(i, c);
            for (int e : network.in_edges(i)) {
                const auto& menu = network.transmission(e);
                for (int k = 1; k <= menu.max_level(); ++k) {
                    const int z = out.edge_z[static_cast<std::size_t>(e)][static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
                    if (z >= 0)
                        row.terms.emplace_back(z, menu.levels[static_cast<std::size_t>(k)].capacity);
                }
            }
            for (int e : network.out_edges(i)) {
                const auto& menu = network.transmission(e);
                for (int k = 1; k <= menu.max_level(); ++k) {
                    const int z = out.edge_z[static_cast<std::size_t>(e)][static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
                    if (z >= 0)
                        row.terms.emplace_back(z, -menu.levels[static_cast<std::size_t>(k)].capacity);
                }
            }
            const int prev = commodities.prev(c);
            for (int k = 1; k <= pmenu.max_level(); ++k) {
                const double cap = pmenu.levels[static_cast<std::size_t>(k)].capacity;
                const auto& zk = out.node_z[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
                if (prev >= 0 && zk[static_cast<std::size_t>(prev)] >= 0)
                    row.terms.emplace_back(zk[static_cast<std::size_t>(prev)],
                                           commodities.own_scaling(c) * cap / commodities.next_ratio(prev));
                if (zk[static_cast<std::size_t>(c)] >= 0)
                    row.terms.emplace_back(zk[static_cast<std::size_t>(c)], -cap / commodities.next_ratio(c));
            }
            if (options.with_margin && inflated(i, c) != 0.0)
                row.terms.emplace_back(out.margin, 1.0);
            out.conservation_row(i, c) = lp.add_row(std::move(row));
        }
    }

    // Time sharing: sum_c z_k^c <= alpha_k and sum_k alpha_k <= 1.
    auto add_sharing = [&](const std::vector<int>& alpha, const std::vector<std::vector<int>>& z) {
        LpRow<double> total;
        for (std::size_t k = 1; k < alpha.size(); ++k) {
            if (alpha[k] < 0)
                continue;
            LpRow<double> level;
            for (int v : z[k])
                if (v >= 0)
                    level.terms.emplace_back(v, 1.0);
            level.terms.emplace_back(alpha[k], -1.0);
            lp.add_row(std::move(level));
            total.terms.emplace_back(alpha[k], 1.0);
        }
        if (!total.terms.empty()) {
            total.rhs = 1.0;
            lp.add_row(std::move(total));
        }
    };
    for (int i = 0; i < N; ++i)
        add_sharing(out.node_alpha[static_cast<std::size_t>(i)], out.node_z[static_cast<std::size_t>(i)]);
    for (int e = 0; e < E; ++e)
        add_sharing(out.edge_alpha[static_cast<std::size_t>(e)], out.edge_z[static_cast<std::size_t>(e)]);
    return out;
}

MarginResult max_margin(const CloudNetwork& network, const CommodityIndex& commodities,
                        const std::vector<Client>& clients, const Matrix& rates, const LpSolver& solver) {
    const CapacityLp lp = build_lp(network, commodities, clients, rates, {.with_margin = true});
    const auto sol = solver(lp.lp);
    MarginResult r;
    r.status = to_string(sol.status);
    switch (sol.status) {
    case LpStatus::optimal:
        r.feasible = true;
        r.kappa = sol.x(lp.margin);
        break;
    case LpStatus::infeasible:
        r.kappa = -std::numeric_limits<double>::infinity();
        break;
    case LpStatus::unbounded:
        r.feasible = true;
        r.kappa = std::numeric_limits<double>::infinity();
        break;
    case LpStatus::iteration_limit:
        throw std::runtime_error("capacity LP did not converge: " + r.status);
    }
    return r;
}

CapacityCertificate certificate_from_solution(const CloudNetwork& network, const CommodityIndex& commodities,
                                              const CapacityLp& lp, const Vector& x) {
    const int N = network.node_count();
    const int E = network.edge_count();
    const int J = commodities.size();
    CapacityCertificate cert;
    cert.feasible = true;
    cert.processing_flow = Matrix::Zero(N, J);
    cert.transmission_flow = Matrix::Zero(E, J);

    auto recover = [&](const ResourceMenu& menu, const std::vector<int>& alpha,
                       const std::vector<std::vector<int>>& z, auto&& flow_of) {
        InterfaceSchedule s;
        s.alpha.assign(menu.levels.size(), 0.0);
        s.beta = Matrix::Zero(static_cast<Index>(menu.levels.size()), J);
        for (std::size_t k = 1; k < menu.levels.size(); ++k) {
            if (alpha[k] < 0)
                continue;
            const double a = std::max(0.0, x(alpha[k]));
            s.alpha[k] = a;
            for (int c = 0; c < J; ++c) {
                const int v = z[k][static_cast<std::size_t>(c)];
                if (v < 0)
                    continue;
                const double mass = std::max(0.0, x(v));
                flow_of(c, mass * menu.levels[k].capacity);
                if (a > 0.0)
                    s.beta(static_cast<Index>(k), c) = std::min(1.0, mass / a);
            }
        }
        return s;
    };
    for (int i = 0; i < N; ++i)
        cert.nodes.push_back(recover(network.processing(i), lp.node_alpha[static_cast<std::size_t>(i)],
                                     lp.node_z[static_cast<std::size_t>(i)], [&](int c, double capacity_share) {
                                         cert.processing_flow(i, c) += capacity_share / commodities.next_ratio(c);
                                     }));
    for (int e = 0; e < E; ++e)
        cert.edges.push_back(recover(network.transmission(e), lp.edge_alpha[static_cast<std::size_t>(e)],
                                     lp.edge_z[static_cast<std::size_t>(e)],
                                     [&](int c, double capacity_share) { cert.transmission_flow(e, c) += capacity_share; }));
    cert.min_cost = schedule_cost(network, cert);
    if (lp.margin >= 0)
        cert.margin = x(lp.margin);
    return cert;
}

CapacityCertificate min_cost(const CloudNetwork& network, const CommodityIndex& commodities,
                             const std::vector<Client>& clients, const Matrix& rates, const LpSolver& solver) {
    const CapacityLp lp = build_lp(network, commodities, clients, rates);
    const auto sol = solver(lp.lp);
    if (sol.status == LpStatus::iteration_limit)
        throw std::runtime_error("capacity LP did not converge: " + to_string(sol.status));
    if (sol.status != LpStatus::optimal) {
        CapacityCertificate cert;
        cert.feasible = false;
        cert.min_cost = std::numeric_limits<double>::infinity();
        cert.status = to_string(sol.status);
        return cert;
    }
    CapacityCertificate cert = certificate_from_solution(network, commodities, lp, sol.x);
    cert.status = to_string(sol.status);
    return cert;
}

double schedule_cost(const CloudNetwork& network, const CapacityCertificate& cert) {
    double h = 0.0;
    auto add = [&](const ResourceMenu& menu, const InterfaceSchedule& s) {
        for (std::size_t k = 1; k < s.alpha.size(); ++k)
            h += s.alpha[k] * (menu.levels[k].setup_cost +
                               menu.unit_cost * menu.levels[k].capacity * s.beta.row(static_cast<Index>(k)).sum());
    };
    for (int i = 0; i < network.node_count(); ++i)
        add(network.processing(i), cert.nodes[static_cast<std::size_t>(i)]);
    for (int e = 0; e < network.edge_count(); ++e)
        add(network.transmission(e), cert.edges[static_cast<std::size_t>(e)]);
    return h;
}

std::vector<std::string> replay_certificate(const CloudNetwork& network, const CommodityIndex& commodities,
                                            const Matrix& rates, const CapacityCertificate& cert,
                                            double tolerance) {
    std::vector<std::string> bad;
    const int N = network.node_count();
    const int E = network.edge_count();
    const int J = commodities.size();
    auto fail = [&](const std::string& what, double by) {
        std::ostringstream os;
        os << what << " violated by " << by;
        bad.push_back(os.str());
    };
    const Matrix& fpr = cert.processing_flow;
    const Matrix& ftr = cert.transmission_flow;
    if (fpr.rows() != N || fpr.cols() != J || ftr.rows() != E || ftr.cols() != J ||
        cert.nodes.size() != static_cast<std::size_t>(N) || cert.edges.size() != static_cast<std::size_t>(E)) {
        bad.push_back("certificate shape does not match the network");
        return bad;
    }
    if ((fpr.array() < -tolerance).any() || (ftr.array() < -tolerance).any())
        bad.push_back("negative flow");

    for (int i = 0; i < N; ++i)
        for (int c = 0; c < J; ++c) {
            const CommodityId& id = commodities.id(c);
            if (commodities.is_final(c)) {
                if (std::abs(fpr(i, c)) > tolerance)
                    fail("final commodity processed at node " + std::to_string(i + 1), fpr(i, c));
                if (id.destination == i)
                    continue;
            } else if (!commodities.hostable(i, c) && fpr(i, c) > tolerance) {
                fail("processing at non-hosting node " + std::to_string(i + 1), fpr(i, c));
            }
            double in = rates(i, c), out = fpr(i, c);
            const int prev = commodities.prev(c);
            if (prev >= 0)
                in += commodities.own_scaling(c) * fpr(i, prev);
            for (int e : network.in_edges(i))
                in += ftr(e, c);
            for (int e : network.out_edges(i))
                out += ftr(e, c);
            if (in > out + tolerance)
                fail("conservation at node " + std::to_string(i + 1) + " for " + to_string(id), in - out);
        }
    for (int e = 0; e < E; ++e)
        for (int c = 0; c < J; ++c)
            if (commodities.is_final(c) && commodities.id(c).destination == network.edge(e).from &&
                ftr(e, c) > tolerance)
                fail("final commodity leaving its destination on edge " + std::to_string(e + 1), ftr(e, c));

    auto check_schedule = [&](const ResourceMenu& menu, const InterfaceSchedule& s, const std::string& name,
                              auto&& flow, auto&& per_unit) {
        if (s.alpha.size() != menu.levels.size() || s.beta.rows() != static_cast<Index>(menu.levels.size()) ||
            s.beta.cols() != J) {
            bad.push_back(name + ": schedule shape mismatch");
            return;
        }
        if (s.total_alpha() > 1.0 + tolerance)
            fail(name + ": sum of level probabilities", s.total_alpha() - 1.0);
        for (std::size_t k = 0; k < s.alpha.size(); ++k) {
            if (s.alpha[k] < -tolerance)
                fail(name + ": negative level probability", -s.alpha[k]);
            if ((s.beta.row(static_cast<Index>(k)).array() < -tolerance).any())
                bad.push_back(name + ": negative commodity probability");
            if (s.beta.row(static_cast<Index>(k)).sum() > 1.0 + tolerance)
                fail(name + ": sum of commodity probabilities", s.beta.row(static_cast<Index>(k)).sum() - 1.0);
        }
        for (int c = 0; c < J; ++c) {
            double cap = 0.0;
            for (std::size_t k = 1; k < s.alpha.size(); ++k)
                cap += s.alpha[k] * s.beta(static_cast<Index>(k), c) * menu.levels[k].capacity;
            cap /= per_unit(c);
            if (flow(c) > cap + tolerance)
                fail(name + ": capacity for " + to_string(commodities.id(c)), flow(c) - cap);
        }
    };
    for (int i = 0; i < N; ++i)
        check_schedule(network.processing(i), cert.nodes[static_cast<std::size_t>(i)], "node " + std::to_string(i + 1),
                       [&](int c) { return fpr(i, c); }, [&](int c) { return commodities.next_ratio(c); });
    for (int e = 0; e < E; ++e)
        check_schedule(network.transmission(e), cert.edges[static_cast<std::size_t>(e)], "edge " + std::to_string(e + 1),
                       [&](int c) { return ftr(e, c); }, [](int) { return 1.0; });
    return bad;
}

} // namespace dcnc
