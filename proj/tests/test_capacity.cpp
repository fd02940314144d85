#include "doctest.h"
#include "helpers.hpp"

#include "dcnc/capacity.hpp"

using namespace dcnc;
using testing::line_network;

namespace {

struct TwoNode {
    CloudNetwork net;
    std::vector<ServiceSpec> svc;
    std::vector<Client> clients;
    CommodityIndex com;
};

TwoNode two_node(double xi, std::vector<int> hosts, ResourceMenu menu = ResourceMenu::on_off(10, 0, 0)) {
    TwoNode t;
    t.net = line_network(2, menu, menu);
    t.svc = {ServiceSpec{{ServiceFunction{xi, 1.0, std::move(hosts)}}}};
    t.clients = {{0, 1, 0}};
    t.com = build_commodities(t.net, t.svc, t.clients);
    return t;
}

// Cheapest time-sharing of one interface carrying `load`, on a 0.01 grid over the level probabilities.
double interface_grid_cost(const ResourceMenu& menu, double load) {
    if (load <= 0.0)
        return 0.0;
    double best = std::numeric_limits<double>::infinity();
    const int K = menu.max_level();
    REQUIRE(K <= 2);
    for (int a1 = 0; a1 <= 100; ++a1)
        for (int a2 = 0; a2 + a1 <= 100 && (K == 2 || a2 == 0); ++a2) {
            const double al1 = a1 / 100.0, al2 = a2 / 100.0;
            double cap = al1 * menu.levels[1].capacity, w = al1 * menu.levels[1].setup_cost;
            if (K == 2) {
                cap += al2 * menu.levels[2].capacity;
                w += al2 * menu.levels[2].setup_cost;
            }
            if (cap + 1e-12 >= load)
                best = std::min(best, w + menu.unit_cost * load);
        }
    return best;
}

// Brute force for the 2-node example with xi = r = 1: a units processed at node 1, the rest at node 2.
double two_node_grid_min_cost(const ResourceMenu& menu, double lambda) {
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s <= 100; ++s) {
        const double a = lambda * s / 100.0;
        best = std::min(best, interface_grid_cost(menu, a) + interface_grid_cost(menu, lambda - a) +
                                  interface_grid_cost(menu, lambda));
    }
    return best;
}

Vector lp_point_from_certificate(const CapacityLp& lp, const CloudNetwork& net, const CapacityCertificate& cert) {
    Vector x = Vector::Zero(lp.lp.variables);
    for (int i = 0; i < net.node_count(); ++i) {
        const auto& s = cert.nodes[static_cast<std::size_t>(i)];
        for (std::size_t k = 1; k < s.alpha.size(); ++k) {
            const int a = lp.node_alpha[static_cast<std::size_t>(i)][k];
            if (a < 0)
                continue;
            x(a) = s.alpha[k];
            for (std::size_t c = 0; c < lp.node_z[static_cast<std::size_t>(i)][k].size(); ++c) {
                const int z = lp.node_z[static_cast<std::size_t>(i)][k][c];
                if (z >= 0)
                    x(z) = s.alpha[k] * s.beta(static_cast<Index>(k), static_cast<Index>(c));
            }
        }
    }
    for (int e = 0; e < net.edge_count(); ++e) {
        const auto& s = cert.edges[static_cast<std::size_t>(e)];
        for (std::size_t k = 1; k < s.alpha.size(); ++k) {
            const int a = lp.edge_alpha[static_cast<std::size_t>(e)][k];
            if (a < 0)
                continue;
            x(a) = s.alpha[k];
            for (std::size_t c = 0; c < lp.edge_z[static_cast<std::size_t>(e)][k].size(); ++c) {
                const int z = lp.edge_z[static_cast<std::size_t>(e)][k][c];
                if (z >= 0)
                    x(z) = s.alpha[k] * s.beta(static_cast<Index>(k), static_cast<Index>(c));
            }
        }
    }
    return x;
}

} // namespace

TEST_CASE("zero rates") {
    const TwoNode t = two_node(1.0, {});
    const Matrix zero = Matrix::Zero(2, t.com.size());
    const auto cert = min_cost(t.net, t.com, t.clients, zero);
    REQUIRE(cert.feasible);
    CHECK(cert.min_cost == doctest::Approx(0.0));
    CHECK(cert.processing_flow.cwiseAbs().maxCoeff() == 0.0);
    CHECK(max_margin(t.net, t.com, t.clients, zero).kappa > 0.0);
}

TEST_CASE("two-node margins") {
    const TwoNode t = two_node(1.0, {});
    const Matrix zero = Matrix::Zero(2, t.com.size());
    CHECK(max_margin(t.net, t.com, t.clients, zero).kappa == doctest::Approx(10.0));

    // Compression processed only at the source: the processor binds at 10.
    const TwoNode h = two_node(0.25, {0});
    CHECK(max_margin(h.net, h.com, h.clients, zero).kappa == doctest::Approx(10.0));

    // Processing at both nodes: a <= 10 at the source, lambda - a <= 10 at the destination,
    // and the link carries 0.25 a + (lambda - a) <= 10, so lambda <= 17.5.
    const TwoNode b = two_node(0.25, {});
    CHECK(max_margin(b.net, b.com, b.clients, zero).kappa == doctest::Approx(17.5));

    const Matrix over = client_rates(t.net, t.com, t.clients, 12.0);
    const auto m = max_margin(t.net, t.com, t.clients, over);
    CHECK_FALSE(m.feasible);
    CHECK(std::isinf(m.kappa));
    CHECK(m.kappa < 0.0);
    CHECK_FALSE(min_cost(t.net, t.com, t.clients, over).feasible);
}

TEST_CASE("two-node minimum cost matches grid brute force") {
    for (const ResourceMenu& menu :
         {ResourceMenu::on_off(10, 10, 1), ResourceMenu{{{0, 0}, {5, 3}, {10, 10}}, 1.0},
          ResourceMenu{{{0, 0}, {4, 1}, {10, 9}}, 0.5}}) {
        const TwoNode t = two_node(1.0, {}, menu);
        for (double lambda : {0.5, 2.0, 5.0, 7.5}) {
            const Matrix rates = client_rates(t.net, t.com, t.clients, lambda);
            const auto cert = min_cost(t.net, t.com, t.clients, rates);
            REQUIRE(cert.feasible);
            const double grid = two_node_grid_min_cost(menu, lambda);
            CHECK(cert.min_cost <= grid + 1e-7);
            CHECK(cert.min_cost >= grid - 0.35); // the grid overestimates by at most 0.01 w per interface
            CHECK(replay_certificate(t.net, t.com, rates, cert).empty());
        }
    }
    const TwoNode t = two_node(1.0, {}, ResourceMenu::on_off(10, 10, 1));
    CHECK(min_cost(t.net, t.com, t.clients, client_rates(t.net, t.com, t.clients, 5.0)).min_cost ==
          doctest::Approx(20.0));
}

TEST_CASE("intermediate rates are rejected") {
    const TwoNode t = two_node(1.0, {});
    Matrix r = Matrix::Zero(2, t.com.size());
    r(0, 1) = 1.0;
    CHECK_THROWS_AS(build_lp(t.net, t.com, t.clients, r), ConfigError);
    r.setZero();
    r(0, 0) = -1.0;
    CHECK_THROWS_AS(build_lp(t.net, t.com, t.clients, r), ConfigError);
}

TEST_CASE("random instances: replay, linearization round trip, monotonicity") {
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const CloudNetwork net = testing::random_network(rng, 3 + trial % 3, 3);
        const auto svc = testing::random_services(rng, 1 + trial % 2, 2);
        std::vector<Client> clients;
        std::uniform_int_distribution<int> nd(0, net.node_count() - 1);
        for (int k = 0; k < 3; ++k) {
            const int a = nd(rng), b = nd(rng);
            if (a != b)
                clients.push_back({a, b, k % static_cast<int>(svc.size())});
        }
        std::sort(clients.begin(), clients.end(), [](const Client& x, const Client& y) {
            return std::tie(x.source, x.destination, x.service) < std::tie(y.source, y.destination, y.service);
        });
        clients.erase(std::unique(clients.begin(), clients.end()), clients.end());
        if (clients.empty())
            continue;
        const CommodityIndex com = build_commodities(net, svc, clients);
        const auto margin = max_margin(net, com, clients, Matrix::Zero(net.node_count(), com.size()));
        REQUIRE(margin.feasible);
        const double lam = 0.5 * margin.kappa;
        const Matrix rates = client_rates(net, com, clients, lam);
        const auto cert = min_cost(net, com, clients, rates);
        REQUIRE(cert.feasible);
        const auto bad = replay_certificate(net, com, rates, cert);
        CHECK(bad.empty());
        CHECK(schedule_cost(net, cert) == doctest::Approx(cert.min_cost));

        const CapacityLp lp = build_lp(net, com, clients, rates);
        const Vector x = lp_point_from_certificate(lp, net, cert);
        CHECK(lp.lp.max_violation(x) <= 1e-7);
        CHECK(lp.lp.objective.dot(x) == doctest::Approx(cert.min_cost).epsilon(1e-7));

        const auto more = min_cost(net, com, clients, client_rates(net, com, clients, 0.75 * margin.kappa));
        REQUIRE(more.feasible);
        CHECK(more.min_cost >= cert.min_cost - 1e-7);
        ++checked;
    }
    CHECK(checked >= 20);
}

TEST_CASE("Abilene ON/OFF capacity") {
    const auto ab = testing::abilene();
    const Matrix one = client_rates(ab.network, ab.commodities, ab.clients, 1.0);
    const auto m = max_margin(ab.network, ab.commodities, ab.clients, one);
    REQUIRE(m.feasible);
    CHECK(1.0 + m.kappa >= 12.5);
    CHECK(1.0 + m.kappa <= 14.5);

    const auto cert = min_cost(ab.network, ab.commodities, ab.clients, one);
    REQUIRE(cert.feasible);
    CHECK(replay_certificate(ab.network, ab.commodities, one, cert).empty());

    const auto json = certificate_to_json(ab.network, ab.commodities, cert);
    const auto back = certificate_from_json(ab.network, ab.commodities, json);
    CHECK(back.min_cost == cert.min_cost);
    CHECK((back.processing_flow - cert.processing_flow).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.transmission_flow - cert.transmission_flow).cwiseAbs().maxCoeff() == 0.0);
    CHECK(replay_certificate(ab.network, ab.commodities, one, back).empty());
    CHECK(schedule_cost(ab.network, back) == doctest::Approx(cert.min_cost));

    const Matrix beyond = client_rates(ab.network, ab.commodities, ab.clients, 1.0 + m.kappa + 0.5);
    CHECK_FALSE(min_cost(ab.network, ab.commodities, ab.clients, beyond).feasible);
}

TEST_CASE("malformed certificate documents") {
    const TwoNode t = two_node(1.0, {});
    CHECK_THROWS_AS(certificate_from_json(t.net, t.com, nlohmann::json::object()), ConfigError);
    nlohmann::json doc = {{"feasible", true}, {"nodes", {{{"node", 9}, {"levels", nlohmann::json::array()}}}},
                          {"edges", nlohmann::json::array()}};
    CHECK_THROWS_AS(certificate_from_json(t.net, t.com, doc), ConfigError);
}
