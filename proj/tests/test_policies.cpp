#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

#include "dcnc/policies.hpp"

using namespace dcnc;
using testing::line_network;

namespace {

struct Setup {
    CloudNetwork net;
    std::vector<ServiceSpec> svc;
    CommodityIndex com;
};

// Node 0 -> node 1, one single-function service, destination node 1.
Setup single(ResourceMenu node_menu, ResourceMenu link_menu, double xi = 1.0, double r = 1.0) {
    Setup s;
    s.net = line_network(2, node_menu, link_menu);
    s.svc = {ServiceSpec{{ServiceFunction{xi, r, {}}}}};
    s.com = build_commodities(s.net, s.svc, {{0, 1, 0}});
    return s;
}

} // namespace

TEST_CASE("policy names") {
    CHECK(parse_policy_kind("DCNC-L") == PolicyKind::dcnc_l);
    CHECK(parse_policy_kind("edcnc_q") == PolicyKind::edcnc_q);
    CHECK(parse_policy_kind("randomized") == PolicyKind::randomized);
    CHECK_THROWS_AS(parse_policy_kind("max-weight"), ConfigError);
    for (PolicyKind k : {PolicyKind::dcnc_l, PolicyKind::dcnc_q, PolicyKind::edcnc_l, PolicyKind::edcnc_q,
                         PolicyKind::randomized})
        CHECK(parse_policy_kind(to_string(k)) == k);
    CHECK_THROWS_AS((PolicyConfig{PolicyKind::dcnc_l, -1.0, 0.0, 1}.validate()), ConfigError);
    CHECK_THROWS_AS((PolicyConfig{PolicyKind::dcnc_l, 1.0, -1.0, 1}.validate()), ConfigError);
}

TEST_CASE("processing weights") {
    const Setup s = single(ResourceMenu::on_off(440, 110, 1), ResourceMenu::on_off(440, 440, 1));
    Matrix Q = Matrix::Zero(2, 2);
    Q(0, 0) = 500;
    Q(0, 1) = 100;
    const Vector w = processing_weights(s.net, s.com, Q, 0, 100.0);
    CHECK(w(0) == 300.0);
    CHECK(w(1) == 0.0); // final commodity
    CHECK(processing_weights(s.net, s.com, Matrix::Zero(2, 2), 0, 100.0).isZero());

    ServiceSpec hosted{{ServiceFunction{1.0, 1.0, {1}}}};
    const CommodityIndex com = build_commodities(s.net, {hosted}, {{0, 1, 0}});
    CHECK(processing_weights(s.net, com, Q, 0, 0.0).isZero());
}

TEST_CASE("transmission weights") {
    const Setup s = single(ResourceMenu::on_off(1, 1, 1), ResourceMenu::on_off(1, 1, 1));
    Matrix Q = Matrix::Zero(2, 2);
    Q(0, 0) = 10;
    Q(1, 0) = 2;
    CHECK(transmission_weights(s.net, Q, 0, 3.0)(0) == 5.0);
    Q(1, 0) = 10;
    CHECK(transmission_weights(s.net, Q, 0, 0.0)(0) == 0.0);
    Q(1, 0) = 8;
    CHECK(transmission_weights(s.net, Q, 0, 3.0)(0) == 0.0);
}

TEST_CASE("DCNC-L node examples") {
    const Setup s = single(ResourceMenu::on_off(440, 110, 1), ResourceMenu::on_off(440, 440, 1));
    Decision d = Decision::idle(2, 1, 2);

    dcnc_l_node(s.net, s.com, Matrix::Zero(2, 2), 0, 100.0, d);
    CHECK(d.node_level[0] == 0);
    CHECK(d.processing.isZero());

    Matrix Q = Matrix::Zero(2, 2);
    Q(0, 0) = 101.0; // W* = 1 after the V e = 100 gate
    dcnc_l_node(s.net, s.com, Q, 0, 100.0, d);
    CHECK(d.node_level[0] == 0);
    CHECK(d.processing.isZero());

    Q(0, 0) = 400.0; // W* = 300
    dcnc_l_node(s.net, s.com, Q, 0, 100.0, d);
    CHECK(d.node_level[0] == 1);
    CHECK(d.processing(0, 0) == 440.0);
}

TEST_CASE("DCNC-L link examples and tie-break") {
    const CloudNetwork net = line_network(2, ResourceMenu::on_off(440, 110, 1), ResourceMenu::on_off(440, 110, 1));
    const std::vector<ServiceSpec> svc{ServiceSpec{{ServiceFunction{1.0, 1.0, {}}}}};
    const CommodityIndex com = build_commodities(net, svc, {{0, 1, 0}, {1, 0, 0}});
    Decision d = Decision::idle(2, 1, com.size());
    Matrix Q = Matrix::Zero(2, com.size());
    dcnc_l_link(net, com, Q, 0, 100.0, d);
    CHECK(d.edge_level[0] == 0);

    Q(0, com.find({0, 0, 0})) = 400.0;
    Q(0, com.find({1, 0, 0})) = 400.0;
    dcnc_l_link(net, com, Q, 0, 100.0, d);
    CHECK(d.edge_level[0] == 1);
    CHECK(d.transmission(0, com.find({0, 0, 0})) == 440.0); // lowest commodity order wins
    CHECK(d.transmission.row(0).sum() == 440.0);
}

TEST_CASE("DCNC-L matches exhaustive enumeration on random instances") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> qd(0.0, 50.0), vd(0.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const CloudNetwork net = testing::random_network(rng, 2 + trial % 3, 3);
        const auto svc = testing::random_services(rng, 1, 3);
        const CommodityIndex com = build_commodities(net, svc, {{0, 1, 0}});
        Matrix Q(net.node_count(), com.size());
        for (Index i = 0; i < Q.size(); ++i)
            Q.data()[i] = qd(rng);
        const double V = vd(rng);
        Decision d = Decision::idle(net.node_count(), net.edge_count(), com.size());
        for (int i = 0; i < net.node_count(); ++i) {
            dcnc_l_node(net, com, Q, i, V, d);
            std::vector<double> raw(static_cast<std::size_t>(com.size()), -std::numeric_limits<double>::infinity());
            for (int c = 0; c < com.size(); ++c)
                if (!com.is_final(c))
                    raw[static_cast<std::size_t>(c)] =
                        (Q(i, c) - com.next_scaling(c) * Q(i, com.next(c))) / com.next_ratio(c) -
                        V * net.processing(i).unit_cost;
            const auto best = oracle::exhaustive_linear(net.processing(i), raw, V);
            const int k = d.node_level[static_cast<std::size_t>(i)];
            double obj = V * net.processing(i).levels[static_cast<std::size_t>(k)].setup_cost;
            for (int c = 0; c < com.size(); ++c)
                if (d.processing(i, c) > 0.0)
                    obj -= d.processing(i, c) * com.next_ratio(c) * raw[static_cast<std::size_t>(c)];
            CHECK(obj == doctest::Approx(best.objective));
            if (best.runner_up - best.objective > 1e-9) {
                CHECK(k == best.level);
            }
        }
    }
}

TEST_CASE("DCNC-Q examples") {
    // Node: W = (10, 4), C = 2, widths 1/2.
    const CloudNetwork net = line_network(2, ResourceMenu{{{0, 0}, {2, 0}}, 0.0}, ResourceMenu{{{0, 0}, {2, 0}}, 0.0});
    const std::vector<ServiceSpec> svc{ServiceSpec{{ServiceFunction{1.0, 1.0, {}}}}};
    const CommodityIndex com = build_commodities(net, svc, {{0, 1, 0}, {1, 0, 0}});
    Matrix Q = Matrix::Zero(2, com.size());
    const int a = com.find({0, 0, 0}), b = com.find({1, 0, 0});
    Q(0, a) = 4.0;
    Q(0, b) = 10.0;
    Decision d = Decision::idle(2, 1, com.size());
    const auto ch = dcnc_q_node(net, com, Q, 0, 0.0, d);
    CHECK(ch.level == 1);
    CHECK(ch.threshold == doctest::Approx(6.0));
    CHECK(d.processing(0, b) == doctest::Approx(2.0));
    CHECK(d.processing(0, a) == 0.0);

    // Link: same weights, C = 2.
    const auto lc = dcnc_q_link(net, com, Q, 0, 0.0, d);
    CHECK(lc.level == 1);
    CHECK(d.transmission(0, b) == doctest::Approx(2.0));
    CHECK(d.transmission.row(0).sum() == doctest::Approx(2.0));

    // Idle network.
    const auto idle = dcnc_q_node(net, com, Matrix::Zero(2, com.size()), 0, 5.0, d);
    CHECK(idle.level == 0);
    CHECK(d.processing.row(0).isZero());
}

TEST_CASE("DCNC-Q matches projected gradient over levels") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> qd(0.0, 30.0), vd(0.0, 3.0);
    for (int trial = 0; trial < 150; ++trial) {
        const CloudNetwork net = testing::random_network(rng, 2 + trial % 3, 3);
        const auto svc = testing::random_services(rng, 2, 2);
        const CommodityIndex com = build_commodities(net, svc, {{0, 1, 0}, {1, 0, 1}});
        Matrix Q(net.node_count(), com.size());
        for (Index i = 0; i < Q.size(); ++i)
            Q.data()[i] = qd(rng);
        const double V = vd(rng);
        Decision d = Decision::idle(net.node_count(), net.edge_count(), com.size());
        for (int i = 0; i < net.node_count(); ++i) {
            dcnc_q_node(net, com, Q, i, V, d);
            const Vector w = processing_weights(net, com, Q, i, V);
            std::vector<double> W(static_cast<std::size_t>(com.size())), r(W.size()), xi(W.size());
            for (int c = 0; c < com.size(); ++c) {
                W[static_cast<std::size_t>(c)] = w(c);
                r[static_cast<std::size_t>(c)] = com.next_ratio(c);
                xi[static_cast<std::size_t>(c)] = com.next_scaling(c);
            }
            const auto& menu = net.processing(i);
            double best = 0.0;
            std::vector<double> best_mu(W.size(), 0.0);
            for (int k = 1; k <= menu.max_level(); ++k) {
                const auto mu = oracle::projected_gradient(W, r, xi, menu.levels[static_cast<std::size_t>(k)].capacity);
                const double psi = oracle::quad_objective(mu, W, r, xi) + V * menu.levels[static_cast<std::size_t>(k)].setup_cost;
                if (psi < best) {
                    best = psi;
                    best_mu = mu;
                }
            }
            for (int c = 0; c < com.size(); ++c)
                CHECK(std::abs(d.processing(i, c) - best_mu[static_cast<std::size_t>(c)]) <= 1e-6);
        }
    }
}

TEST_CASE("emitted decisions satisfy the model on Abilene") {
    const auto ab = testing::abilene();
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> qd(0.0, 2000.0);
    for (PolicyKind k : {PolicyKind::dcnc_l, PolicyKind::dcnc_q, PolicyKind::edcnc_l, PolicyKind::edcnc_q}) {
        Controller ctl(ab.network, ab.services, ab.commodities, {k, 50.0, 10.0, 1});
        Decision d = Decision::idle(11, 28, ab.commodities.size());
        for (int t = 0; t < 50; ++t) {
            Matrix Q(11, ab.commodities.size());
            for (Index i = 0; i < Q.size(); ++i)
                Q.data()[i] = qd(rng);
            for (int c = 0; c < ab.commodities.size(); ++c)
                if (ab.commodities.is_final(c))
                    Q(ab.commodities.id(c).destination, c) = 0.0;
            ctl.decide(Q, d);
            CHECK_NOTHROW(check_decision(ab.network, ab.commodities, d));
        }
    }
}

TEST_CASE("bias off is bitwise neutral") {
    const auto ab = testing::abilene();
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> qd(0.0, 500.0);
    for (auto [plain, biased] : {std::pair{PolicyKind::dcnc_l, PolicyKind::edcnc_l},
                                 std::pair{PolicyKind::dcnc_q, PolicyKind::edcnc_q}}) {
        Controller a(ab.network, ab.services, ab.commodities, {plain, 20.0, 0.0, 1});
        Controller b(ab.network, ab.services, ab.commodities, {biased, 20.0, 0.0, 1});
        Decision da = Decision::idle(11, 28, ab.commodities.size()), db = da;
        for (int t = 0; t < 20; ++t) {
            Matrix Q(11, ab.commodities.size());
            for (Index i = 0; i < Q.size(); ++i)
                Q.data()[i] = qd(rng);
            a.decide(Q, da);
            b.decide(Q, db);
            CHECK(da.node_level == db.node_level);
            CHECK(da.edge_level == db.edge_level);
            CHECK(da.processing == db.processing);
            CHECK(da.transmission == db.transmission);
        }
    }
}

TEST_CASE("increasing V never adds active commodities under DCNC-L weights") {
    const auto ab = testing::abilene();
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> qd(0.0, 500.0);
    for (int t = 0; t < 30; ++t) {
        Matrix Q(11, ab.commodities.size());
        for (Index i = 0; i < Q.size(); ++i)
            Q.data()[i] = qd(rng);
        for (int i = 0; i < 11; ++i) {
            const Vector lo = processing_weights(ab.network, ab.commodities, Q, i, 10.0);
            const Vector hi = processing_weights(ab.network, ab.commodities, Q, i, 100.0);
            CHECK((hi.array() <= lo.array()).all());
            CHECK((hi.array() > 0.0).count() <= (lo.array() > 0.0).count());
        }
    }
}

TEST_CASE("randomized policy") {
    const Setup s = single(ResourceMenu::on_off(440, 110, 1), ResourceMenu::on_off(440, 440, 1));
    CapacityCertificate cert;
    cert.feasible = true;
    cert.nodes.resize(2);
    cert.edges.resize(1);
    for (auto* v : {&cert.nodes[0], &cert.nodes[1], &cert.edges[0]}) {
        v->alpha = {0.0, 0.0};
        v->beta = Matrix::Zero(2, 2);
    }
    std::mt19937_64 rng(1);

    // All mass on level 0.
    Decision d = randomized_decision(s.net, s.com, cert, rng);
    CHECK(d.processing.isZero());
    CHECK(d.node_level[0] == 0);

    cert.nodes[0].alpha[1] = 0.5;
    cert.nodes[0].beta(1, 0) = 1.0;
    const int T = 100000;
    double total = 0.0;
    for (int t = 0; t < T; ++t) {
        randomized_decision(s.net, s.com, cert, rng, d);
        total += d.processing(0, 0);
    }
    const double mean = total / T;
    const double sigma = 440.0 * 0.5 / std::sqrt(static_cast<double>(T));
    CHECK(std::abs(mean - 220.0) <= 3.0 * sigma);

    CapacityCertificate bad = cert;
    bad.nodes[0].alpha[1] = 1.5;
    CHECK_THROWS_AS(validate_schedule_probabilities(bad), ConfigError);
    bad = cert;
    bad.nodes[0].beta(1, 0) = -0.1;
    CHECK_THROWS_AS(validate_schedule_probabilities(bad), ConfigError);
    bad = cert;
    bad.nodes[0].beta(1, 1) = 0.5;
    CHECK_THROWS_AS(validate_schedule_probabilities(bad), ConfigError);
    CHECK_THROWS_AS(Controller(s.net, s.svc, s.com, {PolicyKind::randomized, 0, 0, 1}), ConfigError);
}

TEST_CASE("randomized policy from an interior certificate keeps queues rate stable") {
    const Setup s = single(ResourceMenu::on_off(10, 10, 1), ResourceMenu::on_off(10, 10, 1));
    const std::vector<Client> clients{{0, 1, 0}};
    const auto margin = max_margin(s.net, s.com, clients, Matrix::Zero(2, s.com.size()));
    const Matrix design = client_rates(s.net, s.com, clients, 0.75 * margin.kappa);
    const auto cert = min_cost(s.net, s.com, clients, design);
    REQUIRE(cert.feasible);
    Scenario sc = Scenario::make(s.net, s.svc, clients);
    ArrivalModel arr;
    arr.rates = client_rates(s.net, s.com, clients, 0.5 * margin.kappa);
    RunOptions opt;
    opt.slots = 100000;
    const Trace tr = run(sc, arr, {PolicyKind::randomized, 0, 0, 3}, opt, cert);
    CHECK(tr.final_backlog.maxCoeff() / static_cast<double>(opt.slots) < 1e-2);
    CHECK(tr.delivered > 0.95 * 0.5 * margin.kappa * static_cast<double>(opt.slots));
}
