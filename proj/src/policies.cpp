#include "dcnc/policies.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace dcnc {

std::string to_string(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::dcnc_l: return "dcnc-l";
    case PolicyKind::dcnc_q: return "dcnc-q";
    case PolicyKind::edcnc_l: return "edcnc-l";
    case PolicyKind::edcnc_q: return "edcnc-q";
    case PolicyKind::randomized: return "randomized";
    }
    return "unknown";
}

PolicyKind parse_policy_kind(const std::string& text) {
    std::string s;
    for (char ch : text)
        s.push_back(ch == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    for (PolicyKind k : {PolicyKind::dcnc_l, PolicyKind::dcnc_q, PolicyKind::edcnc_l, PolicyKind::edcnc_q,
                         PolicyKind::randomized})
        if (s == to_string(k))
            return k;
    throw ConfigError("unknown policy '" + text + "'");
}

void PolicyConfig::validate() const {
    if (!std::isfinite(V) || V < 0.0)
        throw ConfigError("V must be finite and nonnegative");
    if (!std::isfinite(eta) || eta < 0.0)
        throw ConfigError("eta must be finite and nonnegative");
}

void processing_weights(const CloudNetwork& network, const CommodityIndex& commodities, const Matrix& view,
                        int node, double V, Eigen::Ref<Vector> out) {
    const double ve = V * network.processing(node).unit_cost;
    const auto q = view.row(node);
    for (int c = 0; c < commodities.size(); ++c) {
        if (commodities.is_final(c) || !commodities.hostable(node, c)) {
            out(c) = 0.0;
            continue;
        }
        const double w = (q(c) - commodities.next_scaling(c) * q(commodities.next(c))) / commodities.next_ratio(c) - ve;
        out(c) = w > 0.0 ? w : 0.0;
    }
}

Vector processing_weights(const CloudNetwork& network, const CommodityIndex& commodities, const Matrix& view,
                          int node, double V) {
    Vector w(commodities.size());
    processing_weights(network, commodities, view, node, V, w);
    return w;
}

void transmission_weights(const CloudNetwork& network, const Matrix& view, int edge, double V,
                          Eigen::Ref<Vector> out) {
    const Edge& ed = network.edge(edge);
    const double ve = V * network.transmission(edge).unit_cost;
    out = (view.row(ed.from) - view.row(ed.to)).transpose().array() - ve;
    out = out.cwiseMax(0.0);
}

Vector transmission_weights(const CloudNetwork& network, const Matrix& view, int edge, double V) {
    Vector w(view.cols());
    transmission_weights(network, view, edge, V, w);
    return w;
}

MaxWeightChoice max_weight_choice(const ResourceMenu& menu, const Vector& weights, double V) {
    MaxWeightChoice best;
    double wstar = 0.0;
    for (Index c = 0; c < weights.size(); ++c)
        if (weights(c) > wstar) {
            wstar = weights(c);
            best.commodity = static_cast<int>(c);
        }
    if (best.commodity < 0)
        return best;
    for (int k = 1; k <= menu.max_level(); ++k) {
        const auto& lvl = menu.levels[static_cast<std::size_t>(k)];
        const double score = lvl.capacity * wstar - V * lvl.setup_cost;
        if (score > best.score) {
            best.score = score;
            best.level = k;
        }
    }
    if (best.level == 0 || menu.levels[static_cast<std::size_t>(best.level)].capacity <= 0.0)
        best.commodity = -1;
    return best;
}

void dcnc_l_node(const CloudNetwork& network, const CommodityIndex& commodities, const Matrix& view, int node,
                 double V, Decision& out) {
    const Vector w = processing_weights(network, commodities, view, node, V);
    const auto& menu = network.processing(node);
    const MaxWeightChoice ch = max_weight_choice(menu, w, V);
    out.node_level[static_cast<std::size_t>(node)] = ch.level;
    out.processing.row(node).setZero();
    if (ch.commodity >= 0)
        out.processing(node, ch.commodity) =
            menu.levels[static_cast<std::size_t>(ch.level)].capacity / commodities.next_ratio(ch.commodity);
}

void dcnc_l_link(const CloudNetwork& network, const CommodityIndex& commodities, const Matrix& view, int edge,
                 double V, Decision& out) {
    (void)commodities;
    const Vector w = transmission_weights(network, view, edge, V);
    const auto& menu = network.transmission(edge);
    const MaxWeightChoice ch = max_weight_choice(menu, w, V);
    out.edge_level[static_cast<std::size_t>(edge)] = ch.level;
    out.transmission.row(edge).setZero();
    if (ch.commodity >= 0)
        out.transmission(edge, ch.commodity) = menu.levels[static_cast<std::size_t>(ch.level)].capacity;
}

namespace {

QuadraticChoice choose_quadratic(const ResourceMenu& menu, const Waterfill<double>& wf, double V,
                                 Eigen::Ref<Vector> flows) {
    QuadraticChoice best; // level 0: nothing served, Psi = V w_0 = 0
    WaterfillLevel<double> chosen;
    for (int k = 1; k <= menu.max_level(); ++k) {
        const auto& lvl = menu.levels[static_cast<std::size_t>(k)];
        const WaterfillLevel<double> s = wf.solve(lvl.capacity);
        const double psi = s.metric + V * lvl.setup_cost;
        if (psi < best.psi) {
            best.psi = psi;
            best.level = k;
            best.threshold = s.threshold;
            chosen = s;
        }
    }
    flows.setZero();
    for (std::size_t s = 0; s < chosen.active; ++s)
        flows(wf.candidate(s).commodity) = wf.flow(s, chosen.threshold);
    return best;
}

} // namespace

QuadraticChoice dcnc_q_node(const CloudNetwork& network, const CommodityIndex& commodities, const Matrix& view,
                            int node, double V, Decision& out, Waterfill<double>* scratch) {
    Waterfill<double> local;
    Waterfill<double>& wf = scratch ? *scratch : local;
    const Vector w = processing_weights(network, commodities, view, node, V);
    std::vector<WaterfillCandidate<double>> cand;
    for (int c = 0; c < commodities.size(); ++c)
        if (w(c) > 0.0)
            cand.push_back({c, w(c), commodities.next_ratio(c), commodities.next_scaling(c)});
    wf.reset(std::move(cand));
    const QuadraticChoice ch = choose_quadratic(network.processing(node), wf, V, out.processing.row(node).transpose());
    out.node_level[static_cast<std::size_t>(node)] = ch.level;
    return ch;
}

QuadraticChoice dcnc_q_link(const CloudNetwork& network, const CommodityIndex& commodities, const Matrix& view,
                            int edge, double V, Decision& out, Waterfill<double>* scratch) {
    Waterfill<double> local;
    Waterfill<double>& wf = scratch ? *scratch : local;
    const Vector w = transmission_weights(network, view, edge, V);
    std::vector<WaterfillCandidate<double>> cand;
    for (int c = 0; c < commodities.size(); ++c)
        if (w(c) > 0.0)
            cand.push_back({c, w(c), 1.0, 1.0});
    wf.reset(std::move(cand));
    const QuadraticChoice ch =
        choose_quadratic(network.transmission(edge), wf, V, out.transmission.row(edge).transpose());
    out.edge_level[static_cast<std::size_t>(edge)] = ch.level;
    return ch;
}

void validate_schedule_probabilities(const CapacityCertificate& cert) {
    constexpr double tol = 1e-9;
    auto check = [](const InterfaceSchedule& s, const std::string& name) {
        double total = 0.0;
        for (std::size_t k = 0; k < s.alpha.size(); ++k) {
            if (!(s.alpha[k] >= 0.0))
                throw ConfigError(name + ": negative level probability");
            if (k > 0)
                total += s.alpha[k];
        }
        if (total > 1.0 + tol)
            throw ConfigError(name + ": level probabilities sum above 1");
        if (s.beta.rows() != static_cast<Index>(s.alpha.size()))
            throw ConfigError(name + ": schedule shape mismatch");
        for (Index k = 0; k < s.beta.rows(); ++k) {
            if (!(s.beta.row(k).array() >= 0.0).all())
                throw ConfigError(name + ": negative commodity probability");
            if (s.beta.row(k).sum() > 1.0 + tol)
                throw ConfigError(name + ": commodity probabilities sum above 1");
        }
    };
    if (!cert.feasible)
        throw ConfigError("certificate is not feasible");
    for (std::size_t i = 0; i < cert.nodes.size(); ++i)
        check(cert.nodes[i], "node " + std::to_string(i + 1));
    for (std::size_t e = 0; e < cert.edges.size(); ++e)
        check(cert.edges[e], "edge " + std::to_string(e + 1));
}

namespace {

// Samples level k with probability alpha_k, then commodity c with probability beta_k^c.
// Returns (level, commodity), with level 0 or commodity -1 for idle.
std::pair<int, int> sample_schedule(const InterfaceSchedule& s, std::mt19937_64& rng) {
    const double u = std::generate_canonical<double, 53>(rng);
    const double v = std::generate_canonical<double, 53>(rng);
    double acc = 0.0;
    for (std::size_t k = 1; k < s.alpha.size(); ++k) {
        acc += s.alpha[k];
        if (u < acc) {
            double bacc = 0.0;
            for (Index c = 0; c < s.beta.cols(); ++c) {
                bacc += s.beta(static_cast<Index>(k), c);
                if (v < bacc)
                    return {static_cast<int>(k), static_cast<int>(c)};
            }
            return {static_cast<int>(k), -1};
        }
    }
    return {0, -1};
}

} // namespace

void randomized_decision(const CloudNetwork& network, const CommodityIndex& commodities,
                         const CapacityCertificate& cert, std::mt19937_64& rng, Decision& out) {
    if (cert.nodes.size() != static_cast<std::size_t>(network.node_count()) ||
        cert.edges.size() != static_cast<std::size_t>(network.edge_count()))
        throw ConfigError("certificate does not match the network");
    out.clear();
    for (int i = 0; i < network.node_count(); ++i) {
        const auto [k, c] = sample_schedule(cert.nodes[static_cast<std::size_t>(i)], rng);
        out.node_level[static_cast<std::size_t>(i)] = k;
        if (c >= 0)
            out.processing(i, c) = network.processing(i).levels[static_cast<std::size_t>(k)].capacity /
                                   commodities.next_ratio(c);
    }
    for (int e = 0; e < network.edge_count(); ++e) {
        const auto [k, c] = sample_schedule(cert.edges[static_cast<std::size_t>(e)], rng);
        out.edge_level[static_cast<std::size_t>(e)] = k;
        if (c >= 0)
            out.transmission(e, c) = network.transmission(e).levels[static_cast<std::size_t>(k)].capacity;
    }
}

Decision randomized_decision(const CloudNetwork& network, const CommodityIndex& commodities,
                             const CapacityCertificate& cert, std::mt19937_64& rng) {
    Decision d = Decision::idle(network.node_count(), network.edge_count(), commodities.size());
    randomized_decision(network, commodities, cert, rng, d);
    return d;
}

Controller::Controller(const CloudNetwork& network, const std::vector<ServiceSpec>& services,
                       const CommodityIndex& commodities, PolicyConfig config,
                       std::optional<CapacityCertificate> certificate)
    : network_(&network), commodities_(&commodities), config_(config), certificate_(std::move(certificate)),
      rng_(config.seed) {
    config_.validate();
    if (is_biased(config_.kind))
        bias_ = stpd_bias(network, services, commodities, config_.eta);
    if (config_.kind == PolicyKind::randomized) {
        if (!certificate_)
            throw ConfigError("the randomized policy needs a capacity certificate");
        validate_schedule_probabilities(*certificate_);
    }
}

void Controller::decide(const Matrix& backlog, Decision& out) {
    const CloudNetwork& net = *network_;
    const CommodityIndex& com = *commodities_;
    if (config_.kind == PolicyKind::randomized) {
        view_ = backlog;
        randomized_decision(net, com, *certificate_, rng_, out);
        return;
    }
    view_ = bias_ ? bias_->biased(backlog) : backlog;
    const double V = config_.V;
    if (is_quadratic(config_.kind)) {
        for (int i = 0; i < net.node_count(); ++i)
            dcnc_q_node(net, com, view_, i, V, out, &scratch_);
        for (int e = 0; e < net.edge_count(); ++e)
            dcnc_q_link(net, com, view_, e, V, out, &scratch_);
    } else {
        for (int i = 0; i < net.node_count(); ++i)
            dcnc_l_node(net, com, view_, i, V, out);
        for (int e = 0; e < net.edge_count(); ++e)
            dcnc_l_link(net, com, view_, e, V, out);
    }
}

} // namespace dcnc
