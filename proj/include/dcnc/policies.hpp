// policies.hpp - Per-slot decision rules.
//
// Every rule reads only the slot-start backlog view and fills one node's or one link's part
// of a Decision. DCNC-L activates the single best commodity at the best level; DCNC-Q spreads
// each candidate level across commodities by waterfilling and keeps the level with the lowest
// quadratic metric. The E-variants run the same rules on the STPD-biased view.
#pragma once

#include "dcnc/capacity.hpp"
#include "dcnc/model.hpp"
#include "dcnc/queueing.hpp"
#include "dcnc/waterfill.hpp"

#include <optional>
#include <random>
#include <string>

namespace dcnc {

enum class PolicyKind { dcnc_l, dcnc_q, edcnc_l, edcnc_q, randomized };

std::string to_string(PolicyKind kind);
/// Accepts dcnc-l, dcnc-q, edcnc-l, edcnc-q, randomized (case-insensitive, '_' or '-').
PolicyKind parse_policy_kind(const std::string& text);

inline bool is_biased(PolicyKind k) { return k == PolicyKind::edcnc_l || k == PolicyKind::edcnc_q; }
inline bool is_quadratic(PolicyKind k) { return k == PolicyKind::dcnc_q || k == PolicyKind::edcnc_q; }

struct PolicyConfig {
    PolicyKind kind = PolicyKind::dcnc_l;
    double V = 0.0;
    double eta = 0.0;
    std::uint64_t seed = 1;

    void validate() const;

    friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

/// Processing utility weights of node i for every commodity (0 where not processable).
void processing_weights(const CloudNetwork& network, const CommodityIndex& commodities, const Matrix& view,
                        int node, double V, Eigen::Ref<Vector> out);
Vector processing_weights(const CloudNetwork& network, const CommodityIndex& commodities, const Matrix& view,
                          int node, double V);

/// Transmission utility weights of edge e for every commodity.
void transmission_weights(const CloudNetwork& network, const Matrix& view, int edge, double V,
                          Eigen::Ref<Vector> out);
Vector transmission_weights(const CloudNetwork& network, const Matrix& view, int edge, double V);

/// Result of a max-weight choice: the level, the commodity (-1 if idle) and the score C_k W* - V w_k.
struct MaxWeightChoice {
    int level = 0;
    int commodity = -1;
    double score = 0.0;
};

/// Max-weight level and commodity for one interface given its weights.
MaxWeightChoice max_weight_choice(const ResourceMenu& menu, const Vector& weights, double V);

void dcnc_l_node(const CloudNetwork& network, const CommodityIndex& commodities, const Matrix& view, int node,
                 double V, Decision& out);
void dcnc_l_link(const CloudNetwork& network, const CommodityIndex& commodities, const Matrix& view, int edge,
                 double V, Decision& out);

/// Level chosen by the quadratic rule and its metric Psi.
struct QuadraticChoice {
    int level = 0;
    double psi = 0.0;
    double threshold = 0.0;
};

QuadraticChoice dcnc_q_node(const CloudNetwork& network, const CommodityIndex& commodities, const Matrix& view,
                            int node, double V, Decision& out, Waterfill<double>* scratch = nullptr);
QuadraticChoice dcnc_q_link(const CloudNetwork& network, const CommodityIndex& commodities, const Matrix& view,
                            int edge, double V, Decision& out, Waterfill<double>* scratch = nullptr);

/// Throws ConfigError if any alpha / beta is negative or sums above 1 + 1e-9.
void validate_schedule_probabilities(const CapacityCertificate& cert);

/// One sample of the stationary randomized policy described by the certificate.
void randomized_decision(const CloudNetwork& network, const CommodityIndex& commodities,
                         const CapacityCertificate& cert, std::mt19937_64& rng, Decision& out);
Decision randomized_decision(const CloudNetwork& network, const CommodityIndex& commodities,
                             const CapacityCertificate& cert, std::mt19937_64& rng);

/// Stateful wrapper applying one policy to the whole network every slot.
class Controller {
public:
    Controller(const CloudNetwork& network, const std::vector<ServiceSpec>& services,
               const CommodityIndex& commodities, PolicyConfig config,
               std::optional<CapacityCertificate> certificate = std::nullopt);

    /// Overwrites `out` with the decision for the given slot-start backlog.
    void decide(const Matrix& backlog, Decision& out);

    const PolicyConfig& config() const { return config_; }
    /// The backlog view used by the last decision (biased for E-variants).
    const Matrix& view() const { return view_; }

private:
    const CloudNetwork* network_;
    const CommodityIndex* commodities_;
    PolicyConfig config_;
    std::optional<BiasTable> bias_;
    std::optional<CapacityCertificate> certificate_;
    std::mt19937_64 rng_;
    Matrix view_;
    Waterfill<double> scratch_;
};

} // namespace dcnc
