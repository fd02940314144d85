// waterfill.hpp - Per-interface quadratic allocation used by the quadratic controller.
//
// For one interface and one resource level with capacity C, the allocation minimizes
//
//     sum_c [ a_c * mu_c^2 - mu_c * r_c * W_c ]   subject to   sum_c r_c * mu_c <= C, mu >= 0,
//
// with a_c = (1 + xi_c^2) / 2. Each commodity is a vessel of height W_c and width
// u_c = r_c^2 / (1 + xi_c^2); pouring "mercury" up to the threshold G leaves exactly C of water
// above it when the capacity binds, and the flow of c is r_c / (1 + xi_c^2) * [W_c - G]^+.
// A transmission interface is the special case r = xi = 1.
#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

namespace dcnc {

template <typename Scalar>
struct WaterfillCandidate {
    int commodity = 0;
    Scalar weight = 0;  // utility weight W (> 0)
    Scalar ratio = 1;   // r of the function applied to the flow
    Scalar scaling = 1; // xi of the function applied to the flow
};

template <typename Scalar>
struct WaterfillLevel {
    Scalar threshold = 0; // G
    std::size_t active = 0; // p: candidates 1..p may receive flow
    Scalar metric = 0;    // sum_c [a mu^2 - mu r W], without the setup term
};

/// Sorted candidate list with the prefix sums needed to solve any capacity in O(log J + p).
template <typename Scalar>
class Waterfill {
public:
    Waterfill() = default;

    /// Candidates with nonpositive weight are dropped; they never receive flow.
    void reset(std::vector<WaterfillCandidate<Scalar>> candidates) {
        cand_ = std::move(candidates);
        std::erase_if(cand_, [](const auto& c) { return !(c.weight > Scalar(0)); });
        std::stable_sort(cand_.begin(), cand_.end(),
                         [](const auto& a, const auto& b) { return a.weight > b.weight; });
        const std::size_t J = cand_.size();
        width_.resize(J);
        sum_u_.resize(J);
        sum_uw_.resize(J);
        fill_.resize(J);
        Scalar su = 0, suw = 0;
        for (std::size_t s = 0; s < J; ++s) {
            const auto& c = cand_[s];
            width_[s] = c.ratio * c.ratio / (Scalar(1) + c.scaling * c.scaling);
            su += width_[s];
            suw += width_[s] * c.weight;
            sum_u_[s] = su;
            sum_uw_[s] = suw;
        }
        // fill_[s] = H^{(s+1)} with W^{(J+1)} = 0.
        for (std::size_t s = 0; s < J; ++s) {
            const Scalar next_w = s + 1 < J ? cand_[s + 1].weight : Scalar(0);
            fill_[s] = sum_uw_[s] - next_w * sum_u_[s];
        }
    }

    std::size_t size() const { return cand_.size(); }
    const WaterfillCandidate<Scalar>& candidate(std::size_t s) const { return cand_[s]; }
    /// H^{(s+1)}: capacity consumed when the threshold sits at the (s+2)-th weight.
    Scalar fill_level(std::size_t s) const { return fill_[s]; }

    WaterfillLevel<Scalar> solve(Scalar capacity) const {
        WaterfillLevel<Scalar> out;
        const std::size_t J = cand_.size();
        if (J == 0)
            return out;
        if (!(capacity > Scalar(0))) {
            out.threshold = cand_.front().weight;
            out.active = 0;
            return out;
        }
        // p = smallest index with H^{(p)} > C, else J. H is nondecreasing.
        auto it = std::partition_point(fill_.begin(), fill_.end(), [&](Scalar h) { return !(h > capacity); });
        const std::size_t p = it == fill_.end() ? J : static_cast<std::size_t>(it - fill_.begin()) + 1;
        const Scalar g = (sum_uw_[p - 1] - capacity) / sum_u_[p - 1];
        out.threshold = g > Scalar(0) ? g : Scalar(0);
        out.active = p;
        for (std::size_t s = 0; s < p; ++s) {
            const Scalar mu = flow(s, out.threshold);
            const auto& c = cand_[s];
            out.metric += (Scalar(1) + c.scaling * c.scaling) / Scalar(2) * mu * mu - mu * c.ratio * c.weight;
        }
        return out;
    }

    /// Candidate flow of the s-th sorted candidate for threshold g.
    Scalar flow(std::size_t s, Scalar g) const {
        const auto& c = cand_[s];
        const Scalar gap = c.weight - g;
        return gap > Scalar(0) ? c.ratio / (Scalar(1) + c.scaling * c.scaling) * gap : Scalar(0);
    }

private:
    std::vector<WaterfillCandidate<Scalar>> cand_;
    std::vector<Scalar> width_;
    std::vector<Scalar> sum_u_;
    std::vector<Scalar> sum_uw_;
    std::vector<Scalar> fill_;
};

} // namespace dcnc
