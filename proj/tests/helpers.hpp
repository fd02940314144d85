#pragma once

#include "dcnc/config.hpp"
#include "dcnc/engine.hpp"
#include "dcnc/model.hpp"

#include <random>
#include <vector>

namespace testing {

using namespace dcnc;

// Directed line 0 -> 1 -> ... -> n-1 with identical menus.
inline CloudNetwork line_network(int n, ResourceMenu node_menu, ResourceMenu link_menu, bool both_ways = false) {
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < n; ++i) {
        edges.push_back({i, i + 1});
        if (both_ways)
            edges.push_back({i + 1, i});
    }
    std::vector<ResourceMenu> proc(static_cast<std::size_t>(n), node_menu);
    std::vector<ResourceMenu> tran(edges.size(), link_menu);
    return CloudNetwork(n, std::move(edges), std::move(proc), std::move(tran));
}

inline ResourceMenu random_menu(std::mt19937_64& rng, int max_levels) {
    std::uniform_int_distribution<int> kd(1, max_levels);
    std::uniform_real_distribution<double> step(0.0, 5.0);
    ResourceMenu m;
    const int K = kd(rng);
    double cap = 0.0, w = 0.0;
    for (int k = 1; k <= K; ++k) {
        cap += step(rng);
        w += step(rng);
        m.levels.push_back({cap, w});
    }
    m.unit_cost = step(rng) / 5.0;
    return m;
}

// Random strongly connected network: a bidirectional ring plus random chords.
inline CloudNetwork random_network(std::mt19937_64& rng, int n, int max_levels) {
    std::vector<Edge> edges;
    for (int i = 0; i < n && n > 1; ++i) {
        const int j = (i + 1) % n;
        if (n == 2 && i == 1)
            break;
        edges.push_back({i, j});
        edges.push_back({j, i});
    }
    std::uniform_int_distribution<int> nd(0, n - 1);
    for (int extra = 0; extra < n; ++extra) {
        const int a = nd(rng), b = nd(rng);
        bool dup = a == b;
        for (const Edge& e : edges)
            dup = dup || (e.from == a && e.to == b);
        if (!dup)
            edges.push_back({a, b});
    }
    std::vector<ResourceMenu> proc, tran;
    for (int i = 0; i < n; ++i)
        proc.push_back(random_menu(rng, max_levels));
    for (std::size_t e = 0; e < edges.size(); ++e)
        tran.push_back(random_menu(rng, max_levels));
    return CloudNetwork(n, std::move(edges), std::move(proc), std::move(tran));
}

inline std::vector<ServiceSpec> random_services(std::mt19937_64& rng, int count, int max_functions) {
    std::uniform_int_distribution<int> md(1, max_functions);
    std::uniform_real_distribution<double> xi(0.2, 3.0), r(0.5, 2.0);
    std::vector<ServiceSpec> out;
    for (int s = 0; s < count; ++s) {
        ServiceSpec spec;
        const int M = md(rng);
        for (int m = 0; m < M; ++m)
            spec.functions.push_back({xi(rng), r(rng), {}});
        out.push_back(spec);
    }
    return out;
}

inline Scenario abilene(bool multilevel = false) {
    return Scenario::make(abilene_network(multilevel), abilene_services(), all_pairs_clients(11, 2));
}

} // namespace testing
