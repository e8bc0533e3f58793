#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mfa/odm.hpp"
#include "mfa/partition.hpp"
#include "mfa/sparse.hpp"
#include "mfa/universe.hpp"

namespace mfa {

/// Weighted undirected graph over the area universe. Vertices with zero
/// strength are isolated; they never enter community detection.
struct MobilityGraph {
    struct Edge {
        int32_t a, b; // a < b
        double w;
    };

    UniversePtr universe;
    std::vector<Edge> edges;
    std::vector<std::vector<std::pair<int32_t, double>>> adjacency; // both directions
    std::vector<double> strength; // weighted degree
    double total_weight = 0;      // sum of edge weights (m)

    int32_t size() const { return universe ? universe->size() : 0; }

    std::vector<int32_t> isolated() const {
        std::vector<int32_t> out;
        for (int32_t i = 0; i < size(); ++i)
            if (strength[static_cast<size_t>(i)] == 0) out.push_back(i);
        return out;
    }
};

/// Builds the graph from a symmetric adjacency matrix with zero diagonal.
inline MobilityGraph build_graph(const AdjacencyMatrix& adj) {
    MobilityGraph g;
    g.universe = adj.universe;
    int32_t n = g.size();
    g.adjacency.resize(static_cast<size_t>(n));
    g.strength.assign(static_cast<size_t>(n), 0.0);
    for (int32_t i = 0; i < n; ++i) {
        for (const auto& [j, w] : adj.weights.row(i)) {
            if (j == i) throw std::invalid_argument("adjacency has nonzero diagonal");
            if (w <= 0) throw std::invalid_argument("adjacency has non-positive weight");
            if (adj.weights.at(j, i) != w)
                throw std::invalid_argument("adjacency is not symmetric");
            g.adjacency[static_cast<size_t>(i)].emplace_back(j, w);
            g.strength[static_cast<size_t>(i)] += w;
            if (i < j) {
                g.edges.push_back({i, j, w});
                g.total_weight += w;
            }
        }
    }
    return g;
}

/// Newman weighted modularity. Residual members count as one community each.
inline double modularity(const MobilityGraph& g, const Partition& p) {
    require_same_universe(*g.universe, *p.universe, "modularity");
    double m = g.total_weight;
    if (m <= 0) throw std::invalid_argument("modularity undefined for empty graph");

    // Community key per vertex: proper groups share ids, residual vertices
    // are singletons keyed past the proper range.
    std::vector<int32_t> key(static_cast<size_t>(p.size()));
    int32_t next = p.num_groups;
    for (int32_t i = 0; i < p.size(); ++i) {
        int32_t a = p.assignment[static_cast<size_t>(i)];
        key[static_cast<size_t>(i)] = (a == kResidual) ? next++ : a;
    }
    std::vector<double> in(static_cast<size_t>(next), 0.0);
    std::vector<double> tot(static_cast<size_t>(next), 0.0);
    for (const auto& e : g.edges)
        if (key[static_cast<size_t>(e.a)] == key[static_cast<size_t>(e.b)])
            in[static_cast<size_t>(key[static_cast<size_t>(e.a)])] += e.w;
    for (int32_t i = 0; i < p.size(); ++i)
        tot[static_cast<size_t>(key[static_cast<size_t>(i)])] +=
            g.strength[static_cast<size_t>(i)];

    double q = 0;
    for (size_t c = 0; c < in.size(); ++c) {
        double frac = tot[c] / (2.0 * m);
        q += in[c] / m - frac * frac;
    }
    return q;
}

} // namespace mfa
