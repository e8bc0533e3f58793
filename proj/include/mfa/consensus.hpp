#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mfa/graph.hpp"
#include "mfa/odm.hpp"
#include "mfa/partition.hpp"
#include "mfa/walktrap.hpp"

namespace mfa {

struct ConsensusOptions {
    bool residual_co_membership = false; // count shared residual days as "together"
};

/// Co-association counts over an ensemble of partitions: for each unordered
/// area pair, on how many days they share a group. Counts are integers, so
/// frequencies are exact multiples of 1 / ensemble_size.
struct CoAssociation {
    UniversePtr universe;
    int32_t ensemble_size = 0;
    // upper triangle only: per row i, sorted (j > i, count)
    std::vector<std::vector<std::pair<int32_t, int32_t>>> counts;

    int32_t count(int32_t i, int32_t j) const {
        if (i == j) return ensemble_size;
        if (i > j) std::swap(i, j);
        for (const auto& [col, c] : counts[static_cast<size_t>(i)])
            if (col == j) return c;
        return 0;
    }

    double frequency(int32_t i, int32_t j) const {
        return static_cast<double>(count(i, j)) / static_cast<double>(ensemble_size);
    }
};

inline CoAssociation co_association(const std::vector<Partition>& parts,
                                    const ConsensusOptions& opts = {}) {
    if (parts.empty()) throw std::invalid_argument("co_association: empty ensemble");
    for (const auto& p : parts)
        require_same_universe(*parts.front().universe, *p.universe, "co_association");

    std::unordered_map<uint64_t, int32_t> tally;
    for (const auto& p : parts) {
        for (const auto& group : p.groups(opts.residual_co_membership)) {
            for (size_t a = 0; a < group.size(); ++a)
                for (size_t b = a + 1; b < group.size(); ++b) {
                    uint64_t key = (static_cast<uint64_t>(group[a]) << 32) |
                                   static_cast<uint32_t>(group[b]);
                    ++tally[key];
                }
        }
    }

    CoAssociation out;
    out.universe = parts.front().universe;
    out.ensemble_size = static_cast<int32_t>(parts.size());
    out.counts.resize(static_cast<size_t>(out.universe->size()));
    for (const auto& [key, c] : tally) {
        int32_t i = static_cast<int32_t>(key >> 32);
        int32_t j = static_cast<int32_t>(key & 0xffffffffu);
        out.counts[static_cast<size_t>(i)].emplace_back(j, c);
    }
    for (auto& row : out.counts)
        std::sort(row.begin(), row.end());
    return out;
}

/// Thresholds co-association frequencies at `cut` (kept when frequency >= cut)
/// into a 0/1 symmetric adjacency with zero diagonal.
inline AdjacencyMatrix binarize(const CoAssociation& co, double cut = 0.5) {
    if (!(cut > 0.0 && cut <= 1.0))
        throw std::invalid_argument("consensus cut must lie in (0, 1]");
    AdjacencyMatrix out{Date{0}, co.universe, SparseRows(co.universe->size())};
    for (size_t i = 0; i < co.counts.size(); ++i)
        for (const auto& [j, c] : co.counts[i]) {
            if (static_cast<double>(c) / co.ensemble_size >= cut) {
                out.weights.add(static_cast<int32_t>(i), j, 1.0);
                out.weights.add(j, static_cast<int32_t>(i), 1.0);
            }
        }
    out.weights.finalize();
    return out;
}

/// Persistent groups: walktrap at unit weights on the binarized co-association
/// graph, cut at maximal modularity, singletons collapsed into the residual.
inline Partition persistent_mfas(const std::vector<Partition>& parts, double cut = 0.5,
                                 int walk_length = 4, std::string label = "persistent",
                                 const ConsensusOptions& opts = {}) {
    AdjacencyMatrix adj = binarize(co_association(parts, opts), cut);
    MobilityGraph graph = build_graph(adj);
    Dendrogram dendro = walktrap(graph, walk_length);
    return collapse_singletons(cut_at_max_modularity(dendro, std::move(label)));
}

} // namespace mfa
