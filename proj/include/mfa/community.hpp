#pragma once

#include <string>
#include <vector>

#include "mfa/graph.hpp"
#include "mfa/odm.hpp"
#include "mfa/parallel.hpp"
#include "mfa/partition.hpp"
#include "mfa/walktrap.hpp"

namespace mfa {

struct MfaParams {
    double threshold = 0.15;      // strict variant uses 0.30
    int walk_length = 4;
    bool include_diagonal = true; // diagonal in the normalization denominator
};

struct DailyMfaResult {
    Partition partition;
    double modularity = 0; // at the chosen cut; 0 for an edgeless day
    int32_t n_groups = 0;
    int32_t n_residual = 0;
};

/// One day of the pipeline: normalize -> threshold -> symmetrize -> walktrap
/// -> max-modularity cut -> collapse singleton groups into the residual.
inline DailyMfaResult daily_mfa_detail(const DailyOdm& odm, const MfaParams& params = {}) {
    NormalizedOdm norm = normalize(odm, {params.include_diagonal});
    AdjacencyMatrix adj = symmetrize(threshold(norm, params.threshold));
    MobilityGraph graph = build_graph(adj);
    Dendrogram dendro = walktrap(graph, params.walk_length);
    Partition cut = cut_at_max_modularity(dendro, to_string(odm.date), odm.date);
    DailyMfaResult result;
    result.partition = collapse_singletons(cut);
    result.modularity =
        graph.total_weight > 0 ? modularity(graph, result.partition) : 0.0;
    result.n_groups = result.partition.num_groups;
    result.n_residual = result.partition.residual_size();
    return result;
}

inline std::vector<DailyMfaResult> daily_mfa_details(const std::vector<DailyOdm>& days,
                                                     const MfaParams& params = {},
                                                     int jobs = 1) {
    std::vector<DailyMfaResult> out(days.size());
    parallel_for(days.size(), jobs,
                 [&](size_t i) { out[i] = daily_mfa_detail(days[i], params); });
    return out;
}

/// Daily MFA partitions, one per input day, in date order.
inline std::vector<Partition> daily_mfas(const std::vector<DailyOdm>& days,
                                         const MfaParams& params = {}, int jobs = 1) {
    auto details = daily_mfa_details(days, params, jobs);
    std::vector<Partition> out;
    out.reserve(details.size());
    for (auto& d : details) out.push_back(std::move(d.partition));
    return out;
}

} // namespace mfa
