#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mfa/partition.hpp"

namespace mfa {

struct SimilarityOptions {
    bool include_residual = true; // residual participates as one ordinary group
};

/// Dice coefficient of two member sets: 2|A and B| / (|A| + |B|).
/// Inputs must be sorted ascending and non-empty.
inline double sim_groups(std::span<const int32_t> a, std::span<const int32_t> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("sim_groups: empty member set");
    size_t i = 0, j = 0, common = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j])
            ++i;
        else if (b[j] < a[i])
            ++j;
        else {
            ++common;
            ++i;
            ++j;
        }
    }
    return 2.0 * static_cast<double>(common) /
           static_cast<double>(a.size() + b.size());
}

namespace detail {

/// For each group of `from`, the best Dice match among groups of `to`,
/// averaged. Only groups that intersect a given group can beat zero, so the
/// scan is restricted to those.
inline double sim_directed_impl(const std::vector<std::vector<int32_t>>& from,
                                const std::vector<std::vector<int32_t>>& to,
                                const std::vector<int32_t>& to_of_area) {
    if (from.empty() || to.empty()) return 0.0;
    double total = 0;
    std::unordered_map<int32_t, int32_t> overlap;
    for (const auto& g : from) {
        overlap.clear();
        for (int32_t member : g) {
            int32_t t = to_of_area[static_cast<size_t>(member)];
            if (t >= 0) ++overlap[t];
        }
        double best = 0;
        for (const auto& [t, common] : overlap) {
            double dice = 2.0 * common /
                          static_cast<double>(g.size() + to[static_cast<size_t>(t)].size());
            if (dice > best) best = dice;
        }
        total += best;
    }
    return total / static_cast<double>(from.size());
}

inline std::vector<int32_t> group_of_area(const Partition& p, bool include_residual,
                                          int32_t n_groups_with_residual) {
    std::vector<int32_t> out(static_cast<size_t>(p.size()), -1);
    bool has_residual = include_residual && p.residual_size() > 0;
    for (int32_t i = 0; i < p.size(); ++i) {
        int32_t a = p.assignment[static_cast<size_t>(i)];
        if (a != kResidual)
            out[static_cast<size_t>(i)] = a;
        else if (has_residual)
            out[static_cast<size_t>(i)] = n_groups_with_residual - 1;
    }
    return out;
}

} // namespace detail

/// Directed partition similarity: mean over groups of `from` of the best Dice
/// match in `to`. Returns 0 (with nothing to match) when either side has no
/// groups at all.
inline double sim_directed(const Partition& from, const Partition& to,
                           const SimilarityOptions& opts = {}) {
    require_same_universe(*from.universe, *to.universe, "sim_directed");
    auto gf = from.groups(opts.include_residual);
    auto gt = to.groups(opts.include_residual);
    auto to_of = detail::group_of_area(to, opts.include_residual,
                                       static_cast<int32_t>(gt.size()));
    return detail::sim_directed_impl(gf, gt, to_of);
}

/// Symmetric similarity: mean of the two directed scores. In [0, 1]; equals 1
/// exactly when the partitions coincide.
inline double sim_symmetric(const Partition& a, const Partition& b,
                            const SimilarityOptions& opts = {}) {
    return 0.5 * (sim_directed(a, b, opts) + sim_directed(b, a, opts));
}

/// Full pairwise symmetric-similarity matrix, row/column order = input order.
struct SimilarityMatrix {
    std::vector<std::string> labels;
    std::vector<double> values; // row-major, size n*n

    double at(size_t i, size_t j) const { return values[i * labels.size() + j]; }
};

inline SimilarityMatrix similarity_matrix(const std::vector<Partition>& parts,
                                          const SimilarityOptions& opts = {}) {
    SimilarityMatrix out;
    size_t n = parts.size();
    out.labels.reserve(n);
    for (const auto& p : parts) out.labels.push_back(p.label);
    out.values.assign(n * n, 1.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            double s = sim_symmetric(parts[i], parts[j], opts);
            out.values[i * n + j] = s;
            out.values[j * n + i] = s;
        }
    return out;
}

/// One point of the weekly-rhythm series: a day scored against the first
/// occurrence of the same weekday in the input.
struct IntraweekPoint {
    Date date;
    int weekday; // 0 = Monday
    double score;
};

inline std::vector<IntraweekPoint> intraweek_series(
    const std::vector<Partition>& parts, const SimilarityOptions& opts = {}) {
    std::vector<const Partition*> first(7, nullptr);
    std::vector<IntraweekPoint> out;
    out.reserve(parts.size());
    for (const auto& p : parts) {
        if (!p.date)
            throw std::invalid_argument("intraweek_series needs dated partitions");
        int wd = weekday(*p.date);
        const Partition*& anchor = first[static_cast<size_t>(wd)];
        if (anchor == nullptr) anchor = &p;
        out.push_back({*p.date, wd, sim_symmetric(*anchor, p, opts)});
    }
    return out;
}

/// Similarity of each partition against the administrative reference,
/// labeled by the partition's label.
inline std::vector<std::pair<std::string, double>> compare_to_admin(
    const std::vector<Partition>& parts, const Partition& admin,
    const SimilarityOptions& opts = {}) {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(parts.size());
    for (const auto& p : parts)
        out.emplace_back(p.label, sim_symmetric(p, admin, opts));
    return out;
}

} // namespace mfa
