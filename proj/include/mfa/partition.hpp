#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfa/date.hpp"
#include "mfa/universe.hpp"

namespace mfa {

/// Assignment value for areas that belong to no proper group.
inline constexpr int32_t kResidual = -1;

/// Grouping of the universe into proper groups 0..num_groups-1 plus a
/// (possibly empty) residual. Group ids are dense and ordered by each
/// group's smallest member index, which makes equal partitions identical.
struct Partition {
    std::string label;
    std::optional<Date> date;
    UniversePtr universe;
    std::vector<int32_t> assignment; // one entry per area: kResidual or group id
    int32_t num_groups = 0;

    int32_t size() const { return static_cast<int32_t>(assignment.size()); }

    std::vector<int32_t> group_sizes() const {
        std::vector<int32_t> sizes(static_cast<size_t>(num_groups), 0);
        for (int32_t a : assignment)
            if (a != kResidual) ++sizes[static_cast<size_t>(a)];
        return sizes;
    }

    int32_t residual_size() const {
        int32_t n = 0;
        for (int32_t a : assignment) n += (a == kResidual);
        return n;
    }

    std::vector<int32_t> residual_members() const {
        std::vector<int32_t> out;
        for (int32_t i = 0; i < size(); ++i)
            if (assignment[static_cast<size_t>(i)] == kResidual) out.push_back(i);
        return out;
    }

    /// Sorted member lists for each proper group; optionally the residual
    /// appended as one extra group (only when non-empty).
    std::vector<std::vector<int32_t>> groups(bool include_residual = false) const {
        std::vector<std::vector<int32_t>> out(static_cast<size_t>(num_groups));
        std::vector<int32_t> residual;
        for (int32_t i = 0; i < size(); ++i) {
            int32_t a = assignment[static_cast<size_t>(i)];
            if (a == kResidual)
                residual.push_back(i);
            else
                out[static_cast<size_t>(a)].push_back(i);
        }
        if (include_residual && !residual.empty()) out.push_back(std::move(residual));
        return out;
    }
};

/// Canonical partition from member lists: groups are renumbered by their
/// smallest member; every area not covered by a group falls into the residual.
inline Partition partition_from_groups(UniversePtr universe,
                                       std::vector<std::vector<int32_t>> groups,
                                       std::string label = {},
                                       std::optional<Date> date = {}) {
    Partition p;
    p.label = std::move(label);
    p.date = date;
    p.universe = std::move(universe);
    p.assignment.assign(static_cast<size_t>(p.universe->size()), kResidual);
    std::sort(groups.begin(), groups.end(),
              [](const std::vector<int32_t>& a, const std::vector<int32_t>& b) {
                  if (a.empty() || b.empty()) return b.empty() && !a.empty();
                  return a.front() < b.front();
              });
    for (auto& g : groups) {
        if (g.empty()) continue;
        std::sort(g.begin(), g.end());
        for (int32_t m : g) {
            if (m < 0 || m >= p.universe->size())
                throw std::invalid_argument("group member out of range");
            if (p.assignment[static_cast<size_t>(m)] != kResidual)
                throw std::invalid_argument("area assigned to two groups");
            p.assignment[static_cast<size_t>(m)] = p.num_groups;
        }
        ++p.num_groups;
    }
    return p;
}

/// Renumbers group ids into the canonical dense order (smallest member first).
inline Partition canonicalize(const Partition& p) {
    return partition_from_groups(p.universe, p.groups(false), p.label, p.date);
}

/// Moves every single-member group into the residual and renumbers the rest.
inline Partition collapse_singletons(const Partition& p) {
    auto groups = p.groups(false);
    std::vector<std::vector<int32_t>> keep;
    keep.reserve(groups.size());
    for (auto& g : groups)
        if (g.size() >= 2) keep.push_back(std::move(g));
    return partition_from_groups(p.universe, std::move(keep), p.label, p.date);
}

/// Structural checks; optionally requires every proper group to have >= 2 members.
inline void validate(const Partition& p, bool require_min_size2 = false) {
    if (!p.universe) throw std::invalid_argument("partition without universe");
    if (p.size() != p.universe->size())
        throw std::invalid_argument("assignment length != universe size");
    auto sizes = p.group_sizes();
    for (int32_t a : p.assignment)
        if (a != kResidual && (a < 0 || a >= p.num_groups))
            throw std::invalid_argument("group id out of range");
    for (size_t g = 0; g < sizes.size(); ++g) {
        if (sizes[g] == 0)
            throw std::invalid_argument("empty group id " + std::to_string(g));
        if (require_min_size2 && sizes[g] < 2)
            throw std::invalid_argument("singleton group id " + std::to_string(g));
    }
    int32_t last_min = -1;
    for (const auto& g : p.groups(false)) {
        if (g.front() <= last_min)
            throw std::invalid_argument("group ids not ordered by smallest member");
        last_min = g.front();
    }
}

/// True when both partitions induce the same grouping (residuals compared
/// as sets, proper groups as set families; labels and dates ignored).
inline bool same_grouping(const Partition& a, const Partition& b) {
    if (!a.universe || !b.universe || !a.universe->same_as(*b.universe)) return false;
    return canonicalize(a).assignment == canonicalize(b).assignment;
}

} // namespace mfa
