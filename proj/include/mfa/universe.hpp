#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace mfa {

/// Fixed, ordered set of area identifiers. Every matrix and partition in the
/// pipeline refers to areas by dense index into one shared universe, so that
/// day-to-day objects are directly comparable.
class AreaUniverse {
public:
    explicit AreaUniverse(std::vector<std::string> ids) : ids_(std::move(ids)) {
        index_.reserve(ids_.size());
        for (size_t i = 0; i < ids_.size(); ++i) {
            auto [it, fresh] = index_.emplace(ids_[i], static_cast<int32_t>(i));
            (void)it;
            if (!fresh) throw std::invalid_argument("duplicate area id '" + ids_[i] + "'");
        }
    }

    int32_t size() const { return static_cast<int32_t>(ids_.size()); }
    const std::string& id(int32_t i) const { return ids_.at(static_cast<size_t>(i)); }
    const std::vector<std::string>& ids() const { return ids_; }

    int32_t index_of(const std::string& id) const {
        auto it = index_.find(id);
        return it == index_.end() ? -1 : it->second;
    }

    bool same_as(const AreaUniverse& other) const {
        return this == &other || ids_ == other.ids_;
    }

    /// Universe from an unordered bag of ids: sorted, deduplicated.
    static std::shared_ptr<const AreaUniverse> from_ids(std::vector<std::string> ids) {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        return std::make_shared<const AreaUniverse>(std::move(ids));
    }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, int32_t> index_;
};

using UniversePtr = std::shared_ptr<const AreaUniverse>;

inline void require_same_universe(const AreaUniverse& a, const AreaUniverse& b,
                                  const char* what) {
    if (!a.same_as(b))
        throw std::invalid_argument(std::string(what) + ": area universes differ");
}

} // namespace mfa
