#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mfa {

/// Square sparse matrix, one sorted (column, value) list per row.
/// Zeros are implicit; a stored explicit zero never survives finalize().
class SparseRows {
public:
    using Entry = std::pair<int32_t, double>;

    SparseRows() = default;
    explicit SparseRows(int32_t n) : rows_(static_cast<size_t>(n)) {}

    int32_t size() const { return static_cast<int32_t>(rows_.size()); }

    /// Accumulates v into (i, j). Rows stay unsorted until finalize().
    void add(int32_t i, int32_t j, double v) {
        rows_.at(static_cast<size_t>(i)).emplace_back(j, v);
        finalized_ = false;
    }

    /// Sorts rows, merges duplicate columns, drops exact zeros.
    void finalize() {
        for (auto& row : rows_) {
            std::sort(row.begin(), row.end(),
                      [](const Entry& a, const Entry& b) { return a.first < b.first; });
            size_t out = 0;
            for (size_t k = 0; k < row.size();) {
                int32_t col = row[k].first;
                double sum = 0;
                while (k < row.size() && row[k].first == col) sum += row[k++].second;
                if (sum != 0.0) row[out++] = {col, sum};
            }
            row.resize(out);
        }
        finalized_ = true;
    }

    bool finalized() const { return finalized_; }

    const std::vector<Entry>& row(int32_t i) const {
        return rows_.at(static_cast<size_t>(i));
    }

    double at(int32_t i, int32_t j) const {
        const auto& row = rows_.at(static_cast<size_t>(i));
        auto it = std::lower_bound(row.begin(), row.end(), j,
                                   [](const Entry& e, int32_t col) { return e.first < col; });
        return (it != row.end() && it->first == j) ? it->second : 0.0;
    }

    double row_sum(int32_t i) const {
        double s = 0;
        for (const auto& [j, v] : row(i)) {
            (void)j;
            s += v;
        }
        return s;
    }

    size_t nnz() const {
        size_t n = 0;
        for (const auto& row : rows_) n += row.size();
        return n;
    }

private:
    std::vector<std::vector<Entry>> rows_;
    bool finalized_ = true;
};

} // namespace mfa
