#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mfa/csv.hpp"
#include "mfa/date.hpp"
#include "mfa/sparse.hpp"
#include "mfa/universe.hpp"

namespace mfa {

/// Raw daily origin-destination counts (non-negative, zeros implicit).
struct DailyOdm {
    Date date;
    UniversePtr universe;
    SparseRows counts;
};

/// Row-stochastic version of a DailyOdm. Rows whose normalization denominator
/// is zero carry no probabilities and are listed in zero_rows.
struct NormalizedOdm {
    Date date;
    UniversePtr universe;
    SparseRows probs;
    std::vector<int32_t> zero_rows;
};

/// 0/1 proximity relation: probs > threshold, diagonal forced off.
struct ProximityMatrix {
    Date date;
    UniversePtr universe;
    double threshold = 0;
    SparseRows edges;
};

/// Symmetrized proximity (P + P^T) / 2; values in {0.5, 1}, zero diagonal.
struct AdjacencyMatrix {
    Date date;
    UniversePtr universe;
    SparseRows weights;
};

enum class UniversePolicy {
    Grow,  // universe = sorted union of all ids seen in the input
    Fixed, // ids outside the provided universe are an error
};

struct OdmLoadOptions {
    char delimiter = ',';
    UniversePolicy policy = UniversePolicy::Grow;
    UniversePtr universe; // required for Fixed
};

namespace detail {

struct RawOdmRow {
    Date date;
    std::string origin;
    std::string destination;
    double count;
    long line;
};

inline int find_column_opt(const std::vector<std::string>& header,
                           const std::string& name) {
    for (size_t i = 0; i < header.size(); ++i) {
        std::string h = header[i];
        std::transform(h.begin(), h.end(), h.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (h == name) return static_cast<int>(i);
    }
    return -1;
}

inline int find_column(const std::vector<std::string>& header, const std::string& name) {
    int c = find_column_opt(header, name);
    if (c < 0) throw ParseError("missing required column '" + name + "'", 1);
    return c;
}

} // namespace detail

/// Loads long-format rows (date, origin, destination, count) and groups them
/// into one DailyOdm per distinct date, sorted by date. Duplicate
/// (date, origin, destination) rows are summed.
inline std::vector<DailyOdm> load_odm(std::istream& in, const OdmLoadOptions& opts = {}) {
    if (opts.policy == UniversePolicy::Fixed && !opts.universe)
        throw std::invalid_argument("load_odm: Fixed policy requires a universe");

    CsvReader reader(in, opts.delimiter);
    std::vector<std::string> fields;
    if (!reader.read_row(fields)) throw ParseError("empty input, header expected", 1);
    int c_date = detail::find_column(fields, "date");
    int c_orig = detail::find_column(fields, "origin");
    int c_dest = detail::find_column(fields, "destination");
    int c_count = detail::find_column(fields, "count");
    size_t width = fields.size();

    std::vector<detail::RawOdmRow> rows;
    while (reader.read_row(fields)) {
        long line = reader.line();
        if (fields.size() != width)
            throw ParseError("expected " + std::to_string(width) + " fields, got " +
                                 std::to_string(fields.size()),
                             line);
        double count = parse_double_field(fields[static_cast<size_t>(c_count)], line);
        if (count < 0) throw ParseError("negative count", line);
        rows.push_back({parse_date(fields[static_cast<size_t>(c_date)], line),
                        fields[static_cast<size_t>(c_orig)],
                        fields[static_cast<size_t>(c_dest)], count, line});
    }

    UniversePtr universe = opts.universe;
    if (opts.policy == UniversePolicy::Grow) {
        std::vector<std::string> ids;
        ids.reserve(rows.size() * 2);
        for (const auto& r : rows) {
            ids.push_back(r.origin);
            ids.push_back(r.destination);
        }
        universe = AreaUniverse::from_ids(std::move(ids));
    }

    std::map<Date, SparseRows> by_date;
    for (const auto& r : rows) {
        int32_t i = universe->index_of(r.origin);
        int32_t j = universe->index_of(r.destination);
        if (i < 0) throw ParseError("unknown area id '" + r.origin + "'", r.line);
        if (j < 0) throw ParseError("unknown area id '" + r.destination + "'", r.line);
        auto [it, fresh] = by_date.try_emplace(r.date, universe->size());
        (void)fresh;
        if (r.count > 0) it->second.add(i, j, r.count);
    }

    std::vector<DailyOdm> out;
    out.reserve(by_date.size());
    for (auto& [date, counts] : by_date) {
        counts.finalize();
        out.push_back({date, universe, std::move(counts)});
    }
    return out;
}

/// Keeps Monday..Friday matrices that are not listed as holidays.
inline std::vector<DailyOdm> weekday_filter(std::vector<DailyOdm> days,
                                            const std::set<Date>& holidays = {}) {
    std::vector<DailyOdm> out;
    out.reserve(days.size());
    for (auto& d : days)
        if (is_weekday(d.date) && !holidays.count(d.date)) out.push_back(std::move(d));
    return out;
}

struct NormalizeOptions {
    bool include_diagonal = true; // diagonal counts in the row denominator
};

/// Row normalization: each row of counts divided by its total movers.
inline NormalizedOdm normalize(const DailyOdm& odm, const NormalizeOptions& opts = {}) {
    NormalizedOdm out{odm.date, odm.universe, SparseRows(odm.universe->size()), {}};
    for (int32_t i = 0; i < odm.universe->size(); ++i) {
        double denom = 0;
        for (const auto& [j, v] : odm.counts.row(i))
            if (opts.include_diagonal || j != i) denom += v;
        if (denom <= 0) {
            out.zero_rows.push_back(i);
            continue;
        }
        for (const auto& [j, v] : odm.counts.row(i)) {
            if (!opts.include_diagonal && j == i) continue;
            out.probs.add(i, j, v / denom);
        }
    }
    out.probs.finalize();
    return out;
}

/// Proximity: probs strictly above the threshold, diagonal always excluded.
inline ProximityMatrix threshold(const NormalizedOdm& norm, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("threshold must lie in (0, 1)");
    ProximityMatrix out{norm.date, norm.universe, threshold,
                        SparseRows(norm.universe->size())};
    for (int32_t i = 0; i < norm.universe->size(); ++i)
        for (const auto& [j, v] : norm.probs.row(i))
            if (j != i && v > threshold) out.edges.add(i, j, 1.0);
    out.edges.finalize();
    return out;
}

/// (P + P^T) / 2 on the 0/1 proximity relation: 1 if both directions are
/// proximate, 0.5 if exactly one is. Values are exact.
inline AdjacencyMatrix symmetrize(const ProximityMatrix& prox) {
    AdjacencyMatrix out{prox.date, prox.universe, SparseRows(prox.universe->size())};
    for (int32_t i = 0; i < prox.universe->size(); ++i)
        for (const auto& [j, v] : prox.edges.row(i)) {
            (void)v;
            out.weights.add(i, j, 0.5);
            out.weights.add(j, i, 0.5);
        }
    out.weights.finalize();
    return out;
}

} // namespace mfa
