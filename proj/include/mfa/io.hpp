#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfa/common.hpp"
#include "mfa/consensus.hpp"
#include "mfa/csv.hpp"
#include "mfa/odm.hpp"
#include "mfa/partition.hpp"
#include "mfa/similarity.hpp"
#include "mfa/stats.hpp"
#include "mfa/synth.hpp"

namespace mfa {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

// ---- origin-destination matrices ----

inline void write_odm_csv(std::ostream& out, const std::vector<DailyOdm>& days) {
    out << "date,origin,destination,count\n";
    for (const auto& day : days) {
        std::string date = to_string(day.date);
        for (int32_t i = 0; i < day.universe->size(); ++i)
            for (const auto& [j, v] : day.counts.row(i)) {
                out << date << ',';
                write_csv_field(out, day.universe->id(i));
                out << ',';
                write_csv_field(out, day.universe->id(j));
                out << ',' << format_double(v) << '\n';
            }
    }
}

// ---- partitions ----

inline void write_partition_csv(std::ostream& out, const Partition& p) {
    out << "area_id,mfa_id\n";
    for (int32_t i = 0; i < p.size(); ++i) {
        write_csv_field(out, p.universe->id(i));
        out << ',' << p.assignment[static_cast<size_t>(i)] << '\n';
    }
}

/// JSON form: per-MFA member lists plus the modularity of the cut.
inline nlohmann::json partition_json(const Partition& p, double q) {
    nlohmann::json mfas = nlohmann::json::array();
    auto groups = p.groups(false);
    for (size_t g = 0; g < groups.size(); ++g) {
        nlohmann::json members = nlohmann::json::array();
        for (int32_t i : groups[g]) members.push_back(p.universe->id(i));
        mfas.push_back({{"mfa_id", static_cast<int64_t>(g)}, {"members", members}});
    }
    nlohmann::json residual = nlohmann::json::array();
    for (int32_t i : p.residual_members()) residual.push_back(p.universe->id(i));
    nlohmann::json out{{"label", p.label},
                       {"q", q},
                       {"mfas", mfas},
                       {"residual", residual}};
    if (p.date) out["date"] = to_string(*p.date);
    return out;
}

/// Reads area_id,mfa_id rows. With a universe given, ids are matched against
/// it (areas absent from the file fall into the residual); otherwise the
/// universe is the sorted set of file ids. Group numbers are re-densified.
inline Partition read_partition_csv(std::istream& in, UniversePtr universe = nullptr,
                                    std::string label = {}) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.read_row(fields)) throw ParseError("empty partition file", 1);
    int c_area = detail::find_column(fields, "area_id");
    int c_mfa = detail::find_column(fields, "mfa_id");

    std::vector<std::pair<std::string, int64_t>> rows;
    while (reader.read_row(fields)) {
        if (static_cast<size_t>(std::max(c_area, c_mfa)) >= fields.size())
            throw ParseError("short row", reader.line());
        rows.emplace_back(fields[static_cast<size_t>(c_area)],
                          parse_int_field(fields[static_cast<size_t>(c_mfa)],
                                          reader.line()));
    }
    if (!universe) {
        std::vector<std::string> ids;
        ids.reserve(rows.size());
        for (const auto& [id, g] : rows) {
            (void)g;
            ids.push_back(id);
        }
        universe = AreaUniverse::from_ids(std::move(ids));
    }
    std::map<int64_t, std::vector<int32_t>> groups;
    for (const auto& [id, g] : rows) {
        int32_t idx = universe->index_of(id);
        if (idx < 0) throw ParseError("area '" + id + "' not in universe");
        if (g != kResidual) groups[g].push_back(idx);
    }
    std::vector<std::vector<int32_t>> group_list;
    group_list.reserve(groups.size());
    for (auto& [g, members] : groups) {
        (void)g;
        group_list.push_back(std::move(members));
    }
    return partition_from_groups(std::move(universe), std::move(group_list),
                                 std::move(label));
}

/// area_id,gkz mapping as a partition over the given universe: one group
/// per district (groups of any size, no residual).
inline Partition read_district_partition_csv(std::istream& in, UniversePtr universe) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.read_row(fields)) throw ParseError("empty district file", 1);
    int c_area = detail::find_column(fields, "area_id");
    int c_district = detail::find_column(fields, "gkz");
    std::map<std::string, std::vector<int32_t>> groups;
    while (reader.read_row(fields)) {
        if (static_cast<size_t>(std::max(c_area, c_district)) >= fields.size())
            throw ParseError("short row", reader.line());
        const std::string& id = fields[static_cast<size_t>(c_area)];
        int32_t idx = universe->index_of(id);
        if (idx < 0) throw ParseError("area '" + id + "' not in universe", reader.line());
        groups[fields[static_cast<size_t>(c_district)]].push_back(idx);
    }
    std::vector<std::vector<int32_t>> group_list;
    for (auto& [d, members] : groups) {
        (void)d;
        group_list.push_back(std::move(members));
    }
    return partition_from_groups(std::move(universe), std::move(group_list), "districts");
}

// ---- similarity ----

inline void write_similarity_csv(std::ostream& out, const SimilarityMatrix& m) {
    out << "label";
    for (const auto& l : m.labels) {
        out << ',';
        write_csv_field(out, l);
    }
    out << '\n';
    for (size_t i = 0; i < m.labels.size(); ++i) {
        write_csv_field(out, m.labels[i]);
        for (size_t j = 0; j < m.labels.size(); ++j)
            out << ',' << format_double(m.at(i, j));
        out << '\n';
    }
}

/// Long form of the symmetric matrix: one row per unordered distinct pair.
inline void write_similarity_long_csv(std::ostream& out, const SimilarityMatrix& m) {
    out << "label_a,label_b,score\n";
    for (size_t i = 0; i < m.labels.size(); ++i)
        for (size_t j = i + 1; j < m.labels.size(); ++j) {
            write_csv_field(out, m.labels[i]);
            out << ',';
            write_csv_field(out, m.labels[j]);
            out << ',' << format_double(m.at(i, j)) << '\n';
        }
}

inline void write_intraweek_csv(std::ostream& out,
                                const std::vector<IntraweekPoint>& series) {
    out << "date,weekday,score\n";
    for (const auto& p : series)
        out << to_string(p.date) << ',' << p.weekday << ','
            << format_double(p.score) << '\n';
}

inline void write_admin_comparison_csv(
    std::ostream& out, const std::vector<std::pair<std::string, double>>& rows) {
    out << "label,score\n";
    for (const auto& [label, score] : rows) {
        write_csv_field(out, label);
        out << ',' << format_double(score) << '\n';
    }
}

// ---- consensus ----

inline void write_cofrequency_csv(std::ostream& out, const CoAssociation& co) {
    out << "area_a,area_b,frequency\n";
    for (size_t i = 0; i < co.counts.size(); ++i)
        for (const auto& [j, c] : co.counts[i]) {
            (void)c;
            write_csv_field(out, co.universe->id(static_cast<int32_t>(i)));
            out << ',';
            write_csv_field(out, co.universe->id(j));
            out << ',' << format_double(co.frequency(static_cast<int32_t>(i), j))
                << '\n';
        }
}

// ---- zones and cases ----

/// Columns area_id,gkz,population. Zone order = file order.
inline ZoneFrame read_zones_csv(std::istream& in) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.read_row(fields)) throw ParseError("empty zones file", 1);
    int c_area = detail::find_column(fields, "area_id");
    int c_district = detail::find_column(fields, "gkz");
    int c_pop = detail::find_column(fields, "population");
    std::vector<std::string> ids, districts;
    std::vector<double> pop;
    while (reader.read_row(fields)) {
        if (fields.size() <= static_cast<size_t>(std::max({c_area, c_district, c_pop})))
            throw ParseError("short row", reader.line());
        ids.push_back(fields[static_cast<size_t>(c_area)]);
        districts.push_back(fields[static_cast<size_t>(c_district)]);
        pop.push_back(
            parse_double_field(fields[static_cast<size_t>(c_pop)], reader.line()));
    }
    auto universe = std::make_shared<const AreaUniverse>(std::move(ids));
    return make_zone_frame(std::move(universe), districts, std::move(pop));
}

inline void write_zones_csv(std::ostream& out, const ZoneFrame& zones) {
    out << "area_id,gkz,population\n";
    for (int32_t i = 0; i < zones.zones->size(); ++i) {
        write_csv_field(out, zones.zones->id(i));
        out << ',';
        write_csv_field(out, zones.district_ids[static_cast<size_t>(
                                 zones.district[static_cast<size_t>(i)])]);
        out << ',' << format_double(zones.population[static_cast<size_t>(i)]) << '\n';
    }
}

/// Columns gkz,date,cases_7d (or gkz,date,cases for daily counts that still
/// need window aggregation). Duplicate (gkz, date) rows are summed; missing
/// combinations are zero.
inline DistrictCases read_district_cases_csv(std::istream& in) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.read_row(fields)) throw ParseError("empty cases file", 1);
    int c_district = detail::find_column(fields, "gkz");
    int c_date = detail::find_column(fields, "date");
    int c_cases = detail::find_column_opt(fields, "cases_7d");
    if (c_cases < 0) c_cases = detail::find_column(fields, "cases");

    std::map<std::pair<std::string, Date>, double> cells;
    while (reader.read_row(fields)) {
        if (fields.size() <= static_cast<size_t>(std::max({c_district, c_date, c_cases})))
            throw ParseError("short row", reader.line());
        double v = parse_double_field(fields[static_cast<size_t>(c_cases)], reader.line());
        if (v < 0) throw ParseError("negative case count", reader.line());
        cells[{fields[static_cast<size_t>(c_district)],
               parse_date(fields[static_cast<size_t>(c_date)], reader.line())}] += v;
    }

    DistrictCases out;
    for (const auto& [key, v] : cells) {
        (void)v;
        out.district_ids.push_back(key.first);
        out.dates.push_back(key.second);
    }
    std::sort(out.district_ids.begin(), out.district_ids.end());
    out.district_ids.erase(std::unique(out.district_ids.begin(), out.district_ids.end()),
                           out.district_ids.end());
    std::sort(out.dates.begin(), out.dates.end());
    out.dates.erase(std::unique(out.dates.begin(), out.dates.end()), out.dates.end());
    out.values.assign(out.dates.size(),
                      std::vector<double>(out.district_ids.size(), 0.0));
    for (const auto& [key, v] : cells) {
        size_t d = static_cast<size_t>(out.district_index(key.first));
        size_t t = static_cast<size_t>(
            std::lower_bound(out.dates.begin(), out.dates.end(), key.second) -
            out.dates.begin());
        out.values[t][d] = v;
    }
    return out;
}

inline void write_district_cases_csv(std::ostream& out, const DistrictCases& dc) {
    out << "gkz,date,cases_7d\n";
    for (size_t t = 0; t < dc.dates.size(); ++t)
        for (size_t d = 0; d < dc.district_ids.size(); ++d) {
            write_csv_field(out, dc.district_ids[d]);
            out << ',' << to_string(dc.dates[t]) << ','
                << format_double(dc.values[t][d]) << '\n';
        }
}

inline void write_zone_cases_csv(std::ostream& out, const AreaUniverse& universe,
                                 const synth::CaseData& cases) {
    out << "area_id,date,cases_7d\n";
    for (size_t t = 0; t < cases.dates.size(); ++t)
        for (int32_t i = 0; i < universe.size(); ++i) {
            write_csv_field(out, universe.id(i));
            out << ',' << to_string(cases.dates[t]) << ','
                << format_double(cases.zone_cases7[t][static_cast<size_t>(i)]) << '\n';
        }
}

// ---- statistics ----

inline void write_weekly_eta_csv(std::ostream& out, const std::vector<WeeklyEta>& rows) {
    out << "MFA,GKZ,date range,calendar week\n";
    for (const auto& r : rows)
        out << format_double(r.eta_mfa) << ',' << format_double(r.eta_district) << ','
            << to_string(r.first) << " - " << to_string(r.last) << ',' << r.week.week
            << '\n';
}

inline void write_coefficients_csv(std::ostream& out,
                                   const std::vector<TimelinePoint>& points,
                                   bool random_intercept) {
    out << "date,term,estimate,se,p\n";
    for (const auto& pt : points) {
        const auto& fit = random_intercept ? pt.random_intercept : pt.ols;
        if (!fit) continue;
        for (const auto& c : fit->coefficients) {
            out << to_string(pt.date) << ',';
            write_csv_field(out, c.name);
            out << ',' << format_double(c.estimate) << ',' << format_double(c.se)
                << ',' << format_double(c.p_value) << '\n';
        }
    }
}

inline void write_models_csv(std::ostream& out,
                             const std::vector<TimelinePoint>& points) {
    out << "date,model,n,p,sigma2,r2,adj_r2,theta,group_variance,residual_variance,"
           "singular,reml_loglik,reference_mfa,error\n";
    for (const auto& pt : points) {
        auto dump = [&](const char* model, const RegressionResult& r) {
            out << to_string(pt.date) << ',' << model << ',' << r.n << ',' << r.p << ','
                << format_double(r.sigma2) << ',' << format_double(r.r2) << ','
                << format_double(r.adj_r2) << ',' << format_double(r.theta) << ','
                << format_double(r.group_variance) << ','
                << format_double(r.residual_variance) << ',' << (r.singular_fit ? 1 : 0)
                << ',' << format_double(r.reml_loglik) << ',' << r.reference_mfa
                << ",\n";
        };
        if (pt.ols) dump("ols", *pt.ols);
        if (pt.random_intercept) dump("random_intercept", *pt.random_intercept);
        if (!pt.error.empty()) {
            out << to_string(pt.date) << ",,,,,,,,,,,,,";
            write_csv_field(out, pt.error);
            out << '\n';
        }
    }
}

inline void write_grid_csv(std::ostream& out, const std::vector<TimelineCell>& grid) {
    out << "date,mfa_id,class\n";
    for (const auto& cell : grid)
        out << to_string(cell.date) << ',' << cell.mfa_id << ','
            << to_string(cell.sig) << '\n';
}

inline void write_summary_csv(std::ostream& out,
                              const std::vector<MfaClassSummary>& rows) {
    out << "class,n_mfas,pop_q1,pop_median,pop_mean,pop_q3,"
           "cases_q1,cases_median,cases_mean,cases_q3\n";
    for (const auto& r : rows) {
        out << to_string(r.cls) << ',' << r.n_mfas;
        if (r.n_mfas > 0) {
            for (double v : {r.pop_q1, r.pop_median, r.pop_mean, r.pop_q3, r.cases_q1,
                             r.cases_median, r.cases_mean, r.cases_q3})
                out << ',' << format_double(v);
            out << '\n';
        } else {
            out << ",,,,,,,,\n";
        }
    }
}

// ---- GeoJSON ----

/// Adds an mfa_id property to every feature whose key property matches an
/// area; features without a match get null. Returns the number matched.
inline size_t geojson_join(nlohmann::json& doc, const Partition& p,
                           const std::string& key = "area_id") {
    if (!doc.contains("features") || !doc["features"].is_array())
        throw ParseError("GeoJSON input has no features array");
    size_t matched = 0;
    for (auto& feature : doc["features"]) {
        auto& props = feature["properties"];
        nlohmann::json value; // null
        if (props.contains(key) && props[key].is_string()) {
            int32_t idx = p.universe->index_of(props[key].get<std::string>());
            if (idx >= 0) {
                value = p.assignment[static_cast<size_t>(idx)];
                ++matched;
            }
        }
        props["mfa_id"] = value;
    }
    return matched;
}

// ---- run manifests ----

/// Manifest of one CLI run: parameters plus content digests of every input.
/// Deliberately carries no timestamps so reruns are byte-identical.
inline nlohmann::json make_manifest(const std::string& command,
                                    const nlohmann::json& parameters,
                                    const std::vector<std::string>& input_paths,
                                    const std::vector<std::string>& outputs) {
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& path : input_paths)
        inputs.push_back({{"path", path}, {"fnv1a64", to_hex(fnv1a64(read_file(path)))}});
    return {{"command", command},
            {"parameters", parameters},
            {"inputs", inputs},
            {"outputs", outputs}};
}

} // namespace mfa
