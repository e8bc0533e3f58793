#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mfa/csv.hpp"
#include "mfa/date.hpp"
#include "mfa/odm.hpp"
#include "mfa/partition.hpp"
#include "mfa/rng.hpp"
#include "mfa/stats.hpp"

namespace mfa::synth {

/// Block layout active from `start` until the next regime begins. Areas are
/// assigned to blocks in order; areas beyond the listed sizes are background
/// (blocks of one, i.e. residual by construction).
struct Regime {
    Date start;
    std::vector<int32_t> block_sizes;
};

/// Declarative description of a synthetic dataset. All generation is
/// arithmetic on SplitMix64 draws, so outputs are bit-identical across
/// platforms; every date uses its own substream.
struct Spec {
    uint64_t seed = 1;
    int32_t n_areas = 0;
    Date start{}, end{};
    std::vector<Regime> regimes;

    // mobility: per-origin shares, must sum to 1
    double self_share = 0.2;
    double within_share = 0.7; // split over up to 3 ring neighbors in the block
    double cross_share = 0.1;  // split over up to 10 out-of-block targets
    double noise = 0.0;        // share of each row rerouted to random targets
    double volume = 1000.0;    // movers per origin per day

    // districts and population
    int32_t n_districts = 1;
    int64_t pop_base = 500;
    int64_t pop_spread = 1000; // population = pop_base + uniform{0..pop_spread}

    // epidemic: block rates start at case_rate and evolve multiplicatively
    double case_rate = 0.0;
    double case_noise = 0.0; // zone-level multiplicative noise amplitude
    std::optional<Date> lockdown;
    double growth = 1.0;              // pre-lockdown daily multiplier (blocks)
    std::vector<double> block_growth; // per-block override
    double post_mult = 1.0;           // post-lockdown block multiplier
    std::vector<double> block_post;   // per-block override
    double post_relax = 1.0; // post-lockdown pull toward the base rate (0..1)
};

inline void validate(const Spec& s) {
    auto fail = [](const std::string& m) { throw std::invalid_argument("spec: " + m); };
    if (s.n_areas < 1) fail("areas must be >= 1");
    if (s.end < s.start) fail("end before start");
    if (s.regimes.empty()) fail("at least one regime required");
    if (s.start < s.regimes.front().start) fail("first regime starts after the series");
    for (size_t r = 0; r < s.regimes.size(); ++r) {
        int64_t total = 0;
        for (int32_t b : s.regimes[r].block_sizes) {
            if (b < 1) fail("block size must be >= 1");
            total += b;
        }
        if (total > s.n_areas) fail("blocks exceed area count");
        if (r > 0 && !(s.regimes[r - 1].start < s.regimes[r].start))
            fail("regime dates must be strictly increasing");
    }
    double share_sum = s.self_share + s.within_share + s.cross_share;
    if (s.self_share < 0 || s.within_share < 0 || s.cross_share < 0 ||
        std::fabs(share_sum - 1.0) > 1e-9)
        fail("shares must be non-negative and sum to 1");
    if (s.noise < 0 || s.noise >= 1) fail("noise must lie in [0, 1)");
    if (s.noise > 0 && s.n_areas < 2) fail("noise needs at least 2 areas");
    if (s.volume <= 0) fail("volume must be positive");
    if (s.n_districts < 1 || s.n_districts > s.n_areas) fail("bad district count");
    if (s.pop_base < 0 || s.pop_spread < 0) fail("bad population parameters");
    if (s.case_rate < 0) fail("case_rate must be >= 0");
    if (s.case_noise < 0 || s.case_noise >= 1) fail("case_noise must lie in [0, 1)");
    if (s.growth <= 0 || s.post_mult <= 0) fail("growth factors must be positive");
    for (double g : s.block_growth)
        if (g <= 0) fail("growth factors must be positive");
    for (double g : s.block_post)
        if (g <= 0) fail("growth factors must be positive");
    if (s.post_relax < 0 || s.post_relax > 1) fail("post_relax must lie in [0, 1]");
}

namespace detail {

inline constexpr uint64_t kOdmTag = 0x6f646d5f73747231ULL;
inline constexpr uint64_t kCaseTag = 0x636173655f737472ULL;
inline constexpr uint64_t kPopTag = 0x706f705f73747265ULL;

inline std::string padded_id(const char* prefix, int32_t i, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, i);
    return buf;
}

inline int digits(int32_t n) {
    int w = 1;
    for (int32_t v = n - 1; v >= 10; v /= 10) ++w;
    return w;
}

inline int id_width(int32_t n) { return std::max(digits(n), 4); }

} // namespace detail

/// Area ids a0000.., zero padded so lexical order equals numeric order.
inline UniversePtr area_universe(const Spec& s) {
    int w = detail::id_width(s.n_areas);
    std::vector<std::string> ids;
    ids.reserve(static_cast<size_t>(s.n_areas));
    for (int32_t i = 0; i < s.n_areas; ++i)
        ids.push_back(detail::padded_id("a", i, w));
    return std::make_shared<const AreaUniverse>(std::move(ids));
}

inline const Regime& regime_at(const Spec& s, Date d) {
    const Regime* active = &s.regimes.front();
    for (const auto& r : s.regimes)
        if (r.start <= d) active = &r;
    return *active;
}

/// Block index per area for a regime: listed blocks first, then one
/// background block of size 1 per leftover area. Returned pair: block id per
/// area, number of proper (size >= 2) blocks is implied by the sizes.
inline std::vector<int32_t> block_of_area(const Spec& s, const Regime& r) {
    std::vector<int32_t> out(static_cast<size_t>(s.n_areas));
    int32_t next = 0, block = 0;
    for (int32_t size : r.block_sizes) {
        for (int32_t k = 0; k < size; ++k) out[static_cast<size_t>(next++)] = block;
        ++block;
    }
    while (next < s.n_areas) out[static_cast<size_t>(next++)] = block++;
    return out;
}

/// Ground-truth grouping for a date: blocks of size >= 2 are proper groups,
/// everything else is residual.
inline Partition planted_partition(const Spec& s, UniversePtr universe, Date d) {
    const Regime& r = regime_at(s, d);
    std::vector<std::vector<int32_t>> groups;
    int32_t next = 0;
    for (int32_t size : r.block_sizes) {
        if (size >= 2) {
            std::vector<int32_t> g(static_cast<size_t>(size));
            for (int32_t k = 0; k < size; ++k) g[static_cast<size_t>(k)] = next + k;
            groups.push_back(std::move(g));
        }
        next += size;
    }
    return partition_from_groups(std::move(universe), std::move(groups),
                                 "planted " + to_string(d), d);
}

/// Balanced contiguous districts: area i belongs to district
/// i * n_districts / n_areas. Ids d00.. in numeric order.
inline std::vector<std::string> district_of_area(const Spec& s) {
    int w = std::max(2, detail::digits(s.n_districts));
    std::vector<std::string> out;
    out.reserve(static_cast<size_t>(s.n_areas));
    for (int32_t i = 0; i < s.n_areas; ++i) {
        int64_t d = static_cast<int64_t>(i) * s.n_districts / s.n_areas;
        out.push_back(detail::padded_id("d", static_cast<int32_t>(d), w));
    }
    return out;
}

inline std::vector<double> populations(const Spec& s) {
    SplitMix64 rng = substream(s.seed ^ detail::kPopTag, 0);
    std::vector<double> out;
    out.reserve(static_cast<size_t>(s.n_areas));
    for (int32_t i = 0; i < s.n_areas; ++i)
        out.push_back(static_cast<double>(
            s.pop_base +
            static_cast<int64_t>(rng.below(static_cast<uint64_t>(s.pop_spread) + 1))));
    return out;
}

/// One day of origin-destination counts. Every origin sends `volume` movers:
/// a self share, a within-block share split over up to 3 ring neighbors
/// (large enough that block ties clear the proximity threshold), and a cross
/// share split over up to 10 out-of-block targets; a `noise` fraction of the
/// row is rerouted to 3 random destinations.
inline DailyOdm gen_odm_day(const Spec& s, UniversePtr universe, Date d) {
    const Regime& regime = regime_at(s, d);
    std::vector<int32_t> block = block_of_area(s, regime);
    std::vector<int32_t> block_offset(block.size()), block_size(block.size());
    {
        int32_t off = 0;
        while (off < s.n_areas) {
            int32_t end = off;
            while (end < s.n_areas && block[static_cast<size_t>(end)] ==
                                          block[static_cast<size_t>(off)])
                ++end;
            for (int32_t i = off; i < end; ++i) {
                block_offset[static_cast<size_t>(i)] = off;
                block_size[static_cast<size_t>(i)] = end - off;
            }
            off = end;
        }
    }

    SplitMix64 rng =
        substream(s.seed ^ detail::kOdmTag, static_cast<uint64_t>(d.days - s.start.days));
    DailyOdm odm{d, universe, SparseRows(s.n_areas)};
    for (int32_t i = 0; i < s.n_areas; ++i) {
        int32_t off = block_offset[static_cast<size_t>(i)];
        int32_t sz = block_size[static_cast<size_t>(i)];
        double self = s.self_share, within = s.within_share, cross = s.cross_share;

        std::vector<std::pair<int32_t, double>> shares;
        int32_t n_within = std::min<int32_t>(3, sz - 1);
        if (n_within <= 0) {
            self += within;
        } else {
            for (int32_t k = 1; k <= n_within; ++k)
                shares.emplace_back(off + (i - off + k) % sz, within / n_within);
        }
        std::vector<int32_t> cross_targets;
        for (int32_t step = 1; step < s.n_areas &&
                               cross_targets.size() < 10; ++step) {
            int32_t j = (i + step) % s.n_areas;
            if (block[static_cast<size_t>(j)] != block[static_cast<size_t>(i)])
                cross_targets.push_back(j);
        }
        if (cross_targets.empty()) {
            self += cross;
        } else {
            for (int32_t j : cross_targets)
                shares.emplace_back(j, cross / static_cast<double>(cross_targets.size()));
        }
        shares.emplace_back(i, self);

        if (s.noise > 0) {
            for (auto& [j, v] : shares) {
                (void)j;
                v *= 1.0 - s.noise;
            }
            for (int k = 0; k < 3; ++k) {
                int32_t j = static_cast<int32_t>(
                    rng.below(static_cast<uint64_t>(s.n_areas)));
                while (j == i)
                    j = static_cast<int32_t>(rng.below(static_cast<uint64_t>(s.n_areas)));
                shares.emplace_back(j, s.noise / 3.0);
            }
        }
        for (const auto& [j, v] : shares) odm.counts.add(i, j, v * s.volume);
    }
    odm.counts.finalize();
    return odm;
}

inline std::vector<DailyOdm> gen_odm_series(const Spec& s) {
    validate(s);
    UniversePtr universe = area_universe(s);
    std::vector<DailyOdm> out;
    for (Date d = s.start; d <= s.end; d = d.next())
        out.push_back(gen_odm_day(s, universe, d));
    return out;
}

/// Latent epidemic panel. Block rates start at case_rate and evolve daily:
/// multiplicatively (growth factor per planted group) before and on the
/// lockdown date, then pulled toward the base rate by post_relax afterwards.
/// Residual zones stay at the base rate throughout. Zone daily counts are
/// population * rate, with optional multiplicative noise; the 7-day series is
/// a trailing sum.
struct CaseData {
    std::vector<Date> dates;
    std::vector<std::vector<double>> zone_daily;  // [date][zone]
    std::vector<std::vector<double>> zone_cases7; // [date][zone]
    DistrictCases district_cases7;
};

inline CaseData gen_cases(const Spec& s, const Partition& planted) {
    validate(s);
    if (planted.size() != s.n_areas)
        throw std::invalid_argument("gen_cases: partition does not match spec");
    size_t n = static_cast<size_t>(s.n_areas);
    std::vector<double> pop = populations(s);
    std::vector<std::string> district = district_of_area(s);

    auto factor = [](const std::vector<double>& per_block, double fallback,
                     int32_t k) {
        return static_cast<size_t>(k) < per_block.size() ? per_block[static_cast<size_t>(k)]
                                                         : fallback;
    };

    CaseData out;
    size_t n_groups = static_cast<size_t>(planted.num_groups);
    std::vector<double> rate(n_groups, s.case_rate);
    std::vector<double> prev;
    for (Date d = s.start; d <= s.end; d = d.next()) {
        size_t t = out.dates.size();
        out.dates.push_back(d);
        if (t > 0) {
            bool post = s.lockdown && *s.lockdown < d;
            for (size_t k = 0; k < n_groups; ++k) {
                if (post)
                    rate[k] = factor(s.block_post, s.post_mult, static_cast<int32_t>(k)) *
                              (s.case_rate + s.post_relax * (rate[k] - s.case_rate));
                else
                    rate[k] *= factor(s.block_growth, s.growth, static_cast<int32_t>(k));
            }
        }
        SplitMix64 rng = substream(s.seed ^ detail::kCaseTag, t);
        std::vector<double> daily(n);
        for (size_t i = 0; i < n; ++i) {
            int32_t g = planted.assignment[i];
            double r = g == kResidual ? s.case_rate : rate[static_cast<size_t>(g)];
            double noise =
                s.case_noise > 0 ? 1.0 + s.case_noise * (2.0 * rng.uniform() - 1.0) : 1.0;
            daily[i] = pop[i] * r * noise;
        }
        out.zone_daily.push_back(std::move(daily));
    }

    out.zone_cases7.assign(out.dates.size(), std::vector<double>(n, 0.0));
    for (size_t t = 0; t < out.dates.size(); ++t)
        for (size_t back = 0; back < 7 && back <= t; ++back)
            for (size_t i = 0; i < n; ++i)
                out.zone_cases7[t][i] += out.zone_daily[t - back][i];

    DistrictCases& dc = out.district_cases7;
    dc.district_ids = district;
    std::sort(dc.district_ids.begin(), dc.district_ids.end());
    dc.district_ids.erase(std::unique(dc.district_ids.begin(), dc.district_ids.end()),
                          dc.district_ids.end());
    dc.dates = out.dates;
    dc.values.assign(out.dates.size(),
                     std::vector<double>(dc.district_ids.size(), 0.0));
    for (size_t t = 0; t < out.dates.size(); ++t)
        for (size_t i = 0; i < n; ++i) {
            auto it = std::lower_bound(dc.district_ids.begin(), dc.district_ids.end(),
                                       district[i]);
            dc.values[t][static_cast<size_t>(it - dc.district_ids.begin())] +=
                out.zone_cases7[t][i];
        }
    return out;
}

/// Zone table matching gen_cases: districts, populations, and the planted
/// assignment applied.
inline ZoneFrame zone_frame(const Spec& s, const Partition& planted) {
    ZoneFrame f = make_zone_frame(area_universe(s), district_of_area(s), populations(s));
    f.apply_partition(planted);
    return f;
}

/// Random block-structured graph: within-block pairs drawn with p_in at
/// weight w_in, cross-block with p_out at weight w_out.
inline AdjacencyMatrix planted_graph(int32_t n_blocks, int32_t block_size, double p_in,
                                     double p_out, double w_in, double w_out,
                                     uint64_t seed) {
    int32_t n = n_blocks * block_size;
    int w = detail::id_width(n);
    std::vector<std::string> ids;
    for (int32_t i = 0; i < n; ++i) ids.push_back(detail::padded_id("v", i, w));
    auto universe = std::make_shared<const AreaUniverse>(std::move(ids));
    SplitMix64 rng(seed);
    AdjacencyMatrix adj{Date{0}, universe, SparseRows(n)};
    for (int32_t i = 0; i < n; ++i)
        for (int32_t j = i + 1; j < n; ++j) {
            bool same = i / block_size == j / block_size;
            double p = same ? p_in : p_out;
            if (rng.uniform() < p) {
                double w_edge = same ? w_in : w_out;
                adj.weights.add(i, j, w_edge);
                adj.weights.add(j, i, w_edge);
            }
        }
    adj.weights.finalize();
    return adj;
}

/// Erdos-Renyi style random weighted graph on n vertices; weights are 0.5 or
/// 1.0 with equal probability (the values adjacency matrices produce).
inline AdjacencyMatrix random_graph(int32_t n, double edge_prob, uint64_t seed) {
    int w = detail::id_width(n);
    std::vector<std::string> ids;
    for (int32_t i = 0; i < n; ++i) ids.push_back(detail::padded_id("v", i, w));
    auto universe = std::make_shared<const AreaUniverse>(std::move(ids));
    SplitMix64 rng(seed);
    AdjacencyMatrix adj{Date{0}, universe, SparseRows(n)};
    for (int32_t i = 0; i < n; ++i)
        for (int32_t j = i + 1; j < n; ++j)
            if (rng.uniform() < edge_prob) {
                double w_edge = rng.next() & 1 ? 1.0 : 0.5;
                adj.weights.add(i, j, w_edge);
                adj.weights.add(j, i, w_edge);
            }
    adj.weights.finalize();
    return adj;
}

/// Key/value spec file: one `key = value` per line, '#' comments, dates as
/// YYYY-MM-DD, lists space separated. `regime` may repeat.
inline Spec parse_spec(std::istream& in) {
    Spec s;
    std::string line;
    long line_no = 0;
    bool have_start = false, have_end = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto strip = [](std::string v) {
            size_t b = v.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            size_t e = v.find_last_not_of(" \t\r");
            return v.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
        std::string key = strip(line.substr(0, eq));
        std::string value = strip(line.substr(eq + 1));
        if (value.empty()) throw ParseError("empty value for '" + key + "'", line_no);

        auto as_double = [&] { return parse_double_field(value, line_no); };
        auto as_int = [&] { return parse_int_field(value, line_no); };
        auto as_list = [&] {
            std::istringstream iss(value);
            std::vector<double> out;
            std::string tok;
            while (iss >> tok) out.push_back(parse_double_field(tok, line_no));
            return out;
        };

        if (key == "seed") s.seed = static_cast<uint64_t>(as_int());
        else if (key == "areas") s.n_areas = static_cast<int32_t>(as_int());
        else if (key == "start") { s.start = parse_date(value, line_no); have_start = true; }
        else if (key == "end") { s.end = parse_date(value, line_no); have_end = true; }
        else if (key == "self_share") s.self_share = as_double();
        else if (key == "within_share") s.within_share = as_double();
        else if (key == "cross_share") s.cross_share = as_double();
        else if (key == "noise") s.noise = as_double();
        else if (key == "volume") s.volume = as_double();
        else if (key == "districts") s.n_districts = static_cast<int32_t>(as_int());
        else if (key == "pop_base") s.pop_base = as_int();
        else if (key == "pop_spread") s.pop_spread = as_int();
        else if (key == "case_rate") s.case_rate = as_double();
        else if (key == "case_noise") s.case_noise = as_double();
        else if (key == "lockdown") s.lockdown = parse_date(value, line_no);
        else if (key == "growth") s.growth = as_double();
        else if (key == "block_growth") s.block_growth = as_list();
        else if (key == "post_mult") s.post_mult = as_double();
        else if (key == "block_post") s.block_post = as_list();
        else if (key == "post_relax") s.post_relax = as_double();
        else if (key == "regime") {
            std::istringstream iss(value);
            std::string date_tok;
            if (!(iss >> date_tok)) throw ParseError("regime needs a date", line_no);
            Regime r;
            r.start = parse_date(date_tok, line_no);
            std::string tok;
            while (iss >> tok)
                r.block_sizes.push_back(
                    static_cast<int32_t>(parse_int_field(tok, line_no)));
            s.regimes.push_back(std::move(r));
        } else {
            throw ParseError("unknown key '" + key + "'", line_no);
        }
    }
    if (!have_start || !have_end) throw ParseError("spec needs start and end dates");
    validate(s);
    return s;
}

} // namespace mfa::synth
