#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "mfa/common.hpp"
#include "mfa/date.hpp"
#include "mfa/linalg.hpp"
#include "mfa/partition.hpp"

namespace mfa {

/// Zone-level panel: fixed zones with district membership, population, an MFA
/// assignment, and a 7-day case series per date.
struct ZoneFrame {
    UniversePtr zones;
    std::vector<std::string> district_ids; // unique, sorted
    std::vector<int32_t> district;         // per zone, index into district_ids
    std::vector<double> population;        // per zone
    std::vector<int32_t> mfa;              // per zone, kResidual or group id
    int32_t num_mfas = 0;
    std::vector<Date> dates;               // ascending
    std::vector<std::vector<double>> cases7; // [date index][zone]

    int date_index(Date d) const {
        auto it = std::lower_bound(dates.begin(), dates.end(), d);
        if (it == dates.end() || !(*it == d)) return -1;
        return static_cast<int>(it - dates.begin());
    }

    void apply_partition(const Partition& p) {
        require_same_universe(*zones, *p.universe, "apply_partition");
        mfa = p.assignment;
        num_mfas = p.num_groups;
    }
};

inline ZoneFrame make_zone_frame(UniversePtr zones,
                                 const std::vector<std::string>& district_of_zone,
                                 std::vector<double> population) {
    size_t n = static_cast<size_t>(zones->size());
    if (district_of_zone.size() != n || population.size() != n)
        throw std::invalid_argument("make_zone_frame: size mismatch");
    for (double p : population)
        if (!(p >= 0)) throw std::invalid_argument("negative population");
    ZoneFrame f;
    f.zones = std::move(zones);
    f.population = std::move(population);
    f.district_ids = district_of_zone;
    std::sort(f.district_ids.begin(), f.district_ids.end());
    f.district_ids.erase(std::unique(f.district_ids.begin(), f.district_ids.end()),
                         f.district_ids.end());
    f.district.reserve(n);
    for (const auto& d : district_of_zone) {
        auto it = std::lower_bound(f.district_ids.begin(), f.district_ids.end(), d);
        f.district.push_back(static_cast<int32_t>(it - f.district_ids.begin()));
    }
    f.mfa.assign(n, kResidual);
    return f;
}

/// District-level case table, rectangular over dates x districts.
struct DistrictCases {
    std::vector<std::string> district_ids;   // unique, sorted
    std::vector<Date> dates;                 // ascending
    std::vector<std::vector<double>> values; // [date index][district index]

    int district_index(const std::string& id) const {
        auto it = std::lower_bound(district_ids.begin(), district_ids.end(), id);
        if (it == district_ids.end() || *it != id) return -1;
        return static_cast<int>(it - district_ids.begin());
    }
};

/// Trailing window sums of a daily series: value(d) = sum over dates in
/// [d - window + 1, d]. The 7-day case series uses window = 7.
inline DistrictCases window_sum(const DistrictCases& daily, int window = 7) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    DistrictCases out{daily.district_ids, daily.dates, {}};
    size_t nd = daily.dates.size(), nc = daily.district_ids.size();
    out.values.assign(nd, std::vector<double>(nc, 0.0));
    size_t lo = 0;
    for (size_t t = 0; t < nd; ++t) {
        while (daily.dates[lo].days <= daily.dates[t].days - window) ++lo;
        for (size_t s = lo; s <= t; ++s)
            for (size_t c = 0; c < nc; ++c) out.values[t][c] += daily.values[s][c];
    }
    return out;
}

/// Spreads district cases over the district's zones proportionally to
/// population. The largest-population zone absorbs the floating-point
/// remainder so zone values sum exactly to the district value.
inline ZoneFrame redistribute_cases(const DistrictCases& districts, ZoneFrame zones) {
    size_t n = static_cast<size_t>(zones.zones->size());
    std::vector<int> column(zones.district_ids.size(), -1);
    for (size_t d = 0; d < zones.district_ids.size(); ++d) {
        column[d] = districts.district_index(zones.district_ids[d]);
        if (column[d] < 0)
            throw std::invalid_argument("district '" + zones.district_ids[d] +
                                        "' missing from case table");
    }
    std::vector<double> district_pop(zones.district_ids.size(), 0.0);
    std::vector<int32_t> heaviest(zones.district_ids.size(), -1);
    for (size_t i = 0; i < n; ++i) {
        size_t d = static_cast<size_t>(zones.district[i]);
        district_pop[d] += zones.population[i];
        if (heaviest[d] < 0 ||
            zones.population[i] > zones.population[static_cast<size_t>(heaviest[d])])
            heaviest[d] = static_cast<int32_t>(i);
    }

    zones.dates = districts.dates;
    zones.cases7.assign(districts.dates.size(), std::vector<double>(n, 0.0));
    for (size_t t = 0; t < districts.dates.size(); ++t) {
        std::vector<double>& row = zones.cases7[t];
        std::vector<double> assigned(zones.district_ids.size(), 0.0);
        for (size_t i = 0; i < n; ++i) {
            size_t d = static_cast<size_t>(zones.district[i]);
            double total = districts.values[t][static_cast<size_t>(column[d])];
            if (total == 0) continue;
            if (district_pop[d] <= 0)
                throw std::invalid_argument("district '" + zones.district_ids[d] +
                                            "' has cases but zero population");
            row[i] = total * zones.population[i] / district_pop[d];
            assigned[d] += row[i];
        }
        for (size_t d = 0; d < zones.district_ids.size(); ++d) {
            double total = districts.values[t][static_cast<size_t>(column[d])];
            if (total == 0 || heaviest[d] < 0) continue;
            row[static_cast<size_t>(heaviest[d])] += total - assigned[d];
        }
    }
    return zones;
}

/// Between/within decomposition of variance for a grouped sample; group ids
/// may be any integers (kResidual acts as one ordinary group).
struct EtaSquared {
    double value = 0; // ss_between / ss_total, 0 when ss_total is 0
    double ss_between = 0, ss_within = 0, ss_total = 0;
};

inline EtaSquared eta_squared(std::span<const double> y,
                              std::span<const int32_t> group) {
    if (y.size() != group.size())
        throw std::invalid_argument("eta_squared: size mismatch");
    if (y.empty()) throw std::invalid_argument("eta_squared: empty input");
    EtaSquared out;
    std::map<int32_t, std::pair<double, size_t>> acc; // group -> (sum, count)
    double grand = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        auto& [sum, count] = acc[group[i]];
        sum += y[i];
        ++count;
        grand += y[i];
    }
    grand /= static_cast<double>(y.size());
    for (const auto& [g, sc] : acc) {
        (void)g;
        double mean = sc.first / static_cast<double>(sc.second);
        out.ss_between += static_cast<double>(sc.second) * (mean - grand) * (mean - grand);
    }
    for (size_t i = 0; i < y.size(); ++i) {
        const auto& sc = acc[group[i]];
        double mean = sc.first / static_cast<double>(sc.second);
        out.ss_within += (y[i] - mean) * (y[i] - mean);
        out.ss_total += (y[i] - grand) * (y[i] - grand);
    }
    out.value = out.ss_total > 0 ? out.ss_between / out.ss_total : 0.0;
    return out;
}

/// One calendar week of the eta-squared comparison: the same response (the
/// 7-day counts at the week's last available date) grouped by MFA membership
/// (residual = one group) and by district.
struct WeeklyEta {
    IsoWeek week;
    Date first, last; // available dates covered by the week; last = snapshot
    double eta_mfa = 0;
    double eta_district = 0;
};

inline std::vector<WeeklyEta> weekly_eta_table(const ZoneFrame& zones,
                                               const Partition& mfa_partition) {
    require_same_universe(*zones.zones, *mfa_partition.universe, "weekly_eta_table");
    std::map<IsoWeek, std::pair<Date, Date>> range;
    for (Date d : zones.dates) {
        auto [it, fresh] = range.try_emplace(iso_week(d), std::pair{d, d});
        if (fresh) continue;
        if (d < it->second.first) it->second.first = d;
        if (it->second.second < d) it->second.second = d;
    }
    std::vector<WeeklyEta> out;
    out.reserve(range.size());
    for (const auto& [week, span] : range) {
        const auto& y = zones.cases7[static_cast<size_t>(zones.date_index(span.second))];
        out.push_back({week, span.first, span.second,
                       eta_squared(y, mfa_partition.assignment).value,
                       eta_squared(y, zones.district).value});
    }
    return out;
}

/// Centers and scales to standard deviation 1/2 (population sd), so binary
/// and continuous inputs live on a comparable scale.
inline std::vector<double> gelman_standardize(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("gelman_standardize: empty input");
    double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    if (var <= 0) throw NumericError("gelman_standardize: zero variance");
    double scale = 2.0 * std::sqrt(var);
    std::vector<double> out;
    out.reserve(x.size());
    for (double v : x) out.push_back((v - mean) / scale);
    return out;
}

/// Type-7 quantile (linear interpolation of order statistics).
inline double quantile(std::vector<double> x, double p) {
    if (x.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(x.begin(), x.end());
    double h = (static_cast<double>(x.size()) - 1.0) * p;
    size_t lo = static_cast<size_t>(h);
    if (lo + 1 >= x.size()) return x.back();
    return x[lo] + (h - static_cast<double>(lo)) * (x[lo + 1] - x[lo]);
}

struct Coefficient {
    std::string name;
    double estimate = 0, se = 0, stat = 0, p_value = 1;
};

struct RegressionResult {
    std::vector<Coefficient> coefficients;
    size_t n = 0, p = 0;
    double r2 = 0, adj_r2 = 0;       // OLS only
    double sigma2 = 0;               // residual variance
    bool random_intercept = false;
    double theta = 0;                // group variance / residual variance
    double group_variance = 0;
    double residual_variance = 0;
    bool singular_fit = false;       // group variance hit the zero boundary
    double reml_loglik = 0;
    int32_t reference_mfa = kResidual;

    const Coefficient* find(const std::string& name) const {
        for (const auto& c : coefficients)
            if (c.name == name) return &c;
        return nullptr;
    }
};

struct FitOptions {
    bool drop_zero_rows = false; // drop zones with a zero 7-day count
    double alpha = 0.01;         // significance level for classification
};

namespace detail {

struct Design {
    Mat X;
    std::vector<double> y;
    std::vector<int32_t> group;     // densified district index per row
    size_t n_groups = 0;
    std::vector<std::string> names; // column names
    std::vector<int32_t> mfa_ids;   // dummy column -> mfa id (dummy design only)
    int32_t reference = kResidual;
};

inline std::vector<size_t> design_rows(const ZoneFrame& zones, Date date,
                                       const FitOptions& opts) {
    int t = zones.date_index(date);
    if (t < 0) throw std::invalid_argument("no cases for date " + to_string(date));
    const auto& cases = zones.cases7[static_cast<size_t>(t)];
    std::vector<size_t> rows;
    for (size_t i = 0; i < cases.size(); ++i) {
        if (cases[i] < 0) throw std::invalid_argument("negative case count");
        if (opts.drop_zero_rows && cases[i] == 0) continue;
        rows.push_back(i);
    }
    if (rows.size() < 3)
        throw std::invalid_argument("need at least 3 zones with a defined response");
    return rows;
}

inline void fill_common(Design& d, const ZoneFrame& zones, Date date,
                        const std::vector<size_t>& rows, size_t mfa_cols) {
    const auto& cases = zones.cases7[static_cast<size_t>(zones.date_index(date))];
    std::vector<double> pop;
    pop.reserve(rows.size());
    for (size_t i : rows) pop.push_back(zones.population[i]);
    std::vector<double> pop_std = gelman_standardize(pop);

    size_t p = 2 + mfa_cols;
    d.X = Mat(rows.size(), p);
    d.y.reserve(rows.size());
    std::map<int32_t, int32_t> dense_group;
    for (size_t r = 0; r < rows.size(); ++r) {
        size_t i = rows[r];
        d.X.at(r, 0) = 1.0;
        d.X.at(r, p - 1) = pop_std[r];
        d.y.push_back(std::log1p(cases[i]));
        auto [git, fresh] = dense_group.try_emplace(
            zones.district[i], static_cast<int32_t>(dense_group.size()));
        (void)fresh;
        d.group.push_back(git->second);
    }
    d.n_groups = dense_group.size();
}

/// Indicator design: response log(1 + cases) on intercept, a single binary
/// "zone belongs to any proper MFA" column (unscaled, binary), and
/// standardized population.
inline Design build_indicator_design(const ZoneFrame& zones, Date date,
                                     const FitOptions& opts) {
    auto rows = design_rows(zones, date, opts);
    Design d;
    d.names = {"(Intercept)", "mfaInd", "population"};
    fill_common(d, zones, date, rows, 1);
    for (size_t r = 0; r < rows.size(); ++r)
        if (zones.mfa[rows[r]] != kResidual) d.X.at(r, 1) = 1.0;
    return d;
}

/// Dummy design: one column per MFA id present, reference level = residual
/// when present (else the smallest MFA id), plus standardized population.
inline Design build_dummy_design(const ZoneFrame& zones, Date date,
                                 const FitOptions& opts) {
    auto rows = design_rows(zones, date, opts);

    bool any_residual = false;
    std::vector<int32_t> present;
    for (size_t i : rows) {
        if (zones.mfa[i] == kResidual)
            any_residual = true;
        else
            present.push_back(zones.mfa[i]);
    }
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());

    Design d;
    d.reference =
        any_residual ? kResidual : (present.empty() ? kResidual : present.front());
    for (int32_t id : present)
        if (id != d.reference) d.mfa_ids.push_back(id);

    d.names.push_back("(Intercept)");
    for (int32_t id : d.mfa_ids) d.names.push_back("mfa" + std::to_string(id));
    d.names.push_back("population");
    fill_common(d, zones, date, rows, d.mfa_ids.size());

    std::map<int32_t, size_t> dummy_col;
    for (size_t k = 0; k < d.mfa_ids.size(); ++k) dummy_col[d.mfa_ids[k]] = 1 + k;
    for (size_t r = 0; r < rows.size(); ++r) {
        auto it = dummy_col.find(zones.mfa[rows[r]]);
        if (it != dummy_col.end()) d.X.at(r, it->second) = 1.0;
    }
    return d;
}

inline double two_sided_t_pvalue(double t, double df) {
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(dist, -std::fabs(t));
}

inline double two_sided_z_pvalue(double z) {
    return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

/// Ordinary least squares with classical (t-based) inference.
inline RegressionResult ols_fit(const Design& d) {
    size_t n = d.X.rows, p = d.X.cols;
    if (n <= p) throw NumericError("not enough rows for the design");

    Mat rinv;
    std::vector<double> beta = qr_least_squares(d.X, d.y, &rinv);

    double rss = 0, tss = 0, mean_y = 0;
    for (double v : d.y) mean_y += v;
    mean_y /= static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
        double fit = 0;
        for (size_t j = 0; j < p; ++j) fit += d.X.at(i, j) * beta[j];
        rss += (d.y[i] - fit) * (d.y[i] - fit);
        tss += (d.y[i] - mean_y) * (d.y[i] - mean_y);
    }
    double df = static_cast<double>(n - p);
    double sigma2 = rss / df;

    RegressionResult out;
    out.n = n;
    out.p = p;
    out.sigma2 = sigma2;
    out.residual_variance = sigma2;
    out.r2 = tss > 0 ? 1.0 - rss / tss : 0.0;
    out.adj_r2 = 1.0 - (1.0 - out.r2) * (static_cast<double>(n) - 1.0) / df;
    out.reference_mfa = d.reference;
    for (size_t k = 0; k < p; ++k) {
        double xtx_inv_kk = 0; // (X'X)^-1 = Rinv Rinv'
        for (size_t j = k; j < p; ++j) xtx_inv_kk += rinv.at(k, j) * rinv.at(k, j);
        Coefficient c;
        c.name = d.names[k];
        c.estimate = beta[k];
        c.se = std::sqrt(sigma2 * xtx_inv_kk);
        c.stat = c.se > 0 ? c.estimate / c.se : 0.0;
        c.p_value = two_sided_t_pvalue(c.stat, df);
        out.coefficients.push_back(std::move(c));
    }
    return out;
}

/// Sufficient statistics for the random-intercept profile likelihood.
struct RiStats {
    Mat xtx;                      // p x p
    std::vector<double> xty;      // p
    double yty = 0;
    std::vector<std::vector<double>> sx; // per group: column sums of X
    std::vector<double> sy;              // per group: sum of y
    std::vector<size_t> ng;              // per group: row count
    size_t n = 0, p = 0;
};

inline RiStats ri_stats(const Design& d) {
    RiStats s;
    s.n = d.X.rows;
    s.p = d.X.cols;
    s.xtx = Mat(s.p, s.p);
    s.xty.assign(s.p, 0.0);
    s.sx.assign(d.n_groups, std::vector<double>(s.p, 0.0));
    s.sy.assign(d.n_groups, 0.0);
    s.ng.assign(d.n_groups, 0);
    for (size_t i = 0; i < s.n; ++i) {
        size_t g = static_cast<size_t>(d.group[i]);
        for (size_t a = 0; a < s.p; ++a) {
            for (size_t b = a; b < s.p; ++b)
                s.xtx.at(a, b) += d.X.at(i, a) * d.X.at(i, b);
            s.xty[a] += d.X.at(i, a) * d.y[i];
            s.sx[g][a] += d.X.at(i, a);
        }
        s.yty += d.y[i] * d.y[i];
        s.sy[g] += d.y[i];
        ++s.ng[g];
    }
    for (size_t a = 0; a < s.p; ++a)
        for (size_t b = 0; b < a; ++b) s.xtx.at(a, b) = s.xtx.at(b, a);
    return s;
}

struct RiProfile {
    bool ok = false;
    double loglik = -HUGE_VAL; // restricted, constants included
    std::vector<double> beta;
    double sigma2 = 0;
    Mat m_chol; // Cholesky factor of X' V0^-1 X
};

/// Restricted log likelihood profiled over beta and sigma^2, at variance
/// ratio theta = sigma_group^2 / sigma_resid^2. Uses the Woodbury form of
/// V0^-1 = I - (theta / (1 + theta n_j)) J per group block.
inline RiProfile ri_profile(const RiStats& s, double theta) {
    RiProfile out;
    Mat m = s.xtx;
    std::vector<double> v = s.xty;
    double q = s.yty;
    double logdet_v0 = 0;
    for (size_t g = 0; g < s.ng.size(); ++g) {
        double nj = static_cast<double>(s.ng[g]);
        double c = theta / (1.0 + theta * nj);
        logdet_v0 += std::log1p(theta * nj);
        for (size_t a = 0; a < s.p; ++a) {
            for (size_t b = 0; b < s.p; ++b)
                m.at(a, b) -= c * s.sx[g][a] * s.sx[g][b];
            v[a] -= c * s.sx[g][a] * s.sy[g];
        }
        q -= c * s.sy[g] * s.sy[g];
    }
    out.m_chol = m;
    if (!cholesky(out.m_chol)) return out;
    out.beta = v;
    cholesky_solve(out.m_chol, out.beta);
    double rss = q;
    for (size_t a = 0; a < s.p; ++a) rss -= v[a] * out.beta[a];
    double df = static_cast<double>(s.n - s.p);
    if (!(rss > 0) || df <= 0) return out;
    out.sigma2 = rss / df;
    out.loglik = -0.5 * (df * std::log(2.0 * std::numbers::pi * out.sigma2) +
                         logdet_v0 + cholesky_log_det(out.m_chol) + df);
    out.ok = std::isfinite(out.loglik);
    return out;
}

} // namespace detail

/// Eq.-style association fit: OLS of log(1 + cases) on intercept, the binary
/// "belongs to any MFA" indicator, and standardized population, with
/// classical standard errors and two-sided t p-values.
inline RegressionResult fit_mfa_indicator_model(const ZoneFrame& zones, Date date,
                                                const FitOptions& opts = {}) {
    return detail::ols_fit(detail::build_indicator_design(zones, date, opts));
}

/// Random intercept per district, REML. Fixed effects are per-MFA dummies
/// (reference: residual) plus standardized population. The variance ratio is
/// profiled on a coarse log grid and refined by golden-section search; a
/// boundary optimum (theta -> 0) is reported as a singular fit, equal to OLS
/// coefficients.
inline RegressionResult fit_mfa_random_intercept_model(const ZoneFrame& zones,
                                                       Date date,
                                                       const FitOptions& opts = {}) {
    detail::Design d = detail::build_dummy_design(zones, date, opts);
    if (d.n_groups < 2)
        throw std::invalid_argument("random intercept needs at least 2 districts");
    if (d.mfa_ids.empty())
        throw std::invalid_argument("random intercept needs at least 2 MFA levels");
    if (d.X.rows <= d.X.cols) throw NumericError("not enough rows for the design");
    detail::RiStats s = detail::ri_stats(d);

    auto value = [&](double theta) { return detail::ri_profile(s, theta); };

    detail::RiProfile at_zero = value(0.0);
    if (!at_zero.ok) throw NumericError("random intercept: design is singular");

    double best_theta = 0.0;
    double best_ll = at_zero.loglik;
    std::vector<double> grid;
    for (double e = -8.0; e <= 8.0 + 1e-9; e += 0.25) grid.push_back(std::pow(10.0, e));
    size_t best_idx = static_cast<size_t>(-1);
    for (size_t i = 0; i < grid.size(); ++i) {
        detail::RiProfile pr = value(grid[i]);
        if (pr.ok && pr.loglik > best_ll) {
            best_ll = pr.loglik;
            best_theta = grid[i];
            best_idx = i;
        }
    }

    if (best_idx != static_cast<size_t>(-1)) {
        double lo = best_idx == 0 ? 0.0 : grid[best_idx - 1];
        double hi = best_idx + 1 < grid.size() ? grid[best_idx + 1]
                                               : grid[best_idx] * 10.0;
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = lo, b = hi;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = value(x1).loglik, f2 = value(x2).loglik;
        while (b - a > 1e-8 * (1.0 + b)) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = value(x2).loglik;
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = value(x1).loglik;
            }
        }
        double mid = 0.5 * (a + b);
        detail::RiProfile pr = value(mid);
        if (pr.ok && pr.loglik > best_ll) {
            best_ll = pr.loglik;
            best_theta = mid;
        }
    }

    bool singular = best_theta < 1e-8 || at_zero.loglik >= best_ll;
    if (singular) best_theta = 0.0;
    detail::RiProfile fit = value(best_theta);
    if (!fit.ok) throw NumericError("random intercept: profile evaluation failed");

    RegressionResult out;
    out.random_intercept = true;
    out.n = s.n;
    out.p = s.p;
    out.theta = best_theta;
    out.sigma2 = fit.sigma2;
    out.residual_variance = fit.sigma2;
    out.group_variance = best_theta * fit.sigma2;
    out.singular_fit = singular;
    out.reml_loglik = fit.loglik;
    out.reference_mfa = d.reference;

    Mat cov = cholesky_inverse(fit.m_chol); // (X' V0^-1 X)^-1
    for (size_t k = 0; k < s.p; ++k) {
        Coefficient c;
        c.name = d.names[k];
        c.estimate = fit.beta[k];
        c.se = std::sqrt(fit.sigma2 * cov.at(k, k));
        c.stat = c.se > 0 ? c.estimate / c.se : 0.0;
        c.p_value = detail::two_sided_z_pvalue(c.stat);
        out.coefficients.push_back(std::move(c));
    }
    return out;
}

enum class Significance { Negative, None, Positive };

inline Significance classify(const Coefficient& c, double alpha) {
    if (c.p_value < alpha) return c.estimate > 0 ? Significance::Positive
                                                 : Significance::Negative;
    return Significance::None;
}

inline const char* to_string(Significance s) {
    switch (s) {
        case Significance::Negative: return "negative";
        case Significance::Positive: return "positive";
        default: return "none";
    }
}

/// Per-date model fits plus the date x MFA significance grid taken from the
/// random-intercept dummies. Dates whose fit fails are recorded and skipped.
struct TimelinePoint {
    Date date;
    std::optional<RegressionResult> ols;
    std::optional<RegressionResult> random_intercept;
    std::string error;
};

struct TimelineCell {
    Date date;
    int32_t mfa_id;
    double estimate = 0;
    double p_value = 1;
    Significance sig = Significance::None;
};

struct CoefficientTimeline {
    std::vector<TimelinePoint> points;
    std::vector<TimelineCell> grid;
};

inline CoefficientTimeline coefficient_timeline(const ZoneFrame& zones,
                                                const std::vector<Date>& dates,
                                                const FitOptions& opts = {}) {
    CoefficientTimeline out;
    for (Date date : dates) {
        TimelinePoint point;
        point.date = date;
        try {
            point.ols = fit_mfa_indicator_model(zones, date, opts);
            point.random_intercept = fit_mfa_random_intercept_model(zones, date, opts);
        } catch (const std::exception& e) {
            point.error = e.what();
        }
        if (point.random_intercept) {
            for (const auto& c : point.random_intercept->coefficients) {
                if (c.name.rfind("mfa", 0) != 0) continue;
                TimelineCell cell;
                cell.date = date;
                cell.mfa_id = static_cast<int32_t>(std::stol(c.name.substr(3)));
                cell.estimate = c.estimate;
                cell.p_value = c.p_value;
                cell.sig = classify(c, opts.alpha);
                out.grid.push_back(cell);
            }
        }
        out.points.push_back(std::move(point));
    }
    return out;
}

/// MFAs grouped by their significance history (ever-negative beats
/// ever-positive beats never-significant), with population and case-burden
/// quartiles per class.
struct MfaClassSummary {
    Significance cls = Significance::None;
    int32_t n_mfas = 0;
    double pop_q1 = 0, pop_median = 0, pop_mean = 0, pop_q3 = 0;
    double cases_q1 = 0, cases_median = 0, cases_mean = 0, cases_q3 = 0;
};

inline std::vector<MfaClassSummary> summarize_mfas(const ZoneFrame& zones,
                                                   const Partition& partition,
                                                   const std::vector<TimelineCell>& grid) {
    require_same_universe(*zones.zones, *partition.universe, "summarize_mfas");
    std::map<int32_t, Significance> cls;
    for (const auto& cell : grid) {
        auto [it, fresh] = cls.try_emplace(cell.mfa_id, cell.sig);
        if (fresh) continue;
        if (cell.sig == Significance::Negative)
            it->second = Significance::Negative;
        else if (cell.sig == Significance::Positive &&
                 it->second != Significance::Negative)
            it->second = Significance::Positive;
    }

    std::map<int32_t, double> pop, burden;
    for (size_t i = 0; i < static_cast<size_t>(zones.zones->size()); ++i) {
        int32_t m = partition.assignment[i];
        if (m == kResidual) continue;
        pop[m] += zones.population[i];
        for (const auto& day : zones.cases7) burden[m] += day[i];
    }

    std::vector<MfaClassSummary> out;
    for (Significance target :
         {Significance::Positive, Significance::Negative, Significance::None}) {
        MfaClassSummary row;
        row.cls = target;
        std::vector<double> pops, burdens;
        for (const auto& [id, p] : pop) {
            auto it = cls.find(id);
            Significance got = it == cls.end() ? Significance::None : it->second;
            if (got != target) continue;
            ++row.n_mfas;
            pops.push_back(p);
            burdens.push_back(burden[id]);
        }
        if (row.n_mfas > 0) {
            auto mean = [](const std::vector<double>& v) {
                double s = 0;
                for (double x : v) s += x;
                return s / static_cast<double>(v.size());
            };
            row.pop_q1 = quantile(pops, 0.25);
            row.pop_median = quantile(pops, 0.5);
            row.pop_q3 = quantile(pops, 0.75);
            row.pop_mean = mean(pops);
            row.cases_q1 = quantile(burdens, 0.25);
            row.cases_median = quantile(burdens, 0.5);
            row.cases_q3 = quantile(burdens, 0.75);
            row.cases_mean = mean(burdens);
        }
        out.push_back(row);
    }
    return out;
}

} // namespace mfa
