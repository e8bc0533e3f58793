#pragma once

// Reference implementations used only by the tests. Everything here is
// recomputed from first principles (dense matrices, exhaustive enumeration,
// textbook formulas) so library results get a genuinely independent check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>
#include <vector>

#include "mfa/odm.hpp"
#include "mfa/partition.hpp"
#include "mfa/rng.hpp"

namespace oracle {

// ---------------------------------------------------------------- graphs

struct DenseGraph {
    int n = 0;
    std::vector<double> w; // row-major, symmetric, zero diagonal

    double at(int i, int j) const {
        return w[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)];
    }
    double& at(int i, int j) {
        return w[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)];
    }

    double strength(int i) const {
        double s = 0;
        for (int j = 0; j < n; ++j) s += at(i, j);
        return s;
    }

    double total_weight() const {
        double s = 0;
        for (double v : w) s += v;
        return 0.5 * s;
    }
};

inline DenseGraph dense_from_adjacency(const mfa::AdjacencyMatrix& adj) {
    DenseGraph g;
    g.n = adj.universe->size();
    g.w.assign(static_cast<size_t>(g.n) * static_cast<size_t>(g.n), 0.0);
    for (int32_t i = 0; i < g.n; ++i)
        for (const auto& [j, v] : adj.weights.row(i)) g.at(i, j) = v;
    return g;
}

/// Q = (1/2m) sum over all ordered pairs of (w_ij - k_i k_j / 2m) [c_i = c_j].
inline double modularity(const DenseGraph& g, const std::vector<int>& label) {
    std::vector<double> k(static_cast<size_t>(g.n), 0.0);
    double two_m = 0;
    for (int i = 0; i < g.n; ++i) {
        k[static_cast<size_t>(i)] = g.strength(i);
        two_m += k[static_cast<size_t>(i)];
    }
    if (two_m <= 0) throw std::invalid_argument("modularity of an empty graph");
    double q = 0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            if (label[static_cast<size_t>(i)] == label[static_cast<size_t>(j)])
                q += g.at(i, j) - k[static_cast<size_t>(i)] * k[static_cast<size_t>(j)] / two_m;
    return q / two_m;
}

namespace detail {

template <typename F>
void partitions_rec(std::vector<int>& a, size_t i, int mx, F& f) {
    if (i == a.size()) {
        f(static_cast<const std::vector<int>&>(a));
        return;
    }
    for (int v = 0; v <= mx + 1; ++v) {
        a[i] = v;
        partitions_rec(a, i + 1, std::max(mx, v), f);
    }
}

} // namespace detail

/// Calls f(label) once for every set partition of {0..n-1}, encoded as a
/// restricted growth string (label[0] = 0, label[i] <= 1 + max of the prefix).
template <typename F>
void for_each_partition(int n, F&& f) {
    if (n <= 0) return;
    std::vector<int> a(static_cast<size_t>(n), 0);
    detail::partitions_rec(a, 1, 0, f);
}

/// Exhaustive maximum modularity over every partition of the vertex set.
inline double best_modularity(const DenseGraph& g) {
    double best = -HUGE_VAL;
    for_each_partition(g.n, [&](const std::vector<int>& label) {
        best = std::max(best, modularity(g, label));
    });
    return best;
}

/// Community label per vertex; residual members become singleton labels.
inline std::vector<int> labels_of(const mfa::Partition& p) {
    std::vector<int> out(static_cast<size_t>(p.size()));
    int next = p.num_groups;
    for (int32_t i = 0; i < p.size(); ++i) {
        int32_t a = p.assignment[static_cast<size_t>(i)];
        out[static_cast<size_t>(i)] = a == mfa::kResidual ? next++ : a;
    }
    return out;
}

// ---------------------------------------------- partition similarity

inline double dice(const std::set<int32_t>& a, const std::set<int32_t>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("dice of an empty set");
    size_t common = 0;
    for (int32_t x : a) common += b.count(x);
    return 2.0 * static_cast<double>(common) / static_cast<double>(a.size() + b.size());
}

inline std::vector<std::set<int32_t>> group_sets(const mfa::Partition& p,
                                                 bool include_residual = true) {
    std::map<int32_t, std::set<int32_t>> by_id;
    for (int32_t i = 0; i < p.size(); ++i) {
        int32_t a = p.assignment[static_cast<size_t>(i)];
        if (a == mfa::kResidual && !include_residual) continue;
        by_id[a].insert(i);
    }
    std::vector<std::set<int32_t>> out;
    out.reserve(by_id.size());
    for (auto& [id, members] : by_id) {
        (void)id;
        out.push_back(std::move(members));
    }
    return out;
}

inline double sim_directed(const std::vector<std::set<int32_t>>& from,
                           const std::vector<std::set<int32_t>>& to) {
    if (from.empty() || to.empty()) return 0.0;
    double total = 0;
    for (const auto& g : from) {
        double best = 0;
        for (const auto& h : to) best = std::max(best, dice(g, h));
        total += best;
    }
    return total / static_cast<double>(from.size());
}

inline double sim_symmetric(const mfa::Partition& a, const mfa::Partition& b,
                            bool include_residual = true) {
    auto ga = group_sets(a, include_residual);
    auto gb = group_sets(b, include_residual);
    return 0.5 * (sim_directed(ga, gb) + sim_directed(gb, ga));
}

// ------------------------------------------------- dense linear algebra

/// Gauss-Jordan solve with partial pivoting; a is k x k row-major.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
    size_t k = b.size();
    if (a.size() != k * k) throw std::invalid_argument("solve_dense: shape mismatch");
    for (size_t col = 0; col < k; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < k; ++r)
            if (std::fabs(a[r * k + col]) > std::fabs(a[piv * k + col])) piv = r;
        if (a[piv * k + col] == 0.0) throw std::invalid_argument("solve_dense: singular");
        if (piv != col) {
            for (size_t c = 0; c < k; ++c) std::swap(a[piv * k + c], a[col * k + c]);
            std::swap(b[piv], b[col]);
        }
        double d = a[col * k + col];
        for (size_t c = 0; c < k; ++c) a[col * k + c] /= d;
        b[col] /= d;
        for (size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            double f = a[r * k + col];
            if (f == 0.0) continue;
            for (size_t c = 0; c < k; ++c) a[r * k + c] -= f * a[col * k + c];
            b[r] -= f * b[col];
        }
    }
    return b;
}

inline double det3(const std::vector<double>& m) {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

/// Cramer's rule on a 3 x 3 system.
inline std::vector<double> solve3(const std::vector<double>& m, const std::vector<double>& b) {
    double d = det3(m);
    if (d == 0.0) throw std::invalid_argument("solve3: singular");
    std::vector<double> out(3);
    for (int c = 0; c < 3; ++c) {
        std::vector<double> mc = m;
        for (int r = 0; r < 3; ++r) mc[static_cast<size_t>(r) * 3 + static_cast<size_t>(c)] = b[static_cast<size_t>(r)];
        out[static_cast<size_t>(c)] = det3(mc) / d;
    }
    return out;
}

/// Inverse of a 3 x 3 matrix by the adjugate.
inline std::vector<double> inverse3(const std::vector<double>& m) {
    double d = det3(m);
    if (d == 0.0) throw std::invalid_argument("inverse3: singular");
    std::vector<double> inv(9);
    inv[0] = (m[4] * m[8] - m[5] * m[7]) / d;
    inv[1] = (m[2] * m[7] - m[1] * m[8]) / d;
    inv[2] = (m[1] * m[5] - m[2] * m[4]) / d;
    inv[3] = (m[5] * m[6] - m[3] * m[8]) / d;
    inv[4] = (m[0] * m[8] - m[2] * m[6]) / d;
    inv[5] = (m[2] * m[3] - m[0] * m[5]) / d;
    inv[6] = (m[3] * m[7] - m[4] * m[6]) / d;
    inv[7] = (m[1] * m[6] - m[0] * m[7]) / d;
    inv[8] = (m[0] * m[4] - m[1] * m[3]) / d;
    return inv;
}

// ------------------------------------------------------------- OLS

struct Ols {
    std::vector<double> beta;
    std::vector<double> se;
    double sigma2 = 0;
    double r2 = 0;
    double adj_r2 = 0;
};

/// Normal-equations least squares; x is row-major n x p. Uses the explicit
/// 3 x 3 Cramer solve when p = 3, Gauss-Jordan otherwise.
inline Ols ols(const std::vector<double>& x, const std::vector<double>& y,
               size_t n, size_t p) {
    std::vector<double> xtx(p * p, 0.0), xty(p, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t a = 0; a < p; ++a) {
            for (size_t b = 0; b < p; ++b) xtx[a * p + b] += x[i * p + a] * x[i * p + b];
            xty[a] += x[i * p + a] * y[i];
        }
    }
    Ols out;
    std::vector<double> inv;
    if (p == 3) {
        out.beta = solve3(xtx, xty);
        inv = inverse3(xtx);
    } else {
        out.beta = solve_dense(xtx, xty);
        std::vector<double> aug = xtx;
        inv.assign(p * p, 0.0);
        for (size_t c = 0; c < p; ++c) {
            std::vector<double> e(p, 0.0);
            e[c] = 1.0;
            std::vector<double> col = solve_dense(aug, e);
            for (size_t r = 0; r < p; ++r) inv[r * p + c] = col[r];
        }
    }
    double rss = 0, tss = 0, mean = 0;
    for (size_t i = 0; i < n; ++i) mean += y[i];
    mean /= static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
        double fit = 0;
        for (size_t a = 0; a < p; ++a) fit += x[i * p + a] * out.beta[a];
        rss += (y[i] - fit) * (y[i] - fit);
        tss += (y[i] - mean) * (y[i] - mean);
    }
    double df = static_cast<double>(n - p);
    out.sigma2 = rss / df;
    out.r2 = tss > 0 ? 1.0 - rss / tss : 0.0;
    out.adj_r2 = 1.0 - (1.0 - out.r2) * (static_cast<double>(n) - 1.0) / df;
    out.se.resize(p);
    for (size_t a = 0; a < p; ++a) out.se[a] = std::sqrt(out.sigma2 * inv[a * p + a]);
    return out;
}

// ------------------------------------------------------------ REML

namespace detail {

/// In-place lower Cholesky of a dense row-major n x n matrix.
inline bool chol_dense(std::vector<double>& a, size_t n) {
    for (size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0)) return false;
        double root = std::sqrt(d);
        a[j * n + j] = root;
        for (size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / root;
        }
        for (size_t i = 0; i < j; ++i) a[i * n + j] = 0.0;
    }
    return true;
}

inline void forward_solve(const std::vector<double>& l, size_t n, std::vector<double>& b) {
    for (size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (size_t k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
        b[i] = s / l[i * n + i];
    }
}

} // namespace detail

struct RemlValue {
    bool ok = false;
    double loglik = -HUGE_VAL;
    std::vector<double> beta;
    double sigma2 = 0;
};

/// Restricted likelihood at variance ratio theta, from the dense definition:
/// V = I + theta ZZ', whitened by an explicit n x n Cholesky factor.
inline RemlValue reml_at(const std::vector<double>& x, const std::vector<double>& y,
                         const std::vector<int32_t>& group, size_t n, size_t p,
                         double theta) {
    RemlValue out;
    std::vector<double> v(n * n, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            v[i * n + j] = (i == j ? 1.0 : 0.0) + (group[i] == group[j] ? theta : 0.0);
    if (!detail::chol_dense(v, n)) return out;
    double logdet_v = 0;
    for (size_t i = 0; i < n; ++i) logdet_v += 2.0 * std::log(v[i * n + i]);

    std::vector<double> wy = y;
    detail::forward_solve(v, n, wy);
    std::vector<double> wx(n * p, 0.0);
    std::vector<double> col(n);
    for (size_t c = 0; c < p; ++c) {
        for (size_t i = 0; i < n; ++i) col[i] = x[i * p + c];
        detail::forward_solve(v, n, col);
        for (size_t i = 0; i < n; ++i) wx[i * p + c] = col[i];
    }

    std::vector<double> m(p * p, 0.0), rhs(p, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t a = 0; a < p; ++a) {
            for (size_t b = 0; b < p; ++b) m[a * p + b] += wx[i * p + a] * wx[i * p + b];
            rhs[a] += wx[i * p + a] * wy[i];
        }
    std::vector<double> m_chol = m;
    if (!detail::chol_dense(m_chol, p)) return out;
    double logdet_m = 0;
    for (size_t a = 0; a < p; ++a) logdet_m += 2.0 * std::log(m_chol[a * p + a]);

    out.beta = solve_dense(m, rhs);
    double rss = 0;
    for (size_t i = 0; i < n; ++i) rss += wy[i] * wy[i];
    for (size_t a = 0; a < p; ++a) rss -= rhs[a] * out.beta[a];
    double df = static_cast<double>(n - p);
    if (!(rss > 0) || df <= 0) return out;
    out.sigma2 = rss / df;
    out.loglik = -0.5 * (df * std::log(2.0 * std::numbers::pi * out.sigma2) + logdet_v +
                         logdet_m + df);
    out.ok = std::isfinite(out.loglik);
    return out;
}

struct RemlGrid {
    double theta = 0;
    double loglik = -HUGE_VAL;
    double log10_step = 0;
};

/// Argmax of the restricted likelihood over `points` log-spaced ratios.
inline RemlGrid reml_grid(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<int32_t>& group, size_t n, size_t p,
                          int points = 1000, double log10_lo = -8.0,
                          double log10_hi = 8.0) {
    RemlGrid out;
    out.log10_step = (log10_hi - log10_lo) / static_cast<double>(points - 1);
    for (int k = 0; k < points; ++k) {
        double theta = std::pow(10.0, log10_lo + out.log10_step * static_cast<double>(k));
        RemlValue val = reml_at(x, y, group, n, p, theta);
        if (val.ok && val.loglik > out.loglik) {
            out.loglik = val.loglik;
            out.theta = theta;
        }
    }
    return out;
}

/// Closed-form REML variance components for a balanced one-way layout
/// (k groups, m observations each, intercept-only mean): the residual
/// variance is the within mean square and the group variance is
/// (between mean square - within mean square) / m.
struct AnovaReml {
    double sigma2_e = 0;
    double sigma2_u = 0;
    double theta = 0;
};

inline AnovaReml balanced_anova_reml(const std::vector<double>& y, size_t k, size_t m) {
    if (y.size() != k * m || k < 2 || m < 2)
        throw std::invalid_argument("balanced_anova_reml: bad layout");
    double grand = 0;
    std::vector<double> gmean(k, 0.0);
    for (size_t g = 0; g < k; ++g) {
        for (size_t i = 0; i < m; ++i) gmean[g] += y[g * m + i];
        grand += gmean[g];
        gmean[g] /= static_cast<double>(m);
    }
    grand /= static_cast<double>(k * m);
    double ssb = 0, ssw = 0;
    for (size_t g = 0; g < k; ++g) {
        ssb += static_cast<double>(m) * (gmean[g] - grand) * (gmean[g] - grand);
        for (size_t i = 0; i < m; ++i)
            ssw += (y[g * m + i] - gmean[g]) * (y[g * m + i] - gmean[g]);
    }
    AnovaReml out;
    out.sigma2_e = ssw / static_cast<double>(k * (m - 1));
    double msb = ssb / static_cast<double>(k - 1);
    out.sigma2_u = std::max(0.0, (msb - out.sigma2_e) / static_cast<double>(m));
    out.theta = out.sigma2_u / out.sigma2_e;
    return out;
}

// ------------------------------------------------------------- random

/// Standard normal draw (Box-Muller on SplitMix64 uniforms).
inline double normal(mfa::SplitMix64& rng) {
    double u1 = 1.0 - rng.uniform();
    double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace oracle
