#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfa/graph.hpp"
#include "mfa/partition.hpp"

namespace mfa {

/// One agglomeration step: the two merged communities named by their smallest
/// member vertex, the Ward cost of the merge, and modularity after it.
struct MergeStep {
    int32_t rep_a, rep_b; // rep_a < rep_b
    double delta_sigma;
    double modularity_after;
};

/// Full merge history over the non-isolated vertices, one tree per connected
/// component (communities only merge across edges, so components never join).
/// Exactly active.size() - component count merges. best_labels records the
/// best locally-improved trajectory state found while the dendrogram was
/// built; cut_at_max_modularity returns it when present.
struct Dendrogram {
    UniversePtr universe;
    std::vector<int32_t> active;   // vertices with positive strength, ascending
    std::vector<int32_t> isolated; // zero strength, ascending
    std::vector<MergeStep> merges;
    double modularity_singletons = 0;  // modularity before any merge
    std::vector<int32_t> best_labels;  // group per vertex, -1 = isolated
    double best_modularity = 0;
};

namespace detail {

using Pvec = std::vector<std::pair<int32_t, double>>; // sorted by vertex

/// Squared probability distance between two communities, coordinates scaled
/// by vertex strength.
inline double walk_distance2(const Pvec& a, const Pvec& b,
                             const std::vector<double>& strength) {
    double s = 0;
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            s += a[i].second * a[i].second / strength[static_cast<size_t>(a[i].first)];
            ++i;
        } else if (i == a.size() || b[j].first < a[i].first) {
            s += b[j].second * b[j].second / strength[static_cast<size_t>(b[j].first)];
            ++j;
        } else {
            double d = a[i].second - b[j].second;
            s += d * d / strength[static_cast<size_t>(a[i].first)];
            ++i;
            ++j;
        }
    }
    return s;
}

inline Pvec merge_pvec(const Pvec& a, double wa, const Pvec& b, double wb) {
    Pvec out;
    out.reserve(a.size() + b.size());
    double den = wa + wb;
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.emplace_back(a[i].first, wa * a[i].second / den);
            ++i;
        } else if (i == a.size() || b[j].first < a[i].first) {
            out.emplace_back(b[j].first, wb * b[j].second / den);
            ++j;
        } else {
            out.emplace_back(a[i].first, (wa * a[i].second + wb * b[j].second) / den);
            ++i;
            ++j;
        }
    }
    return out;
}

/// Renumbers groups by first appearance in vertex order, so equal groupings
/// get identical label vectors. Labels < 0 are kept as-is.
inline int32_t compact_labels(std::vector<int32_t>& label) {
    std::map<int32_t, int32_t> remap;
    for (auto& l : label) {
        if (l < 0) continue;
        auto [it, fresh] = remap.try_emplace(l, static_cast<int32_t>(remap.size()));
        l = it->second;
    }
    return static_cast<int32_t>(remap.size());
}

/// Modularity of a labeling; vertices with label < 0 contribute nothing
/// (they are isolated and carry no strength).
inline double labels_modularity(const MobilityGraph& g,
                                const std::vector<int32_t>& label,
                                int32_t n_groups) {
    const double m = g.total_weight;
    std::vector<double> in(static_cast<size_t>(n_groups), 0.0);
    std::vector<double> tot(static_cast<size_t>(n_groups), 0.0);
    for (int32_t v = 0; v < g.size(); ++v)
        if (label[static_cast<size_t>(v)] >= 0)
            tot[static_cast<size_t>(label[static_cast<size_t>(v)])] +=
                g.strength[static_cast<size_t>(v)];
    for (const auto& e : g.edges)
        if (label[static_cast<size_t>(e.a)] == label[static_cast<size_t>(e.b)])
            in[static_cast<size_t>(label[static_cast<size_t>(e.a)])] += e.w;
    double q = 0;
    for (int32_t c = 0; c < n_groups; ++c) {
        double frac = tot[static_cast<size_t>(c)] / (2.0 * m);
        q += in[static_cast<size_t>(c)] / m - frac * frac;
    }
    return q;
}

/// Deterministic hill climb on a group labeling: passes of single-vertex
/// moves (to an adjacent group or a fresh singleton), alternating with
/// whole-group merges, while modularity strictly increases. Ties prefer the
/// smallest target label; the result is compacted by first appearance.
inline void improve_labels(const MobilityGraph& g, std::vector<int32_t>& label) {
    const int32_t n = g.size();
    const double m = g.total_weight;
    constexpr double kMinGain = 1e-12;
    int32_t n_groups = compact_labels(label);
    std::vector<double> tot(static_cast<size_t>(n) * 2 + 2, 0.0);
    auto rebuild_tot = [&] {
        std::fill(tot.begin(), tot.end(), 0.0);
        for (int32_t v = 0; v < n; ++v)
            if (label[static_cast<size_t>(v)] >= 0)
                tot[static_cast<size_t>(label[static_cast<size_t>(v)])] +=
                    g.strength[static_cast<size_t>(v)];
    };
    rebuild_tot();
    int32_t next_fresh = n_groups;

    auto move_pass = [&] {
        bool any = false, moved = true;
        int rounds = 0;
        while (moved && rounds++ < 200) {
            moved = false;
            for (int32_t v = 0; v < n; ++v) {
                double dv = g.strength[static_cast<size_t>(v)];
                if (dv <= 0) continue;
                std::map<int32_t, double> wto;
                for (const auto& [k, w] : g.adjacency[static_cast<size_t>(v)])
                    wto[label[static_cast<size_t>(k)]] += w;
                int32_t cur = label[static_cast<size_t>(v)];
                double base = wto[cur] / m -
                              dv * (tot[static_cast<size_t>(cur)] - dv) / (2.0 * m * m);
                double best_gain = kMinGain;
                int32_t best_to = cur;
                for (const auto& [lab, w] : wto) {
                    if (lab == cur) continue;
                    double gain =
                        w / m - dv * tot[static_cast<size_t>(lab)] / (2.0 * m * m) - base;
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_to = lab;
                    }
                }
                if (0.0 - base > best_gain) {
                    best_gain = 0.0 - base;
                    best_to = next_fresh;
                }
                if (best_to == cur) continue;
                if (best_to == next_fresh) {
                    if (static_cast<size_t>(next_fresh) >= tot.size())
                        tot.resize(tot.size() * 2, 0.0);
                    ++next_fresh;
                }
                tot[static_cast<size_t>(cur)] -= dv;
                tot[static_cast<size_t>(best_to)] += dv;
                label[static_cast<size_t>(v)] = best_to;
                moved = true;
                any = true;
            }
        }
        return any;
    };

    auto merge_pass = [&] {
        bool any = false;
        for (;;) {
            std::map<std::pair<int32_t, int32_t>, double> cross;
            for (const auto& e : g.edges) {
                int32_t la = label[static_cast<size_t>(e.a)];
                int32_t lb = label[static_cast<size_t>(e.b)];
                if (la == lb) continue;
                cross[{std::min(la, lb), std::max(la, lb)}] += e.w;
            }
            double best_gain = kMinGain;
            std::pair<int32_t, int32_t> best{-1, -1};
            for (const auto& [pr, w] : cross) {
                double gain = w / m - tot[static_cast<size_t>(pr.first)] *
                                          tot[static_cast<size_t>(pr.second)] /
                                          (2.0 * m * m);
                if (gain > best_gain) {
                    best_gain = gain;
                    best = pr;
                }
            }
            if (best.first < 0) return any;
            for (int32_t v = 0; v < n; ++v)
                if (label[static_cast<size_t>(v)] == best.second)
                    label[static_cast<size_t>(v)] = best.first;
            tot[static_cast<size_t>(best.first)] += tot[static_cast<size_t>(best.second)];
            tot[static_cast<size_t>(best.second)] = 0;
            any = true;
        }
    };

    for (int guard = 0; guard < 64; ++guard) {
        move_pass();
        if (!merge_pass()) break;
    }
    compact_labels(label);
}

} // namespace detail

/// Walktrap agglomeration: communities merge greedily by the smallest Ward
/// cost of their lazy walk_length-step walk distance (each step keeps half
/// the mass in place, so even- and odd-distance structure share one
/// distribution). Only adjacent pairs compete, hence one tree per connected
/// component; ties break on the smallest member vertex. The merge list puts
/// every component's modularity-raising prefix first, so the max-Q step is
/// their combination, and the best locally-improved trajectory state is
/// recorded for cut_at_max_modularity.
inline Dendrogram walktrap(const MobilityGraph& g, int walk_length = 4) {
    if (walk_length < 1) throw std::invalid_argument("walk_length must be >= 1");
    Dendrogram dendro;
    dendro.universe = g.universe;
    int32_t n = g.size();
    for (int32_t i = 0; i < n; ++i)
        (g.strength[static_cast<size_t>(i)] > 0 ? dendro.active : dendro.isolated)
            .push_back(i);
    if (dendro.active.empty()) return dendro;

    const double m = g.total_weight;
    double q = 0;
    for (int32_t v : dendro.active) {
        double frac = g.strength[static_cast<size_t>(v)] / (2.0 * m);
        q -= frac * frac;
    }
    dendro.modularity_singletons = q;

    struct Comm {
        int32_t rep = 0;
        int32_t size = 0;
        double in = 0, tot = 0;
        detail::Pvec pvec;
        std::map<int32_t, double> nbr; // community id -> cross weight
        bool alive = false;
    };
    std::vector<Comm> comms;
    comms.reserve(dendro.active.size() * 2);

    // lazy walk_length-step transition probabilities from each active vertex
    {
        std::vector<double> cur(static_cast<size_t>(n), 0.0);
        std::vector<double> nxt(static_cast<size_t>(n), 0.0);
        std::vector<int32_t> touched, touched_next;
        for (int32_t v : dendro.active) {
            cur[static_cast<size_t>(v)] = 1.0;
            touched.assign(1, v);
            for (int step = 0; step < walk_length; ++step) {
                touched_next = touched;
                for (int32_t u : touched)
                    nxt[static_cast<size_t>(u)] = 0.5 * cur[static_cast<size_t>(u)];
                for (int32_t u : touched) {
                    double pu = cur[static_cast<size_t>(u)];
                    double du = g.strength[static_cast<size_t>(u)];
                    for (const auto& [k, w] : g.adjacency[static_cast<size_t>(u)]) {
                        if (nxt[static_cast<size_t>(k)] == 0.0)
                            touched_next.push_back(k);
                        nxt[static_cast<size_t>(k)] += 0.5 * pu * w / du;
                    }
                }
                for (int32_t u : touched) cur[static_cast<size_t>(u)] = 0.0;
                std::sort(touched_next.begin(), touched_next.end());
                touched_next.erase(
                    std::unique(touched_next.begin(), touched_next.end()),
                    touched_next.end());
                std::swap(cur, nxt);
                std::swap(touched, touched_next);
                for (size_t i = 0; i < nxt.size(); ++i) nxt[i] = 0.0;
            }
            Comm c;
            c.rep = v;
            c.size = 1;
            c.tot = g.strength[static_cast<size_t>(v)];
            c.alive = true;
            c.pvec.reserve(touched.size());
            for (int32_t k : touched) {
                c.pvec.emplace_back(k, cur[static_cast<size_t>(k)]);
                cur[static_cast<size_t>(k)] = 0.0;
            }
            comms.push_back(std::move(c));
        }
    }

    std::vector<int32_t> comm_of(static_cast<size_t>(n), -1);
    for (size_t c = 0; c < comms.size(); ++c)
        comm_of[static_cast<size_t>(comms[c].rep)] = static_cast<int32_t>(c);
    for (const auto& e : g.edges) {
        int32_t ca = comm_of[static_cast<size_t>(e.a)];
        int32_t cb = comm_of[static_cast<size_t>(e.b)];
        comms[static_cast<size_t>(ca)].nbr[cb] = e.w;
        comms[static_cast<size_t>(cb)].nbr[ca] = e.w;
    }

    struct Cand {
        double ds;
        int32_t ra, rb; // community reps, ra < rb
        int32_t ia, ib; // community indexes
    };
    struct CandOrder { // priority_queue keeps the *smallest* cand on top
        bool operator()(const Cand& a, const Cand& b) const {
            if (a.ds != b.ds) return a.ds > b.ds;
            if (a.ra != b.ra) return a.ra > b.ra;
            return a.rb > b.rb;
        }
    };
    std::priority_queue<Cand, std::vector<Cand>, CandOrder> heap;

    const double inv_n = 1.0 / static_cast<double>(dendro.active.size());
    auto make_cand = [&](int32_t ia, int32_t ib) {
        const Comm& a = comms[static_cast<size_t>(ia)];
        const Comm& b = comms[static_cast<size_t>(ib)];
        double r2 = detail::walk_distance2(a.pvec, b.pvec, g.strength);
        double sa = a.size, sb = b.size;
        double ds = inv_n * (sa * sb / (sa + sb)) * r2;
        Cand c{ds, std::min(a.rep, b.rep), std::max(a.rep, b.rep), ia, ib};
        return c;
    };

    size_t n_alive = comms.size();
    for (size_t c = 0; c < comms.size(); ++c)
        for (const auto& [nb, w] : comms[c].nbr) {
            (void)w;
            if (nb > static_cast<int32_t>(c))
                heap.push(make_cand(static_cast<int32_t>(c), nb));
        }

    while (n_alive > 1) {
        int32_t ia = -1, ib = -1;
        double ds = 0;
        while (!heap.empty()) {
            const Cand& top = heap.top();
            if (comms[static_cast<size_t>(top.ia)].alive &&
                comms[static_cast<size_t>(top.ib)].alive) {
                ia = top.ia;
                ib = top.ib;
                ds = top.ds;
                heap.pop();
                break;
            }
            heap.pop();
        }
        if (ia < 0) break; // only non-adjacent communities left

        Comm& a = comms[static_cast<size_t>(ia)];
        Comm& b = comms[static_cast<size_t>(ib)];
        double cross = 0;
        if (auto it = a.nbr.find(ib); it != a.nbr.end()) cross = it->second;

        Comm merged;
        merged.rep = std::min(a.rep, b.rep);
        merged.size = a.size + b.size;
        merged.in = a.in + b.in + cross;
        merged.tot = a.tot + b.tot;
        merged.alive = true;
        merged.pvec = detail::merge_pvec(a.pvec, a.size, b.pvec, b.size);
        for (const auto& [nb, w] : a.nbr)
            if (nb != ib) merged.nbr[nb] += w;
        for (const auto& [nb, w] : b.nbr)
            if (nb != ia) merged.nbr[nb] += w;

        auto comm_term = [&](const Comm& c) {
            double frac = c.tot / (2.0 * m);
            return c.in / m - frac * frac;
        };
        q += comm_term(merged) - comm_term(a) - comm_term(b);

        int32_t rep_a = std::min(a.rep, b.rep);
        int32_t rep_b = std::max(a.rep, b.rep);
        a.alive = b.alive = false;
        --n_alive;
        detail::Pvec().swap(a.pvec);
        detail::Pvec().swap(b.pvec);
        a.nbr.clear();
        b.nbr.clear();

        int32_t id = static_cast<int32_t>(comms.size());
        for (const auto& [nb, w] : merged.nbr) {
            Comm& other = comms[static_cast<size_t>(nb)];
            other.nbr.erase(ia);
            other.nbr.erase(ib);
            other.nbr[id] = w;
        }
        comms.push_back(std::move(merged));
        for (const auto& [nb, w] : comms.back().nbr) {
            (void)w;
            heap.push(make_cand(id, nb));
        }
        dendro.merges.push_back({rep_a, rep_b, ds, q});
    }

    // union-find over graph edges, shared by the reorder and the state scan
    std::vector<int32_t> comp_root(static_cast<size_t>(n));
    std::iota(comp_root.begin(), comp_root.end(), 0);
    auto comp_find = [&](int32_t x) {
        while (comp_root[static_cast<size_t>(x)] != x) {
            comp_root[static_cast<size_t>(x)] =
                comp_root[static_cast<size_t>(comp_root[static_cast<size_t>(x)])];
            x = comp_root[static_cast<size_t>(x)];
        }
        return x;
    };
    for (const auto& e : g.edges) {
        int32_t ra = comp_find(e.a), rb = comp_find(e.b);
        if (ra != rb) comp_root[static_cast<size_t>(std::max(ra, rb))] = std::min(ra, rb);
    }

    // stable reorder: every component's modularity-raising prefix first
    if (!dendro.merges.empty()) {
        std::vector<double> dq(dendro.merges.size());
        for (size_t i = 0; i < dendro.merges.size(); ++i) {
            double prev = i == 0 ? dendro.modularity_singletons
                                 : dendro.merges[i - 1].modularity_after;
            dq[i] = dendro.merges[i].modularity_after - prev;
        }
        std::map<int32_t, std::vector<size_t>> steps_of; // component -> merge idx
        for (size_t i = 0; i < dendro.merges.size(); ++i)
            steps_of[comp_find(dendro.merges[i].rep_a)].push_back(i);
        std::vector<char> in_prefix(dendro.merges.size(), 0);
        for (const auto& [comp, steps] : steps_of) {
            (void)comp;
            double cum = 0, best = 0;
            size_t best_len = 0;
            for (size_t j = 0; j < steps.size(); ++j) {
                cum += dq[steps[j]];
                if (cum > best) {
                    best = cum;
                    best_len = j + 1;
                }
            }
            for (size_t j = 0; j < best_len; ++j) in_prefix[steps[j]] = 1;
        }
        std::vector<MergeStep> reordered;
        reordered.reserve(dendro.merges.size());
        std::vector<double> rdq;
        rdq.reserve(dendro.merges.size());
        for (int phase = 1; phase >= 0; --phase)
            for (size_t i = 0; i < dendro.merges.size(); ++i)
                if (in_prefix[i] == phase) {
                    reordered.push_back(dendro.merges[i]);
                    rdq.push_back(dq[i]);
                }
        double cum = dendro.modularity_singletons;
        for (size_t i = 0; i < reordered.size(); ++i) {
            cum += rdq[i];
            reordered[i].modularity_after = cum;
        }
        dendro.merges = std::move(reordered);
    }

    // best locally-improved state over the whole trajectory (earliest wins
    // exact ties)
    {
        std::vector<int32_t> parent(static_cast<size_t>(n));
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int32_t x) {
            while (parent[static_cast<size_t>(x)] != x) {
                parent[static_cast<size_t>(x)] =
                    parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
                x = parent[static_cast<size_t>(x)];
            }
            return x;
        };
        std::vector<int32_t> labels(static_cast<size_t>(n), -1);
        dendro.best_modularity = -std::numeric_limits<double>::infinity();
        for (size_t s = 0; s <= dendro.merges.size(); ++s) {
            if (s > 0) {
                int32_t ra = find(dendro.merges[s - 1].rep_a);
                int32_t rb = find(dendro.merges[s - 1].rep_b);
                if (ra != rb)
                    parent[static_cast<size_t>(std::max(ra, rb))] = std::min(ra, rb);
            }
            for (int32_t v : dendro.active) labels[static_cast<size_t>(v)] = find(v);
            detail::improve_labels(g, labels);
            double state_q = detail::labels_modularity(
                g, labels, *std::max_element(labels.begin(), labels.end()) + 1);
            if (state_q > dendro.best_modularity) {
                dendro.best_modularity = state_q;
                dendro.best_labels = labels;
            }
            std::fill(labels.begin(), labels.end(), -1);
        }
    }
    return dendro;
}

/// Returns the best partition found along the dendrogram: the recorded
/// locally-improved state when present, otherwise the merge prefix with
/// maximal modularity (earliest step on exact ties; step 0 is the
/// all-singleton state). Isolated vertices fall into the residual; active
/// vertices form proper groups, possibly of size one.
inline Partition cut_at_max_modularity(const Dendrogram& dendro,
                                       std::string label = {},
                                       std::optional<Date> date = {}) {
    if (dendro.active.empty())
        return partition_from_groups(dendro.universe, {}, std::move(label), date);

    if (!dendro.best_labels.empty()) {
        std::map<int32_t, std::vector<int32_t>> by_group;
        for (int32_t v : dendro.active)
            by_group[dendro.best_labels[static_cast<size_t>(v)]].push_back(v);
        std::vector<std::vector<int32_t>> groups;
        groups.reserve(by_group.size());
        for (auto& [id, members] : by_group) {
            (void)id;
            groups.push_back(std::move(members));
        }
        return partition_from_groups(dendro.universe, std::move(groups),
                                     std::move(label), date);
    }

    size_t best = 0;
    double best_q = dendro.modularity_singletons;
    for (size_t s = 0; s < dendro.merges.size(); ++s) {
        if (dendro.merges[s].modularity_after > best_q) {
            best_q = dendro.merges[s].modularity_after;
            best = s + 1;
        }
    }

    std::vector<int32_t> parent(static_cast<size_t>(dendro.universe->size()));
    for (size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int32_t>(i);
    auto find = [&](int32_t x) {
        while (parent[static_cast<size_t>(x)] != x) {
            parent[static_cast<size_t>(x)] =
                parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
            x = parent[static_cast<size_t>(x)];
        }
        return x;
    };
    for (size_t s = 0; s < best; ++s) {
        int32_t ra = find(dendro.merges[s].rep_a);
        int32_t rb = find(dendro.merges[s].rep_b);
        if (ra == rb) continue;
        if (ra < rb)
            parent[static_cast<size_t>(rb)] = ra;
        else
            parent[static_cast<size_t>(ra)] = rb;
    }

    std::map<int32_t, std::vector<int32_t>> by_root;
    for (int32_t v : dendro.active) by_root[find(v)].push_back(v);
    std::vector<std::vector<int32_t>> groups;
    groups.reserve(by_root.size());
    for (auto& [root, members] : by_root) {
        (void)root;
        groups.push_back(std::move(members));
    }
    return partition_from_groups(dendro.universe, std::move(groups), std::move(label),
                                 date);
}

} // namespace mfa
