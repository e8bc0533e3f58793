#include <catch_amalgamated.hpp>

#include <sstream>
#include <tuple>
#include <vector>

#include "mfa/community.hpp"
#include "mfa/synth.hpp"
#include "oracles.hpp"

namespace {

/// Symmetric adjacency over n ids v0..; pairs are added in both directions.
mfa::AdjacencyMatrix make_adj(int32_t n,
                              const std::vector<std::tuple<int32_t, int32_t, double>>& pairs) {
    std::vector<std::string> ids;
    for (int32_t i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
    auto universe = std::make_shared<const mfa::AreaUniverse>(std::move(ids));
    mfa::AdjacencyMatrix adj{mfa::Date{0}, universe, mfa::SparseRows(n)};
    for (const auto& [i, j, w] : pairs) {
        adj.weights.add(i, j, w);
        adj.weights.add(j, i, w);
    }
    adj.weights.finalize();
    return adj;
}

mfa::AdjacencyMatrix two_triangles() {
    return make_adj(6, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0},
                        {3, 4, 1.0}, {4, 5, 1.0}, {3, 5, 1.0}});
}

mfa::Partition run_pipeline(const mfa::AdjacencyMatrix& adj, int walk_length = 4) {
    return mfa::collapse_singletons(
        mfa::cut_at_max_modularity(mfa::walktrap(mfa::build_graph(adj), walk_length)));
}

} // namespace

TEST_CASE("build_graph keeps one undirected edge per pair") {
    auto g = mfa::build_graph(make_adj(3, {{0, 1, 0.5}}));
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].a == 0);
    CHECK(g.edges[0].b == 1);
    CHECK(g.edges[0].w == 0.5);
    CHECK(g.strength == std::vector<double>{0.5, 0.5, 0.0});
    CHECK(g.total_weight == 0.5);
    CHECK(g.isolated() == std::vector<int32_t>{2});
}

TEST_CASE("build_graph of an empty adjacency keeps isolated vertices") {
    auto g = mfa::build_graph(make_adj(5, {}));
    CHECK(g.edges.empty());
    CHECK(g.isolated().size() == 5);
    CHECK(g.total_weight == 0.0);
}

TEST_CASE("build_graph mirrors symmetrize output") {
    // both directions between v0,v1; one direction v1 -> v2
    auto adj = make_adj(3, {{0, 1, 1.0}, {1, 2, 0.5}});
    auto g = mfa::build_graph(adj);
    REQUIRE(g.edges.size() == 2);
    CHECK(g.edges[0].w == 1.0);
    CHECK(g.edges[1].w == 0.5);
}

TEST_CASE("build_graph rejects invalid adjacency input") {
    auto bad_asym = make_adj(2, {});
    {
        mfa::SparseRows w(2);
        w.add(0, 1, 0.5); // missing the mirrored entry
        w.finalize();
        mfa::AdjacencyMatrix adj{mfa::Date{0}, bad_asym.universe, std::move(w)};
        CHECK_THROWS_AS(mfa::build_graph(adj), std::invalid_argument);
    }
    {
        mfa::SparseRows w(2);
        w.add(0, 0, 1.0); // nonzero diagonal
        w.finalize();
        mfa::AdjacencyMatrix adj{mfa::Date{0}, bad_asym.universe, std::move(w)};
        CHECK_THROWS_AS(mfa::build_graph(adj), std::invalid_argument);
    }
    {
        mfa::SparseRows w(2);
        w.add(0, 1, -0.5);
        w.add(1, 0, -0.5);
        w.finalize();
        mfa::AdjacencyMatrix adj{mfa::Date{0}, bad_asym.universe, std::move(w)};
        CHECK_THROWS_AS(mfa::build_graph(adj), std::invalid_argument);
    }
}

TEST_CASE("modularity of the two-triangle split is exactly one half") {
    auto g = mfa::build_graph(two_triangles());
    auto p = mfa::partition_from_groups(g.universe, {{0, 1, 2}, {3, 4, 5}});
    CHECK(mfa::modularity(g, p) == Catch::Approx(0.5).margin(1e-12));
    // the oracle's dense double-sum formula agrees
    auto dense = oracle::dense_from_adjacency(two_triangles());
    CHECK(oracle::modularity(dense, oracle::labels_of(p)) ==
          Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("modularity counts residual members as singleton communities") {
    auto g = mfa::build_graph(two_triangles());
    auto grouped = mfa::partition_from_groups(g.universe, {{0, 1, 2}, {3, 4, 5}});
    auto with_residual = mfa::partition_from_groups(g.universe, {{0, 1, 2}});
    auto dense = oracle::dense_from_adjacency(two_triangles());
    CHECK(mfa::modularity(g, with_residual) ==
          Catch::Approx(oracle::modularity(dense, oracle::labels_of(with_residual)))
              .margin(1e-12));
    CHECK(mfa::modularity(g, with_residual) < mfa::modularity(g, grouped));
}

TEST_CASE("modularity of an empty graph is an error") {
    auto g = mfa::build_graph(make_adj(2, {}));
    auto p = mfa::partition_from_groups(g.universe, {{0, 1}});
    CHECK_THROWS_AS(mfa::modularity(g, p), std::invalid_argument);
}

TEST_CASE("walktrap recovers two disjoint triangles") {
    auto g = mfa::build_graph(two_triangles());
    auto dendro = mfa::walktrap(g);
    CHECK(dendro.active.size() == 6);
    CHECK(dendro.merges.size() == 4); // two merges per triangle, trees never join
    auto cut = mfa::cut_at_max_modularity(dendro);
    auto expected = mfa::partition_from_groups(g.universe, {{0, 1, 2}, {3, 4, 5}});
    CHECK(mfa::same_grouping(cut, expected));
    CHECK(mfa::modularity(g, cut) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("walktrap grouping ignores vertex numbering") {
    // the same two triangles, interleaved over even and odd indices
    auto adj = make_adj(6, {{0, 2, 1.0}, {2, 4, 1.0}, {0, 4, 1.0},
                            {1, 3, 1.0}, {3, 5, 1.0}, {1, 5, 1.0}});
    auto cut = mfa::cut_at_max_modularity(mfa::walktrap(mfa::build_graph(adj)));
    auto expected = mfa::partition_from_groups(adj.universe, {{0, 2, 4}, {1, 3, 5}});
    CHECK(mfa::same_grouping(cut, expected));
}

TEST_CASE("walktrap on a single edge yields one merge") {
    auto g = mfa::build_graph(make_adj(2, {{0, 1, 0.5}}));
    auto dendro = mfa::walktrap(g);
    REQUIRE(dendro.merges.size() == 1);
    auto cut = mfa::cut_at_max_modularity(dendro);
    CHECK(cut.num_groups == 1);
    CHECK(cut.residual_size() == 0);
}

TEST_CASE("walktrap of an empty graph returns an empty dendrogram") {
    auto g = mfa::build_graph(make_adj(5, {}));
    auto dendro = mfa::walktrap(g);
    CHECK(dendro.active.empty());
    CHECK(dendro.isolated.size() == 5);
    CHECK(dendro.merges.empty());
    auto cut = mfa::cut_at_max_modularity(dendro);
    CHECK(cut.num_groups == 0);
    CHECK(cut.residual_size() == 5);
}

TEST_CASE("walktrap rejects an invalid walk length") {
    auto g = mfa::build_graph(make_adj(2, {{0, 1, 1.0}}));
    CHECK_THROWS_AS(mfa::walktrap(g, 0), std::invalid_argument);
}

TEST_CASE("complete graph stays one community") {
    auto adj = make_adj(4, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0},
                            {1, 2, 1.0}, {1, 3, 1.0}, {2, 3, 1.0}});
    auto g = mfa::build_graph(adj);
    auto cut = mfa::cut_at_max_modularity(mfa::walktrap(g));
    CHECK(cut.num_groups == 1);
    CHECK(cut.group_sizes() == std::vector<int32_t>{4});
    // exhaustive search over all 15 partitions of 4 elements agrees
    auto dense = oracle::dense_from_adjacency(adj);
    CHECK(oracle::best_modularity(dense) == Catch::Approx(0.0).margin(1e-12));
    CHECK(mfa::modularity(g, cut) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("cut_at_max_modularity prefers the earliest exact tie") {
    auto universe = mfa::AreaUniverse::from_ids({"a", "b", "c", "d"});
    mfa::Dendrogram dendro;
    dendro.universe = universe;
    dendro.active = {0, 1, 2, 3};
    dendro.merges = {{0, 1, 0.0, 0.2}, {2, 3, 0.0, 0.2}, {0, 2, 0.0, 0.2}};

    dendro.modularity_singletons = 0.2; // four-way tie: keep the singleton state
    auto all_single = mfa::cut_at_max_modularity(dendro);
    CHECK(all_single.num_groups == 4);

    dendro.modularity_singletons = 0.1; // tie among the three merges: first wins
    auto first_merge = mfa::cut_at_max_modularity(dendro);
    auto expected =
        mfa::partition_from_groups(universe, {{0, 1}, {2}, {3}});
    CHECK(mfa::same_grouping(first_merge, expected));
}

TEST_CASE("walktrap is deterministic") {
    auto adj = mfa::synth::random_graph(30, 0.2, 99);
    auto g = mfa::build_graph(adj);
    auto a = mfa::cut_at_max_modularity(mfa::walktrap(g));
    auto b = mfa::cut_at_max_modularity(mfa::walktrap(g));
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("walktrap cut is near-optimal on small random graphs") {
    int exact = 0, total = 0;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        auto adj = mfa::synth::random_graph(7, 0.4, seed);
        auto g = mfa::build_graph(adj);
        if (g.total_weight <= 0) continue;
        auto cut = mfa::cut_at_max_modularity(mfa::walktrap(g));
        auto dense = oracle::dense_from_adjacency(adj);
        double got = oracle::modularity(dense, oracle::labels_of(cut));
        double best = oracle::best_modularity(dense);
        CHECK(got >= 0.9 * best - 1e-12);
        exact += got >= best - 1e-9 ? 1 : 0;
        ++total;
    }
    CHECK(total > 0);
    CHECK(exact >= total / 2);
}

TEST_CASE("collapse_singletons moves one-member groups to the residual") {
    auto universe = mfa::AreaUniverse::from_ids({"a", "b", "c"});
    auto p = mfa::partition_from_groups(universe, {{0, 1}, {2}});
    auto collapsed = mfa::collapse_singletons(p);
    CHECK(collapsed.num_groups == 1);
    CHECK(collapsed.group_sizes() == std::vector<int32_t>{2});
    CHECK(collapsed.assignment[2] == mfa::kResidual);
}

TEST_CASE("collapse_singletons of an all-singleton partition is all residual") {
    auto universe = mfa::AreaUniverse::from_ids({"a", "b", "c"});
    auto p = mfa::partition_from_groups(universe, {{0}, {1}, {2}});
    auto collapsed = mfa::collapse_singletons(p);
    CHECK(collapsed.num_groups == 0);
    CHECK(collapsed.residual_size() == 3);
}

TEST_CASE("a diagonal-only day is entirely residual") {
    auto universe = mfa::AreaUniverse::from_ids({"a", "b", "c"});
    mfa::DailyOdm odm{mfa::parse_date("2020-02-03"), universe, mfa::SparseRows(3)};
    for (int32_t i = 0; i < 3; ++i) odm.counts.add(i, i, 100.0);
    odm.counts.finalize();
    auto result = mfa::daily_mfa_detail(odm);
    CHECK(result.partition.num_groups == 0);
    CHECK(result.partition.residual_size() == 3);
    CHECK(result.modularity == 0.0);
    CHECK(result.n_groups == 0);
    CHECK(result.n_residual == 3);
}

TEST_CASE("identical days produce identical partitions") {
    mfa::synth::Spec spec;
    spec.seed = 5;
    spec.n_areas = 16;
    spec.start = mfa::parse_date("2020-02-03");
    spec.end = mfa::parse_date("2020-02-03");
    spec.regimes = {{spec.start, {8, 8}}};
    auto day = mfa::synth::gen_odm_series(spec).front();
    std::vector<mfa::DailyOdm> days;
    days.push_back(day);
    days.push_back(day);
    auto parts = mfa::daily_mfas(days);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].assignment == parts[1].assignment);
}

TEST_CASE("a planted four-block day is recovered exactly") {
    mfa::synth::Spec spec;
    spec.seed = 11;
    spec.n_areas = 32;
    spec.start = mfa::parse_date("2020-02-03");
    spec.end = mfa::parse_date("2020-02-03");
    spec.regimes = {{spec.start, {8, 8, 8, 8}}};
    auto days = mfa::synth::gen_odm_series(spec);
    auto planted = mfa::synth::planted_partition(spec, days[0].universe, spec.start);
    auto parts = mfa::daily_mfas(days);
    REQUIRE(parts.size() == 1);
    CHECK(mfa::same_grouping(parts[0], planted));
    CHECK(parts[0].date == spec.start);
}

TEST_CASE("parallel day processing matches the serial order") {
    mfa::synth::Spec spec;
    spec.seed = 3;
    spec.n_areas = 24;
    spec.start = mfa::parse_date("2020-02-03");
    spec.end = mfa::parse_date("2020-02-12");
    spec.regimes = {{spec.start, {8, 8, 8}}};
    spec.noise = 0.05;
    auto days = mfa::synth::gen_odm_series(spec);
    auto serial = mfa::daily_mfas(days, {}, 1);
    auto parallel = mfa::daily_mfas(days, {}, 4);
    REQUIRE(serial.size() == parallel.size());
    for (size_t i = 0; i < serial.size(); ++i)
        CHECK(serial[i].assignment == parallel[i].assignment);
}
