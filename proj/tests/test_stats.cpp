#include <catch_amalgamated.hpp>

#include <memory>
#include <string>
#include <vector>

#include "mfa/rng.hpp"
#include "mfa/stats.hpp"
#include "oracles.hpp"

namespace {

mfa::UniversePtr uni(int n) {
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("z" + std::to_string(i));
    return std::make_shared<const mfa::AreaUniverse>(std::move(ids));
}

} // namespace

TEST_CASE("window_sum takes trailing sums over consecutive days") {
    mfa::DistrictCases daily{{"d1"}, {}, {}};
    for (int t = 0; t < 9; ++t) {
        daily.dates.push_back(mfa::Date{t});
        daily.values.push_back({static_cast<double>(t + 1)});
    }
    auto weekly = mfa::window_sum(daily, 7);
    CHECK(weekly.values[0][0] == 1.0);
    CHECK(weekly.values[1][0] == 3.0);
    CHECK(weekly.values[6][0] == 28.0); // 1 + ... + 7
    CHECK(weekly.values[7][0] == 35.0); // 2 + ... + 8
    CHECK(weekly.values[8][0] == 42.0); // 3 + ... + 9

    auto identity = mfa::window_sum(daily, 1);
    for (int t = 0; t < 9; ++t) CHECK(identity.values[t][0] == daily.values[t][0]);

    CHECK_THROWS_AS(mfa::window_sum(daily, 0), std::invalid_argument);
}

TEST_CASE("window_sum respects gaps in the date axis") {
    mfa::DistrictCases daily{{"d1"}, {mfa::Date{0}, mfa::Date{3}, mfa::Date{8}}, {}};
    daily.values = {{10.0}, {20.0}, {40.0}};
    auto weekly = mfa::window_sum(daily, 7);
    CHECK(weekly.values[0][0] == 10.0);
    CHECK(weekly.values[1][0] == 30.0); // days 0 and 3 both inside [-3, 3]
    CHECK(weekly.values[2][0] == 60.0); // day 0 falls out of [2, 8]
}

TEST_CASE("cases are redistributed proportionally to population") {
    auto frame = mfa::make_zone_frame(uni(2), {"d1", "d1"}, {30.0, 70.0});
    mfa::DistrictCases cases{{"d1"}, {mfa::Date{0}}, {{100.0}}};
    auto out = mfa::redistribute_cases(cases, frame);
    CHECK(out.cases7[0][0] == Catch::Approx(30.0).margin(1e-12));
    CHECK(out.cases7[0][1] == Catch::Approx(70.0).margin(1e-12));
    CHECK(out.dates == cases.dates);
}

TEST_CASE("zero-population zones receive nothing") {
    auto frame = mfa::make_zone_frame(uni(2), {"d1", "d1"}, {0.0, 50.0});
    mfa::DistrictCases cases{{"d1"}, {mfa::Date{0}}, {{100.0}}};
    auto out = mfa::redistribute_cases(cases, frame);
    CHECK(out.cases7[0][0] == 0.0);
    CHECK(out.cases7[0][1] == Catch::Approx(100.0).margin(1e-12));
}

TEST_CASE("redistribution conserves each district's total") {
    std::vector<std::string> dist{"a", "a", "a", "b", "b", "b", "c", "c", "c"};
    mfa::SplitMix64 rng(7);
    std::vector<double> pop;
    for (int i = 0; i < 9; ++i) pop.push_back(1.0 + static_cast<double>(rng.below(1000)));
    auto frame = mfa::make_zone_frame(uni(9), dist, pop);
    mfa::DistrictCases cases{{"a", "b", "c"}, {mfa::Date{0}, mfa::Date{1}}, {}};
    cases.values = {{13.0, 250.5, 7.25}, {0.0, 1000000.125, 3.0}};
    auto out = mfa::redistribute_cases(cases, frame);
    for (size_t t = 0; t < 2; ++t) {
        for (size_t d = 0; d < 3; ++d) {
            double sum = 0;
            for (size_t i = 0; i < 9; ++i)
                if (out.district[i] == static_cast<int32_t>(d)) sum += out.cases7[t][i];
            CHECK(sum == Catch::Approx(cases.values[t][d]).margin(1e-9));
        }
    }
}

TEST_CASE("redistribution rejects inconsistent inputs") {
    auto frame = mfa::make_zone_frame(uni(2), {"d1", "d2"}, {10.0, 0.0});
    {
        mfa::DistrictCases cases{{"d1"}, {mfa::Date{0}}, {{5.0}}};
        CHECK_THROWS_AS(mfa::redistribute_cases(cases, frame), std::invalid_argument);
    }
    {
        // zero-population district with nonzero cases
        mfa::DistrictCases cases{{"d1", "d2"}, {mfa::Date{0}}, {{5.0, 5.0}}};
        CHECK_THROWS_AS(mfa::redistribute_cases(cases, frame), std::invalid_argument);
    }
    {
        // zero cases in the empty district are fine
        mfa::DistrictCases cases{{"d1", "d2"}, {mfa::Date{0}}, {{5.0, 0.0}}};
        auto out = mfa::redistribute_cases(cases, frame);
        CHECK(out.cases7[0][1] == 0.0);
    }
}

TEST_CASE("eta_squared is one for a perfect grouping and zero for a single group") {
    std::vector<double> y{2.0, 2.0, 5.0, 5.0, 9.0, 9.0};
    std::vector<int32_t> group{0, 0, 1, 1, 2, 2};
    auto r = mfa::eta_squared(y, group);
    CHECK(r.value == Catch::Approx(1.0).margin(1e-12));
    CHECK(r.ss_within == Catch::Approx(0.0).margin(1e-12));

    std::vector<int32_t> single(6, 0);
    CHECK(mfa::eta_squared(y, single).value == Catch::Approx(0.0).margin(1e-12));

    std::vector<double> flat(6, 3.0);
    CHECK(mfa::eta_squared(flat, group).value == 0.0); // zero total variance
}

TEST_CASE("eta_squared decomposes the total sum of squares") {
    mfa::SplitMix64 rng(41);
    std::vector<double> y;
    std::vector<int32_t> group;
    for (int i = 0; i < 60; ++i) {
        group.push_back(static_cast<int32_t>(rng.below(5)));
        y.push_back(static_cast<double>(group.back()) + oracle::normal(rng));
    }
    auto r = mfa::eta_squared(y, group);
    CHECK(r.ss_between + r.ss_within ==
          Catch::Approx(r.ss_total).epsilon(1e-12));
    CHECK(r.value > 0.0);
    CHECK(r.value < 1.0);

    // affine transformations leave the ratio unchanged
    std::vector<double> scaled;
    for (double v : y) scaled.push_back(-3.5 * v + 11.0);
    CHECK(mfa::eta_squared(scaled, group).value ==
          Catch::Approx(r.value).margin(1e-12));
}

TEST_CASE("eta_squared treats the residual id as an ordinary group") {
    std::vector<double> y{1.0, 2.0, 7.0, 9.0};
    std::vector<int32_t> with_residual{mfa::kResidual, mfa::kResidual, 0, 0};
    std::vector<int32_t> renamed{5, 5, 0, 0};
    CHECK(mfa::eta_squared(y, with_residual).value ==
          mfa::eta_squared(y, renamed).value);
}

TEST_CASE("eta_squared validates its input") {
    std::vector<double> y{1.0};
    std::vector<int32_t> group{0, 1};
    CHECK_THROWS_AS(mfa::eta_squared(y, group), std::invalid_argument);
    CHECK_THROWS_AS(mfa::eta_squared(std::vector<double>{}, std::vector<int32_t>{}),
                    std::invalid_argument);
}

TEST_CASE("weekly eta table snapshots the last date of each week") {
    auto frame = mfa::make_zone_frame(uni(4), {"d1", "d1", "d2", "d2"},
                                      {10.0, 10.0, 10.0, 10.0});
    frame.dates = {mfa::parse_date("2020-03-02"), mfa::parse_date("2020-03-03"),
                   mfa::parse_date("2020-03-09")};
    frame.cases7 = {{1.0, 2.0, 3.0, 4.0},
                    {2.0, 2.0, 8.0, 8.0},
                    {5.0, 5.0, 6.0, 7.0}};
    auto aligned = mfa::partition_from_groups(frame.zones, {{0, 1}, {2, 3}});
    frame.apply_partition(aligned);

    auto table = mfa::weekly_eta_table(frame, aligned);
    REQUIRE(table.size() == 2);
    CHECK(table[0].week == mfa::IsoWeek{2020, 10});
    CHECK(table[0].first == mfa::parse_date("2020-03-02"));
    CHECK(table[0].last == mfa::parse_date("2020-03-03"));
    CHECK(table[1].week == mfa::IsoWeek{2020, 11});
    CHECK(table[1].first == mfa::parse_date("2020-03-09"));
    CHECK(table[1].last == mfa::parse_date("2020-03-09"));

    // MFA grouping equals the district grouping here, so the etas coincide
    for (const auto& row : table) CHECK(row.eta_mfa == row.eta_district);
    CHECK(table[0].eta_mfa ==
          mfa::eta_squared(frame.cases7[1], aligned.assignment).value);
    CHECK(table[0].eta_mfa == Catch::Approx(1.0).margin(1e-12)); // 2,2 vs 8,8
}

TEST_CASE("weekly eta table separates MFA and district groupings") {
    auto frame = mfa::make_zone_frame(uni(4), {"d1", "d1", "d2", "d2"},
                                      {10.0, 10.0, 10.0, 10.0});
    frame.dates = {mfa::parse_date("2020-03-02")};
    frame.cases7 = {{5.0, 5.0, 9.0, 9.0}};
    auto crossed = mfa::partition_from_groups(frame.zones, {{0, 2}, {1, 3}});
    frame.apply_partition(crossed);
    auto table = mfa::weekly_eta_table(frame, crossed);
    REQUIRE(table.size() == 1);
    CHECK(table[0].eta_district == Catch::Approx(1.0).margin(1e-12));
    CHECK(table[0].eta_mfa == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("gelman standardization divides by twice the population sd") {
    auto out = mfa::gelman_standardize({0.0, 10.0});
    CHECK(out[0] == -0.5);
    CHECK(out[1] == 0.5);
    auto pm = mfa::gelman_standardize({-1.0, 1.0});
    CHECK(pm[0] == -0.5);
    CHECK(pm[1] == 0.5);

    mfa::SplitMix64 rng(9);
    std::vector<double> x;
    for (int i = 0; i < 100; ++i) x.push_back(rng.uniform() * 40.0 - 7.0);
    auto std_x = mfa::gelman_standardize(x);
    double mean = 0;
    for (double v : std_x) mean += v;
    mean /= static_cast<double>(std_x.size());
    double var = 0;
    for (double v : std_x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(std_x.size());
    CHECK(mean == Catch::Approx(0.0).margin(1e-12));
    CHECK(std::sqrt(var) == Catch::Approx(0.5).margin(1e-12));

    CHECK_THROWS_AS(mfa::gelman_standardize({4.0, 4.0, 4.0}), mfa::NumericError);
    CHECK_THROWS_AS(mfa::gelman_standardize({}), std::invalid_argument);
}

TEST_CASE("quantile interpolates between order statistics") {
    std::vector<double> two{10.0, 20.0};
    CHECK(mfa::quantile(two, 0.5) == 15.0);
    CHECK(mfa::quantile(two, 0.0) == 10.0);
    CHECK(mfa::quantile(two, 1.0) == 20.0);
    CHECK(mfa::quantile(two, 0.25) == 12.5);

    std::vector<double> four{1.0, 2.0, 3.0, 4.0};
    CHECK(mfa::quantile(four, 0.5) == 2.5);
    CHECK(mfa::quantile(four, 1.0 / 3.0) == Catch::Approx(2.0).margin(1e-12));

    std::vector<double> unsorted{3.0, 1.0, 2.0};
    CHECK(mfa::quantile(unsorted, 0.5) == 2.0);

    CHECK_THROWS_AS(mfa::quantile({}, 0.5), std::invalid_argument);
}
