#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

using namespace mrfcox;

namespace {

std::filesystem::path write_file(const std::string& dir, const std::string& text) {
    const auto path = oracle::scratch_dir(dir) / "data.csv";
    std::ofstream(path) << text;
    return path;
}

SurvivalDataset toy(std::vector<double> times, std::vector<std::uint8_t> events) {
    SurvivalDataset d;
    d.times = Eigen::Map<Eigen::VectorXd>(times.data(), static_cast<Index>(times.size()));
    d.events = std::move(events);
    d.covariates = Eigen::MatrixXd::Zero(d.times.size(), 1);
    d.feature_names = {"x1"};
    return d;
}

std::vector<Index> one_based(const std::vector<Index>& v) {
    std::vector<Index> out;
    for (const Index i : v) {
        out.push_back(i + 1);
    }
    return out;
}

} // namespace

TEST_CASE("load three-row file") {
    const auto path = write_file("dm_load", "time,status,gene\n1.0,1,0.5\n2.0,0,-1\n0.5,1,3\n");
    const SurvivalDataset d = load_dataset(path);
    CHECK(d.n() == 3);
    CHECK(d.p() == 1);
    CHECK(d.times[2] == 0.5);
    CHECK(d.events == std::vector<std::uint8_t>{1, 0, 1});
    CHECK(d.covariates(1, 0) == -1.0);
    CHECK(d.feature_names == std::vector<std::string>{"gene"});
}

TEST_CASE("load errors name the location") {
    auto message = [](const std::string& text) {
        try {
            load_dataset(write_file("dm_err", text));
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("time,status,x\n1,1,0\n0,1,0\n").find("row 3") != std::string::npos);
    const std::string bad_status = message("time,status,x\n1,2,0\n2,1,0\n");
    CHECK(bad_status.find("status") != std::string::npos);
    CHECK(bad_status.find("2") != std::string::npos);
    CHECK(message("time,status,x\n1,1,abc\n2,1,0\n").find("column 3") != std::string::npos);
    CHECK(message("status,time,x\n1,1,0\n").find("header") != std::string::npos);
    CHECK(message("time,status,x\n1,1\n2,1,0\n").find("row 2") != std::string::npos);
}

TEST_CASE("write then load is the identity") {
    Engine rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        SurvivalDataset d = oracle::random_dataset(rng, 4 + rep, 1 + rep % 5);
        d.covariates(0, 0) = 1.0 / 3.0;
        d.covariates(1, 0) = -1e-300;
        d.times[0] = 5e-324 * 1e300;
        const auto path = oracle::scratch_dir("dm_round") / "d.csv";
        write_dataset(d, path);
        const SurvivalDataset back = load_dataset(path);
        CHECK(back.times == d.times);
        CHECK(back.events == d.events);
        CHECK(back.covariates == d.covariates);
        CHECK(back.feature_names == d.feature_names);
    }
}

TEST_CASE("validate rejects bad datasets") {
    SurvivalDataset d = toy({1.0, 2.0}, {1, 0});
    CHECK_NOTHROW(d.validate());
    d.times[1] = -1.0;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d = toy({1.0, 2.0}, {1, 3});
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d = toy({1.0, 2.0}, {1, 0});
    d.covariates(0, 0) = NAN;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d = toy({1.0}, {1});
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}

TEST_CASE("partition of 1..4 with K=2 cuts at the median") {
    const TimePartition part = build_partition(toy({1, 2, 3, 4}, {1, 1, 1, 1}), 2);
    REQUIRE(part.K() == 2);
    CHECK(part.cuts[0] == 0.0);
    CHECK(part.cuts[1] == 2.5);
    CHECK(part.cuts[2] == 4.0 * (1.0 + 1e-6));
    CHECK_FALSE(part.collapsed());
}

TEST_CASE("tied times collapse the partition") {
    const TimePartition part = build_partition(toy({5, 5, 5, 5}, {1, 0, 1, 1}), 4);
    CHECK(part.K() == 1);
    CHECK(part.collapsed());
    CHECK(part.cuts == std::vector<double>{0.0, 5.0 * (1.0 + 1e-6)});
}

TEST_CASE("partition of 1..100 with K=20 matches direct quantiles") {
    std::vector<double> t(100);
    std::iota(t.begin(), t.end(), 1.0);
    std::reverse(t.begin(), t.end());
    const TimePartition part = build_partition(toy(t, std::vector<std::uint8_t>(100, 1)), 20);
    REQUIRE(part.K() == 20);
    CHECK(part.cuts.back() > 100.0);
    for (int j = 1; j < 20; ++j) {
        // type-7 quantile of 1..100 at j/20 is 1 + 99 j / 20
        CHECK(part.cuts[j] == doctest::Approx(1.0 + 99.0 * j / 20.0).epsilon(1e-14));
    }
}

TEST_CASE("interval sets by hand") {
    const SurvivalDataset d = toy({1, 2, 3}, {1, 1, 1});
    const IntervalSets s = interval_sets(d, TimePartition::from_cuts({0.0, 2.5, 3.1}));
    CHECK(one_based(s.failure_sets[0]) == std::vector<Index>{1, 2});
    CHECK(one_based(s.failure_sets[1]) == std::vector<Index>{3});
    CHECK(one_based(s.risk_sets[0]) == std::vector<Index>{1, 2, 3});
    CHECK(one_based(s.risk_sets[1]) == std::vector<Index>{3});
    CHECK(s.d_counts == std::vector<int>{2, 1});
}

TEST_CASE("all censored and single subject") {
    const SurvivalDataset d = toy({1, 2, 3, 4}, {0, 0, 0, 0});
    const IntervalSets s = interval_sets(d, build_partition(d, 3));
    for (int k = 0; k < s.K(); ++k) {
        CHECK(s.failure_sets[k].empty());
    }
    CHECK(s.risk_sets[0].size() == 4);

    SurvivalDataset one = toy({1.0}, {1});
    const IntervalSets s1 = interval_sets(one, TimePartition::from_cuts({0.0, 2.0}));
    CHECK(one_based(s1.failure_sets[0]) == std::vector<Index>{1});
    CHECK(one_based(s1.risk_sets[0]) == std::vector<Index>{1});
}

TEST_CASE("cut points belong to the interval on their right; c_K maps to the last") {
    const TimePartition part = TimePartition::from_cuts({0.0, 1.0, 2.0});
    CHECK(part.interval_of(0.0) == 0);
    CHECK(part.interval_of(1.0) == 1);
    CHECK(part.interval_of(2.0) == 1);
    CHECK(part.interval_of(2.5) == -1);
    CHECK_THROWS(TimePartition::from_cuts({0.0, 1.0, 1.0}));
    CHECK_THROWS(TimePartition::from_cuts({0.5, 1.0}));
}

TEST_CASE("interval set invariants on random data") {
    Engine rng(9);
    for (int rep = 0; rep < 50; ++rep) {
        const SurvivalDataset d = oracle::random_dataset(rng, 5 + rep, 1);
        const TimePartition part = build_partition(d, 1 + rep % 8);
        const IntervalSets s = interval_sets(d, part);
        CHECK(part.cuts.back() > d.times.maxCoeff());
        CHECK(std::accumulate(s.d_counts.begin(), s.d_counts.end(), 0) == d.event_count());
        for (int k = 0; k < s.K(); ++k) {
            for (const Index i : s.failure_sets[k]) {
                CHECK(std::find(s.risk_sets[k].begin(), s.risk_sets[k].end(), i) != s.risk_sets[k].end());
            }
            if (k + 1 < s.K()) {
                for (const Index i : s.risk_sets[k + 1]) {
                    CHECK(std::find(s.risk_sets[k].begin(), s.risk_sets[k].end(), i) != s.risk_sets[k].end());
                }
            }
        }

        // relabelling subjects relabels the sets and nothing else
        std::vector<Index> perm(d.n());
        std::iota(perm.begin(), perm.end(), 0);
        std::reverse(perm.begin(), perm.end());
        SurvivalDataset q = d;
        for (Index i = 0; i < d.n(); ++i) {
            q.times[i] = d.times[perm[i]];
            q.events[i] = d.events[perm[i]];
            q.covariates.row(i) = d.covariates.row(perm[i]);
        }
        const IntervalSets sq = interval_sets(q, build_partition(q, 1 + rep % 8));
        CHECK(sq.d_counts == s.d_counts);
        for (Index i = 0; i < d.n(); ++i) {
            CHECK(sq.subject_interval[i] == s.subject_interval[perm[i]]);
        }
    }
}
