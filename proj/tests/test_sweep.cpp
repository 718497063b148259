#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "armac/sweep.hpp"

using namespace armac;

namespace {

RunReport constructed(Protocol p, double per, std::uint64_t seed, std::vector<std::int64_t> node_fj) {
    RunReport r;
    r.key = CellKey{p, per, seed};
    std::uint16_t addr = 1;
    for (auto fj : node_fj) {
        NodeStats n;
        n.node = Address{addr++};
        n.ledger.e_sleep = Femtojoules{fj};
        r.nodes.push_back(n);
    }
    return r;
}

}  // namespace

TEST(Sweep, DefaultCellCount) {
    SimConfig c = parse_config("{}");
    c.n_cycles = 2;
    c.n_nodes = 2;
    const auto reports = run_sweep(c);
    EXPECT_EQ(reports.size(), 2U * 20U * 10U);
    EXPECT_TRUE(std::is_sorted(reports.begin(), reports.end(),
                               [](const RunReport& a, const RunReport& b) { return a.key < b.key; }));
}

TEST(Sweep, SingleArmacCellMatchesOracle) {
    SimConfig c = parse_config(R"({"protocol": "armac", "per": [0.0], "seeds": [1], "n_cycles": 30, "n_nodes": 3})");
    const auto reports = run_sweep(c);
    ASSERT_EQ(reports.size(), 1U);
    for (const auto& n : reports[0].nodes) EXPECT_EQ(n.ledger, armac_cycle_oracle(c, 31).repeated(30));
}

TEST(Sweep, ThreadCountDoesNotChangeOutput) {
    SimConfig c = parse_config(R"({"per": [0.05, 0.15], "seeds": [1, 2, 3], "n_cycles": 20, "n_nodes": 4})");
    const auto one = run_sweep(c, {}, 1);
    const auto four = run_sweep(c, {}, 4);
    EXPECT_EQ(runs_csv(one), runs_csv(four));
    EXPECT_EQ(summary_csv(summarize(one)), summary_csv(summarize(four)));
}

TEST(Summary, ExactMeansFromConstructedReports) {
    // Node energies in fJ; 1 mJ = 1e12 fJ.
    const std::vector<RunReport> reports{
        constructed(Protocol::Armac, 0.01, 1, {1'000'000'000'000, 3'000'000'000'000}),
        constructed(Protocol::Armac, 0.01, 2, {2'000'000'000'000, 4'000'000'000'000}),
        constructed(Protocol::Csma, 0.01, 1, {5'000'000'000'000, 5'000'000'000'000}),
    };
    const auto rows = summarize(reports);
    ASSERT_EQ(rows.size(), 2U);
    EXPECT_DOUBLE_EQ(rows[0].mean_total_mj, 5.0);
    EXPECT_NEAR(rows[0].stddev_total_mj, std::sqrt(2.0), 1e-12);
    EXPECT_DOUBLE_EQ(rows[0].mean_node_mj, 2.5);
    EXPECT_EQ(rows[1].protocol, Protocol::Csma);
    EXPECT_DOUBLE_EQ(rows[1].mean_total_mj, 10.0);
    EXPECT_DOUBLE_EQ(rows[1].stddev_total_mj, 0.0);
    EXPECT_EQ(summary_csv(rows),
              "per_percent,protocol,mean_total_energy_mj,stddev,mean_node_energy_mj,node_stddev\n"
              "1,armac,5.000000,1.414214,2.500000,0.707107\n"
              "1,csma,10.000000,0.000000,5.000000,0.000000\n");
}

TEST(Summary, EmptyIsHeaderOnly) {
    EXPECT_EQ(summary_csv(summarize({})), "per_percent,protocol,mean_total_energy_mj,stddev,mean_node_energy_mj,node_stddev\n");
}

TEST(Summary, AbortedCellsSkipped) {
    auto bad = constructed(Protocol::Armac, 0.02, 1, {7});
    bad.status = "aborted: test";
    EXPECT_TRUE(summarize({bad}).empty());
    EXPECT_NE(runs_csv({bad}).find("aborted: test"), std::string::npos);
}

TEST(Summary, MatchesNaiveRecomputationFromRunsCsv) {
    SimConfig c = parse_config(R"({"per": [0.1], "seeds": [1, 2, 3, 4], "n_cycles": 15, "n_nodes": 3})");
    const auto reports = run_sweep(c);
    std::istringstream in(runs_csv(reports));
    std::string line;
    std::getline(in, line);
    std::map<std::pair<std::string, std::string>, double> totals;  // (protocol, seed) -> µJ
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        totals[{f[0], f[2]}] += std::stod(f[9]);
    }
    for (const auto& row : summarize(reports)) {
        std::vector<double> xs;
        for (const auto& [k, v] : totals) {
            if (k.first == to_string(row.protocol)) xs.push_back(v / 1000.0);
        }
        ASSERT_EQ(xs.size(), 4U);
        double mean = 0;
        for (double x : xs) mean += x / 4.0;
        double ss = 0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        EXPECT_NEAR(row.mean_total_mj, mean, 1e-9);
        EXPECT_NEAR(row.stddev_total_mj, std::sqrt(ss / 3.0), 1e-9);
    }
}

TEST(Format, PercentKeys) {
    EXPECT_EQ(format_percent(0.0), "0");
    EXPECT_EQ(format_percent(0.01), "1");
    EXPECT_EQ(format_percent(0.125), "12.5");
    EXPECT_EQ(format_percent(0.2), "20");
}
