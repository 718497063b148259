#include <gtest/gtest.h>

#include "armac/baseline.hpp"

using namespace armac;

namespace {

SimConfig small(int nodes, std::int64_t cycles) {
    SimConfig c;
    c.protocols = {Protocol::Csma};
    c.n_nodes = nodes;
    c.n_cycles = cycles;
    c.per = {0.0};
    c.seeds = {1};
    return c;
}

}  // namespace

TEST(Csma, LoneNodeSendsFirstAttemptAndCostsAtLeastArmac) {
    const SimConfig c = small(1, 100);
    const RunReport r = run_csma(c, 0.0, 1);
    ASSERT_TRUE(r.ok()) << r.status;
    const auto& n = r.nodes.at(0);
    EXPECT_EQ(n.sent, 100);
    EXPECT_EQ(n.delivered, 100);
    EXPECT_EQ(n.retried, 0);
    EXPECT_EQ(n.channel_access_failures, 0);
    EXPECT_EQ(r.key.protocol, Protocol::Csma);
    EXPECT_GE(n.ledger.total(), armac_cycle_oracle(c, 31).repeated(100).total());
    EXPECT_EQ(n.ledger.cycles_counted, 100);
    EXPECT_EQ(n.ledger.active_time + n.ledger.sleep_time, 100 * c.t_frame);
}

TEST(Csma, TotalLossExhaustsRetries) {
    const RunReport r = run_csma(small(1, 10), 1.0, 1);
    const auto& n = r.nodes.at(0);
    EXPECT_EQ(n.delivered, 0);
    EXPECT_EQ(n.retries_exhausted, 10);
    EXPECT_EQ(n.retried, 10 * 3);
}

TEST(Csma, ContentionCausesAccessFailuresDeterministically) {
    const SimConfig c = small(10, 300);
    const RunReport a = run_csma(c, 0.0, 4);
    const RunReport b = run_csma(c, 0.0, 4);
    std::int64_t failures = 0;
    for (const auto& n : a.nodes) failures += n.channel_access_failures;
    EXPECT_GT(failures, 0);
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        EXPECT_EQ(a.nodes[i].ledger, b.nodes[i].ledger);
        EXPECT_EQ(a.nodes[i].channel_access_failures, b.nodes[i].channel_access_failures);
        EXPECT_LE(a.nodes[i].delivered, a.nodes[i].sent);
    }
}

TEST(Csma, EnergyRisesWithPer) {
    const SimConfig c = small(10, 200);
    Femtojoules prev{};
    for (double per : {0.01, 0.10, 0.20}) {
        Femtojoules sum{};
        for (std::uint64_t seed = 1; seed <= 5; ++seed) sum += run_csma(c, per, seed).total_energy();
        EXPECT_GT(sum, prev);
        prev = sum;
    }
}

TEST(Csma, ZeroNodesZeroEnergy) {
    SimConfig c = small(1, 5);
    c.n_nodes = 0;
    const RunReport r = run_csma(c, 0.0, 1);
    EXPECT_TRUE(r.nodes.empty());
    EXPECT_EQ(r.total_energy().value, 0);
}
