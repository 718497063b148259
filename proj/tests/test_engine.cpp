#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include "armac/engine.hpp"

using namespace armac;

TEST(Clock, IdentityWithoutSkew) {
    const ClockModel c;
    for (Micros t : {0LL, 1LL, 999'999LL, 123'456'789LL}) {
        EXPECT_EQ(c.local_to_global(t).ticks, static_cast<std::uint64_t>(t));
        EXPECT_EQ(c.global_to_local(SimTime{static_cast<std::uint64_t>(t)}), t);
    }
}

TEST(Clock, FastClockCompressesGlobalTime) {
    const ClockModel c{100, 0};
    const auto g0 = c.local_to_global(5'000'000);
    const auto g1 = c.local_to_global(6'000'000);
    EXPECT_NEAR(static_cast<double>(g1 - g0), 999'900.0, 1.0);
}

TEST(Clock, PhaseOffset) {
    const ClockModel c{0, 250};
    EXPECT_EQ(c.local_to_global(1250).ticks, 1000U);
    EXPECT_EQ(c.global_to_local(SimTime{1000}), 1250);
}

TEST(Clock, RoundTripWithinOneTick) {
    Rng rng(7);
    for (int i = 0; i < 20000; ++i) {
        const ClockModel c{static_cast<std::int32_t>(rng.uniform_int(-500, 500)), 0};
        const Micros t = rng.uniform_int(0, 4'000'000'000LL);
        EXPECT_LE(std::llabs(c.global_to_local(c.local_to_global(t)) - t), 1);
    }
}

TEST(RngTest, DerivedStreamsAreIndependentAndStable) {
    EXPECT_EQ(derive_seed(1, StreamKind::Channel, 0), derive_seed(1, StreamKind::Channel, 0));
    std::set<std::uint64_t> seeds;
    for (auto k : {StreamKind::Channel, StreamKind::Backoff, StreamKind::Jitter, StreamKind::Traffic}) {
        for (std::uint64_t i = 0; i < 16; ++i) seeds.insert(derive_seed(42, k, i));
    }
    EXPECT_EQ(seeds.size(), 64U);
    EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
}

TEST(RngTest, UniformIntBoundsAndCoverage) {
    Rng rng(3);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 5000; ++i) {
        const auto v = rng.uniform_int(-3, 3);
        ASSERT_GE(v, -3);
        ASSERT_LE(v, 3);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 7U);
    EXPECT_EQ(rng.uniform_int(5, 5), 5);
    EXPECT_THROW(rng.uniform_int(2, 1), std::invalid_argument);
}

TEST(RngTest, PoissonMean) {
    Rng rng(11);
    double sum = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += rng.poisson(0.5);
    EXPECT_NEAR(sum / n, 0.5, 0.01);
    EXPECT_EQ(rng.poisson(0.0), 0);
}

TEST(SimulatorTest, EmptyQueue) {
    Simulator sim;
    EXPECT_EQ(sim.run_until(SimTime{1000}), 0U);
    EXPECT_EQ(sim.now().ticks, 1000U);
}

TEST(SimulatorTest, EqualTimesPopInInsertionOrder) {
    Simulator sim;
    std::vector<int> order;
    for (int i = 0; i < 5; ++i) sim.schedule(SimTime{10}, 0, 0, [&order, i] { order.push_back(i); });
    sim.schedule(SimTime{5}, 0, 0, [&order] { order.push_back(-1); });
    EXPECT_EQ(sim.run_until(SimTime{10}), 6U);
    EXPECT_EQ(order, (std::vector<int>{-1, 0, 1, 2, 3, 4}));
}

TEST(SimulatorTest, PeriodicEventsCountedExactly) {
    Simulator sim;
    int fired = 0;
    std::function<void()> tick = [&] {
        ++fired;
        sim.schedule_in(1'000'000, 1, 0, tick);
    };
    sim.schedule(SimTime{0}, 1, 0, tick);
    EXPECT_EQ(sim.run_until(SimTime{999'999'999}), 1000U);
    EXPECT_EQ(fired, 1000);
}

TEST(SimulatorTest, EventInPastThrows) {
    Simulator sim;
    sim.schedule(SimTime{100}, 0, 0, [&] { sim.schedule(SimTime{50}, 0, 0, [] {}); });
    EXPECT_THROW(sim.run_until(SimTime{200}), EventInPast);
}

TEST(ChannelTest, PerZeroAndOne) {
    const Packet p{Address{1}, AckBody{}};
    Channel clean(0.0, Rng(1), 32);
    Channel dead(1.0, Rng(1), 32);
    for (std::uint64_t i = 0; i < 1000; ++i) {
        EXPECT_FALSE(clean.get(clean.transmit(p, 1, 0, SimTime{i * 1000})).lost);
        EXPECT_TRUE(dead.get(dead.transmit(p, 1, 0, SimTime{i * 1000})).lost);
    }
}

TEST(ChannelTest, EmpiricalLossRate) {
    const Packet p{Address{1}, AckBody{}};
    Channel ch(0.2, Rng(derive_seed(9, StreamKind::Channel, 0)), 32);
    int lost = 0;
    for (std::uint64_t i = 0; i < 100000; ++i) lost += ch.get(ch.transmit(p, 1, 0, SimTime{i * 1000})).lost;
    EXPECT_NEAR(lost / 100000.0, 0.2, 0.005);
}

TEST(ChannelTest, AirtimeAndCollisions) {
    Channel ch(0.0, Rng(1), 32);
    const auto a = ch.transmit(Packet{Address{1}, AckBody{}}, 1, 0, SimTime{1000});
    EXPECT_EQ(ch.get(a).end.ticks, 1000U + 4 * 32);
    const auto b = ch.transmit(Packet{Address{2}, AckBody{}}, 2, 0, SimTime{1100});
    EXPECT_TRUE(ch.get(a).collided);
    EXPECT_TRUE(ch.get(b).collided);
    EXPECT_EQ(ch.get(b).outcome(), Delivery::Collided);
    // Back-to-back transmissions do not overlap.
    const auto c = ch.transmit(Packet{Address{3}, AckBody{}}, 3, 0, ch.get(b).end);
    EXPECT_FALSE(ch.get(c).collided);
    EXPECT_TRUE(ch.busy(SimTime{1000}, SimTime{1001}));
    EXPECT_FALSE(ch.busy(SimTime{5000}, SimTime{6000}));
    EXPECT_THROW(ch.transmit(Packet{Address{3}, AckBody{}}, 3, 0, SimTime{10}), std::logic_error);
}

TEST(ChannelTest, LossyMaskConsumesDrawAnyway) {
    const Packet ack{Address{1}, AckBody{}};
    const Packet data{Address{1}, DataBody{}};
    Channel a(0.5, Rng(5), 32);
    Channel b(0.5, Rng(5), 32);
    b.set_lossy(PacketKind::Ack, false);
    EXPECT_FALSE(b.is_lossy(PacketKind::Ack));
    for (std::uint64_t i = 0; i < 200; ++i) {
        a.transmit(ack, 1, 0, SimTime{i * 2000});
        EXPECT_FALSE(b.get(b.transmit(ack, 1, 0, SimTime{i * 2000})).lost);
    }
    // Both channels consumed the same number of draws, so later outcomes agree.
    for (std::uint64_t i = 200; i < 400; ++i) {
        EXPECT_EQ(a.get(a.transmit(data, 1, 0, SimTime{i * 2000})).lost,
                  b.get(b.transmit(data, 1, 0, SimTime{i * 2000})).lost);
    }
}
