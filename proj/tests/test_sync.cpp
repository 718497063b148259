#include <gtest/gtest.h>

#include <cstdlib>

#include "armac/sync.hpp"

using namespace armac;

namespace {

Micros dt(std::uint64_t expected, std::uint64_t current) {
    return delta_t(ArrivalObservation{Address{1}, SimTime{expected}, SimTime{current}});
}

}  // namespace

TEST(DeltaT, ExpectedMinusCurrent) {
    EXPECT_EQ(dt(5000, 5400), -400);
    EXPECT_EQ(dt(5000, 5000), 0);
    EXPECT_EQ(dt(5000, 3500), 1500);
}

TEST(DriftValue, Branches) {
    EXPECT_EQ(drift_value(-400, 1000), (DriftDecision{-400, 0, false}));
    EXPECT_EQ(drift_value(-1500, 1000), (DriftDecision{-1500, -1500, true}));
    EXPECT_EQ(drift_value(1000, 1000), (DriftDecision{1000, 0, false}));
    EXPECT_EQ(drift_value(-1000, 1000), (DriftDecision{-1000, 0, false}));
    EXPECT_EQ(drift_value(0, 0), (DriftDecision{0, 0, false}));
    EXPECT_EQ(drift_value(1, 0), (DriftDecision{1, 1, true}));
    EXPECT_THROW(drift_value(0, -1), std::invalid_argument);
}

TEST(ApplyDrift, AddsAndWraps) {
    EXPECT_EQ(apply_drift(2000, -1500, 1'000'000), 500);
    EXPECT_EQ(apply_drift(12345, 0, 1'000'000), 12345);
    EXPECT_EQ(apply_drift(100, -300, 1'000'000), 999'800);
    EXPECT_EQ(apply_drift(999'900, 300, 1'000'000), 200);
}

// Node late by ρ·T per frame; the CN sees ΔT = -(accumulated drift) against
// a fixed expected arrival, and the node applies each DV to its wake offset.
TEST(SyncIteration, FirstSyncAckAtFrameEleven) {
    const Micros t_frame = 1'000'000;
    const Micros d = 1000;
    const Micros drift_per_frame = 100;  // 100 ppm of a one-second frame
    const Micros slot_start = 5000;
    Micros wake = slot_start;
    std::vector<int> sync_frames;
    for (int frame = 1; frame <= 40; ++frame) {
        const Micros arrival = wake + frame * drift_per_frame;
        const DriftDecision dec =
            drift_value(dt(static_cast<std::uint64_t>(slot_start), static_cast<std::uint64_t>(arrival)), d);
        if (dec.send_sync_ack) {
            sync_frames.push_back(frame);
            wake = apply_drift(wake, dec.dv, t_frame);
            // The correction moves the very next arrival to within one frame of drift.
            const Micros next = wake + (frame + 1) * drift_per_frame;
            EXPECT_EQ(std::abs(slot_start - next), drift_per_frame);
        }
    }
    ASSERT_FALSE(sync_frames.empty());
    EXPECT_EQ(sync_frames.front(), 11);
}
