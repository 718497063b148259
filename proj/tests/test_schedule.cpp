#include <gtest/gtest.h>

#include "armac/schedule.hpp"

using namespace armac;

namespace {

const RadioParams kRadio{};
const FrameLayout kLayout = FrameLayout::from_cap(1'000'000, 100'000, 100'000);

ScheduleError::Code schedule_error(std::span<const SlotRequest> reqs, const FrameLayout& layout) {
    try {
        build_schedule(reqs, layout, GuardFactor{10}, kRadio, 0);
    } catch (const ScheduleError& e) {
        return e.code();
    }
    ADD_FAILURE() << "no ScheduleError";
    return ScheduleError::Code::InvalidRequest;
}

}  // namespace

TEST(SlotLength, DefaultDataFrame) {
    EXPECT_EQ(slot_length(SlotRequest{Address{1}, 31}, kRadio, 0), 1440);
}

TEST(SlotLength, EmptyPayload) {
    EXPECT_EQ(slot_length(SlotRequest{Address{1}, 0}, kRadio, 0), 448);
}

TEST(SlotLength, PayloadOnlyScalesDataTerm) {
    const Micros fixed = kRadio.airtime(4) + kRadio.t_turnaround + kRadio.airtime(4);
    const Micros a = slot_length(SlotRequest{Address{1}, 20}, kRadio, 0) - fixed;
    const Micros b = slot_length(SlotRequest{Address{1}, 40}, kRadio, 0) - fixed;
    EXPECT_EQ(b, 2 * a);
}

TEST(SlotLength, AdaptiveMarginIsTenPercent) {
    EXPECT_EQ(adaptive_slot_length(SlotRequest{Address{1}, 31}, kRadio, GuardFactor{10}), 1440 + 144);
    EXPECT_EQ(adaptive_slot_length(SlotRequest{Address{1}, 31}, kRadio, GuardFactor{0}), 1440);
}

TEST(GuardBand, Interior) {
    EXPECT_EQ(interior_guard_band(10000, 20000, GuardFactor{10}), 1500);
    EXPECT_EQ(interior_guard_band(7777, 7777, GuardFactor{10}), 778);
    EXPECT_EQ(interior_guard_band(5000, 9000, GuardFactor{0}), 0);
}

TEST(GuardBand, InteriorRoundsHalfUp) {
    // 0.1 * (1 + 4) / 2 = 0.25 -> 0; 0.1 * (5 + 10) / 2 = 0.75 -> 1; 0.1 * (3 + 2) = 0.5 -> 1 with F=20
    EXPECT_EQ(interior_guard_band(1, 4, GuardFactor{10}), 0);
    EXPECT_EQ(interior_guard_band(5, 10, GuardFactor{10}), 1);
    EXPECT_EQ(interior_guard_band(2, 3, GuardFactor{20}), 1);
}

TEST(GuardBand, Edges) {
    EXPECT_EQ(edge_guard_bands(10000, 30000, GuardFactor{10}), std::make_pair(Micros{1000}, Micros{3000}));
    EXPECT_EQ(edge_guard_bands(4321, 4321, GuardFactor{0}), std::make_pair(Micros{0}, Micros{0}));
    EXPECT_EQ(edge_guard_bands(15, 25, GuardFactor{10}), std::make_pair(Micros{2}, Micros{3}));
}

TEST(AcceptableDelay, MinSlotTimesFactor) {
    const std::vector<Micros> slots{10000, 20000, 30000};
    EXPECT_EQ(acceptable_delay(slots, GuardFactor{10}), 1000);
    EXPECT_EQ(acceptable_delay(slots, GuardFactor{0}), 0);
    const std::vector<Micros> one{1584};
    EXPECT_EQ(acceptable_delay(one, GuardFactor{10}), 158);
}

TEST(AcceptableDelay, EmptyIsError) {
    try {
        acceptable_delay({}, GuardFactor{10});
        FAIL();
    } catch (const ScheduleError& e) {
        EXPECT_EQ(e.code(), ScheduleError::Code::EmptySchedule);
    }
}

TEST(BuildSchedule, TwoIdenticalRequests) {
    const std::vector<SlotRequest> reqs{{Address{1}, 31}, {Address{2}, 31}};
    const Schedule s = build_schedule(reqs, kLayout, GuardFactor{10}, kRadio, 0);
    ASSERT_EQ(s.slots.size(), 2U);
    EXPECT_EQ(s.guard_bands, (std::vector<Micros>{144, 144, 144}));
    EXPECT_EQ(s.slots[0], (TimeSlot{Address{1}, 144, 1440}));
    EXPECT_EQ(s.slots[1], (TimeSlot{Address{2}, 144 + 1440 + 144, 1440}));
    EXPECT_EQ(s.span(), 3312);
    EXPECT_EQ(s.d, 144);
}

TEST(BuildSchedule, Empty) {
    const Schedule s = build_schedule({}, kLayout, GuardFactor{10}, kRadio);
    EXPECT_TRUE(s.slots.empty());
    EXPECT_EQ(s.span(), 0);
}

TEST(BuildSchedule, DefaultScenario) {
    std::vector<SlotRequest> reqs;
    for (int i = 1; i <= 10; ++i) reqs.push_back(SlotRequest{Address{static_cast<std::uint16_t>(i)}, 31});
    const Schedule s = build_schedule(reqs, kLayout, GuardFactor{10}, kRadio);
    EXPECT_EQ(s.slots.front().length, 1584);
    EXPECT_EQ(s.slots.front().start, 158);
    EXPECT_EQ(s.d, 158);
    EXPECT_EQ(s.span(), 10 * 1584 + 11 * 158);
}

TEST(BuildSchedule, Overflow) {
    const FrameLayout tiny = FrameLayout::from_cap(10'000, 3'000, 3'000);
    std::vector<SlotRequest> reqs;
    for (int i = 1; i <= 3; ++i) reqs.push_back(SlotRequest{Address{static_cast<std::uint16_t>(i)}, 31});
    EXPECT_EQ(schedule_error(reqs, tiny), ScheduleError::Code::CfpOverflow);
}

TEST(BuildSchedule, DuplicateNode) {
    const std::vector<SlotRequest> reqs{{Address{1}, 31}, {Address{1}, 10}};
    EXPECT_EQ(schedule_error(reqs, kLayout), ScheduleError::Code::DuplicateNode);
}

TEST(BuildSchedule, Csv) {
    const std::vector<SlotRequest> reqs{{Address{1}, 31}, {Address{2}, 31}};
    const Schedule s = build_schedule(reqs, kLayout, GuardFactor{10}, kRadio, 0);
    EXPECT_EQ(schedule_to_csv(s), "node,start_us,len_us,preceding_gb_us\n1,144,1440,144\n2,1728,1440,144\n");
}

TEST(FrameLayoutTest, PartitionInvariant) {
    EXPECT_EQ(kLayout.cfp_len, 800'000);
    EXPECT_EQ(kLayout.cap_start(), 800'000);
    EXPECT_EQ(kLayout.cap_end(), 900'000);
    EXPECT_THROW(FrameLayout::from_cap(1000, 800, 300), std::invalid_argument);
}
