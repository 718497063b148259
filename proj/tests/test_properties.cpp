#include <gtest/gtest.h>

#include "armac/engine.hpp"
#include "armac/protocol.hpp"
#include "armac/schedule.hpp"
#include "armac/sync.hpp"

using namespace armac;

namespace {

Packet random_packet(Rng& rng) {
    const Address src{static_cast<std::uint16_t>(rng.uniform_int(0, 0xFFFF))};
    auto u = [&](std::int64_t hi) { return rng.uniform_int(0, hi); };
    switch (u(6)) {
        case 0: return {src, ChannelBody{Address{static_cast<std::uint16_t>(u(0xFFFF))}, static_cast<std::uint8_t>(u(255))}};
        case 1: return {src, TimeSlotRequestBody{static_cast<std::uint16_t>(u(0xFFFF)), static_cast<std::uint32_t>(u(0xFFFFFFFF))}};
        case 2:
            return {src, TimeSlotRequestReplyBody{static_cast<std::uint32_t>(u(0xFFFFFFFF)), static_cast<std::uint32_t>(u(0xFFFFFFFF)),
                                                  static_cast<std::uint32_t>(u(0xFFFFFFFF)), static_cast<std::uint32_t>(u(0xFFFFFFFF))}};
        case 3: return {src, SyncAckBody{static_cast<std::int32_t>(rng.uniform_int(INT32_MIN, INT32_MAX)), u(1) == 1}};
        case 4: return {src, DataRequestBody{static_cast<std::uint16_t>(u(0xFFFF))}};
        case 5: return {src, AckBody{u(1) == 1}};
        default: {
            std::vector<std::uint8_t> body(static_cast<std::size_t>(u(SlotRequest::kMaxPayload)));
            for (auto& b : body) b = static_cast<std::uint8_t>(u(255));
            return {src, DataBody{std::move(body)}};
        }
    }
}

}  // namespace

TEST(Property, CodecRoundTrip) {
    Rng rng(2024);
    for (int i = 0; i < 20000; ++i) {
        const Packet p = random_packet(rng);
        const auto enc = encode_packet(p);
        ASSERT_EQ(enc.size(), 3 + body_length(p));
        ASSERT_EQ(enc[0], static_cast<std::uint8_t>(p.kind()));
        ASSERT_EQ(decode_packet(enc), p);
        ASSERT_EQ(encode_packet(p), enc);
    }
}

TEST(Property, EveryTruncationRejected) {
    Rng rng(99);
    for (int i = 0; i < 2000; ++i) {
        const auto enc = encode_packet(random_packet(rng));
        for (std::size_t n = 0; n < enc.size(); ++n) {
            std::vector<std::uint8_t> cut(enc.begin(), enc.begin() + static_cast<std::ptrdiff_t>(n));
            ASSERT_THROW(decode_packet(cut), CodecError);
        }
    }
}

TEST(Property, ScheduleInvariants) {
    Rng rng(5);
    const RadioParams radio;
    for (int trial = 0; trial < 300; ++trial) {
        const FrameLayout layout = FrameLayout::from_cap(rng.uniform_int(20'000, 1'000'000), 0, 0);
        const GuardFactor f{static_cast<int>(rng.uniform_int(0, 50))};
        std::vector<SlotRequest> reqs;
        const auto n = rng.uniform_int(1, 40);
        for (std::int64_t i = 0; i < n; ++i) {
            reqs.push_back(SlotRequest{Address{static_cast<std::uint16_t>(i + 1)},
                                       static_cast<int>(rng.uniform_int(1, SlotRequest::kMaxPayload))});
        }
        Schedule s;
        try {
            s = build_schedule(reqs, layout, f, radio);
        } catch (const ScheduleError& e) {
            ASSERT_EQ(e.code(), ScheduleError::Code::CfpOverflow);
            continue;
        }
        ASSERT_LE(s.span(), layout.cfp_len);
        ASSERT_EQ(s.slots.front().start, s.guard_bands.front());
        for (std::size_t i = 1; i < s.slots.size(); ++i) {
            ASSERT_EQ(s.slots[i - 1].end() + s.guard_bands[i], s.slots[i].start);
        }
        // Raising F never shrinks a band or D.
        const GuardFactor g{f.percent + 5};
        const FrameLayout wide = FrameLayout::from_cap(100'000'000, 0, 0);
        const Schedule a = build_schedule(reqs, wide, f, radio, 0);
        const Schedule b = build_schedule(reqs, wide, g, radio, 0);
        for (std::size_t i = 0; i < a.guard_bands.size(); ++i) ASSERT_LE(a.guard_bands[i], b.guard_bands[i]);
        ASSERT_LE(a.d, b.d);
        ASSERT_LE(a.d, std::min(a.guard_bands.front(), a.guard_bands.back()));
    }
}

TEST(Property, DriftValuePiecewise) {
    Rng rng(8);
    for (int i = 0; i < 100000; ++i) {
        const Micros d = rng.uniform_int(0, 5000);
        const Micros dt = rng.uniform_int(-3 * d - 1, 3 * d + 1);
        const DriftDecision dec = drift_value(dt, d);
        ASSERT_EQ(dec.delta_t, dt);
        ASSERT_EQ(dec.send_sync_ack, dec.dv != 0);
        ASSERT_EQ(dec.dv, std::abs(dt) > d ? dt : 0);
    }
}
