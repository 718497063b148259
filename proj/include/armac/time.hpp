#pragma once

#include <compare>
#include <cstdint>

namespace armac {

// Durations and in-frame offsets, in integer microseconds.
using Micros = std::int64_t;

// Absolute simulation time; one tick is one microsecond of true (global) time.
struct SimTime {
    std::uint64_t ticks = 0;

    friend constexpr auto operator<=>(SimTime, SimTime) = default;

    friend constexpr SimTime operator+(SimTime t, Micros d) {
        return SimTime{static_cast<std::uint64_t>(static_cast<std::int64_t>(t.ticks) + d)};
    }
    friend constexpr SimTime operator-(SimTime t, Micros d) { return t + (-d); }
    friend constexpr Micros operator-(SimTime a, SimTime b) {
        return static_cast<Micros>(a.ticks) - static_cast<Micros>(b.ticks);
    }
    SimTime& operator+=(Micros d) { return *this = *this + d; }

    constexpr Micros as_micros() const { return static_cast<Micros>(ticks); }
};

}  // namespace armac
