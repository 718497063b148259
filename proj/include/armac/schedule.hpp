#pragma once

// Adaptive slot lengths, guard bands and acceptable delay, and placement of
// guaranteed slots inside the contention-free period.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "armac/energy.hpp"
#include "armac/protocol.hpp"
#include "armac/time.hpp"

namespace armac {

// Frame partition: CFP, then CAP, then the monitoring-station period.
struct FrameLayout {
    Micros t_frame = 1'000'000;
    Micros cfp_len = 800'000;
    Micros cap_len = 100'000;
    Micros t_ms = 100'000;

    Micros cap_start() const { return cfp_len; }
    Micros cap_end() const { return cfp_len + cap_len; }

    static FrameLayout from_cap(Micros t_frame, Micros cap_len, Micros t_ms);
    void validate() const;
};

// Guard-band factor F, in whole percent.
struct GuardFactor {
    int percent = 10;
};

struct SlotRequest {
    Address node;
    int data_rate = 31;  // payload bytes per frame

    // Largest payload that still fits a 127-octet MPDU as a Data packet.
    static constexpr int kMaxPayload = static_cast<int>(kMaxMpduOctets - kHeaderOctets - 1);

    void validate() const;
    std::size_t data_packet_octets() const { return kHeaderOctets + 1 + static_cast<std::size_t>(data_rate); }
};

struct TimeSlot {
    Address node;
    Micros start = 0;
    Micros length = 0;

    Micros end() const { return start + length; }
    friend bool operator==(const TimeSlot&, const TimeSlot&) = default;
};

struct Schedule {
    std::vector<TimeSlot> slots;
    // gb_1, gb_{1,2}, ..., gb_{n-1,n}, gb_n; empty when there are no slots.
    std::vector<Micros> guard_bands;
    GuardFactor f;
    Micros d = 0;

    // gb_1 + slots + interior bands + gb_n.
    Micros span() const;
    const TimeSlot* find(Address node) const;
};

class ScheduleError : public std::runtime_error {
public:
    enum class Code { CfpOverflow, DuplicateNode, EmptySchedule, InvalidRequest };

    ScheduleError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

inline constexpr std::size_t kAckOctets = 4;

// Data transmission + turnaround + Ack reception + margin.
Micros slot_length(const SlotRequest& req, const RadioParams& radio, Micros d_margin);

// Slot length with the default margin: F/100 of the margin-free slot,
// rounded down.
Micros adaptive_slot_length(const SlotRequest& req, const RadioParams& radio, GuardFactor f);

Micros interior_guard_band(Micros ts_n, Micros ts_next, GuardFactor f);
std::pair<Micros, Micros> edge_guard_bands(Micros ts_first, Micros ts_last, GuardFactor f);
Micros acceptable_delay(std::span<const Micros> slot_lengths, GuardFactor f);

struct SlotAllocation {
    Address node;
    Micros length = 0;
};

// Places slots in the given order starting after gb_1.
Schedule layout_slots(std::span<const SlotAllocation> allocations, const FrameLayout& layout, GuardFactor f);

// Computes each request's slot length (with `d_margin` if set, otherwise the
// adaptive margin) and lays the slots out in arrival order.
Schedule build_schedule(std::span<const SlotRequest> requests, const FrameLayout& layout, GuardFactor f,
                        const RadioParams& radio, std::optional<Micros> d_margin = std::nullopt);

// node,start_us,len_us,preceding_gb_us
std::string schedule_to_csv(const Schedule& s);

}  // namespace armac
