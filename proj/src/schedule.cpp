#include "armac/schedule.hpp"

#include <algorithm>
#include <set>

namespace armac {

namespace {

// f·x/100 rounded half-up, for non-negative operands.
Micros percent_round_half_up(Micros x, int f) { return (static_cast<Micros>(f) * x + 50) / 100; }

void check_factor(GuardFactor f) {
    if (f.percent < 0) {
        throw ScheduleError(ScheduleError::Code::InvalidRequest, "guard-band factor must be >= 0");
    }
}

}  // namespace

FrameLayout FrameLayout::from_cap(Micros t_frame, Micros cap_len, Micros t_ms) {
    FrameLayout l;
    l.t_frame = t_frame;
    l.cap_len = cap_len;
    l.t_ms = t_ms;
    l.cfp_len = t_frame - cap_len - t_ms;
    l.validate();
    return l;
}

void FrameLayout::validate() const {
    if (t_frame <= 0) throw std::invalid_argument("t_frame must be > 0");
    if (cfp_len < 0 || cap_len < 0 || t_ms < 0) {
        throw std::invalid_argument("frame periods must be non-negative (cap_len + t_ms <= t_frame)");
    }
    if (cfp_len + cap_len + t_ms != t_frame) {
        throw std::invalid_argument("cfp_len + cap_len + t_ms must equal t_frame");
    }
}

void SlotRequest::validate() const {
    if (data_rate < 1 || data_rate > kMaxPayload) {
        throw ScheduleError(ScheduleError::Code::InvalidRequest,
                            "data_rate must be in [1, " + std::to_string(kMaxPayload) + "], got " +
                                std::to_string(data_rate));
    }
}

Micros Schedule::span() const {
    Micros total = 0;
    for (const auto& s : slots) total += s.length;
    for (const auto gb : guard_bands) total += gb;
    return total;
}

const TimeSlot* Schedule::find(Address node) const {
    auto it = std::find_if(slots.begin(), slots.end(), [node](const TimeSlot& s) { return s.node == node; });
    return it == slots.end() ? nullptr : &*it;
}

Micros slot_length(const SlotRequest& req, const RadioParams& radio, Micros d_margin) {
    return radio.airtime(req.data_packet_octets()) + radio.t_turnaround + radio.airtime(kAckOctets) + d_margin;
}

Micros adaptive_slot_length(const SlotRequest& req, const RadioParams& radio, GuardFactor f) {
    check_factor(f);
    const Micros provisional = slot_length(req, radio, 0);
    return provisional + provisional * f.percent / 100;
}

Micros interior_guard_band(Micros ts_n, Micros ts_next, GuardFactor f) {
    check_factor(f);
    // (F/100)·½·(a+b) = F·(a+b)/200
    return (static_cast<Micros>(f.percent) * (ts_n + ts_next) + 100) / 200;
}

std::pair<Micros, Micros> edge_guard_bands(Micros ts_first, Micros ts_last, GuardFactor f) {
    check_factor(f);
    return {percent_round_half_up(ts_first, f.percent), percent_round_half_up(ts_last, f.percent)};
}

Micros acceptable_delay(std::span<const Micros> slot_lengths, GuardFactor f) {
    check_factor(f);
    if (slot_lengths.empty()) {
        throw ScheduleError(ScheduleError::Code::EmptySchedule, "acceptable delay of an empty schedule");
    }
    const Micros shortest = *std::min_element(slot_lengths.begin(), slot_lengths.end());
    return shortest * f.percent / 100;
}

Schedule layout_slots(std::span<const SlotAllocation> allocations, const FrameLayout& layout, GuardFactor f) {
    check_factor(f);
    Schedule s;
    s.f = f;
    if (allocations.empty()) return s;

    std::set<Address> seen;
    std::vector<Micros> lengths;
    for (const auto& a : allocations) {
        if (!seen.insert(a.node).second) {
            throw ScheduleError(ScheduleError::Code::DuplicateNode,
                                "node " + std::to_string(a.node.value) + " requested two slots");
        }
        if (a.length <= 0) {
            throw ScheduleError(ScheduleError::Code::InvalidRequest, "slot length must be > 0");
        }
        lengths.push_back(a.length);
    }

    const auto [gb_first, gb_last] = edge_guard_bands(lengths.front(), lengths.back(), f);
    s.guard_bands.push_back(gb_first);
    Micros cursor = gb_first;
    for (std::size_t i = 0; i < allocations.size(); ++i) {
        if (i > 0) {
            const Micros gb = interior_guard_band(lengths[i - 1], lengths[i], f);
            s.guard_bands.push_back(gb);
            cursor += gb;
        }
        s.slots.push_back(TimeSlot{allocations[i].node, cursor, lengths[i]});
        cursor += lengths[i];
    }
    s.guard_bands.push_back(gb_last);
    cursor += gb_last;

    if (cursor > layout.cfp_len) {
        throw ScheduleError(ScheduleError::Code::CfpOverflow,
                            "schedule spans " + std::to_string(cursor) + " us but the CFP is " +
                                std::to_string(layout.cfp_len) + " us");
    }
    s.d = acceptable_delay(lengths, f);
    return s;
}

Schedule build_schedule(std::span<const SlotRequest> requests, const FrameLayout& layout, GuardFactor f,
                        const RadioParams& radio, std::optional<Micros> d_margin) {
    std::vector<SlotAllocation> allocations;
    allocations.reserve(requests.size());
    for (const auto& r : requests) {
        r.validate();
        const Micros len = d_margin ? slot_length(r, radio, *d_margin) : adaptive_slot_length(r, radio, f);
        allocations.push_back(SlotAllocation{r.node, len});
    }
    return layout_slots(allocations, layout, f);
}

std::string schedule_to_csv(const Schedule& s) {
    std::string out = "node,start_us,len_us,preceding_gb_us\n";
    for (std::size_t i = 0; i < s.slots.size(); ++i) {
        const auto& slot = s.slots[i];
        out += std::to_string(slot.node.value) + "," + std::to_string(slot.start) + "," +
               std::to_string(slot.length) + "," + std::to_string(s.guard_bands[i]) + "\n";
    }
    return out;
}

}  // namespace armac
