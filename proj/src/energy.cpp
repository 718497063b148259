#include "armac/energy.hpp"

#include <cstdio>

namespace armac {

std::string format_microjoules(Femtojoules e) {
    const bool neg = e.value < 0;
    const std::uint64_t mag = neg ? static_cast<std::uint64_t>(-(e.value + 1)) + 1
                                  : static_cast<std::uint64_t>(e.value);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%llu.%09llu", neg ? "-" : "",
                  static_cast<unsigned long long>(mag / 1000000000ULL),
                  static_cast<unsigned long long>(mag % 1000000000ULL));
    return buf;
}

void RadioParams::validate() const {
    auto positive = [](std::int64_t v, const char* name) {
        if (v <= 0) throw std::invalid_argument(std::string("radio.") + name + " must be > 0");
    };
    positive(v_mv, "v");
    positive(i_rx_ua, "i_rx");
    positive(i_tx_ua, "i_tx");
    positive(i_idle_ua, "i_idle");
    positive(i_sleep_ua, "i_sleep");
    positive(t_byte, "t_byte");
    positive(t_switch, "t_switch");
    if (t_turnaround < 0) throw std::invalid_argument("radio.t_turnaround must be >= 0");
    if (i_sleep_ua >= i_idle_ua) throw std::invalid_argument("radio.i_sleep must be below radio.i_idle");
}

Femtojoules e_sleep(Micros t_sleep, const RadioParams& p) { return charge(t_sleep, p.i_sleep_ua, p.v_mv); }

Femtojoules e_switch(const RadioParams& p) { return charge(p.t_switch, p.i_idle_ua, p.v_mv); }

Femtojoules e_trans(std::size_t octets, const RadioParams& p) {
    return charge(p.airtime(octets), p.i_tx_ua, p.v_mv);
}

Femtojoules e_rec(std::size_t octets, const RadioParams& p) {
    return charge(p.airtime(octets), p.i_rx_ua, p.v_mv);
}

Femtojoules e_timeout(Micros t_tout, const RadioParams& p) { return charge(t_tout, p.i_idle_ua, p.v_mv); }

Femtojoules e_active(Femtojoules e_sw, Femtojoules e_tx, Femtojoules e_rx, Femtojoules e_tout) {
    return 2 * e_sw + e_tx + e_rx + e_tout;
}

Femtojoules total_energy(std::span<const CycleEnergy> cycles) {
    Femtojoules sleep;
    Femtojoules active;
    for (const auto& c : cycles) {
        sleep += c.sleep;
        active += c.active;
    }
    return sleep + active;
}

EnergyLedger CycleBreakdown::repeated(std::int64_t cycles) const {
    EnergyLedger l;
    l.e_sleep = cycles * e_sleep;
    l.e_switch = (2 * cycles) * e_switch;
    l.e_trans = cycles * e_trans;
    l.e_rec = cycles * e_rec;
    l.e_tout = cycles * e_tout;
    l.cycles_counted = cycles;
    l.active_time = cycles * timing.t_active;
    l.sleep_time = cycles * timing.t_sleep;
    return l;
}

CycleBreakdown closed_form_cycle(std::size_t data_octets, std::size_t ack_octets, Micros t_tout,
                                 const RadioParams& p, Micros t_frame) {
    CycleBreakdown c;
    c.timing.t_tout = t_tout;
    c.timing.t_active = 2 * p.t_switch + p.airtime(data_octets) + p.airtime(ack_octets) + t_tout;
    if (c.timing.t_active > t_frame) {
        throw InvalidTiming("active time " + std::to_string(c.timing.t_active) +
                            " us exceeds the frame of " + std::to_string(t_frame) + " us");
    }
    c.timing.t_sleep = t_frame - c.timing.t_active;
    c.e_sleep = e_sleep(c.timing.t_sleep, p);
    c.e_switch = e_switch(p);
    c.e_trans = e_trans(data_octets, p);
    c.e_rec = e_rec(ack_octets, p);
    c.e_tout = e_timeout(t_tout, p);
    return c;
}

void EnergyMeter::flush(SimTime now) {
    const Micros elapsed = now - since_;
    since_ = now;
    if (elapsed <= 0 || mode_ == RadioMode::Off) return;
    cycle_active_ += elapsed;
    switch (mode_) {
        case RadioMode::Switching: cycle_.e_switch += charge(elapsed, radio_.i_idle_ua, radio_.v_mv); break;
        case RadioMode::Tx: cycle_.e_trans += charge(elapsed, radio_.i_tx_ua, radio_.v_mv); break;
        case RadioMode::Rx: cycle_.e_rec += charge(elapsed, radio_.i_rx_ua, radio_.v_mv); break;
        case RadioMode::Idle: cycle_.e_tout += charge(elapsed, radio_.i_idle_ua, radio_.v_mv); break;
        case RadioMode::Off: break;
    }
}

void EnergyMeter::set_mode(SimTime now, RadioMode mode) {
    flush(now);
    mode_ = mode;
}

void EnergyMeter::close_cycle(SimTime boundary, bool count) {
    flush(boundary);
    if (count) {
        const Micros sleep = t_frame_ - cycle_active_;
        if (sleep < 0) {
            throw InvalidTiming("radio active " + std::to_string(cycle_active_) + " us in a " +
                                std::to_string(t_frame_) + " us frame");
        }
        ledger_.e_switch += cycle_.e_switch;
        ledger_.e_trans += cycle_.e_trans;
        ledger_.e_rec += cycle_.e_rec;
        ledger_.e_tout += cycle_.e_tout;
        ledger_.e_sleep += e_sleep(sleep, radio_);
        ledger_.active_time += cycle_active_;
        ledger_.sleep_time += sleep;
        ++ledger_.cycles_counted;
    }
    cycle_ = EnergyLedger{};
    cycle_active_ = 0;
}

}  // namespace armac
