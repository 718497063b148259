#pragma once

// Transceiver energy accounting.
//
// All arithmetic runs on scaled integers: time in µs, current in µA and
// voltage in mV, so one unit of charge-times-voltage is exactly one
// femtojoule. Conversion to µJ/mJ happens only when reporting.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "armac/time.hpp"

namespace armac {

struct Femtojoules {
    std::int64_t value = 0;

    friend constexpr auto operator<=>(Femtojoules, Femtojoules) = default;
    friend constexpr Femtojoules operator+(Femtojoules a, Femtojoules b) { return {a.value + b.value}; }
    friend constexpr Femtojoules operator*(std::int64_t k, Femtojoules e) { return {k * e.value}; }
    Femtojoules& operator+=(Femtojoules o) {
        value += o.value;
        return *this;
    }

    double microjoules() const { return static_cast<double>(value) * 1e-9; }
    double millijoules() const { return static_cast<double>(value) * 1e-12; }
};

// Exact decimal rendering in µJ with nine fractional digits.
std::string format_microjoules(Femtojoules e);

struct RadioParams {
    std::int64_t v_mv = 3000;
    std::int64_t i_rx_ua = 19700;
    std::int64_t i_tx_ua = 17400;
    std::int64_t i_idle_ua = 20000;  // also used for switching and time-out
    std::int64_t i_sleep_ua = 1;
    Micros t_byte = 32;
    Micros t_switch = 192;
    Micros t_turnaround = 192;

    Micros airtime(std::size_t octets) const { return static_cast<Micros>(octets) * t_byte; }

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

inline Femtojoules charge(Micros t, std::int64_t current_ua, std::int64_t v_mv) {
    return Femtojoules{t * current_ua * v_mv};
}

Femtojoules e_sleep(Micros t_sleep, const RadioParams& p);
Femtojoules e_switch(const RadioParams& p);
Femtojoules e_trans(std::size_t octets, const RadioParams& p);
Femtojoules e_rec(std::size_t octets, const RadioParams& p);
Femtojoules e_timeout(Micros t_tout, const RadioParams& p);
Femtojoules e_active(Femtojoules e_sw, Femtojoules e_tx, Femtojoules e_rx, Femtojoules e_tout);

struct CycleEnergy {
    Femtojoules sleep;
    Femtojoules active;
};

Femtojoules total_energy(std::span<const CycleEnergy> cycles);

struct CycleTiming {
    Micros t_active = 0;
    Micros t_sleep = 0;
    Micros t_tout = 0;
};

class InvalidTiming : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Per-category accumulators for one node. e_switch holds both transitions
// of every cycle.
struct EnergyLedger {
    Femtojoules e_sleep;
    Femtojoules e_switch;
    Femtojoules e_trans;
    Femtojoules e_rec;
    Femtojoules e_tout;
    std::int64_t cycles_counted = 0;
    Micros active_time = 0;
    Micros sleep_time = 0;

    Femtojoules total() const { return e_sleep + e_switch + e_trans + e_rec + e_tout; }

    friend bool operator==(const EnergyLedger&, const EnergyLedger&) = default;
};

struct CycleBreakdown {
    CycleTiming timing;
    Femtojoules e_sleep;
    Femtojoules e_switch;  // a single transition
    Femtojoules e_trans;
    Femtojoules e_rec;
    Femtojoules e_tout;

    Femtojoules active() const { return e_active(e_switch, e_trans, e_rec, e_tout); }
    Femtojoules total() const { return e_sleep + active(); }

    // The ledger a node accumulates over `cycles` identical cycles.
    EnergyLedger repeated(std::int64_t cycles) const;
};

// One loss-free periodic cycle: switch on, send data, wait the turnaround,
// receive the Ack, switch off, sleep for the rest of the frame.
CycleBreakdown closed_form_cycle(std::size_t data_octets, std::size_t ack_octets, Micros t_tout,
                                 const RadioParams& p, Micros t_frame);

enum class RadioMode { Off, Switching, Tx, Rx, Idle };

// Charges radio-on time to ledger categories as the radio changes mode.
// Sleep energy is settled per frame at each cycle boundary as the frame
// length minus the time spent active in that frame.
class EnergyMeter {
public:
    EnergyMeter(const RadioParams& radio, Micros t_frame) : radio_(radio), t_frame_(t_frame) {}

    void set_mode(SimTime now, RadioMode mode);
    RadioMode mode() const { return mode_; }

    // Closes the frame ending at `boundary`. When `count` is false the
    // frame's activity is discarded.
    void close_cycle(SimTime boundary, bool count);

    const EnergyLedger& ledger() const { return ledger_; }

private:
    void flush(SimTime now);

    RadioParams radio_;
    Micros t_frame_;
    RadioMode mode_ = RadioMode::Off;
    SimTime since_{};
    Micros cycle_active_ = 0;
    EnergyLedger cycle_{};
    EnergyLedger ledger_{};
};

}  // namespace armac
