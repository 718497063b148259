#pragma once

// Drift-value synchronization: the CN compares each data packet's arrival
// with the expected slot start and, once the difference exceeds the
// acceptable delay D, sends the difference back in a SyncAck.

#include "armac/protocol.hpp"
#include "armac/time.hpp"

namespace armac {

struct ArrivalObservation {
    Address node;
    SimTime expected_arrival;
    SimTime current_arrival;
};

struct DriftDecision {
    Micros delta_t = 0;
    Micros dv = 0;
    bool send_sync_ack = false;

    friend bool operator==(const DriftDecision&, const DriftDecision&) = default;
};

// Expected minus current arrival; positive when the packet came early.
Micros delta_t(const ArrivalObservation& obs);

// |ΔT| < D and |ΔT| = D give dv = 0 (plain Ack); |ΔT| > D gives dv = ΔT.
DriftDecision drift_value(Micros delta_t, Micros d);

// New in-frame wake offset after applying a drift value, wrapped into
// [0, t_frame). A late node (negative dv) wakes earlier.
Micros apply_drift(Micros wake_offset, Micros dv, Micros t_frame);

}  // namespace armac
