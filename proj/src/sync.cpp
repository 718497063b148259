#include "armac/sync.hpp"

#include <stdexcept>

namespace armac {

Micros delta_t(const ArrivalObservation& obs) { return obs.expected_arrival - obs.current_arrival; }

DriftDecision drift_value(Micros dt, Micros d) {
    if (d < 0) throw std::invalid_argument("acceptable delay must be >= 0");
    const Micros magnitude = dt < 0 ? -dt : dt;
    DriftDecision out;
    out.delta_t = dt;
    if (magnitude > d) {
        out.dv = dt;
        out.send_sync_ack = true;
    }
    return out;
}

Micros apply_drift(Micros wake_offset, Micros dv, Micros t_frame) {
    if (t_frame <= 0) throw std::invalid_argument("t_frame must be > 0");
    Micros out = (wake_offset + dv) % t_frame;
    if (out < 0) out += t_frame;
    return out;
}

}  // namespace armac
