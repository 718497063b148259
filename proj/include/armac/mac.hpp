#pragma once

// AR-MAC central-node and sensor-node state machines, run on the
// discrete-event engine.
//
// Frame timeline (CN clock): CFP with guard-banded guaranteed slots, then
// the CAP, then the reserved monitoring-station period. While any node has
// not yet been heard in the CFP the CN broadcasts a Channel packet at the
// start of every CAP. Nodes acknowledge it and request a slot in the same
// CAP via contention access, then sleep and wake once per frame for their
// slot. The CN answers every data packet with an Ack, or a SyncAck carrying
// the drift value when the arrival error exceeds the acceptable delay.

#include <cstdint>
#include <optional>
#include <vector>

#include "armac/config.hpp"
#include "armac/energy.hpp"
#include "armac/report.hpp"

namespace armac {

enum class CnPhase { ScanningChannels, Advertising, Operating };

enum class NodePhase { ScanningChannels, AwaitingChannelPacket, Joining, Sleeping, AwakeTx, CapListening };

struct RfEnvironment {
    std::vector<bool> busy;  // occupied by something other than this network's CN
    Micros t_cp = 1'000'000;
};

// First free channel in scan order, if any.
std::optional<int> cn_select_channel(const RfEnvironment& env);

// A node skips channels that sense free and listens on busy ones; the CN's
// own channel senses busy.
bool node_senses_busy(const RfEnvironment& env, int cn_channel, int channel);

// Channel a scanning node reaches next, wrapping around.
inline int next_scan_channel(const RfEnvironment& env, int channel) {
    return (channel + 1) % static_cast<int>(env.busy.size());
}

// Per-cycle breakdown a loss-free, drift-free node with the given data rate
// accumulates under `cfg`.
CycleBreakdown armac_cycle_oracle(const SimConfig& cfg, int data_rate);

struct RunOptions {
    bool trace = false;
};

// One simulation cell. Never throws on protocol-level failures; those are
// reported through RunReport::status.
RunReport run_armac(const SimConfig& cfg, double per, std::uint64_t seed, RunOptions opts = {});

}  // namespace armac
