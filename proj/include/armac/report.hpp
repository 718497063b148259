#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "armac/config.hpp"
#include "armac/energy.hpp"
#include "armac/protocol.hpp"

namespace armac {

struct NodeStats {
    Address node;
    EnergyLedger ledger;
    std::int64_t sent = 0;       // periodic data packets originated in counted cycles
    std::int64_t delivered = 0;  // distinct periodic packets received by the CN
    std::int64_t collided = 0;   // own transmissions destroyed by overlap
    std::int64_t retried = 0;
    std::int64_t sync_acks = 0;
    std::int64_t join_latency_frames = -1;
    std::int64_t channel_access_failures = 0;
    std::int64_t retries_exhausted = 0;
    std::int64_t emergency_sent = 0;
    std::int64_t emergency_delivered = 0;
    std::int64_t cap_exhausted = 0;
};

struct CellKey {
    Protocol protocol = Protocol::Armac;
    double per = 0.0;
    std::uint64_t seed = 0;

    friend bool operator==(const CellKey&, const CellKey&) = default;
    friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct RunReport {
    CellKey key;
    std::string status = "ok";  // "ok" or "aborted: <reason>"
    std::vector<NodeStats> nodes;
    std::int64_t cycles = 0;
    std::int64_t steady_start_frame = 0;
    std::int64_t cfp_collisions = 0;
    std::int64_t on_demand_completed = 0;
    std::int64_t on_demand_abandoned = 0;
    std::uint64_t events = 0;
    std::string trace;  // filled only when tracing

    bool ok() const { return status == "ok"; }
    Femtojoules total_energy() const;
    Femtojoules mean_node_energy() const;
};

// Line-oriented event trace: time_us,entity,event,detail
class Trace {
public:
    explicit Trace(bool enabled) : enabled_(enabled) {}

    bool enabled() const { return enabled_; }
    void line(std::uint64_t time_us, const std::string& entity, const std::string& event, const std::string& detail);
    std::string take() { return std::move(text_); }

private:
    bool enabled_;
    std::string text_;
};

}  // namespace armac
