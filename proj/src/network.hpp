#pragma once

// Plumbing shared by the AR-MAC and CSMA simulations: packet dispatch over
// the shared channel, the counted-cycle window and run bookkeeping.

#include <string>
#include <unordered_map>

#include "armac/config.hpp"
#include "armac/engine.hpp"
#include "armac/report.hpp"

namespace armac::detail {

inline constexpr EntityId kCnEntity = 0;
inline constexpr EntityId kBroadcastEntity = 0xFFFFFFFF;

inline EntityId node_entity(int index) { return static_cast<EntityId>(index + 1); }
inline int node_index(EntityId id) { return static_cast<int>(id) - 1; }

// Event kind tags, used only for diagnostics.
enum EventTag : std::uint16_t {
    kFrameBoundary = 1,
    kCapStart,
    kTxEnd,
    kCnSend,
    kNodeWake,
    kNodeTx,
    kNodeTimer,
    kNodeRadio,
};

class Network {
public:
    Network(const SimConfig& cfg, double per, std::uint64_t seed, bool trace);
    virtual ~Network() = default;

    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;

protected:
    struct TxMeta {
        bool cfp = false;
        std::int64_t frame = 0;
    };

    TxId send(EntityId from, EntityId to, const Packet& pkt, bool cfp, std::int64_t frame);

    virtual void on_rx_start(EntityId receiver, const Transmission& tx) = 0;
    virtual void on_tx_end(const Transmission& tx, const TxMeta& meta) = 0;

    bool in_window(std::int64_t frame) const {
        return window_open_ && frame >= steady_start_ && frame < steady_start_ + cfg_.n_cycles;
    }
    std::int64_t frame_of(SimTime t) const { return static_cast<std::int64_t>(t.ticks) / cfg_.t_frame; }
    SimTime frame_start(std::int64_t frame) const { return SimTime{static_cast<std::uint64_t>(frame * cfg_.t_frame)}; }

    void log(const std::string& entity, const std::string& event, const std::string& detail) {
        if (trace_.enabled()) trace_.line(sim_.now().ticks, entity, event, detail);
    }
    static std::string entity_name(EntityId id);

    RunReport base_report() const;

    const SimConfig& cfg_;
    RadioParams radio_;
    std::uint64_t seed_;
    double per_;
    Simulator sim_;
    Channel channel_;
    Trace trace_;

    bool window_open_ = false;
    std::int64_t steady_start_ = 0;
    std::int64_t cfp_collisions_ = 0;

private:
    std::unordered_map<TxId, TxMeta> meta_;
};

}  // namespace armac::detail
