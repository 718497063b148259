#include "network.hpp"

namespace armac::detail {

Network::Network(const SimConfig& cfg, double per, std::uint64_t seed, bool trace)
    : cfg_(cfg),
      radio_(cfg.radio),
      seed_(seed),
      per_(per),
      channel_(per, Rng(derive_seed(seed, StreamKind::Channel, 0)), cfg.radio.t_byte),
      trace_(trace) {
    for (int code = 1; code <= 7; ++code) channel_.set_lossy(static_cast<PacketKind>(code), false);
    for (const auto kind : cfg.lossy_kinds) channel_.set_lossy(kind, true);
}

std::string Network::entity_name(EntityId id) {
    if (id == kCnEntity) return "cn";
    if (id == kBroadcastEntity) return "all";
    return "node" + std::to_string(id);
}

TxId Network::send(EntityId from, EntityId to, const Packet& pkt, bool cfp, std::int64_t frame) {
    const TxId id = channel_.transmit(pkt, from, to, sim_.now());
    const Transmission& tx = channel_.get(id);
    meta_[id] = TxMeta{cfp, frame};
    log(entity_name(from), "tx", describe(pkt) + " to=" + entity_name(to) + (tx.lost ? " lost" : ""));
    if (!tx.lost) on_rx_start(to, tx);
    sim_.schedule(tx.end, from, kTxEnd, [this, id] {
        const Transmission done = channel_.get(id);
        const auto it = meta_.find(id);
        const TxMeta meta = it->second;
        meta_.erase(it);
        if (done.collided) {
            log(entity_name(done.from), "collision", describe(done.packet));
            if (meta.cfp && in_window(meta.frame)) ++cfp_collisions_;
        }
        on_tx_end(done, meta);
    });
    return id;
}

RunReport Network::base_report() const {
    RunReport r;
    r.key = CellKey{Protocol::Armac, per_, seed_};
    r.cycles = cfg_.n_cycles;
    r.steady_start_frame = steady_start_;
    r.cfp_collisions = cfp_collisions_;
    return r;
}

}  // namespace armac::detail
