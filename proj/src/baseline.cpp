#include "armac/baseline.hpp"

#include <algorithm>
#include <memory>

#include "armac/schedule.hpp"
#include "network.hpp"

namespace armac {

namespace {

using detail::kCnEntity;
using detail::Network;

struct CsmaNode {
    int index = 0;
    Address addr;
    EntityId id = 0;
    EnergyMeter meter;
    Rng backoff_rng;
    int data_rate = 1;

    int nb = 0;
    int be = 0;
    int retries = 0;
    std::int64_t frame = 0;
    SimTime cca_start;
    std::uint64_t token = 0;
    bool awaiting_ack = false;
    bool timed_out = false;
    std::optional<TxId> receiving;
    NodeStats stats;

    CsmaNode(const RadioParams& radio, Micros t_frame, std::uint64_t seed, int i)
        : meter(radio, t_frame), backoff_rng(derive_seed(seed, StreamKind::Backoff, static_cast<std::uint64_t>(i))) {}
};

class CsmaNetwork final : public Network {
public:
    CsmaNetwork(const SimConfig& cfg, double per, std::uint64_t seed, bool trace) : Network(cfg, per, seed, trace) {
        for (int i = 0; i < cfg.n_nodes; ++i) {
            auto n = std::make_unique<CsmaNode>(radio_, cfg.t_frame, seed, i);
            n->index = i;
            n->addr = node_address(i);
            n->id = detail::node_entity(i);
            n->data_rate = cfg.data_rate_of(i);
            n->stats.node = n->addr;
            n->stats.join_latency_frames = 0;
            nodes_.push_back(std::move(n));
        }
        window_open_ = true;
        steady_start_ = 0;
    }

    RunReport run() {
        RunReport report = base_report();
        report.key.protocol = Protocol::Csma;
        try {
            at(frame_start(0), kCnEntity, detail::kFrameBoundary, [this] { frame_begin(0); });
            sim_.run_until(frame_start(cfg_.n_cycles));
        } catch (const std::exception& e) {
            report.status = std::string("aborted: ") + e.what();
        }
        report.cfp_collisions = 0;
        for (const auto& n : nodes_) {
            NodeStats s = n->stats;
            s.ledger = n->meter.ledger();
            report.nodes.push_back(s);
        }
        report.trace = trace_.take();
        return report;
    }

private:
    CsmaNode& node(EntityId id) { return *nodes_.at(static_cast<std::size_t>(detail::node_index(id))); }
    std::string name(const CsmaNode& n) const { return "node" + std::to_string(n.addr.value); }

    template <class F>
    void at(SimTime t, EntityId target, std::uint16_t tag, F&& fn) {
        sim_.schedule(std::max(t, sim_.now()), target, tag, std::forward<F>(fn));
    }

    void frame_begin(std::int64_t f) {
        if (f > 0) {
            for (auto& n : nodes_) n->meter.close_cycle(sim_.now(), in_window(f - 1));
        }
        if (f == cfg_.n_cycles) return;
        at(frame_start(f + 1), kCnEntity, detail::kFrameBoundary, [this, f] { frame_begin(f + 1); });
        for (auto& n : nodes_) {
            n->frame = f;
            n->retries = 0;
            n->awaiting_ack = false;
            n->receiving.reset();
            n->meter.set_mode(sim_.now(), RadioMode::Switching);
            ++n->stats.sent;
            start_backoff(*n, sim_.now() + radio_.t_switch);
        }
    }

    // Backoff periods are aligned to the end of the wake-up switch.
    void start_backoff(CsmaNode& n, SimTime from) {
        n.nb = 0;
        n.be = cfg_.csma.min_be;
        schedule_cca(n, from);
    }

    void schedule_cca(CsmaNode& n, SimTime from) {
        const Micros delay = n.backoff_rng.uniform_int(0, (std::int64_t{1} << n.be) - 1) * cfg_.csma.backoff_unit;
        const EntityId id = n.id;
        const auto token = ++n.token;
        at(from, id, detail::kNodeTimer, [this, id, token] {
            CsmaNode& m = node(id);
            if (m.token == token) m.meter.set_mode(sim_.now(), RadioMode::Idle);
        });
        at(from + delay, id, detail::kNodeTimer, [this, id, token] {
            CsmaNode& m = node(id);
            if (m.token != token) return;
            m.meter.set_mode(sim_.now(), RadioMode::Rx);
            m.cca_start = sim_.now();
            at(sim_.now() + cfg_.csma.cca_len, id, detail::kNodeTimer, [this, id, token] {
                CsmaNode& k = node(id);
                if (k.token == token) cca_end(k);
            });
        });
    }

    void cca_end(CsmaNode& n) {
        if (channel_.busy(n.cca_start, sim_.now())) {
            ++n.nb;
            n.be = std::min(n.be + 1, cfg_.csma.max_be);
            if (n.nb > cfg_.csma.max_backoffs) {
                ++n.stats.channel_access_failures;
                log(name(n), "channel_access_failure", "");
                sleep(n);
                return;
            }
            schedule_cca(n, sim_.now());
            return;
        }
        n.meter.set_mode(sim_.now(), RadioMode::Tx);
        const SlotRequest req{n.addr, n.data_rate};
        std::vector<std::uint8_t> body(static_cast<std::size_t>(req.data_rate));
        for (std::size_t i = 0; i < body.size(); ++i) body[i] = static_cast<std::uint8_t>(i);
        send(n.id, kCnEntity, Packet{n.addr, DataBody{std::move(body)}}, false, n.frame);
    }

    void sleep(CsmaNode& n) {
        ++n.token;
        n.awaiting_ack = false;
        n.receiving.reset();
        n.meter.set_mode(sim_.now(), RadioMode::Switching);
        const EntityId id = n.id;
        const auto token = n.token;
        at(sim_.now() + radio_.t_switch, id, detail::kNodeRadio, [this, id, token] {
            CsmaNode& m = node(id);
            if (m.token == token) m.meter.set_mode(sim_.now(), RadioMode::Off);
        });
    }

    void ack_missing(CsmaNode& n) {
        n.awaiting_ack = false;
        if (n.retries < cfg_.csma.max_retries) {
            ++n.retries;
            ++n.stats.retried;
            log(name(n), "retry", std::to_string(n.retries));
            start_backoff(n, sim_.now());
            return;
        }
        ++n.stats.retries_exhausted;
        log(name(n), "retries_exhausted", "");
        sleep(n);
    }

    void on_rx_start(EntityId receiver, const Transmission& tx) override {
        if (receiver == kCnEntity || receiver == detail::kBroadcastEntity) return;
        CsmaNode& n = node(receiver);
        if (!n.awaiting_ack || n.receiving) return;
        n.receiving = tx.id;
        n.meter.set_mode(sim_.now(), RadioMode::Rx);
    }

    void on_tx_end(const Transmission& tx, const TxMeta& meta) override {
        const bool ok = tx.outcome() == Delivery::Delivered;
        if (tx.from == kCnEntity) {
            if (tx.lost) return;
            CsmaNode& n = node(tx.to);
            if (!n.receiving || *n.receiving != tx.id) return;
            n.receiving.reset();
            if (ok) {
                sleep(n);
            } else {
                n.meter.set_mode(sim_.now(), RadioMode::Idle);
                if (n.timed_out) ack_missing(n);
            }
            return;
        }
        CsmaNode& n = node(tx.from);
        if (meta.frame != n.frame) return;
        if (tx.collided && in_window(meta.frame)) ++n.stats.collided;
        n.meter.set_mode(sim_.now(), RadioMode::Idle);
        n.awaiting_ack = true;
        n.timed_out = false;
        const EntityId id = n.id;
        const auto token = ++n.token;
        at(sim_.now() + cfg_.ack_timeout, id, detail::kNodeTimer, [this, id, token] {
            CsmaNode& m = node(id);
            if (m.token != token || !m.awaiting_ack) return;
            if (m.receiving) {
                m.timed_out = true;
            } else {
                ack_missing(m);
            }
        });
        if (ok) {
            const std::int64_t frame = meta.frame;
            const int idx = n.index;
            if (in_window(frame) && last_delivered_[static_cast<std::size_t>(idx)] != frame) {
                last_delivered_[static_cast<std::size_t>(idx)] = frame;
                ++n.stats.delivered;
            }
            const EntityId to = tx.from;
            at(sim_.now() + radio_.t_turnaround, kCnEntity, detail::kCnSend, [this, to, frame] {
                send(kCnEntity, to, Packet{kCnAddress, AckBody{false}}, false, frame);
            });
        }
    }

    std::vector<std::unique_ptr<CsmaNode>> nodes_;
    std::vector<std::int64_t> last_delivered_ = std::vector<std::int64_t>(static_cast<std::size_t>(cfg_.n_nodes), -1);
};

}  // namespace

RunReport run_csma(const SimConfig& cfg, double per, std::uint64_t seed, RunOptions opts) {
    CsmaNetwork net(cfg, per, seed, opts.trace);
    return net.run();
}

}  // namespace armac
