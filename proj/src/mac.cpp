#include "armac/mac.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <memory>

#include "armac/engine.hpp"
#include "armac/schedule.hpp"
#include "armac/sync.hpp"
#include "network.hpp"

namespace armac {

std::optional<int> cn_select_channel(const RfEnvironment& env) {
    for (std::size_t c = 0; c < env.busy.size(); ++c) {
        if (!env.busy[c]) return static_cast<int>(c);
    }
    return std::nullopt;
}

bool node_senses_busy(const RfEnvironment& env, int cn_channel, int channel) {
    return channel == cn_channel || env.busy.at(static_cast<std::size_t>(channel));
}

CycleBreakdown armac_cycle_oracle(const SimConfig& cfg, int data_rate) {
    const SlotRequest req{Address{1}, data_rate};
    return closed_form_cycle(req.data_packet_octets(), kAckOctets, cfg.radio.t_turnaround, cfg.radio, cfg.t_frame);
}

namespace {

using detail::kBroadcastEntity;
using detail::kCnEntity;
using detail::Network;

// n/d rounded to nearest, ties away from zero; d > 0.
std::int64_t div_round(std::int64_t n, std::int64_t d) {
    return n >= 0 ? (2 * n + d) / (2 * d) : -((-2 * n + d) / (2 * d));
}

std::int64_t div_floor(std::int64_t n, std::int64_t d) {
    const std::int64_t q = n / d;
    return (n % d != 0 && n < 0) ? q - 1 : q;
}

enum class CapPurpose { ChannelAck, Tsr, Emergency, OnDemandReply };

enum class Wait { None, CfpReply, CapReply, ChannelPacket, DataRequest };

struct CapTxn {
    Packet pkt;
    CapPurpose purpose = CapPurpose::Tsr;
    int backoffs = 0;
    int exponent = 0;
    SimTime cap_end;
    SimTime cca_start;
    std::size_t reply_octets = 0;
    bool expects_reply = true;
};

struct SensorNode {
    int index = 0;
    Address addr;
    EntityId id = 0;
    ClockModel clock;
    EnergyMeter meter;
    Rng backoff_rng;
    Rng jitter_rng;
    Rng traffic_rng;
    int data_rate = 1;
    Micros jitter = 0;

    NodePhase phase = NodePhase::ScanningChannels;
    int channel = 0;
    bool radio_on = false;

    // Local-clock frame reference: node frame f starts at anchor + f·t_frame.
    Micros anchor = 0;
    std::int64_t next_frame = 0;
    Micros wake_offset = 0;
    TimeSlot slot;
    Micros cap_start = 0;
    Micros cap_len = 0;
    bool joined = false;

    std::uint64_t cfp_token = 0;
    std::uint64_t cap_token = 0;
    std::uint64_t scan_token = 0;
    Wait wait = Wait::None;
    std::optional<TxId> receiving;
    bool timed_out = false;

    SimTime slot_end;
    std::int64_t exchange_frame = 0;
    int cfp_retries = 0;

    std::optional<CapTxn> cap;
    std::deque<int> emergencies;
    bool odt_pending = false;
    int tsr_attempts = 0;

    NodeStats stats;

    SensorNode(const RadioParams& radio, Micros t_frame, std::uint64_t seed, int i)
        : meter(radio, t_frame),
          backoff_rng(derive_seed(seed, StreamKind::Backoff, static_cast<std::uint64_t>(i))),
          jitter_rng(derive_seed(seed, StreamKind::Jitter, static_cast<std::uint64_t>(i))),
          traffic_rng(derive_seed(seed, StreamKind::Traffic, static_cast<std::uint64_t>(i))) {}
};

struct PendingOnDemand {
    int node = 0;  // 0-based
    int bytes = 0;
    int attempts = 0;
    std::int64_t odt_frame = -1;        // frame whose CFP reply carried ODT=1
    std::int64_t attempted_frame = -1;  // frame whose CAP carried the DataRequest
};

class ArmacNetwork final : public Network {
public:
    ArmacNetwork(const SimConfig& cfg, double per, std::uint64_t seed, bool trace)
        : Network(cfg, per, seed, trace), layout_(cfg.layout()) {
        env_.busy = cfg.channels;
        env_.t_cp = cfg.listen_window();
        for (int i = 0; i < cfg.n_nodes; ++i) {
            auto n = std::make_unique<SensorNode>(radio_, cfg.t_frame, seed, i);
            n->index = i;
            n->addr = node_address(i);
            n->id = detail::node_entity(i);
            n->clock.skew_ppm = cfg.skew_of(i);
            n->data_rate = cfg.data_rate_of(i);
            n->jitter = cfg.jitter_of(i);
            n->stats.node = n->addr;
            nodes_.push_back(std::move(n));
        }
        last_delivered_.assign(static_cast<std::size_t>(cfg.n_nodes), -1);
        confirmed_.assign(static_cast<std::size_t>(cfg.n_nodes), false);
    }

    RunReport run() {
        RunReport report = base_report();
        report.key.protocol = Protocol::Armac;
        try {
            start();
            for (std::int64_t b = 1; !finished_; ++b) {
                sim_.run_until(frame_start(b));
                if (!window_open_ && b >= cfg_.max_join_frames) {
                    throw std::runtime_error("join incomplete after " + std::to_string(b) + " frames");
                }
            }
        } catch (const std::exception& e) {
            report.status = std::string("aborted: ") + e.what();
        }
        report.steady_start_frame = steady_start_;
        report.cfp_collisions = cfp_collisions_;
        report.on_demand_completed = od_completed_;
        report.on_demand_abandoned = od_abandoned_;
        for (const auto& n : nodes_) {
            NodeStats s = n->stats;
            s.ledger = n->meter.ledger();
            report.nodes.push_back(s);
        }
        report.trace = trace_.take();
        return report;
    }

private:
    // ---------------------------------------------------------------- helpers

    SensorNode& node(EntityId id) { return *nodes_.at(static_cast<std::size_t>(detail::node_index(id))); }

    std::string name(const SensorNode& n) const { return "node" + std::to_string(n.addr.value); }

    // Global time at which node-frame `frame` plus `offset` falls on the node's clock.
    SimTime node_time(const SensorNode& n, std::int64_t frame, Micros offset) const {
        return n.clock.local_to_global(n.anchor + frame * cfg_.t_frame + offset);
    }

    std::int64_t node_frame_now(const SensorNode& n) const {
        return div_floor(n.clock.global_to_local(sim_.now()) - n.anchor, cfg_.t_frame);
    }

    template <class F>
    void at(SimTime t, EntityId target, std::uint16_t tag, F&& fn) {
        sim_.schedule(std::max(t, sim_.now()), target, tag, std::forward<F>(fn));
    }

    void power_on(SensorNode& n) {
        n.radio_on = true;
        n.meter.set_mode(sim_.now(), RadioMode::Switching);
    }

    void power_off(SensorNode& n) {
        if (!n.radio_on) return;
        n.radio_on = false;
        n.wait = Wait::None;
        n.receiving.reset();
        n.meter.set_mode(sim_.now(), RadioMode::Switching);
        const EntityId id = n.id;
        at(sim_.now() + radio_.t_switch, id, detail::kNodeRadio, [this, id] {
            SensorNode& m = node(id);
            if (!m.radio_on) m.meter.set_mode(sim_.now(), RadioMode::Off);
        });
    }

    // ------------------------------------------------------------- lifecycle

    void start() {
        const auto channel = cn_select_channel(env_);
        if (!channel) throw std::runtime_error("no free RF channel for the CN");
        cn_channel_ = *channel;
        cn_phase_ = CnPhase::Advertising;
        log("cn", "channel", std::to_string(cn_channel_));

        for (auto& n : nodes_) {
            n->radio_on = true;
            n->meter.set_mode(sim_.now(), RadioMode::Rx);
            node_scan(*n, cfg_.scan_start_of(n->index));
        }
        at(frame_start(0) + layout_.cap_start(), kCnEntity, detail::kCapStart, [this] { cn_cap_start(0); });
        at(frame_start(1), kCnEntity, detail::kFrameBoundary, [this] { frame_boundary(1); });
    }

    void frame_boundary(std::int64_t b) {
        if (!window_open_ && std::all_of(nodes_.begin(), nodes_.end(), [](const auto& n) { return n->joined; })) {
            window_open_ = true;
            steady_start_ = b;
            cn_phase_ = CnPhase::Operating;
            log("cn", "steady", "frame=" + std::to_string(b));
        }
        const bool count = in_window(b - 1);
        for (auto& n : nodes_) n->meter.close_cycle(sim_.now(), count);

        cn_settle_on_demand(b);
        if (window_open_) {
            for (const auto& r : cfg_.on_demand) {
                if (steady_start_ + r.cycle == b) od_queue_.push_back(PendingOnDemand{r.node - 1, r.bytes});
            }
        }
        if (window_open_ && b == steady_start_ + cfg_.n_cycles) {
            finished_ = true;
            return;
        }
        at(frame_start(b + 1), kCnEntity, detail::kFrameBoundary, [this, b] { frame_boundary(b + 1); });
    }

    // ------------------------------------------------------------------- CN

    void cn_cap_start(std::int64_t b) {
        Micros dr_delay = cfg_.on_demand_guard;
        const bool advertise = std::count(confirmed_.begin(), confirmed_.end(), true) < cfg_.n_nodes;
        if (advertise) {
            Packet p{kCnAddress, ChannelBody{kCnAddress, static_cast<std::uint8_t>(cn_channel_)}};
            send(kCnEntity, kBroadcastEntity, p, false, b);
            dr_delay += radio_.airtime(encoded_length(p));
        }
        if (!od_queue_.empty() && od_queue_.front().odt_frame == b) {
            auto& head = od_queue_.front();
            ++head.attempts;
            head.attempted_frame = b;
            const int target = head.node;
            const int bytes = head.bytes;
            at(sim_.now() + dr_delay, kCnEntity, detail::kCnSend, [this, target, bytes, b] {
                send(kCnEntity, detail::node_entity(target),
                     Packet{kCnAddress, DataRequestBody{static_cast<std::uint16_t>(bytes)}}, false, b);
            });
        }
        at(frame_start(b + 1) + layout_.cap_start(), kCnEntity, detail::kCapStart, [this, b] { cn_cap_start(b + 1); });
    }

    // Settles the on-demand request attempted in the frame that just ended.
    void cn_settle_on_demand(std::int64_t b) {
        if (od_queue_.empty()) return;
        auto& head = od_queue_.front();
        if (head.attempted_frame == b - 1 && head.attempts >= cfg_.on_demand_max_attempts) {
            log("cn", "on_demand_abandoned", "node" + std::to_string(head.node + 1));
            ++od_abandoned_;
            od_queue_.pop_front();
        }
    }

    void cn_reply(EntityId to, Packet pkt, bool cfp, std::int64_t frame) {
        at(sim_.now() + radio_.t_turnaround, kCnEntity, detail::kCnSend,
           [this, to, pkt = std::move(pkt), cfp, frame] { send(kCnEntity, to, pkt, cfp, frame); });
    }

    void cn_receive(const Transmission& tx) {
        if (detail::node_index(tx.from) < 0 || detail::node_index(tx.from) >= cfg_.n_nodes) return;
        const int idx = detail::node_index(tx.from);
        const Address addr = tx.packet.src;
        switch (tx.packet.kind()) {
            case PacketKind::TimeSlotRequest: cn_on_tsr(tx, idx); break;
            case PacketKind::Data: {
                const Micros offset = static_cast<Micros>(tx.start.ticks) % cfg_.t_frame;
                if (offset >= layout_.cap_start() && offset < layout_.cap_end()) {
                    cn_on_cap_data(tx, idx);
                } else {
                    cn_on_cfp_data(tx, idx, addr);
                }
                break;
            }
            default: break;  // node Acks of Channel packets need no action
        }
    }

    void cn_on_tsr(const Transmission& tx, int idx) {
        const auto& body = std::get<TimeSlotRequestBody>(tx.packet.body);
        const Address addr = tx.packet.src;
        const bool known = std::any_of(requests_.begin(), requests_.end(),
                                       [addr](const SlotRequest& r) { return r.node == addr; });
        if (!known) {
            requests_.push_back(SlotRequest{addr, body.data_rate});
            try {
                schedule_ = build_schedule(requests_, layout_, cfg_.f, radio_, cfg_.slot_margin);
            } catch (const ScheduleError& e) {
                requests_.pop_back();
                log("cn", "tsr_rejected", name(*nodes_[static_cast<std::size_t>(idx)]) + " " + e.what());
                return;
            }
            log("cn", "slot_assigned", name(*nodes_[static_cast<std::size_t>(idx)]) + " D=" + std::to_string(schedule_.d));
        }
        const TimeSlot* slot = schedule_.find(addr);
        TimeSlotRequestReplyBody reply{static_cast<std::uint32_t>(slot->start), static_cast<std::uint32_t>(slot->length),
                                       static_cast<std::uint32_t>(layout_.cap_start()),
                                       static_cast<std::uint32_t>(layout_.cap_len)};
        cn_reply(tx.from, Packet{kCnAddress, reply}, false, frame_of(tx.start));
    }

    void cn_on_cfp_data(const Transmission& tx, int idx, Address addr) {
        const TimeSlot* slot = schedule_.find(addr);
        if (slot == nullptr) return;
        confirmed_[static_cast<std::size_t>(idx)] = true;

        const std::int64_t k = div_round(tx.start.as_micros() - slot->start, cfg_.t_frame);
        const SimTime expected = frame_start(k) + slot->start;
        // A retransmission is measured against the retry's expected start.
        Micros dt = delta_t(ArrivalObservation{addr, expected, tx.start});
        const Micros dt_retry = dt + radio_.airtime(tx.octets) + cfg_.ack_timeout;
        if (std::abs(dt_retry) < std::abs(dt)) dt = dt_retry;
        const DriftDecision dec = drift_value(dt, schedule_.d);

        bool odt = false;
        if (!od_queue_.empty() && od_queue_.front().node == idx) {
            odt = true;
            od_queue_.front().odt_frame = k;
        }
        auto& stats = nodes_[static_cast<std::size_t>(idx)]->stats;
        if (in_window(k) && last_delivered_[static_cast<std::size_t>(idx)] != k) {
            last_delivered_[static_cast<std::size_t>(idx)] = k;
            ++stats.delivered;
        }
        Packet reply{kCnAddress, AckBody{odt}};
        if (dec.send_sync_ack) {
            reply.body = SyncAckBody{static_cast<std::int32_t>(dec.dv), odt};
            if (in_window(k)) ++stats.sync_acks;
            log("cn", "drift", name(*nodes_[static_cast<std::size_t>(idx)]) + " dT=" + std::to_string(dec.delta_t) +
                                   " D=" + std::to_string(schedule_.d));
        }
        cn_reply(tx.from, std::move(reply), true, k);
    }

    void cn_on_cap_data(const Transmission& tx, int idx) {
        const std::int64_t frame = frame_of(tx.start);
        if (!od_queue_.empty() && od_queue_.front().node == idx && od_queue_.front().attempted_frame == frame) {
            log("cn", "on_demand_complete", "node" + std::to_string(idx + 1));
            ++od_completed_;
            od_queue_.pop_front();
        }
        cn_reply(tx.from, Packet{kCnAddress, AckBody{false}}, false, frame);
    }

    // ----------------------------------------------------------- dispatch

    void on_rx_start(EntityId receiver, const Transmission& tx) override {
        if (receiver == kCnEntity) return;
        if (receiver == kBroadcastEntity) {
            for (auto& n : nodes_) {
                if (n->wait == Wait::ChannelPacket && n->channel == cn_channel_) node_rx_start(*n, tx);
            }
            return;
        }
        node_rx_start(node(receiver), tx);
    }

    void on_tx_end(const Transmission& tx, const TxMeta& meta) override {
        const bool ok = tx.outcome() == Delivery::Delivered;
        if (tx.from != kCnEntity) {
            SensorNode& n = node(tx.from);
            if (tx.collided && in_window(meta.frame)) ++n.stats.collided;
            node_tx_done(n, tx);
        }
        if (tx.lost) return;
        if (tx.to == kCnEntity) {
            if (ok) cn_receive(tx);
        } else if (tx.to == kBroadcastEntity) {
            for (auto& n : nodes_) node_rx_end(*n, tx, ok);
        } else {
            node_rx_end(node(tx.to), tx, ok);
        }
    }

    // ---------------------------------------------------------- node: rx

    void node_rx_start(SensorNode& n, const Transmission& tx) {
        if (n.receiving || !n.radio_on) return;
        switch (n.wait) {
            case Wait::CfpReply:
            case Wait::CapReply:
                n.meter.set_mode(sim_.now(), RadioMode::Rx);
                n.receiving = tx.id;
                break;
            case Wait::ChannelPacket:
            case Wait::DataRequest:
                n.receiving = tx.id;
                break;
            case Wait::None: break;
        }
    }

    void node_rx_end(SensorNode& n, const Transmission& tx, bool ok) {
        if (!n.receiving || *n.receiving != tx.id) return;
        n.receiving.reset();
        const PacketKind kind = tx.packet.kind();
        switch (n.wait) {
            case Wait::CfpReply:
                if (ok && (kind == PacketKind::Ack || kind == PacketKind::SyncAck)) {
                    cfp_reply(n, tx.packet);
                } else {
                    n.meter.set_mode(sim_.now(), RadioMode::Idle);
                    if (n.timed_out) cfp_no_reply(n);
                }
                break;
            case Wait::CapReply: {
                const bool expected = n.cap && ((n.cap->purpose == CapPurpose::Tsr && kind == PacketKind::TimeSlotRequestReply) ||
                                                (n.cap->purpose != CapPurpose::Tsr && kind == PacketKind::Ack));
                if (ok && expected) {
                    cap_success(n, tx.packet);
                } else {
                    n.meter.set_mode(sim_.now(), RadioMode::Idle);
                    if (n.timed_out) cap_failure(n);
                }
                break;
            }
            case Wait::ChannelPacket:
                if (ok && kind == PacketKind::Channel) {
                    channel_acquired(n, tx);
                } else if (n.timed_out) {
                    node_scan(n, next_scan_channel(env_, n.channel));
                }
                break;
            case Wait::DataRequest:
                if (ok && kind == PacketKind::DataRequest) on_data_request(n, tx.packet);
                break;
            case Wait::None: break;
        }
    }

    void node_tx_done(SensorNode& n, const Transmission& tx) {
        if (!n.radio_on) return;
        n.meter.set_mode(sim_.now(), RadioMode::Idle);
        n.timed_out = false;
        const EntityId id = n.id;
        if (tx.packet.kind() == PacketKind::Data && n.wait == Wait::None && !n.cap) {
            n.wait = Wait::CfpReply;
            const auto token = ++n.cfp_token;
            at(sim_.now() + cfg_.ack_timeout, id, detail::kNodeTimer, [this, id, token] {
                SensorNode& m = node(id);
                if (m.cfp_token != token || m.wait != Wait::CfpReply) return;
                if (m.receiving) {
                    m.timed_out = true;
                } else {
                    cfp_no_reply(m);
                }
            });
            return;
        }
        if (!n.cap) return;
        if (!n.cap->expects_reply) {
            cap_success(n, tx.packet);
            return;
        }
        n.wait = Wait::CapReply;
        const auto token = ++n.cap_token;
        at(sim_.now() + cfg_.ack_timeout, id, detail::kNodeTimer, [this, id, token] {
            SensorNode& m = node(id);
            if (m.cap_token != token || m.wait != Wait::CapReply) return;
            if (m.receiving) {
                m.timed_out = true;
            } else {
                cap_failure(m);
            }
        });
    }

    // ------------------------------------------------------- node: scan

    void node_scan(SensorNode& n, int channel) {
        n.channel = channel;
        n.phase = NodePhase::ScanningChannels;
        n.wait = Wait::None;
        n.receiving.reset();
        n.timed_out = false;
        const EntityId id = n.id;
        const auto token = ++n.scan_token;
        if (!node_senses_busy(env_, cn_channel_, channel)) {
            at(sim_.now() + cfg_.cap.cca, id, detail::kNodeTimer, [this, id, token] {
                SensorNode& m = node(id);
                if (m.scan_token == token) node_scan(m, next_scan_channel(env_, m.channel));
            });
            return;
        }
        n.phase = NodePhase::AwaitingChannelPacket;
        n.wait = Wait::ChannelPacket;
        log(name(n), "listen", "channel=" + std::to_string(channel));
        at(sim_.now() + env_.t_cp, id, detail::kNodeTimer, [this, id, token] {
            SensorNode& m = node(id);
            if (m.scan_token != token || m.wait != Wait::ChannelPacket) return;
            if (m.receiving) {
                m.timed_out = true;
            } else {
                node_scan(m, next_scan_channel(env_, m.channel));
            }
        });
    }

    void channel_acquired(SensorNode& n, const Transmission& tx) {
        ++n.scan_token;
        // The Channel packet marks the CAP start of the current frame.
        n.anchor = n.clock.global_to_local(tx.end) - radio_.airtime(tx.octets) - layout_.cap_start();
        n.cap_start = layout_.cap_start();
        n.cap_len = layout_.cap_len;
        n.phase = NodePhase::Joining;
        n.wait = Wait::None;
        n.tsr_attempts = 0;
        log(name(n), "channel_acquired", std::to_string(n.channel));
        const SimTime cap_end = node_time(n, 0, n.cap_start + n.cap_len);
        start_cap(n, Packet{n.addr, AckBody{false}}, CapPurpose::ChannelAck, sim_.now(), cap_end);
    }

    Packet tsr_packet(const SensorNode& n) const {
        const SlotRequest req{n.addr, n.data_rate};
        return Packet{n.addr, TimeSlotRequestBody{static_cast<std::uint16_t>(n.data_rate),
                                                  static_cast<std::uint32_t>(slot_length(req, radio_, 0))}};
    }

    void joined(SensorNode& n, const TimeSlotRequestReplyBody& r) {
        n.joined = true;
        n.slot = TimeSlot{n.addr, static_cast<Micros>(r.slot_start), static_cast<Micros>(r.slot_len)};
        n.wake_offset = n.slot.start;
        n.cap_start = r.cap_start;
        n.cap_len = r.cap_len;
        n.next_frame = node_frame_now(n) + 1;
        n.stats.join_latency_frames = frame_of(sim_.now());
        n.cap.reset();
        log(name(n), "joined", "slot=" + std::to_string(n.slot.start) + "+" + std::to_string(n.slot.length));
        power_off(n);
        n.phase = NodePhase::Sleeping;
        schedule_cfp(n);
    }

    // -------------------------------------------------------- node: CFP

    void schedule_cfp(SensorNode& n) {
        SimTime tx = node_time(n, n.next_frame, n.wake_offset);
        if (n.jitter > 0) tx = tx + n.jitter_rng.uniform_int(-n.jitter, n.jitter);
        if (tx < sim_.now() + radio_.t_switch) tx = sim_.now() + radio_.t_switch;
        const EntityId id = n.id;
        const auto token = ++n.cfp_token;
        at(tx - radio_.t_switch, id, detail::kNodeWake, [this, id, token, tx] {
            SensorNode& m = node(id);
            if (m.cfp_token != token) return;
            cfp_wake(m, tx);
        });
    }

    void cfp_wake(SensorNode& n, SimTime tx) {
        if (cfg_.emergency_rate > 0.0) {
            const int arrivals = n.traffic_rng.poisson(cfg_.emergency_rate);
            for (int i = 0; i < arrivals; ++i) n.emergencies.push_back(cfg_.emergency_bytes);
        }
        n.phase = NodePhase::AwakeTx;
        power_on(n);
        const EntityId id = n.id;
        const auto token = n.cfp_token;
        at(tx, id, detail::kNodeTx, [this, id, token] {
            SensorNode& m = node(id);
            if (m.cfp_token != token) return;
            m.slot_end = sim_.now() + m.slot.length;
            m.exchange_frame = div_round(sim_.now().as_micros() - m.slot.start, cfg_.t_frame);
            m.cfp_retries = 0;
            if (in_window(m.exchange_frame)) ++m.stats.sent;
            cfp_transmit(m);
        });
    }

    void cfp_transmit(SensorNode& n) {
        n.wait = Wait::None;
        n.meter.set_mode(sim_.now(), RadioMode::Tx);
        std::vector<std::uint8_t> body(static_cast<std::size_t>(n.data_rate));
        for (std::size_t i = 0; i < body.size(); ++i) body[i] = static_cast<std::uint8_t>(i);
        send(n.id, kCnEntity, Packet{n.addr, DataBody{std::move(body)}}, true, n.exchange_frame);
    }

    void cfp_no_reply(SensorNode& n) {
        const Micros exchange = radio_.airtime(n.slot.length > 0 ? SlotRequest{n.addr, n.data_rate}.data_packet_octets() : 0) +
                                radio_.t_turnaround + radio_.airtime(kAckOctets);
        if (n.cfp_retries == 0 && sim_.now() + exchange <= n.slot_end) {
            n.cfp_retries = 1;
            if (in_window(n.exchange_frame)) ++n.stats.retried;
            log(name(n), "retry", "frame=" + std::to_string(n.exchange_frame));
            cfp_transmit(n);
            return;
        }
        finish_cfp(n);
    }

    void cfp_reply(SensorNode& n, const Packet& reply) {
        bool odt = false;
        if (const auto* s = std::get_if<SyncAckBody>(&reply.body)) {
            const Micros raw = n.wake_offset + s->dv;
            const Micros wrapped = apply_drift(n.wake_offset, s->dv, cfg_.t_frame);
            n.anchor += raw - wrapped;
            n.wake_offset = wrapped;
            odt = s->odt;
            log(name(n), "resync", "dv=" + std::to_string(s->dv));
        } else if (const auto* a = std::get_if<AckBody>(&reply.body)) {
            odt = a->odt;
        }
        if (odt) n.odt_pending = true;
        finish_cfp(n);
    }

    void finish_cfp(SensorNode& n) {
        n.wait = Wait::None;
        power_off(n);
        n.phase = NodePhase::Sleeping;
        const std::int64_t frame = n.next_frame;
        ++n.next_frame;
        if (n.odt_pending) {
            n.odt_pending = false;
            schedule_cap_listen(n, frame);
        } else if (!n.emergencies.empty()) {
            std::vector<std::uint8_t> body(static_cast<std::size_t>(n.emergencies.front()), 0xEE);
            start_cap(n, Packet{n.addr, DataBody{std::move(body)}}, CapPurpose::Emergency,
                      node_time(n, frame, n.cap_start), node_time(n, frame, n.cap_start + n.cap_len));
        }
        schedule_cfp(n);
    }

    // --------------------------------------------------- node: on-demand

    void schedule_cap_listen(SensorNode& n, std::int64_t frame) {
        const SimTime begin = node_time(n, frame, n.cap_start);
        const SimTime end = node_time(n, frame, n.cap_start + n.cap_len);
        const EntityId id = n.id;
        const auto token = ++n.cap_token;
        at(begin - radio_.t_switch, id, detail::kNodeWake, [this, id, token] {
            SensorNode& m = node(id);
            if (m.cap_token == token) power_on(m);
        });
        at(begin, id, detail::kNodeWake, [this, id, token] {
            SensorNode& m = node(id);
            if (m.cap_token != token) return;
            m.phase = NodePhase::CapListening;
            m.wait = Wait::DataRequest;
            m.meter.set_mode(sim_.now(), RadioMode::Rx);
        });
        at(end, id, detail::kNodeTimer, [this, id, token] {
            SensorNode& m = node(id);
            if (m.cap_token != token || m.wait != Wait::DataRequest) return;
            log(name(m), "cap_listen_expired", "");
            power_off(m);
            m.phase = NodePhase::Sleeping;
        });
    }

    void on_data_request(SensorNode& n, const Packet& p) {
        const auto& dr = std::get<DataRequestBody>(p.body);
        const std::size_t bytes = std::min<std::size_t>(dr.requested_bytes, SlotRequest::kMaxPayload);
        n.wait = Wait::None;
        ++n.cap_token;
        const SimTime end = node_time(n, node_frame_now(n), n.cap_start + n.cap_len);
        start_cap(n, Packet{n.addr, DataBody{std::vector<std::uint8_t>(bytes, 0x0D)}}, CapPurpose::OnDemandReply,
                  sim_.now(), end);
    }

    // --------------------------------------------------- node: CAP access

    void start_cap(SensorNode& n, Packet pkt, CapPurpose purpose, SimTime window_start, SimTime cap_end) {
        CapTxn txn;
        txn.pkt = std::move(pkt);
        txn.purpose = purpose;
        txn.cap_end = cap_end;
        txn.expects_reply = purpose != CapPurpose::ChannelAck;
        txn.reply_octets = purpose == CapPurpose::Tsr ? kHeaderOctets + 16 : kAckOctets;
        const Micros airtime = radio_.airtime(encoded_length(txn.pkt));
        n.cap = std::move(txn);
        if (airtime + cfg_.cap.cca > cfg_.cap_len) {
            cap_exhausted(n);
            return;
        }
        const Micros delay = n.backoff_rng.uniform_int(0, cfg_.cap_len / 4);
        SimTime cca_at = std::max(window_start, sim_.now()) + delay;
        const EntityId id = n.id;
        const auto token = ++n.cap_token;
        if (n.radio_on && cca_at - sim_.now() > 2 * radio_.t_switch) power_off(n);
        if (!n.radio_on) {
            if (cca_at < sim_.now() + 2 * radio_.t_switch) cca_at = sim_.now() + 2 * radio_.t_switch;
            at(cca_at - radio_.t_switch, id, detail::kNodeWake, [this, id, token] {
                SensorNode& m = node(id);
                if (m.cap_token == token) power_on(m);
            });
        } else {
            n.meter.set_mode(sim_.now(), RadioMode::Idle);
        }
        at(cca_at, id, detail::kNodeTimer, [this, id, token] {
            SensorNode& m = node(id);
            if (m.cap_token == token) cca_begin(m);
        });
    }

    void cca_begin(SensorNode& n) {
        n.meter.set_mode(sim_.now(), RadioMode::Rx);
        n.cap->cca_start = sim_.now();
        const EntityId id = n.id;
        const auto token = n.cap_token;
        at(sim_.now() + cfg_.cap.cca, id, detail::kNodeTimer, [this, id, token] {
            SensorNode& m = node(id);
            if (m.cap_token == token) cca_end(m);
        });
    }

    void cca_end(SensorNode& n) {
        CapTxn& txn = *n.cap;
        if (channel_.busy(txn.cca_start, sim_.now())) {
            ++txn.backoffs;
            if (txn.backoffs > cfg_.cap.max_retries) {
                cap_exhausted(n);
                return;
            }
            txn.exponent = std::min(txn.exponent + 1, cfg_.cap.max_exponent);
            const Micros delay = n.backoff_rng.uniform_int(0, (std::int64_t{1} << txn.exponent) - 1) * cfg_.cap.backoff_unit;
            n.meter.set_mode(sim_.now(), RadioMode::Idle);
            const EntityId id = n.id;
            const auto token = n.cap_token;
            at(sim_.now() + delay, id, detail::kNodeTimer, [this, id, token] {
                SensorNode& m = node(id);
                if (m.cap_token == token) cca_begin(m);
            });
            return;
        }
        Micros need = radio_.airtime(encoded_length(txn.pkt));
        if (txn.expects_reply) need += radio_.t_turnaround + radio_.airtime(txn.reply_octets);
        if (sim_.now() + need > txn.cap_end) {
            cap_exhausted(n);
            return;
        }
        n.meter.set_mode(sim_.now(), RadioMode::Tx);
        if (txn.purpose == CapPurpose::Emergency && in_window(frame_of(sim_.now()))) ++n.stats.emergency_sent;
        send(n.id, kCnEntity, txn.pkt, false, frame_of(sim_.now()));
    }

    void cap_success(SensorNode& n, const Packet& reply) {
        const CapPurpose purpose = n.cap->purpose;
        const SimTime cap_end = n.cap->cap_end;
        n.wait = Wait::None;
        switch (purpose) {
            case CapPurpose::ChannelAck:
                start_cap(n, tsr_packet(n), CapPurpose::Tsr, sim_.now(), cap_end);
                break;
            case CapPurpose::Tsr:
                joined(n, std::get<TimeSlotRequestReplyBody>(reply.body));
                break;
            case CapPurpose::Emergency:
                n.emergencies.pop_front();
                if (in_window(frame_of(sim_.now()))) ++n.stats.emergency_delivered;
                n.cap.reset();
                power_off(n);
                break;
            case CapPurpose::OnDemandReply:
                n.cap.reset();
                power_off(n);
                n.phase = NodePhase::Sleeping;
                break;
        }
    }

    void cap_failure(SensorNode& n) {
        n.wait = Wait::None;
        if (n.cap->purpose == CapPurpose::Tsr) {
            ++n.tsr_attempts;
            if (n.tsr_attempts >= cfg_.join_attempts) {
                log(name(n), "join_timeout", "rescanning");
                n.cap.reset();
                ++n.cap_token;
                n.radio_on = true;
                n.meter.set_mode(sim_.now(), RadioMode::Rx);
                node_scan(n, next_scan_channel(env_, n.channel));
                return;
            }
            start_cap(n, tsr_packet(n), CapPurpose::Tsr, sim_.now(), n.cap->cap_end);
            return;
        }
        n.cap.reset();
        power_off(n);
        n.phase = NodePhase::Sleeping;
    }

    void cap_exhausted(SensorNode& n) {
        const CapPurpose purpose = n.cap->purpose;
        if (in_window(frame_of(sim_.now()))) ++n.stats.cap_exhausted;
        log(name(n), "cap_exhausted", "");
        n.wait = Wait::None;
        n.cap.reset();
        ++n.cap_token;
        power_off(n);
        if (purpose == CapPurpose::ChannelAck || purpose == CapPurpose::Tsr) {
            // Retry the slot request in the next frame's CAP.
            const std::int64_t next = node_frame_now(n) + 1;
            const SimTime begin = node_time(n, next, n.cap_start);
            const SimTime end = node_time(n, next, n.cap_start + n.cap_len);
            if (radio_.airtime(encoded_length(tsr_packet(n))) + cfg_.cap.cca > cfg_.cap_len) {
                throw std::runtime_error("CAP too short for a slot request");
            }
            start_cap(n, tsr_packet(n), CapPurpose::Tsr, begin, end);
        } else {
            n.phase = NodePhase::Sleeping;
        }
    }

    FrameLayout layout_;
    RfEnvironment env_;
    std::vector<std::unique_ptr<SensorNode>> nodes_;
    int cn_channel_ = 0;
    CnPhase cn_phase_ = CnPhase::ScanningChannels;
    std::vector<SlotRequest> requests_;
    Schedule schedule_;
    std::vector<std::int64_t> last_delivered_;
    std::vector<bool> confirmed_;
    std::deque<PendingOnDemand> od_queue_;
    std::int64_t od_completed_ = 0;
    std::int64_t od_abandoned_ = 0;
    bool finished_ = false;
};

}  // namespace

RunReport run_armac(const SimConfig& cfg, double per, std::uint64_t seed, RunOptions opts) {
    ArmacNetwork net(cfg, per, seed, opts.trace);
    return net.run();
}

}  // namespace armac
