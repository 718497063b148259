#pragma once

// Deterministic discrete-event core: event queue, seeded random streams,
// skewed node clocks and a Bernoulli packet-error channel.

#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "armac/protocol.hpp"
#include "armac/time.hpp"

namespace armac {

using EntityId = std::uint32_t;

// ---------------------------------------------------------------------------
// Random streams

// Independent generator streams derived from one master seed. Each stream is
// identified by (kind, index) and seeded with
//   splitmix64(splitmix64(master ^ kind * 0x9E3779B97F4A7C15) ^ index),
// so adding a stream never shifts the draws of another.
enum class StreamKind : std::uint64_t { Channel = 1, Backoff = 2, Jitter = 3, Traffic = 4 };

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, StreamKind kind, std::uint64_t index);

// Distributions are implemented here rather than taken from <random>, whose
// distribution algorithms differ between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    // [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    // Uniform on [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    bool bernoulli(double p) { return uniform01() < p; }
    int poisson(double mean);

private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Clocks

struct ClockModel {
    std::int32_t skew_ppm = 0;
    Micros phase_offset = 0;

    static constexpr std::int32_t kMaxSkewPpm = 500;

    // global = (local - phase) / (1 + skew·1e-6), rounded to the nearest tick.
    SimTime local_to_global(Micros local) const;
    Micros global_to_local(SimTime global) const;
};

// ---------------------------------------------------------------------------
// Event queue

class EventInPast : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct Event {
    SimTime at;
    std::uint64_t seq = 0;
    EntityId target = 0;
    std::uint16_t kind = 0;
};

class Simulator {
public:
    using Action = std::function<void()>;

    SimTime now() const { return now_; }

    // Events at equal times run in scheduling order.
    std::uint64_t schedule(SimTime at, EntityId target, std::uint16_t kind, Action action);
    std::uint64_t schedule_in(Micros delay, EntityId target, std::uint16_t kind, Action action) {
        return schedule(now_ + delay, target, kind, std::move(action));
    }

    // Processes every event with time <= end; returns how many ran. The
    // clock is left at `end`.
    std::size_t run_until(SimTime end);

    std::size_t pending() const { return heap_.size(); }
    const Event* current() const { return current_ ? &current_event_ : nullptr; }

private:
    struct Entry {
        Event event;
        Action action;
    };
    static bool later(const Entry& a, const Entry& b) {
        if (a.event.at != b.event.at) return a.event.at > b.event.at;
        return a.event.seq > b.event.seq;
    }

    SimTime now_{};
    std::uint64_t next_seq_ = 0;
    std::vector<Entry> heap_;
    bool current_ = false;
    Event current_event_{};
};

// ---------------------------------------------------------------------------
// Channel

using TxId = std::uint64_t;

enum class Delivery { Delivered, Lost, Collided };

struct Transmission {
    TxId id = 0;
    EntityId from = 0;
    EntityId to = 0;
    SimTime start;
    SimTime end;
    Packet packet;
    std::size_t octets = 0;
    bool lost = false;
    bool collided = false;

    Delivery outcome() const {
        if (collided) return Delivery::Collided;
        return lost ? Delivery::Lost : Delivery::Delivered;
    }
};

// A shared radio channel with whole-packet Bernoulli loss. Each transmission
// consumes exactly one draw from the channel stream at its start time, in
// start order, whether or not its kind is subject to loss. Overlapping
// transmissions destroy each other.
class Channel {
public:
    Channel(double per, Rng rng, Micros t_byte);

    void set_lossy(PacketKind kind, bool lossy);
    bool is_lossy(PacketKind kind) const { return (lossy_mask_ >> static_cast<unsigned>(kind)) & 1U; }
    double per() const { return per_; }

    // `at` must not precede the start of any earlier transmission.
    TxId transmit(const Packet& pkt, EntityId from, EntityId to, SimTime at);

    // Valid while the record is retained (see prune).
    const Transmission& get(TxId id) const;

    // True if any transmission occupies part of [from, to).
    bool busy(SimTime from, SimTime to) const;

    // Drops records that ended before `before`.
    void prune(SimTime before);

    std::uint64_t transmissions() const { return next_id_; }

private:
    double per_;
    Rng rng_;
    Micros t_byte_;
    std::uint32_t lossy_mask_ = 0xFE;  // kinds 1..7
    TxId next_id_ = 0;
    std::deque<Transmission> recent_;  // ordered by start time and id
};

}  // namespace armac
