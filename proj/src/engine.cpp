#include "armac/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace armac {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, StreamKind kind, std::uint64_t index) {
    const auto k = static_cast<std::uint64_t>(kind);
    return splitmix64(splitmix64(master ^ (k * 0x9E3779B97F4A7C15ULL)) ^ index);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (range == ~0ULL) return static_cast<std::int64_t>(engine_());
    const std::uint64_t span = range + 1;
    // Reject the tail so every residue is equally likely.
    const std::uint64_t limit = ~0ULL - (~0ULL % span);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
}

int Rng::poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double prod = uniform01();
    while (prod > limit) {
        ++k;
        prod *= uniform01();
    }
    return k;
}

namespace {

// n/d rounded to nearest, ties away from zero; d > 0.
__int128 div_round(__int128 n, __int128 d) {
    if (n >= 0) return (2 * n + d) / (2 * d);
    return -((-2 * n + d) / (2 * d));
}

constexpr __int128 kMillion = 1'000'000;

}  // namespace

SimTime ClockModel::local_to_global(Micros local) const {
    const __int128 g = div_round(static_cast<__int128>(local - phase_offset) * kMillion, kMillion + skew_ppm);
    if (g < 0) throw std::out_of_range("local time " + std::to_string(local) + " precedes the epoch");
    return SimTime{static_cast<std::uint64_t>(g)};
}

Micros ClockModel::global_to_local(SimTime global) const {
    const __int128 l = div_round(static_cast<__int128>(global.ticks) * (kMillion + skew_ppm), kMillion);
    return static_cast<Micros>(l) + phase_offset;
}

std::uint64_t Simulator::schedule(SimTime at, EntityId target, std::uint16_t kind, Action action) {
    if (at < now_) {
        throw EventInPast("event for entity " + std::to_string(target) + " at " + std::to_string(at.ticks) +
                          " scheduled at time " + std::to_string(now_.ticks));
    }
    const std::uint64_t seq = next_seq_++;
    heap_.push_back(Entry{Event{at, seq, target, kind}, std::move(action)});
    std::push_heap(heap_.begin(), heap_.end(), later);
    return seq;
}

std::size_t Simulator::run_until(SimTime end) {
    std::size_t processed = 0;
    while (!heap_.empty() && heap_.front().event.at <= end) {
        std::pop_heap(heap_.begin(), heap_.end(), later);
        Entry entry = std::move(heap_.back());
        heap_.pop_back();
        now_ = entry.event.at;
        current_ = true;
        current_event_ = entry.event;
        entry.action();
        current_ = false;
        ++processed;
    }
    if (now_ < end) now_ = end;
    return processed;
}

Channel::Channel(double per, Rng rng, Micros t_byte) : per_(per), rng_(rng), t_byte_(t_byte) {
    if (!(per >= 0.0 && per <= 1.0)) throw std::invalid_argument("per must be in [0, 1]");
    if (t_byte <= 0) throw std::invalid_argument("t_byte must be > 0");
}

void Channel::set_lossy(PacketKind kind, bool lossy) {
    const auto bit = 1U << static_cast<unsigned>(kind);
    lossy_mask_ = lossy ? (lossy_mask_ | bit) : (lossy_mask_ & ~bit);
}

TxId Channel::transmit(const Packet& pkt, EntityId from, EntityId to, SimTime at) {
    constexpr Micros kRetain = 50'000;
    if (!recent_.empty() && at < recent_.back().start) {
        throw std::logic_error("channel transmissions must start in time order");
    }
    prune(at - std::min<Micros>(kRetain, at.as_micros()));

    Transmission tx;
    tx.id = next_id_++;
    tx.from = from;
    tx.to = to;
    tx.start = at;
    tx.octets = encoded_length(pkt);
    tx.end = at + static_cast<Micros>(tx.octets) * t_byte_;
    tx.packet = pkt;
    const bool drop = rng_.bernoulli(per_);
    tx.lost = drop && is_lossy(pkt.kind());

    for (auto& other : recent_) {
        if (other.end > at) {
            other.collided = true;
            tx.collided = true;
        }
    }
    recent_.push_back(std::move(tx));
    return recent_.back().id;
}

const Transmission& Channel::get(TxId id) const {
    if (recent_.empty() || id < recent_.front().id || id > recent_.back().id) {
        throw std::out_of_range("transmission " + std::to_string(id) + " is no longer retained");
    }
    return recent_[static_cast<std::size_t>(id - recent_.front().id)];
}

bool Channel::busy(SimTime from, SimTime to) const {
    for (auto it = recent_.rbegin(); it != recent_.rend(); ++it) {
        if (it->start < to && it->end > from) return true;
    }
    return false;
}

void Channel::prune(SimTime before) {
    while (!recent_.empty() && recent_.front().end < before) recent_.pop_front();
}

}  // namespace armac
