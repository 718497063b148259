#include "armac/protocol.hpp"

#include <cstdio>
#include <type_traits>

namespace armac {

namespace {

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
        out_.push_back(static_cast<std::uint8_t>(v));
    }
    void u32(std::uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8) {
            out_.push_back(static_cast<std::uint8_t>(v >> shift));
        }
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint8_t u8() {
        need(1);
        return in_[pos_++];
    }
    std::uint16_t u16() {
        need(2);
        auto v = static_cast<std::uint16_t>((in_[pos_] << 8) | in_[pos_ + 1]);
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v = (v << 8) | in_[pos_ + i];
        }
        pos_ += 4;
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::vector<std::uint8_t> bytes(std::size_t n) {
        need(n);
        std::vector<std::uint8_t> v(in_.begin() + pos_, in_.begin() + pos_ + n);
        pos_ += n;
        return v;
    }

    void finish() const {
        if (pos_ != in_.size()) {
            throw CodecError(CodecError::Code::TrailingBytes,
                             std::to_string(in_.size() - pos_) + " trailing octet(s)");
        }
    }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) {
            throw CodecError(CodecError::Code::TruncatedFrame,
                             "frame truncated at octet " + std::to_string(in_.size()));
        }
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

template <class>
inline constexpr bool kAlwaysFalse = false;

}  // namespace

std::string to_string(PacketKind kind) {
    switch (kind) {
        case PacketKind::Channel: return "Channel";
        case PacketKind::TimeSlotRequest: return "TSR";
        case PacketKind::TimeSlotRequestReply: return "TSRR";
        case PacketKind::SyncAck: return "SyncAck";
        case PacketKind::DataRequest: return "DataRequest";
        case PacketKind::Ack: return "Ack";
        case PacketKind::Data: return "Data";
    }
    return "Unknown";
}

std::size_t body_length(const Packet& p) {
    return std::visit(
        [](const auto& b) -> std::size_t {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, ChannelBody>) return 3;
            else if constexpr (std::is_same_v<T, TimeSlotRequestBody>) return 6;
            else if constexpr (std::is_same_v<T, TimeSlotRequestReplyBody>) return 16;
            else if constexpr (std::is_same_v<T, SyncAckBody>) return 5;
            else if constexpr (std::is_same_v<T, DataRequestBody>) return 2;
            else if constexpr (std::is_same_v<T, AckBody>) return 1;
            else if constexpr (std::is_same_v<T, DataBody>) return 1 + b.body.size();
            else static_assert(kAlwaysFalse<T>);
        },
        p.body);
}

std::vector<std::uint8_t> encode_packet(const Packet& p) {
    const std::size_t len = encoded_length(p);
    if (len > kMaxMpduOctets) {
        throw CodecError(CodecError::Code::BodyTooLong,
                         "encoded length " + std::to_string(len) + " exceeds " +
                             std::to_string(kMaxMpduOctets) + " octets");
    }
    Writer w;
    w.u8(static_cast<std::uint8_t>(p.kind()));
    w.u16(p.src.value);
    std::visit(
        [&w](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, ChannelBody>) {
                w.u16(b.cn_address.value);
                w.u8(b.channel_id);
            } else if constexpr (std::is_same_v<T, TimeSlotRequestBody>) {
                w.u16(b.data_rate);
                w.u32(b.requested_slot);
            } else if constexpr (std::is_same_v<T, TimeSlotRequestReplyBody>) {
                w.u32(b.slot_start);
                w.u32(b.slot_len);
                w.u32(b.cap_start);
                w.u32(b.cap_len);
            } else if constexpr (std::is_same_v<T, SyncAckBody>) {
                w.i32(b.dv);
                w.u8(b.odt ? 1 : 0);
            } else if constexpr (std::is_same_v<T, DataRequestBody>) {
                w.u16(b.requested_bytes);
            } else if constexpr (std::is_same_v<T, AckBody>) {
                w.u8(b.odt ? 1 : 0);
            } else if constexpr (std::is_same_v<T, DataBody>) {
                w.u8(static_cast<std::uint8_t>(b.body.size()));
                w.bytes(b.body);
            }
        },
        p.body);
    return w.take();
}

Packet decode_packet(std::span<const std::uint8_t> bytes) {
    if (bytes.size() > kMaxMpduOctets) {
        throw CodecError(CodecError::Code::BodyTooLong,
                         "frame of " + std::to_string(bytes.size()) + " octets exceeds " + std::to_string(kMaxMpduOctets));
    }
    Reader r(bytes);
    const std::uint8_t code = r.u8();
    if (code < 1 || code > 7) {
        throw CodecError(CodecError::Code::UnknownKind, "unknown packet kind " + std::to_string(code));
    }
    Packet p;
    p.src = Address{r.u16()};
    switch (static_cast<PacketKind>(code)) {
        case PacketKind::Channel: {
            ChannelBody b;
            b.cn_address = Address{r.u16()};
            b.channel_id = r.u8();
            p.body = b;
            break;
        }
        case PacketKind::TimeSlotRequest: {
            TimeSlotRequestBody b;
            b.data_rate = r.u16();
            b.requested_slot = r.u32();
            p.body = b;
            break;
        }
        case PacketKind::TimeSlotRequestReply: {
            TimeSlotRequestReplyBody b;
            b.slot_start = r.u32();
            b.slot_len = r.u32();
            b.cap_start = r.u32();
            b.cap_len = r.u32();
            p.body = b;
            break;
        }
        case PacketKind::SyncAck: {
            SyncAckBody b;
            b.dv = r.i32();
            b.odt = (r.u8() & 1) != 0;
            p.body = b;
            break;
        }
        case PacketKind::DataRequest: {
            p.body = DataRequestBody{r.u16()};
            break;
        }
        case PacketKind::Ack: {
            p.body = AckBody{(r.u8() & 1) != 0};
            break;
        }
        case PacketKind::Data: {
            const std::uint8_t n = r.u8();
            p.body = DataBody{r.bytes(n)};
            break;
        }
    }
    r.finish();
    return p;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve(bytes.size() * 3);
    char buf[4];
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%02x", bytes[i]);
        if (i != 0) out.push_back(' ');
        out += buf;
    }
    return out;
}

std::string describe(const Packet& p) {
    std::string s = to_string(p.kind()) + " src=" + std::to_string(p.src.value);
    if (const auto* sa = std::get_if<SyncAckBody>(&p.body)) {
        s += " dv=" + std::to_string(sa->dv) + " odt=" + std::to_string(sa->odt);
    } else if (const auto* a = std::get_if<AckBody>(&p.body)) {
        s += " odt=" + std::to_string(a->odt);
    } else if (const auto* d = std::get_if<DataBody>(&p.body)) {
        s += " len=" + std::to_string(d->body.size());
    } else if (const auto* r = std::get_if<TimeSlotRequestReplyBody>(&p.body)) {
        s += " slot=" + std::to_string(r->slot_start) + "+" + std::to_string(r->slot_len);
    } else if (const auto* dr = std::get_if<DataRequestBody>(&p.body)) {
        s += " bytes=" + std::to_string(dr->requested_bytes);
    }
    return s;
}

}  // namespace armac
