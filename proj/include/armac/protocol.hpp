#pragma once

// AR-MAC packet kinds and the MPDU wire codec.
//
// Every MPDU starts with a 3-octet header: one octet of packet kind followed
// by the 16-bit source address (big-endian). The kind-specific body follows,
// multi-octet integers big-endian. No FCS is carried; channel errors are
// modeled per packet by the engine.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace armac {

struct Address {
    std::uint16_t value = 0;

    static constexpr Address broadcast() { return Address{0xFFFF}; }
    constexpr bool is_broadcast() const { return value == 0xFFFF; }

    friend constexpr bool operator==(Address, Address) = default;
    friend constexpr auto operator<=>(Address, Address) = default;
};

enum class PacketKind : std::uint8_t {
    Channel = 1,
    TimeSlotRequest = 2,
    TimeSlotRequestReply = 3,
    SyncAck = 4,
    DataRequest = 5,
    Ack = 6,
    Data = 7,
};

std::string to_string(PacketKind kind);

inline constexpr std::size_t kHeaderOctets = 3;
inline constexpr std::size_t kMaxMpduOctets = 127;
inline constexpr std::size_t kMaxDataBody = 255;

struct ChannelBody {
    Address cn_address;
    std::uint8_t channel_id = 0;
    friend bool operator==(const ChannelBody&, const ChannelBody&) = default;
};

struct TimeSlotRequestBody {
    std::uint16_t data_rate = 0;       // bytes per frame
    std::uint32_t requested_slot = 0;  // µs
    friend bool operator==(const TimeSlotRequestBody&, const TimeSlotRequestBody&) = default;
};

struct TimeSlotRequestReplyBody {
    std::uint32_t slot_start = 0;  // µs offset from frame start
    std::uint32_t slot_len = 0;
    std::uint32_t cap_start = 0;
    std::uint32_t cap_len = 0;
    friend bool operator==(const TimeSlotRequestReplyBody&, const TimeSlotRequestReplyBody&) = default;
};

struct SyncAckBody {
    std::int32_t dv = 0;  // µs, expected minus actual arrival
    bool odt = false;
    friend bool operator==(const SyncAckBody&, const SyncAckBody&) = default;
};

struct DataRequestBody {
    std::uint16_t requested_bytes = 0;
    friend bool operator==(const DataRequestBody&, const DataRequestBody&) = default;
};

struct AckBody {
    bool odt = false;
    friend bool operator==(const AckBody&, const AckBody&) = default;
};

struct DataBody {
    std::vector<std::uint8_t> body;
    friend bool operator==(const DataBody&, const DataBody&) = default;
};

// Alternative order matches the kind codes.
using PacketBody = std::variant<ChannelBody, TimeSlotRequestBody, TimeSlotRequestReplyBody,
                                SyncAckBody, DataRequestBody, AckBody, DataBody>;

struct Packet {
    Address src;
    PacketBody body;

    PacketKind kind() const { return static_cast<PacketKind>(body.index() + 1); }

    friend bool operator==(const Packet&, const Packet&) = default;
};

// Body length in octets for the packet as it would be encoded.
std::size_t body_length(const Packet& p);

inline std::size_t encoded_length(const Packet& p) { return kHeaderOctets + body_length(p); }

class CodecError : public std::runtime_error {
public:
    enum class Code { BodyTooLong, TruncatedFrame, UnknownKind, TrailingBytes };

    CodecError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}

    Code code() const { return code_; }

private:
    Code code_;
};

std::vector<std::uint8_t> encode_packet(const Packet& p);

Packet decode_packet(std::span<const std::uint8_t> bytes);

std::string to_hex(std::span<const std::uint8_t> bytes);

std::string describe(const Packet& p);

}  // namespace armac
