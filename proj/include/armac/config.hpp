#pragma once

// Scenario configuration: a JSON document whose absent keys take the
// defaults of the reference experiment (10 nodes, 1000 one-second frames,
// PER 1%..20%, MICAz-class radio).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "armac/energy.hpp"
#include "armac/protocol.hpp"
#include "armac/schedule.hpp"

namespace armac {

enum class Protocol { Armac, Csma };

std::string to_string(Protocol p);

// Contention access inside the AR-MAC CAP.
struct CapParams {
    Micros cca = 128;
    Micros backoff_unit = 320;
    int max_exponent = 5;
    int max_retries = 4;
};

struct CsmaParams {
    int min_be = 3;
    int max_be = 5;
    int max_backoffs = 4;
    int max_retries = 3;
    Micros backoff_unit = 320;
    Micros cca_len = 128;

    void validate() const;
};

struct OnDemandRequest {
    int node = 1;            // 1-based node index
    std::int64_t cycle = 0;  // steady-state cycle at which the CN queues it
    int bytes = 16;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct SimConfig {
    std::vector<Protocol> protocols{Protocol::Armac, Protocol::Csma};
    int n_nodes = 10;
    std::int64_t n_cycles = 1000;
    Micros t_frame = 1'000'000;
    GuardFactor f{10};
    std::vector<double> per;              // fractions in [0, 1]
    std::vector<std::uint64_t> seeds;
    RadioParams radio;

    // Per-node values: either one entry shared by all nodes or n_nodes entries.
    std::vector<int> data_rate{31};
    std::vector<std::int32_t> skew_ppm{0};
    std::vector<Micros> jitter_us{0};
    std::vector<int> scan_start{0};

    Micros cap_len = 100'000;
    Micros t_ms = 100'000;
    std::optional<Micros> t_cp;  // defaults to one frame
    Micros ack_timeout = 864;
    std::optional<Micros> slot_margin;  // unset: adaptive F/100 margin

    std::vector<bool> channels = std::vector<bool>(16, false);  // externally busy RF channels
    int join_attempts = 8;
    std::int64_t max_join_frames = 200;

    double emergency_rate = 0.0;  // mean emergency packets per node per frame
    int emergency_bytes = 16;
    std::vector<OnDemandRequest> on_demand;
    int on_demand_max_attempts = 3;
    Micros on_demand_guard = 1000;

    CapParams cap;
    CsmaParams csma;
    std::vector<PacketKind> lossy_kinds{PacketKind::Channel,  PacketKind::TimeSlotRequest,
                                        PacketKind::TimeSlotRequestReply, PacketKind::SyncAck,
                                        PacketKind::DataRequest, PacketKind::Ack, PacketKind::Data};

    SimConfig();

    FrameLayout layout() const { return FrameLayout::from_cap(t_frame, cap_len, t_ms); }
    Micros listen_window() const { return t_cp.value_or(t_frame); }

    int data_rate_of(int node) const { return pick(data_rate, node); }
    std::int32_t skew_of(int node) const { return pick(skew_ppm, node); }
    Micros jitter_of(int node) const { return pick(jitter_us, node); }
    int scan_start_of(int node) const { return pick(scan_start, node); }

    // Throws ConfigError naming the offending field.
    void validate() const;

private:
    template <class T>
    static T pick(const std::vector<T>& v, int node) {
        return v.size() == 1 ? v.front() : v.at(static_cast<std::size_t>(node));
    }
};

// Parses a JSON scenario. Unknown keys are rejected; absent keys keep their
// defaults. Errors carry the JSON path of the offending field.
SimConfig parse_config(std::string_view json_text);
SimConfig load_config(const std::string& path);

// Address of the i-th sensor node (0-based); the CN is address 0.
inline Address node_address(int index) { return Address{static_cast<std::uint16_t>(index + 1)}; }
inline constexpr Address kCnAddress{0};

}  // namespace armac
