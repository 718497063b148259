#include "armac/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "armac/engine.hpp"

namespace armac {

using nlohmann::json;

std::string to_string(Protocol p) { return p == Protocol::Armac ? "armac" : "csma"; }

void CsmaParams::validate() const {
    if (min_be < 0 || max_be < 0 || max_backoffs < 0 || max_retries < 0) {
        throw ConfigError("csma", "backoff parameters must be non-negative");
    }
    if (min_be > max_be) throw ConfigError("csma.min_be", "must not exceed csma.max_be");
    if (max_be > 20) throw ConfigError("csma.max_be", "must be <= 20");
    if (backoff_unit <= 0) throw ConfigError("csma.backoff_unit", "must be > 0");
    if (cca_len <= 0) throw ConfigError("csma.cca_len", "must be > 0");
}

SimConfig::SimConfig() {
    for (int i = 1; i <= 20; ++i) per.push_back(i / 100.0);
    for (std::uint64_t s = 1; s <= 10; ++s) seeds.push_back(s);
}

namespace {

template <class T>
void check_per_node(const std::vector<T>& v, int n_nodes, const std::string& path) {
    if (v.size() != 1 && v.size() != static_cast<std::size_t>(n_nodes)) {
        throw ConfigError(path, "expects one value or n_nodes (" + std::to_string(n_nodes) + ") values, got " +
                                    std::to_string(v.size()));
    }
}

class Parser {
public:
    explicit Parser(SimConfig& cfg) : cfg_(cfg) {}

    void parse_root(const json& j) {
        expect_object(j, "");
        for (const auto& [key, value] : j.items()) {
            if (key == "protocol") parse_protocol(value);
            else if (key == "n_nodes") cfg_.n_nodes = get_int<int>(value, key);
            else if (key == "n_cycles") cfg_.n_cycles = get_int<std::int64_t>(value, key);
            else if (key == "t_frame") cfg_.t_frame = get_int<Micros>(value, key);
            else if (key == "f") cfg_.f.percent = get_int<int>(value, key);
            else if (key == "per") cfg_.per = list_or_scalar<double>(value, key, [this](const json& e, const std::string& p) { return get_number(e, p); });
            else if (key == "seeds") cfg_.seeds = list_or_scalar<std::uint64_t>(value, key, [this](const json& e, const std::string& p) { return get_int<std::uint64_t>(e, p); });
            else if (key == "radio") parse_radio(value);
            else if (key == "data_rate") cfg_.data_rate = ints<int>(value, key);
            else if (key == "skew_ppm") cfg_.skew_ppm = ints<std::int32_t>(value, key);
            else if (key == "jitter_us") cfg_.jitter_us = ints<Micros>(value, key);
            else if (key == "scan_start") cfg_.scan_start = ints<int>(value, key);
            else if (key == "cap_len") cfg_.cap_len = get_int<Micros>(value, key);
            else if (key == "t_ms") cfg_.t_ms = get_int<Micros>(value, key);
            else if (key == "t_cp") cfg_.t_cp = get_int<Micros>(value, key);
            else if (key == "ack_timeout") cfg_.ack_timeout = get_int<Micros>(value, key);
            else if (key == "slot_margin") {
                if (value.is_null()) cfg_.slot_margin.reset();
                else cfg_.slot_margin = get_int<Micros>(value, key);
            }
            else if (key == "channels") parse_channels(value);
            else if (key == "join_attempts") cfg_.join_attempts = get_int<int>(value, key);
            else if (key == "max_join_frames") cfg_.max_join_frames = get_int<std::int64_t>(value, key);
            else if (key == "emergency_rate") cfg_.emergency_rate = get_number(value, key);
            else if (key == "emergency_bytes") cfg_.emergency_bytes = get_int<int>(value, key);
            else if (key == "on_demand") parse_on_demand(value);
            else if (key == "on_demand_max_attempts") cfg_.on_demand_max_attempts = get_int<int>(value, key);
            else if (key == "on_demand_guard") cfg_.on_demand_guard = get_int<Micros>(value, key);
            else if (key == "cap") parse_cap(value);
            else if (key == "csma") parse_csma(value);
            else if (key == "lossy_kinds") parse_lossy(value);
            else throw ConfigError(key, "unknown key");
        }
    }

private:
    static void expect_object(const json& j, const std::string& path) {
        if (!j.is_object()) throw ConfigError(path, "expected an object");
    }

    static double get_number(const json& j, const std::string& path) {
        if (!j.is_number()) throw ConfigError(path, "expected a number");
        return j.get<double>();
    }

    template <class T>
    static T get_int(const json& j, const std::string& path) {
        if (j.is_number_integer() || j.is_number_unsigned()) {
            if constexpr (std::is_unsigned_v<T>) {
                if (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0) {
                    throw ConfigError(path, "expected a non-negative integer");
                }
                return static_cast<T>(j.get<std::uint64_t>());
            } else {
                const auto v = j.get<std::int64_t>();
                if (v < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
                    v > static_cast<std::int64_t>(std::numeric_limits<T>::max())) {
                    throw ConfigError(path, "integer out of range");
                }
                return static_cast<T>(v);
            }
        }
        throw ConfigError(path, "expected an integer");
    }

    template <class T, class F>
    static std::vector<T> list_or_scalar(const json& j, const std::string& path, F&& each) {
        std::vector<T> out;
        if (j.is_array()) {
            for (std::size_t i = 0; i < j.size(); ++i) out.push_back(each(j[i], path + "[" + std::to_string(i) + "]"));
        } else {
            out.push_back(each(j, path));
        }
        if (out.empty()) throw ConfigError(path, "must not be empty");
        return out;
    }

    template <class T>
    static std::vector<T> ints(const json& j, const std::string& path) {
        return list_or_scalar<T>(j, path, [](const json& e, const std::string& p) { return get_int<T>(e, p); });
    }

    // Currents are given in mA and stored in µA.
    static std::int64_t milliamps(const json& j, const std::string& path) {
        return static_cast<std::int64_t>(std::llround(get_number(j, path) * 1000.0));
    }

    void parse_protocol(const json& j) {
        if (!j.is_string()) throw ConfigError("protocol", "expected \"armac\", \"csma\" or \"both\"");
        const auto s = j.get<std::string>();
        if (s == "armac") cfg_.protocols = {Protocol::Armac};
        else if (s == "csma") cfg_.protocols = {Protocol::Csma};
        else if (s == "both") cfg_.protocols = {Protocol::Armac, Protocol::Csma};
        else throw ConfigError("protocol", "expected \"armac\", \"csma\" or \"both\", got \"" + s + "\"");
    }

    void parse_radio(const json& j) {
        expect_object(j, "radio");
        auto& r = cfg_.radio;
        for (const auto& [key, value] : j.items()) {
            const std::string path = "radio." + key;
            if (key == "v") r.v_mv = static_cast<std::int64_t>(std::llround(get_number(value, path) * 1000.0));
            else if (key == "i_rx") r.i_rx_ua = milliamps(value, path);
            else if (key == "i_tx") r.i_tx_ua = milliamps(value, path);
            else if (key == "i_idle") r.i_idle_ua = milliamps(value, path);
            else if (key == "i_sleep") r.i_sleep_ua = milliamps(value, path);
            else if (key == "t_byte") r.t_byte = get_int<Micros>(value, path);
            else if (key == "t_switch") r.t_switch = get_int<Micros>(value, path);
            else if (key == "t_turnaround") r.t_turnaround = get_int<Micros>(value, path);
            else throw ConfigError(path, "unknown key");
        }
    }

    void parse_channels(const json& j) {
        if (!j.is_array() || j.empty()) throw ConfigError("channels", "expected a non-empty array of busy flags");
        cfg_.channels.clear();
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_boolean()) throw ConfigError("channels[" + std::to_string(i) + "]", "expected a boolean");
            cfg_.channels.push_back(j[i].get<bool>());
        }
    }

    void parse_on_demand(const json& j) {
        if (!j.is_array()) throw ConfigError("on_demand", "expected an array");
        cfg_.on_demand.clear();
        for (std::size_t i = 0; i < j.size(); ++i) {
            const std::string base = "on_demand[" + std::to_string(i) + "]";
            expect_object(j[i], base);
            OnDemandRequest r;
            for (const auto& [key, value] : j[i].items()) {
                const std::string path = base + "." + key;
                if (key == "node") r.node = get_int<int>(value, path);
                else if (key == "cycle") r.cycle = get_int<std::int64_t>(value, path);
                else if (key == "bytes") r.bytes = get_int<int>(value, path);
                else throw ConfigError(path, "unknown key");
            }
            cfg_.on_demand.push_back(r);
        }
    }

    void parse_cap(const json& j) {
        expect_object(j, "cap");
        for (const auto& [key, value] : j.items()) {
            const std::string path = "cap." + key;
            if (key == "cca") cfg_.cap.cca = get_int<Micros>(value, path);
            else if (key == "backoff_unit") cfg_.cap.backoff_unit = get_int<Micros>(value, path);
            else if (key == "max_exponent") cfg_.cap.max_exponent = get_int<int>(value, path);
            else if (key == "max_retries") cfg_.cap.max_retries = get_int<int>(value, path);
            else throw ConfigError(path, "unknown key");
        }
    }

    void parse_csma(const json& j) {
        expect_object(j, "csma");
        auto& c = cfg_.csma;
        for (const auto& [key, value] : j.items()) {
            const std::string path = "csma." + key;
            if (key == "min_be") c.min_be = get_int<int>(value, path);
            else if (key == "max_be") c.max_be = get_int<int>(value, path);
            else if (key == "max_backoffs") c.max_backoffs = get_int<int>(value, path);
            else if (key == "max_retries") c.max_retries = get_int<int>(value, path);
            else if (key == "backoff_unit") c.backoff_unit = get_int<Micros>(value, path);
            else if (key == "cca_len") c.cca_len = get_int<Micros>(value, path);
            else throw ConfigError(path, "unknown key");
        }
    }

    void parse_lossy(const json& j) {
        if (!j.is_array()) throw ConfigError("lossy_kinds", "expected an array of packet kind names");
        cfg_.lossy_kinds.clear();
        for (std::size_t i = 0; i < j.size(); ++i) {
            const std::string path = "lossy_kinds[" + std::to_string(i) + "]";
            if (!j[i].is_string()) throw ConfigError(path, "expected a packet kind name");
            const auto name = j[i].get<std::string>();
            bool found = false;
            for (int code = 1; code <= 7; ++code) {
                const auto kind = static_cast<PacketKind>(code);
                if (to_string(kind) == name) {
                    cfg_.lossy_kinds.push_back(kind);
                    found = true;
                }
            }
            if (!found) throw ConfigError(path, "unknown packet kind \"" + name + "\"");
        }
    }

    SimConfig& cfg_;
};

}  // namespace

void SimConfig::validate() const {
    if (protocols.empty()) throw ConfigError("protocol", "no protocol selected");
    if (n_nodes < 1) throw ConfigError("n_nodes", "must be >= 1");
    if (n_nodes > 0xFFFE) throw ConfigError("n_nodes", "too many nodes for 16-bit addresses");
    if (n_cycles < 1) throw ConfigError("n_cycles", "must be >= 1");
    if (t_frame <= 0) throw ConfigError("t_frame", "must be > 0");
    if (f.percent < 0) throw ConfigError("f", "must be >= 0");
    if (per.empty()) throw ConfigError("per", "must not be empty");
    for (std::size_t i = 0; i < per.size(); ++i) {
        if (!(per[i] >= 0.0 && per[i] <= 1.0)) {
            throw ConfigError("per[" + std::to_string(i) + "]", "must be a probability in [0, 1]");
        }
    }
    if (seeds.empty()) throw ConfigError("seeds", "must not be empty");
    try {
        radio.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("radio", e.what());
    }

    check_per_node(data_rate, n_nodes, "data_rate");
    check_per_node(skew_ppm, n_nodes, "skew_ppm");
    check_per_node(jitter_us, n_nodes, "jitter_us");
    check_per_node(scan_start, n_nodes, "scan_start");
    for (const int r : data_rate) {
        if (r < 1 || r > SlotRequest::kMaxPayload) {
            throw ConfigError("data_rate", "must be in [1, " + std::to_string(SlotRequest::kMaxPayload) + "]");
        }
    }
    for (const auto s : skew_ppm) {
        if (s < -ClockModel::kMaxSkewPpm || s > ClockModel::kMaxSkewPpm) {
            throw ConfigError("skew_ppm", "magnitude must be <= " + std::to_string(ClockModel::kMaxSkewPpm));
        }
    }
    for (const auto j : jitter_us) {
        if (j < 0) throw ConfigError("jitter_us", "must be >= 0");
    }
    for (const int s : scan_start) {
        if (s < 0 || s >= static_cast<int>(channels.size())) {
            throw ConfigError("scan_start", "must index into channels");
        }
    }

    if (cap_len < 0) throw ConfigError("cap_len", "must be >= 0");
    if (t_ms < 0) throw ConfigError("t_ms", "must be >= 0");
    if (cap_len + t_ms >= t_frame) throw ConfigError("cap_len", "cap_len + t_ms must leave room for the CFP");
    if (t_cp && *t_cp <= 0) throw ConfigError("t_cp", "must be > 0");
    if (ack_timeout <= 0) throw ConfigError("ack_timeout", "must be > 0");
    if (slot_margin && *slot_margin < 0) throw ConfigError("slot_margin", "must be >= 0");
    if (channels.empty()) throw ConfigError("channels", "must not be empty");
    if (join_attempts < 1) throw ConfigError("join_attempts", "must be >= 1");
    if (max_join_frames < 1) throw ConfigError("max_join_frames", "must be >= 1");
    if (!(emergency_rate >= 0.0)) throw ConfigError("emergency_rate", "must be >= 0");
    if (emergency_bytes < 0 || emergency_bytes > SlotRequest::kMaxPayload) {
        throw ConfigError("emergency_bytes", "must be in [0, " + std::to_string(SlotRequest::kMaxPayload) + "]");
    }
    for (std::size_t i = 0; i < on_demand.size(); ++i) {
        const auto& r = on_demand[i];
        const std::string base = "on_demand[" + std::to_string(i) + "]";
        if (r.node < 1 || r.node > n_nodes) throw ConfigError(base + ".node", "must be in [1, n_nodes]");
        if (r.cycle < 0 || r.cycle >= n_cycles) throw ConfigError(base + ".cycle", "must be in [0, n_cycles)");
        if (r.bytes < 0 || r.bytes > SlotRequest::kMaxPayload) {
            throw ConfigError(base + ".bytes", "must be in [0, " + std::to_string(SlotRequest::kMaxPayload) + "]");
        }
    }
    if (on_demand_max_attempts < 1) throw ConfigError("on_demand_max_attempts", "must be >= 1");
    if (on_demand_guard < 0) throw ConfigError("on_demand_guard", "must be >= 0");
    if (cap.cca <= 0) throw ConfigError("cap.cca", "must be > 0");
    if (cap.backoff_unit <= 0) throw ConfigError("cap.backoff_unit", "must be > 0");
    if (cap.max_exponent < 1 || cap.max_exponent > 20) throw ConfigError("cap.max_exponent", "must be in [1, 20]");
    if (cap.max_retries < 0) throw ConfigError("cap.max_retries", "must be >= 0");
    csma.validate();
}

SimConfig parse_config(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("syntax error: ") + e.what());
    }
    SimConfig cfg;
    Parser(cfg).parse_root(j);
    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace armac
