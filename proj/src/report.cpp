#include "armac/report.hpp"

namespace armac {

Femtojoules RunReport::total_energy() const {
    Femtojoules sum;
    for (const auto& n : nodes) sum += n.ledger.total();
    return sum;
}

Femtojoules RunReport::mean_node_energy() const {
    if (nodes.empty()) return {};
    return {total_energy().value / static_cast<std::int64_t>(nodes.size())};
}

void Trace::line(std::uint64_t time_us, const std::string& entity, const std::string& event, const std::string& detail) {
    if (!enabled_) return;
    text_ += std::to_string(time_us);
    text_ += ',';
    text_ += entity;
    text_ += ',';
    text_ += event;
    text_ += ',';
    text_ += detail;
    text_ += '\n';
}

}  // namespace armac
