#pragma once

// Unslotted CSMA/CA baseline: every node wakes at each frame start, contends
// for the channel with binary exponential backoff and waits for an Ack after
// each data packet. No schedule and no synchronisation.

#include <cstdint>

#include "armac/config.hpp"
#include "armac/mac.hpp"
#include "armac/report.hpp"

namespace armac {

RunReport run_csma(const SimConfig& cfg, double per, std::uint64_t seed, RunOptions opts = {});

}  // namespace armac
