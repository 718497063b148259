#pragma once

// PER x seed x protocol sweeps and their CSV renderings.

#include <cstdint>
#include <string>
#include <vector>

#include "armac/config.hpp"
#include "armac/mac.hpp"
#include "armac/report.hpp"

namespace armac {

RunReport run_cell(const SimConfig& cfg, const CellKey& key, RunOptions opts = {});

// Every (protocol, per, seed) cell of `cfg`, sorted by cell key. Cells run in
// parallel on up to `threads` workers (0: hardware concurrency, capped by
// ARMAC_SIM_THREADS when set).
std::vector<RunReport> run_sweep(const SimConfig& cfg, RunOptions opts = {}, unsigned threads = 0);

// One row per node per cell.
std::string runs_csv(const std::vector<RunReport>& reports);

struct SummaryRow {
    double per_percent = 0.0;
    Protocol protocol = Protocol::Armac;
    double mean_total_mj = 0.0;    // network total, averaged over seeds
    double stddev_total_mj = 0.0;  // sample stddev across seeds
    double mean_node_mj = 0.0;
    double stddev_node_mj = 0.0;
    std::size_t cells = 0;
};

// Aggregates completed cells by (per, protocol); aborted cells are skipped.
std::vector<SummaryRow> summarize(const std::vector<RunReport>& reports);
std::string summary_csv(const std::vector<SummaryRow>& rows);

std::string format_percent(double per);

}  // namespace armac
