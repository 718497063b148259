// armac_sim: run AR-MAC / CSMA sweeps from a JSON scenario.
//
//   armac_sim run --config <file> [--out dir] [--trace] [--protocol armac|csma|both] [--seeds a,b,c]
//   armac_sim schedule --config <file>
//
// Exit codes: 0 success, 1 usage or configuration error, 2 some cell aborted.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "armac/schedule.hpp"
#include "armac/sweep.hpp"

namespace fs = std::filesystem;
using namespace armac;

namespace {

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string trace_name(const CellKey& k) {
    return "trace_" + to_string(k.protocol) + "_per" + format_percent(k.per) + "_seed" + std::to_string(k.seed) + ".txt";
}

int run(const std::string& config_path, const std::string& out_dir, bool trace, const std::string& protocol,
        const std::vector<std::uint64_t>& seeds) {
    SimConfig cfg = load_config(config_path);
    if (protocol == "armac") cfg.protocols = {Protocol::Armac};
    if (protocol == "csma") cfg.protocols = {Protocol::Csma};
    if (protocol == "both") cfg.protocols = {Protocol::Armac, Protocol::Csma};
    if (!seeds.empty()) cfg.seeds = seeds;

    const auto reports = run_sweep(cfg, RunOptions{trace});
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "runs.csv", runs_csv(reports));
    write_file(fs::path(out_dir) / "summary.csv", summary_csv(summarize(reports)));

    int aborted = 0;
    for (const auto& r : reports) {
        if (trace) write_file(fs::path(out_dir) / trace_name(r.key), r.trace);
        if (!r.ok()) {
            ++aborted;
            std::cerr << to_string(r.key.protocol) << " per=" << format_percent(r.key.per) << "% seed=" << r.key.seed
                      << ": " << r.status << "\n";
        }
    }
    std::cout << reports.size() << " cells, " << aborted << " aborted; wrote " << out_dir << "/runs.csv and "
              << out_dir << "/summary.csv\n";
    return aborted > 0 ? 2 : 0;
}

int print_schedule(const std::string& config_path) {
    const SimConfig cfg = load_config(config_path);
    std::vector<SlotRequest> requests;
    for (int i = 0; i < cfg.n_nodes; ++i) requests.push_back(SlotRequest{node_address(i), cfg.data_rate_of(i)});
    const Schedule s = build_schedule(requests, cfg.layout(), cfg.f, cfg.radio, cfg.slot_margin);
    std::cout << schedule_to_csv(s) << "# D=" << s.d << "us\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AR-MAC wireless body area network MAC simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    bool trace = false;
    std::string protocol;
    std::vector<std::uint64_t> seeds;

    auto* run_cmd = app.add_subcommand("run", "run every (protocol, PER, seed) cell and write CSVs");
    run_cmd->add_option("--config", config_path, "JSON scenario file")->required();
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_flag("--trace", trace, "write a per-cell event trace");
    run_cmd->add_option("--protocol", protocol, "protocols to run")->check(CLI::IsMember({"armac", "csma", "both"}));
    run_cmd->add_option("--seeds", seeds, "comma-separated seeds")->delimiter(',');

    auto* sched_cmd = app.add_subcommand("schedule", "print the slot schedule for the configured nodes");
    sched_cmd->add_option("--config", config_path, "JSON scenario file")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (run_cmd->parsed()) return run(config_path, out_dir, trace, protocol, seeds);
        return print_schedule(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
