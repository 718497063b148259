#include "armac/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <thread>

#include "armac/baseline.hpp"

namespace armac {

RunReport run_cell(const SimConfig& cfg, const CellKey& key, RunOptions opts) {
    RunReport r = key.protocol == Protocol::Armac ? run_armac(cfg, key.per, key.seed, opts)
                                                  : run_csma(cfg, key.per, key.seed, opts);
    r.key = key;
    return r;
}

namespace {

unsigned worker_count(unsigned requested, std::size_t cells) {
    unsigned n = requested != 0 ? requested : std::max(1U, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ARMAC_SIM_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap > 0) n = std::min(n, static_cast<unsigned>(cap));
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(cells, 1)));
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string format_percent(double per) {
    std::string s = fixed(per * 100.0, 6);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return s;
}

std::vector<RunReport> run_sweep(const SimConfig& cfg, RunOptions opts, unsigned threads) {
    std::vector<CellKey> keys;
    for (const auto p : cfg.protocols) {
        for (const double per : cfg.per) {
            for (const auto seed : cfg.seeds) keys.push_back(CellKey{p, per, seed});
        }
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    std::vector<RunReport> out(keys.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < keys.size(); i = next++) out[i] = run_cell(cfg, keys[i], opts);
    };
    const unsigned n = worker_count(threads, keys.size());
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return out;
}

namespace {

std::string csv_safe(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return s;
}

}  // namespace

std::string runs_csv(const std::vector<RunReport>& reports) {
    std::string s =
        "protocol,per_percent,seed,node,e_sleep_uj,e_switch_uj,e_trans_uj,e_rec_uj,e_tout_uj,e_total_uj,"
        "sent,delivered,collided,retried,sync_acks,join_latency_frames,status\n";
    for (const auto& r : reports) {
        const std::string prefix = to_string(r.key.protocol) + "," + format_percent(r.key.per) + "," +
                                   std::to_string(r.key.seed) + ",";
        for (const auto& n : r.nodes) {
            const auto& l = n.ledger;
            s += prefix + std::to_string(n.node.value) + "," + format_microjoules(l.e_sleep) + "," +
                 format_microjoules(l.e_switch) + "," + format_microjoules(l.e_trans) + "," +
                 format_microjoules(l.e_rec) + "," + format_microjoules(l.e_tout) + "," +
                 format_microjoules(l.total()) + "," + std::to_string(n.sent) + "," + std::to_string(n.delivered) +
                 "," + std::to_string(n.collided) + "," + std::to_string(n.retried) + "," +
                 std::to_string(n.sync_acks) + "," + std::to_string(n.join_latency_frames) + "," + csv_safe(r.status) + "\n";
        }
        if (r.nodes.empty()) s += prefix + ",,,,,,,,,,,,," + csv_safe(r.status) + "\n";
    }
    return s;
}

namespace {

void mean_stddev(const std::vector<double>& v, double& mean, double& sd) {
    mean = 0.0;
    sd = 0.0;
    if (v.empty()) return;
    for (const double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return;
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<RunReport>& reports) {
    std::map<std::pair<double, int>, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const auto& r : reports) {
        if (!r.ok()) continue;
        auto& g = groups[{r.key.per, static_cast<int>(r.key.protocol)}];
        g.first.push_back(r.total_energy().millijoules());
        g.second.push_back(r.mean_node_energy().millijoules());
    }
    std::vector<SummaryRow> rows;
    for (const auto& [k, g] : groups) {
        SummaryRow row;
        row.per_percent = k.first * 100.0;
        row.protocol = static_cast<Protocol>(k.second);
        row.cells = g.first.size();
        mean_stddev(g.first, row.mean_total_mj, row.stddev_total_mj);
        mean_stddev(g.second, row.mean_node_mj, row.stddev_node_mj);
        rows.push_back(row);
    }
    return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string s = "per_percent,protocol,mean_total_energy_mj,stddev,mean_node_energy_mj,node_stddev\n";
    for (const auto& r : rows) {
        s += format_percent(r.per_percent / 100.0) + "," + to_string(r.protocol) + "," + fixed(r.mean_total_mj, 6) +
             "," + fixed(r.stddev_total_mj, 6) + "," + fixed(r.mean_node_mj, 6) + "," + fixed(r.stddev_node_mj, 6) +
             "\n";
    }
    return s;
}

}  // namespace armac
