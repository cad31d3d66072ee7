#include "metrics.hpp"

#include <sstream>

namespace etica {

void LatencyConfig::validate() const {
    const double vals[] = {dram_read_us, dram_write_us, ssd_read_us,
                           ssd_write_us, hdd_read_us,  hdd_write_us};
    for (double v : vals)
        if (!(v > 0.0)) throw ConfigError("latency values must be positive");
}

double request_latency(ServicePath path, const LatencyConfig& cfg) {
    switch (path) {
        case ServicePath::DramHit: return cfg.dram_read_us;
        case ServicePath::SsdReadHit: return cfg.ssd_read_us + cfg.dram_write_us;
        case ServicePath::SsdWriteHit: return cfg.ssd_write_us;
        case ServicePath::ReadMiss: return cfg.hdd_read_us + cfg.dram_write_us;
        case ServicePath::WriteMiss: return cfg.hdd_write_us;
    }
    return 0.0;
}

void Counters::record_path(ServicePath path) {
    switch (path) {
        case ServicePath::DramHit: ++dram_hits; break;
        case ServicePath::SsdReadHit: ++ssd_read_hits; break;
        case ServicePath::SsdWriteHit: ++ssd_write_hits; break;
        case ServicePath::ReadMiss: ++read_misses; break;
        case ServicePath::WriteMiss: ++write_misses; break;
    }
}

uint64_t Counters::path_count(ServicePath path) const {
    switch (path) {
        case ServicePath::DramHit: return dram_hits;
        case ServicePath::SsdReadHit: return ssd_read_hits;
        case ServicePath::SsdWriteHit: return ssd_write_hits;
        case ServicePath::ReadMiss: return read_misses;
        case ServicePath::WriteMiss: return write_misses;
    }
    return 0;
}

double Counters::total_hit_ratio() const {
    if (block_accesses == 0) return 0.0;
    return static_cast<double>(hits()) / static_cast<double>(block_accesses);
}

double Counters::mean_latency_us(const LatencyConfig& cfg) const {
    if (requests == 0) return 0.0;
    double total = 0.0;
    for (size_t p = 0; p < kServicePathCount; ++p) {
        auto path = static_cast<ServicePath>(p);
        total += static_cast<double>(path_count(path)) * request_latency(path, cfg);
    }
    return total / static_cast<double>(requests);
}

bool Counters::any() const {
    return requests || block_accesses || reads || writes || dram_hits || ssd_read_hits ||
           ssd_write_hits || read_misses || write_misses || disk_reads || disk_writes ||
           ssd_writes_total || promotions || evictions;
}

Counters& Counters::operator+=(const Counters& other) {
    requests += other.requests;
    block_accesses += other.block_accesses;
    reads += other.reads;
    writes += other.writes;
    dram_hits += other.dram_hits;
    ssd_read_hits += other.ssd_read_hits;
    ssd_write_hits += other.ssd_write_hits;
    read_misses += other.read_misses;
    write_misses += other.write_misses;
    disk_reads += other.disk_reads;
    disk_writes += other.disk_writes;
    ssd_writes_total += other.ssd_writes_total;
    promotions += other.promotions;
    evictions += other.evictions;
    return *this;
}

uint64_t popularity_metadata_bytes(uint64_t tracked_blocks) { return 8 * tracked_blocks; }

namespace {

void verify_counters(const Counters& c, const std::string& where) {
    auto fail = [&](const std::string& what) {
        throw InternalError("report identity violated (" + where + "): " + what);
    };
    if (c.ssd_writes_total != c.ssd_write_hits + c.promotions)
        fail("ssd_writes_total != ssd_write_hits + promotions");
    if (c.block_accesses != c.hits() + c.misses())
        fail("block accesses != hits + misses");
    if (c.reads + c.writes != c.block_accesses) fail("reads + writes != block accesses");
    if (c.dram_hits + c.ssd_read_hits + c.read_misses != c.reads)
        fail("read outcomes do not cover reads");
    if (c.ssd_write_hits + c.write_misses != c.writes)
        fail("write outcomes do not cover writes");
    if (c.disk_reads != c.read_misses + c.promotions)
        fail("disk_reads != read_misses + promotions");
}

Counters sum_intervals(const std::vector<IntervalReport>& intervals) {
    Counters sum;
    for (const auto& iv : intervals) sum += iv.counters;
    return sum;
}

bool counters_equal(const Counters& a, const Counters& b) {
    return a.requests == b.requests && a.block_accesses == b.block_accesses &&
           a.reads == b.reads && a.writes == b.writes && a.dram_hits == b.dram_hits &&
           a.ssd_read_hits == b.ssd_read_hits && a.ssd_write_hits == b.ssd_write_hits &&
           a.read_misses == b.read_misses && a.write_misses == b.write_misses &&
           a.disk_reads == b.disk_reads && a.disk_writes == b.disk_writes &&
           a.ssd_writes_total == b.ssd_writes_total && a.promotions == b.promotions &&
           a.evictions == b.evictions;
}

}  // namespace

void verify_report(const RunReport& report) {
    Counters all;
    for (const auto& vm : report.vms) {
        const std::string tag = "vm " + std::to_string(vm.vm_id);
        verify_counters(vm.totals, tag);
        for (const auto& iv : vm.intervals)
            verify_counters(iv.counters, tag + " interval " + std::to_string(iv.interval));
        if (!counters_equal(sum_intervals(vm.intervals), vm.totals))
            throw InternalError("report identity violated (" + tag +
                                "): totals differ from interval sum");
        all += vm.totals;
    }
    verify_counters(report.totals, "run totals");
    if (!counters_equal(all, report.totals))
        throw InternalError("report identity violated: run totals differ from vm sum");
    if (!report.promotion_eviction &&
        (report.totals.promotions != 0 || report.totals.evictions != 0))
        throw InternalError(
            "report identity violated: promotions/evictions present with queues disabled");
}

namespace {

nlohmann::ordered_json counters_to_json(const Counters& c, const LatencyConfig& lat) {
    nlohmann::ordered_json j;
    j["requests"] = c.requests;
    j["block_accesses"] = c.block_accesses;
    j["reads"] = c.reads;
    j["writes"] = c.writes;
    j["dram_hits"] = c.dram_hits;
    j["ssd_read_hits"] = c.ssd_read_hits;
    j["ssd_write_hits"] = c.ssd_write_hits;
    j["read_misses"] = c.read_misses;
    j["write_misses"] = c.write_misses;
    j["misses"] = c.misses();
    j["disk_reads"] = c.disk_reads;
    j["disk_writes"] = c.disk_writes;
    j["ssd_writes_total"] = c.ssd_writes_total;
    j["promotions"] = c.promotions;
    j["evictions"] = c.evictions;
    j["total_hit_ratio"] = c.total_hit_ratio();
    j["mean_latency_us"] = c.mean_latency_us(lat);
    return j;
}

}  // namespace

nlohmann::ordered_json report_to_json(const RunReport& report, const LatencyConfig& lat,
                                      const nlohmann::ordered_json& config_echo,
                                      const nlohmann::ordered_json& provenance) {
    verify_report(report);
    nlohmann::ordered_json j;
    j["schema"] = "etica-report/1";
    j["mode"] = report.promotion_eviction ? "full" : "npe";
    if (!config_echo.is_null()) j["config"] = config_echo;
    j["totals"] = counters_to_json(report.totals, lat);
    j["per_vm"] = nlohmann::ordered_json::array();
    for (const auto& vm : report.vms) {
        nlohmann::ordered_json v;
        v["vm"] = vm.vm_id;
        v["totals"] = counters_to_json(vm.totals, lat);
        v["allocation"] = {{"dram_blocks", vm.final_dram_blocks},
                           {"ssd_blocks", vm.final_ssd_blocks}};
        v["intervals"] = nlohmann::ordered_json::array();
        for (const auto& iv : vm.intervals) {
            nlohmann::ordered_json i = counters_to_json(iv.counters, lat);
            i["interval"] = iv.interval;
            i["allocation"] = {{"dram_blocks", iv.dram_blocks}, {"ssd_blocks", iv.ssd_blocks}};
            v["intervals"].push_back(std::move(i));
        }
        j["per_vm"].push_back(std::move(v));
    }
    j["metadata"] = {
        {"popularity_tracked_blocks", report.popularity_tracked_blocks},
        {"popularity_metadata_bytes", popularity_metadata_bytes(report.popularity_tracked_blocks)}};
    if (!provenance.is_null()) j["metadata"]["trace_provenance"] = provenance;
    return j;
}

std::string report_to_csv(const RunReport& report, const LatencyConfig& lat) {
    verify_report(report);
    std::ostringstream out;
    out << "vm,interval,requests,block_accesses,reads,writes,dram_hits,ssd_read_hits,"
           "ssd_write_hits,read_misses,write_misses,misses,disk_reads,disk_writes,"
           "ssd_writes_total,promotions,evictions,total_hit_ratio,mean_latency_us,"
           "dram_blocks,ssd_blocks\n";
    auto row = [&](const std::string& vm, const std::string& interval, const Counters& c,
                   uint64_t dram, uint64_t ssd) {
        out << vm << ',' << interval << ',' << c.requests << ',' << c.block_accesses << ','
            << c.reads << ',' << c.writes << ',' << c.dram_hits << ',' << c.ssd_read_hits << ','
            << c.ssd_write_hits << ',' << c.read_misses << ',' << c.write_misses << ','
            << c.misses() << ',' << c.disk_reads << ',' << c.disk_writes << ','
            << c.ssd_writes_total << ',' << c.promotions << ',' << c.evictions << ','
            << c.total_hit_ratio() << ',' << c.mean_latency_us(lat) << ',' << dram << ',' << ssd
            << "\n";
    };
    for (const auto& vm : report.vms) {
        const std::string id = std::to_string(vm.vm_id);
        for (const auto& iv : vm.intervals)
            row(id, std::to_string(iv.interval), iv.counters, iv.dram_blocks, iv.ssd_blocks);
        row(id, "total", vm.totals, vm.final_dram_blocks, vm.final_ssd_blocks);
    }
    row("all", "total", report.totals, 0, 0);
    return out.str();
}

nlohmann::ordered_json latency_to_json(const LatencyConfig& cfg) {
    return {{"dram_read_us", cfg.dram_read_us}, {"dram_write_us", cfg.dram_write_us},
            {"ssd_read_us", cfg.ssd_read_us},   {"ssd_write_us", cfg.ssd_write_us},
            {"hdd_read_us", cfg.hdd_read_us},   {"hdd_write_us", cfg.hdd_write_us}};
}

LatencyConfig latency_from_json(const nlohmann::json& j) {
    LatencyConfig cfg;
    if (!j.is_object()) throw ConfigError("latency must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!value.is_number()) throw ConfigError("latency." + key + " must be a number");
        double v = value.get<double>();
        if (key == "dram_read_us") cfg.dram_read_us = v;
        else if (key == "dram_write_us") cfg.dram_write_us = v;
        else if (key == "ssd_read_us") cfg.ssd_read_us = v;
        else if (key == "ssd_write_us") cfg.ssd_write_us = v;
        else if (key == "hdd_read_us") cfg.hdd_read_us = v;
        else if (key == "hdd_write_us") cfg.hdd_write_us = v;
        else throw ConfigError("unknown latency field: " + key);
    }
    cfg.validate();
    return cfg;
}

}  // namespace etica
