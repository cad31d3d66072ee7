#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "types.hpp"

namespace etica {

// Per-device access costs in microseconds. The defaults place the devices an
// order of magnitude apart; they are knobs, not measurements.
struct LatencyConfig {
    double dram_read_us = 1.0;
    double dram_write_us = 1.0;
    double ssd_read_us = 100.0;
    double ssd_write_us = 300.0;
    double hdd_read_us = 5000.0;
    double hdd_write_us = 5000.0;

    void validate() const;  // all fields must be positive
};

// The five ways a block access can be served. Background queue work never
// appears here: it is charged to device counters, not to request latency.
enum class ServicePath : uint8_t { DramHit, SsdReadHit, SsdWriteHit, ReadMiss, WriteMiss };
inline constexpr size_t kServicePathCount = 5;

double request_latency(ServicePath path, const LatencyConfig& cfg);

// Counter block shared by per-interval, per-VM, and whole-run rollups. The
// five hit/miss counters double as the per-path tally for the latency model.
struct Counters {
    uint64_t requests = 0;        // trace records dispatched
    uint64_t block_accesses = 0;  // block-level operations (requests split by block)
    uint64_t reads = 0;           // block-level
    uint64_t writes = 0;
    uint64_t dram_hits = 0;
    uint64_t ssd_read_hits = 0;
    uint64_t ssd_write_hits = 0;  // includes write allocations when the SSD absorbs them
    uint64_t read_misses = 0;
    uint64_t write_misses = 0;
    uint64_t disk_reads = 0;
    uint64_t disk_writes = 0;
    uint64_t ssd_writes_total = 0;
    uint64_t promotions = 0;
    uint64_t evictions = 0;

    void record_path(ServicePath path);
    uint64_t path_count(ServicePath path) const;
    uint64_t misses() const { return read_misses + write_misses; }
    uint64_t hits() const { return dram_hits + ssd_read_hits + ssd_write_hits; }
    double total_hit_ratio() const;               // hits over block accesses; 0 when idle
    double mean_latency_us(const LatencyConfig& cfg) const;  // per request; 0 when idle
    bool any() const;                             // anything recorded at all

    Counters& operator+=(const Counters& other);
};

struct IntervalReport {
    uint64_t interval = 0;  // per-VM ordinal, starting at 0
    Counters counters;
    uint64_t dram_blocks = 0;  // allocation snapshot at interval end
    uint64_t ssd_blocks = 0;
};

struct VmReport {
    uint32_t vm_id = 0;
    Counters totals;
    std::vector<IntervalReport> intervals;
    uint64_t final_dram_blocks = 0;
    uint64_t final_ssd_blocks = 0;
};

struct RunReport {
    bool promotion_eviction = true;  // full mode vs no-promotion/eviction mode
    Counters totals;
    std::vector<VmReport> vms;  // ascending vm_id
    uint64_t popularity_tracked_blocks = 0;
};

// Metadata bytes needed for the popularity bookkeeping (8 bytes per block).
uint64_t popularity_metadata_bytes(uint64_t tracked_blocks);

// Cross-checks every stated identity (per interval, per VM, and for the run
// totals); violations throw InternalError so broken accounting cannot slip
// into an emitted report.
void verify_report(const RunReport& report);

// Serialization. config_echo is embedded verbatim under "config"; provenance
// (may be null) lands in "metadata.trace_provenance".
nlohmann::ordered_json report_to_json(const RunReport& report, const LatencyConfig& lat,
                                      const nlohmann::ordered_json& config_echo,
                                      const nlohmann::ordered_json& provenance = nullptr);
std::string report_to_csv(const RunReport& report, const LatencyConfig& lat);

nlohmann::ordered_json latency_to_json(const LatencyConfig& cfg);
LatencyConfig latency_from_json(const nlohmann::json& j);

}  // namespace etica
