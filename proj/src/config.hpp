#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "metrics.hpp"
#include "policy_sim.hpp"
#include "trace.hpp"
#include "types.hpp"

namespace etica {

struct TraceSpec {
    std::string path;
    uint32_t vm_id = 0;
    std::optional<TraceFormat> format;  // empty = sniff from the file
    uint64_t initial_dram_blocks = 0;   // allocation before the first resize
    uint64_t initial_ssd_blocks = 0;
};

struct Departure {
    uint32_t vm_id = 0;
    uint64_t after_requests = 0;  // global request count that triggers the flush
};

enum class EngineKind : uint8_t { Etica, SingleLevel };

struct RunConfig {
    uint64_t block_size = 4096;
    uint64_t dram_capacity_blocks = 0;
    uint64_t ssd_capacity_blocks = 0;
    uint64_t associativity = 512;
    uint64_t resize_interval_requests = 10000;
    uint64_t promo_interval_requests = 1000;
    double queue_fraction = 0.05;
    bool promotion_eviction = true;  // false = no-promotion/eviction mode
    bool partitioning = true;        // false = allocations stay at their initial values
    double popularity_decay = 0.0;   // applied at each promotion boundary
    LatencyConfig latency;
    std::vector<TraceSpec> traces;
    std::vector<Departure> departures;

    // Single-level baseline runs reuse the same config file.
    EngineKind engine = EngineKind::Etica;
    WritePolicy policy = WritePolicy::WriteBack;
    uint64_t capacity_blocks = 0;  // single-level only

    void validate() const;  // throws ConfigError
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::string& path);

}  // namespace etica
