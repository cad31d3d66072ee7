#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "reuse.hpp"
#include "trace.hpp"
#include "types.hpp"

namespace etica {

// Trace files resolved, parsed, and merged into one timeline.
struct LoadedTraces {
    std::vector<TraceRecord> timeline;
    std::vector<TraceFileMeta> files;     // one per input spec, in spec order
    std::vector<TraceFormat> formats;     // aligned with files
    std::vector<uint32_t> file_vm_ids;    // aligned with files
};

LoadedTraces load_traces(const std::vector<TraceSpec>& specs);
nlohmann::ordered_json provenance_json(const LoadedTraces& traces);

struct SimulationResult {
    nlohmann::ordered_json document;
    std::string csv;
    std::string popularity_csv;  // filled only when requested (two-level engine)
};

// Runs the engine selected by cfg over its traces. The overload taking
// pre-loaded traces skips file IO but still records their provenance.
SimulationResult run_simulation(const RunConfig& cfg, bool dump_popularity = false,
                                bool verify_each_step = false);
SimulationResult run_simulation(const RunConfig& cfg, const LoadedTraces& traces,
                                bool dump_popularity = false, bool verify_each_step = false);

// Analysis documents. Multi-VM timelines are decomposed per VM: blocks of
// different VMs never share a reuse window.
nlohmann::ordered_json reuse_document(const LoadedTraces& traces, DistanceMetric metric,
                                      uint64_t block_size, bool per_access = false);
nlohmann::ordered_json mrc_document(const LoadedTraces& traces, DistanceMetric metric,
                                    uint64_t block_size);
nlohmann::ordered_json demands_document(const LoadedTraces& traces, uint64_t block_size);

// Partition planning from a previously emitted demands document; the embedded
// histograms rebuild each hit-ratio curve exactly.
nlohmann::ordered_json plan_document(const nlohmann::json& demands_doc, uint64_t dram_capacity,
                                     uint64_t ssd_capacity);

// Runs every config (in parallel) and joins the headline numbers into one
// table. All configs must resolve to the identical trace set.
nlohmann::ordered_json compare_document(const std::vector<std::string>& labels,
                                        const std::vector<RunConfig>& configs);

// Re-runs the base config once per promotion-interval value (in parallel) and
// tabulates SSD write traffic against performance, each column also
// normalized by its maximum over the sweep.
nlohmann::ordered_json sweep_document(const RunConfig& base,
                                      const std::vector<uint64_t>& intervals);

// CSV flattening for every document schema above except etica-report/1,
// whose CSV comes straight out of run_simulation.
std::string document_to_csv(const nlohmann::ordered_json& doc);

}  // namespace etica
