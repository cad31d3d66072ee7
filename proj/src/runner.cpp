#include "runner.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include "engine.hpp"
#include "metrics.hpp"
#include "partition.hpp"
#include "policy_sim.hpp"
#include "popularity.hpp"

namespace etica {

namespace {

const char* format_label(TraceFormat f) { return f == TraceFormat::Msr ? "msr" : "simple"; }

// Shortest-round-trip double formatting, shared by every CSV emitter here so
// values survive a parse-and-rewrite cycle bit for bit.
std::string fmt(double v) { return nlohmann::json(v).dump(); }

// Blocks of different VMs go into one single-level cache under a combined
// key; 2^40 blocks per VM (4 EiB at 4 KiB blocks) is far beyond any trace.
constexpr uint64_t kVmKeySpace = uint64_t{1} << 40;

uint64_t combined_key(uint32_t vm_id, uint64_t block) {
    if (block >= kVmKeySpace)
        throw TraceError("block " + std::to_string(block) + " of vm " + std::to_string(vm_id) +
                         " exceeds the single-level block key space");
    return (uint64_t{vm_id} << 40) | block;
}

// Splits the merged timeline into per-VM block-access sequences, preserving
// the global order within each VM.
std::map<uint32_t, std::vector<BlockAccess>> per_vm_accesses(const LoadedTraces& traces,
                                                             uint64_t block_size) {
    std::map<uint32_t, std::vector<BlockAccess>> result;
    for (const auto& r : traces.timeline) {
        auto blocks = to_blocks(r, block_size);
        auto& dst = result[r.vm_id];
        dst.insert(dst.end(), blocks.begin(), blocks.end());
    }
    return result;
}

nlohmann::ordered_json histogram_json(const DistanceProfile& p) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [distance, count] : p.histogram)
        arr.push_back({{"distance", distance}, {"count", count}});
    return arr;
}

nlohmann::ordered_json optional_json(std::optional<uint64_t> v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

uint64_t finite_count(const DistanceProfile& p) {
    uint64_t n = 0;
    for (const auto& [distance, count] : p.histogram) n += count;
    return n;
}

// --- strict typed getters for machine-written documents -------------------

void reject_unknown(const nlohmann::json& j, const char* where,
                    std::initializer_list<const char*> keys) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known)
            throw ConfigError(std::string("unknown key \"") + key + "\" in " + where);
    }
}

const nlohmann::json& need(const nlohmann::json& j, const char* key, const char* where) {
    auto it = j.find(key);
    if (it == j.end())
        throw ConfigError(std::string("missing key \"") + key + "\" in " + where);
    return *it;
}

uint64_t need_count(const nlohmann::json& j, const char* key, const char* where) {
    const auto& v = need(j, key, where);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<int64_t>() < 0))
        throw ConfigError(std::string("\"") + key + "\" in " + where +
                          " must be a non-negative integer");
    return v.get<uint64_t>();
}

// --- single-level runs ----------------------------------------------------

double single_level_write_cost(WritePolicy policy, const LatencyConfig& lat) {
    switch (policy) {
        case WritePolicy::WriteBack:
        case WritePolicy::WriteOnly: return lat.ssd_write_us;
        case WritePolicy::WriteThrough: return lat.ssd_write_us + lat.hdd_write_us;
        case WritePolicy::ReadOnly: return lat.hdd_write_us;
    }
    return 0.0;
}

double single_level_mean_latency(const SingleLevelStats& s, WritePolicy policy,
                                 const LatencyConfig& lat, uint64_t requests) {
    if (requests == 0) return 0.0;
    double miss_cost = lat.hdd_read_us;
    if (policy != WritePolicy::WriteOnly) miss_cost += lat.ssd_write_us;  // miss fill
    double total = double(s.read_hits) * lat.ssd_read_us + double(s.read_misses) * miss_cost +
                   double(s.writes) * single_level_write_cost(policy, lat);
    return total / double(requests);
}

SimulationResult run_single_level(const RunConfig& cfg, const LoadedTraces& traces) {
    SingleLevelCache cache(cfg.policy, cfg.capacity_blocks, cfg.associativity);
    uint64_t requests = 0;
    for (const auto& r : traces.timeline) {
        ++requests;
        for (const auto& access : to_blocks(r, cfg.block_size))
            cache.access(combined_key(access.block.vm_id, access.block.block), access.op);
    }

    const SingleLevelStats& s = cache.stats();
    double read_hit_ratio = s.reads ? double(s.read_hits) / double(s.reads) : 0.0;
    double total_hit_ratio =
        s.accesses ? double(s.read_hits + s.write_hits) / double(s.accesses) : 0.0;
    double mean_latency = single_level_mean_latency(s, cfg.policy, cfg.latency, requests);

    nlohmann::ordered_json doc;
    doc["schema"] = "etica-single/1";
    doc["engine"] = "single-level";
    doc["policy"] = policy_name(cfg.policy);
    doc["capacity_blocks"] = cfg.capacity_blocks;
    doc["associativity"] = cfg.associativity;
    doc["block_size"] = cfg.block_size;
    doc["config"] = config_to_json(cfg);
    doc["totals"] = {{"requests", requests},
                     {"block_accesses", s.accesses},
                     {"reads", s.reads},
                     {"writes", s.writes},
                     {"read_hits", s.read_hits},
                     {"read_misses", s.read_misses},
                     {"write_hits", s.write_hits},
                     {"write_misses", s.write_misses},
                     {"cache_device_writes", s.cache_device_writes},
                     {"backing_reads", s.backing_reads},
                     {"backing_writes", s.backing_writes},
                     {"evictions", s.evictions},
                     {"dirty_evictions", s.dirty_evictions},
                     {"read_hit_ratio", read_hit_ratio},
                     {"total_hit_ratio", total_hit_ratio},
                     {"mean_latency_us", mean_latency}};
    doc["metadata"] = {{"trace_provenance", provenance_json(traces)}};

    SimulationResult result;
    result.document = std::move(doc);
    result.csv = document_to_csv(result.document);
    return result;
}

SimulationResult run_two_level(const RunConfig& cfg, const LoadedTraces& traces,
                               bool dump_popularity, bool verify_each_step) {
    EticaEngine engine(cfg, verify_each_step);
    for (const auto& r : traces.timeline)
        engine.dispatch(r.vm_id, to_blocks(r, cfg.block_size));
    RunReport report = engine.finish();

    SimulationResult result;
    result.document =
        report_to_json(report, cfg.latency, config_to_json(cfg), provenance_json(traces));
    result.csv = report_to_csv(report, cfg.latency);
    if (dump_popularity) {
        std::ostringstream out;
        out << "vm_id,block,score,num_acc\n";
        for (uint32_t vm : engine.vm_ids()) {
            const PopularityTable* table = engine.popularity(vm);
            if (!table) continue;
            for (const auto& [block, pop] : table->entries())
                out << block.vm_id << ',' << block.block << ',' << fmt(pop.score) << ','
                    << pop.num_acc << "\n";
        }
        result.popularity_csv = out.str();
    }
    return result;
}

// --- compare/sweep row extraction -----------------------------------------

nlohmann::ordered_json member_row(const std::string& label, const RunConfig& cfg,
                                  const nlohmann::ordered_json& doc) {
    const auto& totals = doc.at("totals");
    nlohmann::ordered_json row;
    row["label"] = label;
    if (cfg.engine == EngineKind::Etica) {
        row["engine"] = "etica";
        row["mode"] = doc.at("mode");
        row["dram_blocks"] = cfg.dram_capacity_blocks;
        row["ssd_blocks"] = cfg.ssd_capacity_blocks;
        row["cache_blocks"] = cfg.dram_capacity_blocks + cfg.ssd_capacity_blocks;
        row["requests"] = totals.at("requests");
        row["block_accesses"] = totals.at("block_accesses");
        row["total_hit_ratio"] = totals.at("total_hit_ratio");
        row["ssd_writes"] = totals.at("ssd_writes_total");
        row["disk_reads"] = totals.at("disk_reads");
        row["disk_writes"] = totals.at("disk_writes");
    } else {
        row["engine"] = "single-level";
        row["mode"] = policy_name(cfg.policy);
        row["dram_blocks"] = 0;
        row["ssd_blocks"] = cfg.capacity_blocks;
        row["cache_blocks"] = cfg.capacity_blocks;
        row["requests"] = totals.at("requests");
        row["block_accesses"] = totals.at("block_accesses");
        row["total_hit_ratio"] = totals.at("total_hit_ratio");
        row["ssd_writes"] = totals.at("cache_device_writes");
        row["disk_reads"] = totals.at("backing_reads");
        row["disk_writes"] = totals.at("backing_writes");
    }
    row["mean_latency_us"] = totals.at("mean_latency_us");
    return row;
}

std::vector<SimulationResult> run_members(const std::vector<RunConfig>& configs) {
    std::vector<std::future<SimulationResult>> futures;
    futures.reserve(configs.size());
    for (const auto& cfg : configs)
        futures.push_back(std::async(std::launch::async,
                                     [&cfg] { return run_simulation(cfg, false, false); }));
    std::vector<SimulationResult> results;
    results.reserve(configs.size());
    for (auto& f : futures) results.push_back(f.get());
    return results;
}

}  // namespace

LoadedTraces load_traces(const std::vector<TraceSpec>& specs) {
    LoadedTraces out;
    std::vector<std::vector<TraceRecord>> streams;
    for (const auto& spec : specs) {
        TraceFormat format = spec.format ? *spec.format : detect_format(spec.path);
        ParsedTrace parsed = load_trace_file(spec.path, format, spec.vm_id);
        streams.push_back(std::move(parsed.records));
        out.files.push_back(std::move(parsed.meta));
        out.formats.push_back(format);
        out.file_vm_ids.push_back(spec.vm_id);
    }
    out.timeline = merge_streams(streams);
    return out;
}

nlohmann::ordered_json provenance_json(const LoadedTraces& traces) {
    auto arr = nlohmann::ordered_json::array();
    for (size_t i = 0; i < traces.files.size(); ++i) {
        const TraceFileMeta& meta = traces.files[i];
        nlohmann::ordered_json entry;
        entry["path"] = meta.path;
        entry["format"] = format_label(traces.formats[i]);
        entry["vm"] = traces.file_vm_ids[i];
        entry["records"] = meta.records;
        if (!meta.hostname.empty()) entry["hostname"] = meta.hostname;
        if (!meta.disk.empty()) entry["disk"] = meta.disk;
        arr.push_back(std::move(entry));
    }
    return arr;
}

SimulationResult run_simulation(const RunConfig& cfg, bool dump_popularity,
                                bool verify_each_step) {
    cfg.validate();
    return run_simulation(cfg, load_traces(cfg.traces), dump_popularity, verify_each_step);
}

SimulationResult run_simulation(const RunConfig& cfg, const LoadedTraces& traces,
                                bool dump_popularity, bool verify_each_step) {
    cfg.validate();
    if (cfg.engine == EngineKind::SingleLevel) return run_single_level(cfg, traces);
    return run_two_level(cfg, traces, dump_popularity, verify_each_step);
}

nlohmann::ordered_json reuse_document(const LoadedTraces& traces, DistanceMetric metric,
                                      uint64_t block_size, bool per_access) {
    nlohmann::ordered_json doc;
    doc["schema"] = "etica-reuse/1";
    doc["metric"] = metric_name(metric);
    doc["block_size"] = block_size;
    doc["per_vm"] = nlohmann::ordered_json::array();
    for (const auto& [vm, accesses] : per_vm_accesses(traces, block_size)) {
        DistanceProfile profile = compute_distances(accesses, metric);
        nlohmann::ordered_json entry;
        entry["vm"] = vm;
        entry["total_block_accesses"] = accesses.size();
        entry["qualifying"] = profile.accesses.size();
        entry["finite"] = finite_count(profile);
        entry["infinite"] = profile.infinite_count;
        entry["max_finite"] = optional_json(profile.max_finite);
        entry["histogram"] = histogram_json(profile);
        if (per_access) {
            auto arr = nlohmann::ordered_json::array();
            for (const auto& a : profile.accesses)
                arr.push_back({{"index", a.index},
                               {"block", a.block.block},
                               {"distance", optional_json(a.distance)}});
            entry["per_access"] = std::move(arr);
        }
        doc["per_vm"].push_back(std::move(entry));
    }
    doc["metadata"] = {{"trace_provenance", provenance_json(traces)}};
    return doc;
}

nlohmann::ordered_json mrc_document(const LoadedTraces& traces, DistanceMetric metric,
                                    uint64_t block_size) {
    nlohmann::ordered_json doc;
    doc["schema"] = "etica-mrc/1";
    doc["metric"] = metric_name(metric);
    doc["block_size"] = block_size;
    doc["per_vm"] = nlohmann::ordered_json::array();
    for (const auto& [vm, accesses] : per_vm_accesses(traces, block_size)) {
        DistanceProfile profile = compute_distances(accesses, metric);
        Mrc mrc = build_mrc(profile, accesses.size());
        nlohmann::ordered_json entry;
        entry["vm"] = vm;
        entry["total_block_accesses"] = accesses.size();
        entry["qualifying"] = profile.accesses.size();
        entry["infinite"] = profile.infinite_count;
        entry["max_finite"] = optional_json(profile.max_finite);
        entry["demand"] = demand_from_pod(profile.max_finite);
        entry["breakpoints"] = mrc.breakpoints();
        auto points = nlohmann::ordered_json::array();
        points.push_back({{"cache_blocks", 0}, {"hit_ratio", 0.0}});
        for (uint64_t bp : mrc.breakpoints())
            points.push_back({{"cache_blocks", bp}, {"hit_ratio", mrc.hit_ratio(bp)}});
        entry["points"] = std::move(points);
        doc["per_vm"].push_back(std::move(entry));
    }
    doc["metadata"] = {{"trace_provenance", provenance_json(traces)}};
    return doc;
}

nlohmann::ordered_json demands_document(const LoadedTraces& traces, uint64_t block_size) {
    nlohmann::ordered_json doc;
    doc["schema"] = "etica-demands/1";
    doc["block_size"] = block_size;
    doc["per_vm"] = nlohmann::ordered_json::array();
    for (const auto& [vm, accesses] : per_vm_accesses(traces, block_size)) {
        nlohmann::ordered_json entry;
        entry["vm"] = vm;
        entry["total_block_accesses"] = accesses.size();
        auto level = [&](DistanceMetric metric) {
            DistanceProfile profile = compute_distances(accesses, metric);
            return nlohmann::ordered_json{{"metric", metric_name(metric)},
                                          {"demand", demand_from_pod(profile.max_finite)},
                                          {"max_finite", optional_json(profile.max_finite)},
                                          {"infinite", profile.infinite_count},
                                          {"histogram", histogram_json(profile)}};
        };
        entry["levels"] = {{"dram", level(DistanceMetric::PodRo)},
                           {"ssd", level(DistanceMetric::PodWbwo)}};
        doc["per_vm"].push_back(std::move(entry));
    }
    doc["metadata"] = {{"trace_provenance", provenance_json(traces)}};
    return doc;
}

nlohmann::ordered_json plan_document(const nlohmann::json& demands_doc, uint64_t dram_capacity,
                                     uint64_t ssd_capacity) {
    if (!demands_doc.is_object() || demands_doc.value("schema", "") != "etica-demands/1")
        throw ConfigError("partition planning needs an etica-demands/1 document");

    struct LevelInput {
        uint64_t demand = 0;
        DistanceProfile profile;
    };
    auto parse_level = [](const nlohmann::json& j, const char* where) {
        reject_unknown(j, where, {"metric", "demand", "max_finite", "infinite", "histogram"});
        LevelInput in;
        in.profile.infinite_count = need_count(j, "infinite", where);
        const auto& histogram = need(j, "histogram", where);
        if (!histogram.is_array())
            throw ConfigError(std::string("\"histogram\" in ") + where + " must be an array");
        for (const auto& bucket : histogram) {
            uint64_t d = need_count(bucket, "distance", where);
            uint64_t c = need_count(bucket, "count", where);
            if (c == 0 || in.profile.histogram.count(d))
                throw ConfigError(std::string("bad histogram bucket in ") + where);
            in.profile.histogram[d] = c;
        }
        if (!in.profile.histogram.empty())
            in.profile.max_finite = in.profile.histogram.rbegin()->first;
        const auto& max_finite = need(j, "max_finite", where);
        if (max_finite.is_null() ? in.profile.max_finite.has_value()
                                 : (!in.profile.max_finite ||
                                    *in.profile.max_finite != max_finite.get<uint64_t>()))
            throw ConfigError(std::string("max_finite does not match the histogram in ") + where);
        in.demand = demand_from_pod(in.profile.max_finite);
        if (need_count(j, "demand", where) != in.demand)
            throw ConfigError(std::string("demand does not match the histogram in ") + where);
        return in;
    };

    std::vector<VmDemand> demands;
    std::set<uint32_t> seen;
    const auto& per_vm = need(demands_doc, "per_vm", "demands document");
    if (!per_vm.is_array()) throw ConfigError("\"per_vm\" must be an array");
    for (const auto& entry : per_vm) {
        const char* where = "demands per_vm entry";
        reject_unknown(entry, where, {"vm", "total_block_accesses", "levels"});
        uint32_t vm = static_cast<uint32_t>(need_count(entry, "vm", where));
        if (!seen.insert(vm).second)
            throw ConfigError("duplicate vm " + std::to_string(vm) + " in demands document");
        uint64_t total = need_count(entry, "total_block_accesses", where);
        const auto& levels = need(entry, "levels", where);
        reject_unknown(levels, "levels", {"dram", "ssd"});
        LevelInput dram = parse_level(need(levels, "dram", "levels"), "dram level");
        LevelInput ssd = parse_level(need(levels, "ssd", "levels"), "ssd level");

        VmDemand d;
        d.vm_id = vm;
        d.dram_demand = dram.demand;
        d.ssd_demand = ssd.demand;
        try {
            if (dram.demand > 0) d.mrc_dram = build_mrc(dram.profile, total);
            if (ssd.demand > 0) d.mrc_ssd = build_mrc(ssd.profile, total);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("demands document is inconsistent: ") + e.what());
        }
        demands.push_back(std::move(d));
    }

    AllocationPlan plan = optimize_partition(demands, dram_capacity, ssd_capacity);

    std::sort(demands.begin(), demands.end(),
              [](const VmDemand& a, const VmDemand& b) { return a.vm_id < b.vm_id; });
    std::vector<std::pair<uint64_t, const Mrc*>> dram_terms, ssd_terms;
    for (size_t i = 0; i < plan.vms.size(); ++i) {
        if (plan.vms[i].dram_blocks > 0)
            dram_terms.emplace_back(plan.vms[i].dram_blocks, &demands[i].mrc_dram);
        if (plan.vms[i].ssd_blocks > 0)
            ssd_terms.emplace_back(plan.vms[i].ssd_blocks, &demands[i].mrc_ssd);
    }

    nlohmann::ordered_json doc;
    doc["schema"] = "etica-plan/1";
    doc["dram_capacity_blocks"] = dram_capacity;
    doc["ssd_capacity_blocks"] = ssd_capacity;
    doc["vms"] = nlohmann::ordered_json::array();
    for (const auto& vm : plan.vms)
        doc["vms"].push_back(
            {{"vm", vm.vm_id}, {"dram_blocks", vm.dram_blocks}, {"ssd_blocks", vm.ssd_blocks}});
    doc["ppc"] = {{"dram", ppc(dram_terms)}, {"ssd", ppc(ssd_terms)}};
    return doc;
}

nlohmann::ordered_json compare_document(const std::vector<std::string>& labels,
                                        const std::vector<RunConfig>& configs) {
    if (configs.empty()) throw ConfigError("compare needs at least one config");
    if (labels.size() != configs.size())
        throw InternalError("compare labels and configs are misaligned");

    using TraceKey = std::tuple<std::string, uint32_t, std::string>;
    auto trace_set = [](const RunConfig& cfg) {
        std::vector<TraceKey> keys;
        for (const auto& t : cfg.traces)
            keys.emplace_back(t.path, t.vm_id,
                              t.format ? format_label(*t.format) : "auto");
        std::sort(keys.begin(), keys.end());
        return keys;
    };
    const auto reference = trace_set(configs.front());
    for (const auto& cfg : configs) {
        cfg.validate();
        if (trace_set(cfg) != reference)
            throw ConfigError("compare requires identical trace sets across configs");
    }

    std::vector<SimulationResult> results = run_members(configs);

    nlohmann::ordered_json doc;
    doc["schema"] = "etica-compare/1";
    doc["members"] = nlohmann::ordered_json::array();
    for (size_t i = 0; i < configs.size(); ++i)
        doc["members"].push_back(member_row(labels[i], configs[i], results[i].document));
    return doc;
}

nlohmann::ordered_json sweep_document(const RunConfig& base,
                                      const std::vector<uint64_t>& intervals) {
    if (base.engine != EngineKind::Etica)
        throw ConfigError("interval sweep requires the two-level engine");
    if (intervals.empty()) throw ConfigError("interval sweep needs at least one interval");

    std::vector<RunConfig> configs;
    for (uint64_t interval : intervals) {
        if (interval == 0) throw ConfigError("sweep intervals must be positive");
        RunConfig cfg = base;
        cfg.promo_interval_requests = interval;
        cfg.validate();
        configs.push_back(std::move(cfg));
    }

    std::vector<SimulationResult> results = run_members(configs);

    std::vector<uint64_t> writes(results.size());
    std::vector<double> perf(results.size()), latency(results.size()), hit(results.size());
    for (size_t i = 0; i < results.size(); ++i) {
        const auto& totals = results[i].document.at("totals");
        writes[i] = totals.at("ssd_writes_total").get<uint64_t>();
        latency[i] = totals.at("mean_latency_us").get<double>();
        hit[i] = totals.at("total_hit_ratio").get<double>();
        perf[i] = latency[i] > 0.0 ? 1.0 / latency[i] : 0.0;
    }
    uint64_t max_writes = *std::max_element(writes.begin(), writes.end());
    double max_perf = *std::max_element(perf.begin(), perf.end());

    nlohmann::ordered_json doc;
    doc["schema"] = "etica-sweep/1";
    doc["rows"] = nlohmann::ordered_json::array();
    for (size_t i = 0; i < results.size(); ++i)
        doc["rows"].push_back(
            {{"promo_interval", intervals[i]},
             {"ssd_writes", writes[i]},
             {"total_hit_ratio", hit[i]},
             {"mean_latency_us", latency[i]},
             {"performance", perf[i]},
             {"ssd_writes_norm", max_writes ? double(writes[i]) / double(max_writes) : 0.0},
             {"performance_norm", max_perf > 0.0 ? perf[i] / max_perf : 0.0}});
    return doc;
}

std::string document_to_csv(const nlohmann::ordered_json& doc) {
    const std::string schema = doc.value("schema", "");
    std::ostringstream out;

    auto cell = [](const nlohmann::json& v) -> std::string {
        if (v.is_null()) return "";
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    };

    if (schema == "etica-single/1") {
        const auto& t = doc.at("totals");
        out << "policy,capacity_blocks,associativity,block_size,requests,block_accesses,reads,"
               "writes,read_hits,read_misses,write_hits,write_misses,cache_device_writes,"
               "backing_reads,backing_writes,evictions,dirty_evictions,read_hit_ratio,"
               "total_hit_ratio,mean_latency_us\n";
        out << cell(doc.at("policy")) << ',' << cell(doc.at("capacity_blocks")) << ','
            << cell(doc.at("associativity")) << ',' << cell(doc.at("block_size"));
        for (const char* key : {"requests", "block_accesses", "reads", "writes", "read_hits",
                                "read_misses", "write_hits", "write_misses",
                                "cache_device_writes", "backing_reads", "backing_writes",
                                "evictions", "dirty_evictions", "read_hit_ratio",
                                "total_hit_ratio", "mean_latency_us"})
            out << ',' << cell(t.at(key));
        out << "\n";
        return out.str();
    }

    if (schema == "etica-reuse/1") {
        // Per-access rows when the document carries them, histogram rows otherwise.
        bool per_access = !doc.at("per_vm").empty() &&
                          doc.at("per_vm").front().contains("per_access");
        if (per_access) {
            out << "vm,index,block,distance\n";
            for (const auto& entry : doc.at("per_vm"))
                for (const auto& a : entry.at("per_access"))
                    out << cell(entry.at("vm")) << ',' << cell(a.at("index")) << ','
                        << cell(a.at("block")) << ',' << cell(a.at("distance")) << "\n";
        } else {
            out << "vm,distance,count\n";
            for (const auto& entry : doc.at("per_vm")) {
                for (const auto& bucket : entry.at("histogram"))
                    out << cell(entry.at("vm")) << ',' << cell(bucket.at("distance")) << ','
                        << cell(bucket.at("count")) << "\n";
                if (entry.at("infinite").get<uint64_t>() > 0)
                    out << cell(entry.at("vm")) << ",inf," << cell(entry.at("infinite")) << "\n";
            }
        }
        return out.str();
    }

    if (schema == "etica-mrc/1") {
        out << "vm,cache_blocks,hit_ratio\n";
        for (const auto& entry : doc.at("per_vm"))
            for (const auto& point : entry.at("points"))
                out << cell(entry.at("vm")) << ',' << cell(point.at("cache_blocks")) << ','
                    << cell(point.at("hit_ratio")) << "\n";
        return out.str();
    }

    if (schema == "etica-demands/1") {
        out << "vm,level,metric,demand,max_finite,infinite,total_block_accesses\n";
        for (const auto& entry : doc.at("per_vm"))
            for (const char* level : {"dram", "ssd"}) {
                const auto& l = entry.at("levels").at(level);
                out << cell(entry.at("vm")) << ',' << level << ',' << cell(l.at("metric")) << ','
                    << cell(l.at("demand")) << ',' << cell(l.at("max_finite")) << ','
                    << cell(l.at("infinite")) << ',' << cell(entry.at("total_block_accesses"))
                    << "\n";
            }
        return out.str();
    }

    if (schema == "etica-plan/1") {
        out << "vm,dram_blocks,ssd_blocks\n";
        for (const auto& vm : doc.at("vms"))
            out << cell(vm.at("vm")) << ',' << cell(vm.at("dram_blocks")) << ','
                << cell(vm.at("ssd_blocks")) << "\n";
        return out.str();
    }

    if (schema == "etica-compare/1" || schema == "etica-sweep/1") {
        const auto& rows = doc.at(schema == "etica-compare/1" ? "members" : "rows");
        if (rows.empty()) return "";
        bool first = true;
        for (const auto& [key, value] : rows.front().items()) {
            (void)value;
            out << (first ? "" : ",") << key;
            first = false;
        }
        out << "\n";
        for (const auto& row : rows) {
            first = true;
            for (const auto& [key, value] : row.items()) {
                (void)key;
                out << (first ? "" : ",") << cell(value);
                first = false;
            }
            out << "\n";
        }
        return out.str();
    }

    throw InternalError("no CSV form for schema \"" + schema + "\"");
}

}  // namespace etica
