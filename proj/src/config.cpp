#include "config.hpp"

#include <fstream>
#include <set>

namespace etica {

namespace {

constexpr const char* kSchema = "etica-config/1";

uint64_t get_count(const nlohmann::json& j, const std::string& key, uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<int64_t>() < 0))
        throw ConfigError(key + " must be a non-negative integer");
    return v.get<uint64_t>();
}

double get_real(const nlohmann::json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(key + " must be a number");
    return v.get<double>();
}

bool get_flag(const nlohmann::json& j, const std::string& key, bool fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_boolean()) throw ConfigError(key + " must be a boolean");
    return v.get<bool>();
}

std::string get_text(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw ConfigError(key + " must be a string");
    return j.at(key).get<std::string>();
}

TraceSpec trace_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("traces entries must be objects");
    static const std::set<std::string> known = {"path",   "vm",
                                               "format", "initial_dram_blocks",
                                               "initial_ssd_blocks"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.count(key)) throw ConfigError("unknown traces field: " + key);
    }
    TraceSpec spec;
    spec.path = get_text(j, "path");
    spec.vm_id = static_cast<uint32_t>(get_count(j, "vm", 0));
    if (j.contains("format")) {
        std::string f = get_text(j, "format");
        if (f == "msr") spec.format = TraceFormat::Msr;
        else if (f == "simple") spec.format = TraceFormat::Simple;
        else if (f != "auto") throw ConfigError("format must be auto, msr, or simple");
    }
    spec.initial_dram_blocks = get_count(j, "initial_dram_blocks", 0);
    spec.initial_ssd_blocks = get_count(j, "initial_ssd_blocks", 0);
    return spec;
}

Departure departure_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("departures entries must be objects");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "vm" && key != "after_requests")
            throw ConfigError("unknown departures field: " + key);
    }
    Departure d;
    if (!j.contains("vm") || !j.contains("after_requests"))
        throw ConfigError("departures entries need vm and after_requests");
    d.vm_id = static_cast<uint32_t>(get_count(j, "vm", 0));
    d.after_requests = get_count(j, "after_requests", 0);
    return d;
}

}  // namespace

void RunConfig::validate() const {
    if (block_size == 0) throw ConfigError("block_size must be positive");
    if (resize_interval_requests == 0) throw ConfigError("resize_interval_requests must be >= 1");
    if (promo_interval_requests == 0) throw ConfigError("promo_interval_requests must be >= 1");
    if (!(queue_fraction > 0.0) || queue_fraction > 1.0)
        throw ConfigError("queue_fraction must lie in (0, 1]");
    if (popularity_decay < 0.0 || popularity_decay > 1.0)
        throw ConfigError("popularity_decay must lie in [0, 1]");
    if (associativity == 0) throw ConfigError("associativity must be positive");
    latency.validate();

    if (engine == EngineKind::SingleLevel) {
        if (capacity_blocks == 0)
            throw ConfigError("single-level runs need a positive capacity_blocks");
        return;
    }

    uint64_t init_dram = 0, init_ssd = 0;
    for (const auto& t : traces) {
        init_dram += t.initial_dram_blocks;
        init_ssd += t.initial_ssd_blocks;
    }
    if (init_dram > dram_capacity_blocks)
        throw ConfigError("initial DRAM allocations exceed dram_capacity_blocks");
    if (init_ssd > ssd_capacity_blocks)
        throw ConfigError("initial SSD allocations exceed ssd_capacity_blocks");

    std::set<uint32_t> vms;
    for (const auto& t : traces) vms.insert(t.vm_id);
    for (const auto& d : departures) {
        if (d.after_requests == 0) throw ConfigError("departures need after_requests >= 1");
        if (!vms.count(d.vm_id))
            throw ConfigError("departure references unknown vm " + std::to_string(d.vm_id));
    }
}

RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known = {
        "schema",        "block_size",       "dram_capacity_blocks",
        "ssd_capacity_blocks", "associativity", "resize_interval_requests",
        "promo_interval_requests", "queue_fraction", "promotion_eviction",
        "partitioning",  "popularity_decay", "latency",
        "traces",        "departures",       "engine",
        "policy",        "capacity_blocks"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.count(key)) throw ConfigError("unknown config field: " + key);
    }
    if (!j.contains("schema") || !j.at("schema").is_string() ||
        j.at("schema").get<std::string>() != kSchema)
        throw ConfigError(std::string("config schema must be \"") + kSchema + "\"");

    RunConfig cfg;
    cfg.block_size = get_count(j, "block_size", cfg.block_size);
    cfg.dram_capacity_blocks = get_count(j, "dram_capacity_blocks", 0);
    cfg.ssd_capacity_blocks = get_count(j, "ssd_capacity_blocks", 0);
    cfg.associativity = get_count(j, "associativity", cfg.associativity);
    cfg.resize_interval_requests =
        get_count(j, "resize_interval_requests", cfg.resize_interval_requests);
    cfg.promo_interval_requests =
        get_count(j, "promo_interval_requests", cfg.promo_interval_requests);
    cfg.queue_fraction = get_real(j, "queue_fraction", cfg.queue_fraction);
    cfg.promotion_eviction = get_flag(j, "promotion_eviction", cfg.promotion_eviction);
    cfg.partitioning = get_flag(j, "partitioning", cfg.partitioning);
    cfg.popularity_decay = get_real(j, "popularity_decay", cfg.popularity_decay);
    if (j.contains("latency")) cfg.latency = latency_from_json(j.at("latency"));
    if (j.contains("traces")) {
        if (!j.at("traces").is_array()) throw ConfigError("traces must be an array");
        for (const auto& t : j.at("traces")) cfg.traces.push_back(trace_spec_from_json(t));
    }
    if (j.contains("departures")) {
        if (!j.at("departures").is_array()) throw ConfigError("departures must be an array");
        for (const auto& d : j.at("departures"))
            cfg.departures.push_back(departure_from_json(d));
    }
    if (j.contains("engine")) {
        std::string e = get_text(j, "engine");
        if (e == "etica") cfg.engine = EngineKind::Etica;
        else if (e == "single-level") cfg.engine = EngineKind::SingleLevel;
        else throw ConfigError("engine must be etica or single-level");
    }
    if (j.contains("policy")) {
        auto p = policy_from_name(get_text(j, "policy"));
        if (!p) throw ConfigError("policy must be one of wb, wt, ro, wo, wbwo");
        cfg.policy = *p;
    }
    cfg.capacity_blocks = get_count(j, "capacity_blocks", 0);
    cfg.validate();
    return cfg;
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["schema"] = kSchema;
    j["block_size"] = cfg.block_size;
    j["dram_capacity_blocks"] = cfg.dram_capacity_blocks;
    j["ssd_capacity_blocks"] = cfg.ssd_capacity_blocks;
    j["associativity"] = cfg.associativity;
    j["resize_interval_requests"] = cfg.resize_interval_requests;
    j["promo_interval_requests"] = cfg.promo_interval_requests;
    j["queue_fraction"] = cfg.queue_fraction;
    j["promotion_eviction"] = cfg.promotion_eviction;
    j["partitioning"] = cfg.partitioning;
    j["popularity_decay"] = cfg.popularity_decay;
    j["latency"] = latency_to_json(cfg.latency);
    j["traces"] = nlohmann::ordered_json::array();
    for (const auto& t : cfg.traces) {
        nlohmann::ordered_json e;
        e["path"] = t.path;
        e["vm"] = t.vm_id;
        e["format"] = !t.format ? "auto"
                      : (*t.format == TraceFormat::Msr ? "msr" : "simple");
        e["initial_dram_blocks"] = t.initial_dram_blocks;
        e["initial_ssd_blocks"] = t.initial_ssd_blocks;
        j["traces"].push_back(std::move(e));
    }
    j["departures"] = nlohmann::ordered_json::array();
    for (const auto& d : cfg.departures)
        j["departures"].push_back({{"vm", d.vm_id}, {"after_requests", d.after_requests}});
    j["engine"] = cfg.engine == EngineKind::Etica ? "etica" : "single-level";
    j["policy"] = policy_name(cfg.policy);
    j["capacity_blocks"] = cfg.capacity_blocks;
    return j;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config not found: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace etica
