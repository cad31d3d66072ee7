#include "etica/etica.h"

#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "metrics.hpp"
#include "policy_sim.hpp"
#include "reuse.hpp"
#include "runner.hpp"
#include "trace.hpp"
#include "types.hpp"

struct etica_trace {
    std::vector<etica::TraceSpec> specs;
    etica::LoadedTraces traces;
};

struct etica_result {
    std::string json;
    std::string csv;
    std::string popularity_csv;
    bool has_popularity = false;
};

namespace {

using etica::ConfigError;
using etica::InternalError;
using etica::TraceError;

void set_error(char* errbuf, size_t errbuf_len, const char* msg) {
    if (!errbuf || errbuf_len == 0) return;
    std::strncpy(errbuf, msg, errbuf_len - 1);
    errbuf[errbuf_len - 1] = '\0';
}

// Runs the body and folds the library's exception taxonomy into status codes.
template <typename Fn>
etica_status guarded(char* errbuf, size_t errbuf_len, Fn&& fn) {
    try {
        fn();
        return ETICA_OK;
    } catch (const ConfigError& e) {
        set_error(errbuf, errbuf_len, e.what());
        return ETICA_E_CONFIG;
    } catch (const TraceError& e) {
        set_error(errbuf, errbuf_len, e.what());
        return ETICA_E_TRACE;
    } catch (const InternalError& e) {
        set_error(errbuf, errbuf_len, e.what());
        return ETICA_E_INTERNAL;
    } catch (const nlohmann::json::exception& e) {
        set_error(errbuf, errbuf_len, e.what());
        return ETICA_E_CONFIG;
    } catch (const std::invalid_argument& e) {
        set_error(errbuf, errbuf_len, e.what());
        return ETICA_E_INVALID;
    } catch (const std::exception& e) {
        set_error(errbuf, errbuf_len, e.what());
        return ETICA_E_INTERNAL;
    }
}

etica_status require(bool ok, const char* msg, char* errbuf, size_t errbuf_len) {
    if (ok) return ETICA_OK;
    set_error(errbuf, errbuf_len, msg);
    return ETICA_E_INVALID;
}

std::string dump(const nlohmann::ordered_json& doc) { return doc.dump(2) + "\n"; }

etica_result* make_result(const nlohmann::ordered_json& doc) {
    auto* r = new etica_result;
    r->json = dump(doc);
    r->csv = etica::document_to_csv(doc);
    return r;
}

etica::DistanceMetric parse_metric(const char* metric) {
    auto m = etica::metric_from_name(metric ? metric : "");
    if (!m) throw std::invalid_argument("unknown metric \"" + std::string(metric ? metric : "") +
                                        "\"; expected trd, urd, pod-ro, pod-wbwo, or pod-wb");
    return *m;
}

nlohmann::json parse_json_text(const char* text, const char* what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string(what) + " parse error: " + e.what());
    }
}

}  // namespace

extern "C" {

const char* etica_version(void) { return "1.0.0"; }

etica_status etica_trace_open(const char* const* paths, const uint32_t* vm_ids, size_t count,
                              const char* format, etica_trace** out, char* errbuf,
                              size_t errbuf_len) {
    if (auto s = require(out != nullptr, "out must not be NULL", errbuf, errbuf_len)) return s;
    *out = nullptr;
    if (auto s = require(paths != nullptr && count > 0, "at least one trace path is required",
                         errbuf, errbuf_len))
        return s;

    std::optional<etica::TraceFormat> parsed_format;
    const std::string format_text = format ? format : "auto";
    if (format_text == "msr") parsed_format = etica::TraceFormat::Msr;
    else if (format_text == "simple") parsed_format = etica::TraceFormat::Simple;
    else if (format_text != "auto")
        return require(false, "format must be auto, msr, or simple", errbuf, errbuf_len);

    return guarded(errbuf, errbuf_len, [&] {
        auto handle = std::make_unique<etica_trace>();
        for (size_t i = 0; i < count; ++i) {
            if (!paths[i]) throw std::invalid_argument("trace path must not be NULL");
            etica::TraceSpec spec;
            spec.path = paths[i];
            spec.vm_id = vm_ids ? vm_ids[i] : 0;
            spec.format = parsed_format;
            handle->specs.push_back(std::move(spec));
        }
        handle->traces = etica::load_traces(handle->specs);
        *out = handle.release();
    });
}

void etica_trace_free(etica_trace* trace) { delete trace; }

uint64_t etica_trace_num_records(const etica_trace* trace) {
    return trace ? trace->traces.timeline.size() : 0;
}

etica_status etica_reuse(const etica_trace* trace, const char* metric, uint64_t block_size,
                         int per_access, etica_result** out, char* errbuf, size_t errbuf_len) {
    if (auto s = require(out != nullptr, "out must not be NULL", errbuf, errbuf_len)) return s;
    *out = nullptr;
    if (auto s = require(trace != nullptr, "trace must not be NULL", errbuf, errbuf_len))
        return s;
    return guarded(errbuf, errbuf_len, [&] {
        *out = make_result(etica::reuse_document(trace->traces, parse_metric(metric), block_size,
                                                 per_access != 0));
    });
}

etica_status etica_mrc(const etica_trace* trace, const char* metric, uint64_t block_size,
                       etica_result** out, char* errbuf, size_t errbuf_len) {
    if (auto s = require(out != nullptr, "out must not be NULL", errbuf, errbuf_len)) return s;
    *out = nullptr;
    if (auto s = require(trace != nullptr, "trace must not be NULL", errbuf, errbuf_len))
        return s;
    return guarded(errbuf, errbuf_len, [&] {
        *out = make_result(etica::mrc_document(trace->traces, parse_metric(metric), block_size));
    });
}

etica_status etica_demands(const etica_trace* trace, uint64_t block_size, etica_result** out,
                           char* errbuf, size_t errbuf_len) {
    if (auto s = require(out != nullptr, "out must not be NULL", errbuf, errbuf_len)) return s;
    *out = nullptr;
    if (auto s = require(trace != nullptr, "trace must not be NULL", errbuf, errbuf_len))
        return s;
    return guarded(errbuf, errbuf_len, [&] {
        *out = make_result(etica::demands_document(trace->traces, block_size));
    });
}

etica_status etica_partition(const char* demands_json, uint64_t dram_capacity_blocks,
                             uint64_t ssd_capacity_blocks, etica_result** out, char* errbuf,
                             size_t errbuf_len) {
    if (auto s = require(out != nullptr, "out must not be NULL", errbuf, errbuf_len)) return s;
    *out = nullptr;
    if (auto s = require(demands_json != nullptr, "demands_json must not be NULL", errbuf,
                         errbuf_len))
        return s;
    return guarded(errbuf, errbuf_len, [&] {
        *out = make_result(etica::plan_document(parse_json_text(demands_json, "demands document"),
                                                dram_capacity_blocks, ssd_capacity_blocks));
    });
}

etica_status etica_single_level(const etica_trace* trace, const char* policy,
                                uint64_t capacity_blocks, uint64_t associativity,
                                uint64_t block_size, const char* latency_json, etica_result** out,
                                char* errbuf, size_t errbuf_len) {
    if (auto s = require(out != nullptr, "out must not be NULL", errbuf, errbuf_len)) return s;
    *out = nullptr;
    if (auto s = require(trace != nullptr, "trace must not be NULL", errbuf, errbuf_len))
        return s;
    return guarded(errbuf, errbuf_len, [&] {
        auto parsed_policy = etica::policy_from_name(policy ? policy : "");
        if (!parsed_policy)
            throw std::invalid_argument("unknown policy \"" + std::string(policy ? policy : "") +
                                        "\"; expected wb, wt, ro, wo, or wbwo");
        etica::RunConfig cfg;
        cfg.engine = etica::EngineKind::SingleLevel;
        cfg.policy = *parsed_policy;
        cfg.capacity_blocks = capacity_blocks;
        cfg.associativity = associativity;
        cfg.block_size = block_size;
        cfg.traces = trace->specs;
        if (latency_json)
            cfg.latency = etica::latency_from_json(parse_json_text(latency_json, "latency"));
        auto result = etica::run_simulation(cfg, trace->traces);
        auto* r = new etica_result;
        r->json = dump(result.document);
        r->csv = std::move(result.csv);
        *out = r;
    });
}

etica_status etica_simulate(const char* config_json, int dump_popularity, etica_result** out,
                            char* errbuf, size_t errbuf_len) {
    if (auto s = require(out != nullptr, "out must not be NULL", errbuf, errbuf_len)) return s;
    *out = nullptr;
    if (auto s = require(config_json != nullptr, "config_json must not be NULL", errbuf,
                         errbuf_len))
        return s;
    return guarded(errbuf, errbuf_len, [&] {
        etica::RunConfig cfg =
            etica::config_from_json(parse_json_text(config_json, "config"));
        auto result = etica::run_simulation(cfg, dump_popularity != 0);
        auto* r = new etica_result;
        r->json = dump(result.document);
        r->csv = std::move(result.csv);
        if (dump_popularity && cfg.engine == etica::EngineKind::Etica) {
            r->popularity_csv = std::move(result.popularity_csv);
            r->has_popularity = true;
        }
        *out = r;
    });
}

etica_status etica_compare(const char* const* config_jsons, const char* const* labels,
                           size_t count, etica_result** out, char* errbuf, size_t errbuf_len) {
    if (auto s = require(out != nullptr, "out must not be NULL", errbuf, errbuf_len)) return s;
    *out = nullptr;
    if (auto s = require(config_jsons != nullptr && labels != nullptr && count > 0,
                         "at least one labeled config is required", errbuf, errbuf_len))
        return s;
    return guarded(errbuf, errbuf_len, [&] {
        std::vector<etica::RunConfig> configs;
        std::vector<std::string> names;
        for (size_t i = 0; i < count; ++i) {
            if (!config_jsons[i] || !labels[i])
                throw std::invalid_argument("config and label entries must not be NULL");
            configs.push_back(
                etica::config_from_json(parse_json_text(config_jsons[i], "config")));
            names.emplace_back(labels[i]);
        }
        *out = make_result(etica::compare_document(names, configs));
    });
}

etica_status etica_interval_sweep(const char* config_json, const uint64_t* intervals,
                                  size_t count, etica_result** out, char* errbuf,
                                  size_t errbuf_len) {
    if (auto s = require(out != nullptr, "out must not be NULL", errbuf, errbuf_len)) return s;
    *out = nullptr;
    if (auto s = require(config_json != nullptr && intervals != nullptr && count > 0,
                         "a config and at least one interval are required", errbuf, errbuf_len))
        return s;
    return guarded(errbuf, errbuf_len, [&] {
        etica::RunConfig cfg =
            etica::config_from_json(parse_json_text(config_json, "config"));
        std::vector<uint64_t> values(intervals, intervals + count);
        *out = make_result(etica::sweep_document(cfg, values));
    });
}

const char* etica_result_json(const etica_result* result) {
    return result ? result->json.c_str() : nullptr;
}

const char* etica_result_csv(const etica_result* result) {
    return result ? result->csv.c_str() : nullptr;
}

const char* etica_result_popularity_csv(const etica_result* result) {
    return result && result->has_popularity ? result->popularity_csv.c_str() : nullptr;
}

void etica_result_free(etica_result* result) { delete result; }

}  // extern "C"
