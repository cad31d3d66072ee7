// Command line driver for the etica simulator. Everything goes through the
// public C API; the vendored headers below are used only for argument
// parsing and for patching config documents before they are handed over.
#include <etica/etica.h>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace {

constexpr size_t kErrLen = 1024;

int exit_code(etica_status status) {
    switch (status) {
        case ETICA_OK: return 0;
        case ETICA_E_INVALID:
        case ETICA_E_CONFIG: return 2;
        case ETICA_E_TRACE: return 3;
        case ETICA_E_INTERNAL: return 4;
    }
    return 4;
}

[[noreturn]] void fail(etica_status status, const char* message) {
    std::fprintf(stderr, "error: %s\n", message);
    std::exit(exit_code(status));
}

[[noreturn]] void fail_config(const std::string& message) {
    std::fprintf(stderr, "error: %s\n", message.c_str());
    std::exit(2);
}

std::string read_text(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_config(std::string(what) + " not found: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_config("cannot write " + path);
    out << text;
    if (!out) fail_config("cannot write " + path);
}

using TraceHandle = std::unique_ptr<etica_trace, decltype(&etica_trace_free)>;
using ResultHandle = std::unique_ptr<etica_result, decltype(&etica_result_free)>;

struct OutputArgs {
    std::string path;             // empty = stdout
    std::string format = "json";  // json | csv
};

void add_output_options(CLI::App* cmd, OutputArgs& out) {
    cmd->add_option("--out", out.path, "Write the result to this file instead of stdout");
    cmd->add_option("--format", out.format, "Result encoding")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
}

struct TraceArgs {
    std::vector<std::string> paths;
    std::vector<uint32_t> vms;
    std::string format = "auto";
    uint64_t block_size = 4096;
};

void add_trace_options(CLI::App* cmd, TraceArgs& args) {
    cmd->add_option("--trace", args.paths, "Trace file, repeatable; .gz input is inflated")
        ->required();
    cmd->add_option("--vm", args.vms,
                    "VM id owning the matching --trace (repeatable, aligned; default 0)");
    cmd->add_option("--trace-format", args.format, "Trace file format")
        ->check(CLI::IsMember({"auto", "msr", "simple"}))
        ->capture_default_str();
    cmd->add_option("--block-size", args.block_size, "Cache block size in bytes")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

TraceHandle open_traces(const TraceArgs& args) {
    if (!args.vms.empty() && args.vms.size() != args.paths.size())
        fail_config("--vm must be given once per --trace");
    std::vector<const char*> paths;
    for (const auto& p : args.paths) paths.push_back(p.c_str());

    char err[kErrLen] = {};
    etica_trace* trace = nullptr;
    etica_status status =
        etica_trace_open(paths.data(), args.vms.empty() ? nullptr : args.vms.data(),
                         paths.size(), args.format.c_str(), &trace, err, sizeof err);
    if (status != ETICA_OK) fail(status, err);
    return TraceHandle(trace, &etica_trace_free);
}

void emit(const etica_result* result, const OutputArgs& out) {
    const char* text =
        out.format == "csv" ? etica_result_csv(result) : etica_result_json(result);
    write_text(out.path, text ? text : "");
}

ResultHandle check(etica_status status, etica_result* result, const char* err) {
    if (status != ETICA_OK) fail(status, err);
    return ResultHandle(result, &etica_result_free);
}

// Applies command line overrides to a config document without disturbing
// anything else in it.
std::string patch_config(const std::string& text, const std::string& path, bool npe,
                         const std::optional<double>& queue_fraction) {
    if (!npe && !queue_fraction) return text;
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail_config("config parse error in " + path + ": " + e.what());
    }
    if (npe) doc["promotion_eviction"] = false;
    if (queue_fraction) doc["queue_fraction"] = *queue_fraction;
    return doc.dump(2);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-level (DRAM over SSD) I/O cache simulator and trace analyzer"};
    app.require_subcommand(1);
    app.set_version_flag("--version", etica_version());

    // simulate
    auto* simulate = app.add_subcommand(
        "simulate", "Run the engine described by a config file over its traces");
    std::string sim_config;
    bool sim_npe = false;
    std::optional<double> sim_queue_fraction;
    std::string sim_popularity_path;
    OutputArgs sim_out;
    simulate->add_option("--config", sim_config, "Run config (etica-config/1 JSON)")->required();
    simulate->add_flag("--npe", sim_npe,
                       "Disable the promotion/eviction queues (overrides the config)");
    simulate->add_option("--queue-fraction", sim_queue_fraction,
                         "Queue depth as a fraction of blocks (overrides the config)");
    simulate->add_option("--dump-popularity", sim_popularity_path,
                         "Also write the per-block popularity table (CSV) to this file");
    add_output_options(simulate, sim_out);

    // single
    auto* single = app.add_subcommand("single", "Run a single-level baseline cache");
    TraceArgs single_traces;
    std::string single_policy;
    uint64_t single_capacity = 0;
    uint64_t single_assoc = 512;
    OutputArgs single_out;
    add_trace_options(single, single_traces);
    single->add_option("--policy", single_policy, "Write policy")
        ->check(CLI::IsMember({"wb", "wt", "ro", "wo", "wbwo"}))
        ->required();
    single->add_option("--capacity", single_capacity, "Cache capacity in blocks")
        ->check(CLI::PositiveNumber)
        ->required();
    single->add_option("--assoc", single_assoc, "Set associativity")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_output_options(single, single_out);

    // reuse
    auto* reuse = app.add_subcommand("reuse", "Reuse-distance profile per VM");
    TraceArgs reuse_traces;
    std::string reuse_metric;
    bool reuse_per_access = false;
    OutputArgs reuse_out;
    add_trace_options(reuse, reuse_traces);
    reuse->add_option("--metric", reuse_metric, "Distance metric")
        ->check(CLI::IsMember({"trd", "urd", "pod-ro", "pod-wbwo", "pod-wb"}))
        ->required();
    reuse->add_flag("--per-access", reuse_per_access,
                    "Record every qualifying access's distance, not just the histogram");
    add_output_options(reuse, reuse_out);

    // mrc
    auto* mrc = app.add_subcommand("mrc", "Hit-ratio curve per VM");
    TraceArgs mrc_traces;
    std::string mrc_metric;
    OutputArgs mrc_out;
    add_trace_options(mrc, mrc_traces);
    mrc->add_option("--metric", mrc_metric, "Distance metric")
        ->check(CLI::IsMember({"trd", "urd", "pod-ro", "pod-wbwo", "pod-wb"}))
        ->required();
    add_output_options(mrc, mrc_out);

    // partition
    auto* partition = app.add_subcommand(
        "partition", "Optimize the per-VM split of both cache levels");
    std::string partition_demands;
    TraceArgs partition_traces;
    uint64_t partition_dram = 0;
    uint64_t partition_ssd = 0;
    OutputArgs partition_out;
    partition->add_option("--demands", partition_demands,
                          "Demands document (etica-demands/1 JSON) to plan from");
    partition->add_option("--trace", partition_traces.paths,
                          "Trace file to derive demands from (repeatable)");
    partition->add_option("--vm", partition_traces.vms,
                          "VM id owning the matching --trace (repeatable, aligned; default 0)");
    partition->add_option("--trace-format", partition_traces.format, "Trace file format")
        ->check(CLI::IsMember({"auto", "msr", "simple"}));
    partition->add_option("--block-size", partition_traces.block_size,
                          "Cache block size in bytes")
        ->check(CLI::PositiveNumber);
    partition->add_option("--dram", partition_dram, "DRAM level capacity in blocks")->required();
    partition->add_option("--ssd", partition_ssd, "SSD level capacity in blocks")->required();
    add_output_options(partition, partition_out);

    // compare
    auto* compare = app.add_subcommand(
        "compare", "Run several configs on the same traces and join the headline numbers");
    std::vector<std::string> compare_configs;
    OutputArgs compare_out;
    compare->add_option("--config", compare_configs, "Run config (repeatable)")->required();
    add_output_options(compare, compare_out);

    // interval-sweep
    auto* sweep = app.add_subcommand(
        "interval-sweep", "Re-run one config across promotion-interval values");
    std::string sweep_config;
    std::vector<uint64_t> sweep_intervals;
    OutputArgs sweep_out;
    sweep->add_option("--config", sweep_config, "Run config (two-level engine)")->required();
    sweep->add_option("--intervals", sweep_intervals,
                      "Promotion interval values in requests, comma separated")
        ->delimiter(',')
        ->required();
    add_output_options(sweep, sweep_out);

    CLI11_PARSE(app, argc, argv);

    char err[kErrLen] = {};

    if (simulate->parsed()) {
        std::string text = patch_config(read_text(sim_config, "config"), sim_config, sim_npe,
                                        sim_queue_fraction);
        etica_result* raw = nullptr;
        etica_status status = etica_simulate(text.c_str(), sim_popularity_path.empty() ? 0 : 1,
                                             &raw, err, sizeof err);
        auto result = check(status, raw, err);
        if (!sim_popularity_path.empty()) {
            const char* popularity = etica_result_popularity_csv(result.get());
            if (!popularity)
                fail_config("the config did not produce a popularity dump "
                            "(single-level engine?)");
            write_text(sim_popularity_path, popularity);
        }
        emit(result.get(), sim_out);
        return 0;
    }

    if (single->parsed()) {
        auto trace = open_traces(single_traces);
        etica_result* raw = nullptr;
        etica_status status =
            etica_single_level(trace.get(), single_policy.c_str(), single_capacity, single_assoc,
                               single_traces.block_size, nullptr, &raw, err, sizeof err);
        auto result = check(status, raw, err);
        emit(result.get(), single_out);
        return 0;
    }

    if (reuse->parsed()) {
        auto trace = open_traces(reuse_traces);
        etica_result* raw = nullptr;
        etica_status status = etica_reuse(trace.get(), reuse_metric.c_str(),
                                          reuse_traces.block_size, reuse_per_access ? 1 : 0, &raw,
                                          err, sizeof err);
        auto result = check(status, raw, err);
        emit(result.get(), reuse_out);
        return 0;
    }

    if (mrc->parsed()) {
        auto trace = open_traces(mrc_traces);
        etica_result* raw = nullptr;
        etica_status status = etica_mrc(trace.get(), mrc_metric.c_str(), mrc_traces.block_size,
                                        &raw, err, sizeof err);
        auto result = check(status, raw, err);
        emit(result.get(), mrc_out);
        return 0;
    }

    if (partition->parsed()) {
        std::string demands_text;
        if (!partition_demands.empty()) {
            if (!partition_traces.paths.empty())
                fail_config("--demands and --trace are mutually exclusive");
            demands_text = read_text(partition_demands, "demands file");
        } else if (!partition_traces.paths.empty()) {
            auto trace = open_traces(partition_traces);
            etica_result* raw = nullptr;
            etica_status status =
                etica_demands(trace.get(), partition_traces.block_size, &raw, err, sizeof err);
            auto demands = check(status, raw, err);
            demands_text = etica_result_json(demands.get());
        } else {
            fail_config("either --demands or --trace is required");
        }
        etica_result* raw = nullptr;
        etica_status status = etica_partition(demands_text.c_str(), partition_dram, partition_ssd,
                                              &raw, err, sizeof err);
        auto result = check(status, raw, err);
        emit(result.get(), partition_out);
        return 0;
    }

    if (compare->parsed()) {
        std::vector<std::string> texts;
        for (const auto& path : compare_configs) texts.push_back(read_text(path, "config"));
        std::vector<const char*> text_ptrs, label_ptrs;
        for (const auto& t : texts) text_ptrs.push_back(t.c_str());
        for (const auto& p : compare_configs) label_ptrs.push_back(p.c_str());
        etica_result* raw = nullptr;
        etica_status status = etica_compare(text_ptrs.data(), label_ptrs.data(), texts.size(),
                                            &raw, err, sizeof err);
        auto result = check(status, raw, err);
        emit(result.get(), compare_out);
        return 0;
    }

    if (sweep->parsed()) {
        std::string text = read_text(sweep_config, "config");
        etica_result* raw = nullptr;
        etica_status status = etica_interval_sweep(text.c_str(), sweep_intervals.data(),
                                                   sweep_intervals.size(), &raw, err, sizeof err);
        auto result = check(status, raw, err);
        emit(result.get(), sweep_out);
        return 0;
    }

    return 0;
}
