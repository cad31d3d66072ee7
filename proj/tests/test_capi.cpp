#include <doctest.h>

#include <cstring>
#include <map>
#include <string>
#include <vector>

#include <etica/etica.h>
#include <json.hpp>

#include "policy_sim.hpp"
#include "reuse.hpp"
#include "support.hpp"
#include "types.hpp"

using namespace etica;
using namespace etica::test;
using nlohmann::json;

namespace {

struct TraceHandle {
    etica_trace* h = nullptr;
    ~TraceHandle() { etica_trace_free(h); }
};

struct ResultHandle {
    etica_result* h = nullptr;
    ~ResultHandle() { etica_result_free(h); }
    json doc() const {
        REQUIRE(h != nullptr);
        const char* text = etica_result_json(h);
        REQUIRE(text != nullptr);
        return json::parse(text);
    }
};

// Six accesses over three blocks with one write in the middle; small enough
// to recompute every metric's distances independently.
const char* kFixtureText =
    "0,R,0,4096\n"
    "1,R,4096,4096\n"
    "2,W,0,4096\n"
    "3,R,0,4096\n"
    "4,R,8192,4096\n"
    "5,R,4096,4096\n";

std::vector<BlockAccess> fixture_accesses() {
    std::vector<BlockAccess> a;
    const uint64_t blocks[] = {0, 1, 0, 0, 2, 1};
    const char ops[] = {'R', 'R', 'W', 'R', 'R', 'R'};
    for (size_t i = 0; i < 6; ++i)
        a.push_back({BlockRef{0, blocks[i]}, ops[i] == 'R' ? Op::Read : Op::Write});
    return a;
}

void open_single(const std::string& path, TraceHandle& trace) {
    const char* paths[] = {path.c_str()};
    char err[256] = {};
    REQUIRE(etica_trace_open(paths, nullptr, 1, "simple", &trace.h, err, sizeof err) == ETICA_OK);
}

std::string fixture_config(const std::string& trace_path, bool queues) {
    json cfg = {
        {"schema", "etica-config/1"},
        {"dram_capacity_blocks", 3},
        {"ssd_capacity_blocks", 3},
        {"promotion_eviction", queues},
        {"partitioning", false},
        {"traces", json::array({{{"path", trace_path},
                                 {"vm", 0},
                                 {"format", "simple"},
                                 {"initial_dram_blocks", 3},
                                 {"initial_ssd_blocks", 3}}})},
    };
    return cfg.dump();
}

std::map<uint64_t, uint64_t> histogram_of(const json& entry) {
    std::map<uint64_t, uint64_t> out;
    for (const auto& bucket : entry.at("histogram"))
        out[bucket.at("distance").get<uint64_t>()] = bucket.at("count").get<uint64_t>();
    return out;
}

}  // namespace

TEST_CASE("the version is a dotted release string") {
    const char* v = etica_version();
    REQUIRE(v != nullptr);
    CHECK(std::strchr(v, '.') != nullptr);
}

TEST_CASE("opening traces merges files and counts records") {
    TempDir dir;
    auto a = dir.write_file("a.csv", "0,R,0,4096\n1,W,4096,4096\n");
    auto b = dir.write_file("b.csv", "0,R,0,4096\n");
    const char* paths[] = {a.c_str(), b.c_str()};
    const uint32_t vms[] = {1, 2};

    TraceHandle trace;
    char err[256] = {};
    REQUIRE(etica_trace_open(paths, vms, 2, nullptr, &trace.h, err, sizeof err) == ETICA_OK);
    CHECK(etica_trace_num_records(trace.h) == 3);

    CHECK(etica_trace_num_records(nullptr) == 0);
    etica_trace_free(nullptr);  // must be a no-op
}

TEST_CASE("open failures carry a status and a message") {
    char err[256] = {};
    etica_trace* out = nullptr;

    const char* missing[] = {"/nonexistent/trace.csv"};
    CHECK(etica_trace_open(missing, nullptr, 1, nullptr, &out, err, sizeof err) == ETICA_E_TRACE);
    CHECK(out == nullptr);
    CHECK(std::string(err).find("trace not found") != std::string::npos);

    TempDir dir;
    auto bad = dir.write_file("bad.csv", "1,2,3\n");
    const char* badp[] = {bad.c_str()};
    err[0] = '\0';
    CHECK(etica_trace_open(badp, nullptr, 1, "simple", &out, err, sizeof err) == ETICA_E_TRACE);
    CHECK(std::string(err).find("expected 4 fields") != std::string::npos);

    auto good = dir.write_file("good.csv", kFixtureText);
    const char* goodp[] = {good.c_str()};
    CHECK(etica_trace_open(goodp, nullptr, 1, "exotic", &out, err, sizeof err) == ETICA_E_INVALID);
    CHECK(etica_trace_open(nullptr, nullptr, 0, nullptr, &out, err, sizeof err) == ETICA_E_INVALID);
    CHECK(etica_trace_open(goodp, nullptr, 1, nullptr, nullptr, err, sizeof err) ==
          ETICA_E_INVALID);

    // A tiny error buffer is truncated, never overrun.
    char tiny[8];
    std::memset(tiny, 'x', sizeof tiny);
    CHECK(etica_trace_open(missing, nullptr, 1, nullptr, &out, tiny, sizeof tiny) ==
          ETICA_E_TRACE);
    CHECK(tiny[7] == '\0');
}

TEST_CASE("reuse profiles agree with an independent recomputation") {
    TempDir dir;
    auto path = dir.write_file("t.csv", kFixtureText);
    TraceHandle trace;
    open_single(path, trace);
    auto accesses = fixture_accesses();

    const std::pair<const char*, DistanceMetric> metrics[] = {
        {"trd", DistanceMetric::Trd},        {"urd", DistanceMetric::Urd},
        {"pod-ro", DistanceMetric::PodRo},   {"pod-wbwo", DistanceMetric::PodWbwo},
        {"pod-wb", DistanceMetric::PodWb},
    };
    for (const auto& [name, metric] : metrics) {
        CAPTURE(name);
        ResultHandle res;
        char err[256] = {};
        REQUIRE(etica_reuse(trace.h, name, 4096, 1, &res.h, err, sizeof err) == ETICA_OK);
        json doc = res.doc();
        CHECK(doc.at("schema") == "etica-reuse/1");
        CHECK(doc.at("metric") == name);
        REQUIRE(doc.at("per_vm").size() == 1);
        const json& vm = doc.at("per_vm")[0];
        CHECK(vm.at("vm") == 0);
        CHECK(vm.at("total_block_accesses") == 6);

        OracleProfile expect = oracle_distances(accesses, metric);
        CHECK(vm.at("qualifying") == expect.entries.size());
        std::map<uint64_t, uint64_t> hist;
        uint64_t infinite = 0;
        for (const auto& [idx, d] : expect.entries)
            d ? void(++hist[*d]) : void(++infinite);
        CHECK(vm.at("infinite") == infinite);
        if (expect.max_finite)
            CHECK(vm.at("max_finite") == *expect.max_finite);
        else
            CHECK(vm.at("max_finite").is_null());
        CHECK(histogram_of(vm) == hist);

        REQUIRE(vm.at("per_access").size() == expect.entries.size());
        for (size_t i = 0; i < expect.entries.size(); ++i) {
            const json& row = vm.at("per_access")[i];
            CHECK(row.at("index") == expect.entries[i].first);
            if (expect.entries[i].second)
                CHECK(row.at("distance") == *expect.entries[i].second);
            else
                CHECK(row.at("distance").is_null());
        }
    }

    ResultHandle res;
    char err[256] = {};
    CHECK(etica_reuse(trace.h, "xyz", 4096, 0, &res.h, err, sizeof err) == ETICA_E_INVALID);
    CHECK(std::string(err).find("unknown metric") != std::string::npos);
}

TEST_CASE("hit-ratio curves agree with direct counting") {
    TempDir dir;
    auto path = dir.write_file("t.csv", kFixtureText);
    TraceHandle trace;
    open_single(path, trace);
    auto accesses = fixture_accesses();

    ResultHandle res;
    char err[256] = {};
    REQUIRE(etica_mrc(trace.h, "urd", 4096, &res.h, err, sizeof err) == ETICA_OK);
    json doc = res.doc();
    CHECK(doc.at("schema") == "etica-mrc/1");
    const json& vm = doc.at("per_vm")[0];

    OracleProfile expect = oracle_distances(accesses, DistanceMetric::Urd);
    double prev = -1.0;
    for (const auto& point : vm.at("points")) {
        uint64_t c = point.at("cache_blocks").get<uint64_t>();
        double ratio = point.at("hit_ratio").get<double>();
        CHECK(ratio == doctest::Approx(oracle_hit_ratio(expect, 6, c)));
        CHECK(ratio >= prev);  // a step function never descends
        prev = ratio;
    }
    CHECK(vm.at("points")[0].at("cache_blocks") == 0);
    CHECK(vm.at("points")[0].at("hit_ratio") == 0.0);
}

TEST_CASE("demands feed the partition planner round trip") {
    TempDir dir;
    auto path = dir.write_file("t.csv", kFixtureText);
    TraceHandle trace;
    open_single(path, trace);

    ResultHandle demands;
    char err[256] = {};
    REQUIRE(etica_demands(trace.h, 4096, &demands.h, err, sizeof err) == ETICA_OK);
    json ddoc = demands.doc();
    CHECK(ddoc.at("schema") == "etica-demands/1");
    const json& vm = ddoc.at("per_vm")[0];
    // DRAM demand comes from read-after-read distances, SSD demand from
    // read-after-write distances; each is max finite distance + 1.
    auto dram_oracle = oracle_distances(fixture_accesses(), DistanceMetric::PodRo);
    auto ssd_oracle = oracle_distances(fixture_accesses(), DistanceMetric::PodWbwo);
    CHECK(vm.at("levels").at("dram").at("demand") == *dram_oracle.max_finite + 1);
    CHECK(vm.at("levels").at("ssd").at("demand") == *ssd_oracle.max_finite + 1);

    const std::string dtext = etica_result_json(demands.h);

    ResultHandle plan;
    REQUIRE(etica_partition(dtext.c_str(), 8, 8, &plan.h, err, sizeof err) == ETICA_OK);
    json pdoc = plan.doc();
    CHECK(pdoc.at("schema") == "etica-plan/1");
    REQUIRE(pdoc.at("vms").size() == 1);
    // Capacity exceeds demand on both levels, so each VM gets exactly its ask.
    CHECK(pdoc.at("vms")[0].at("dram_blocks") == vm.at("levels").at("dram").at("demand"));
    CHECK(pdoc.at("vms")[0].at("ssd_blocks") == vm.at("levels").at("ssd").at("demand"));
    CHECK(pdoc.at("ppc").contains("dram"));
    CHECK(pdoc.at("ppc").contains("ssd"));

    ResultHandle tight;
    REQUIRE(etica_partition(dtext.c_str(), 1, 1, &tight.h, err, sizeof err) == ETICA_OK);
    json tdoc = tight.doc();
    CHECK(tdoc.at("vms")[0].at("dram_blocks").get<uint64_t>() <= 1);
    CHECK(tdoc.at("vms")[0].at("ssd_blocks").get<uint64_t>() <= 1);

    ResultHandle bad;
    CHECK(etica_partition("{not json", 4, 4, &bad.h, err, sizeof err) == ETICA_E_CONFIG);
    CHECK(std::string(err).find("parse error") != std::string::npos);
    CHECK(etica_partition(R"({"schema":"etica-mrc/1"})", 4, 4, &bad.h, err, sizeof err) ==
          ETICA_E_CONFIG);
    CHECK(std::string(err).find("etica-demands/1") != std::string::npos);
}

TEST_CASE("single-level runs match the reference simulation") {
    TempDir dir;
    Rng rng(77);
    std::string text;
    std::vector<BlockAccess> mirror;
    for (int i = 0; i < 400; ++i) {
        uint64_t block = rng() % 50;
        bool read = (rng() % 10) < 6;
        text += std::to_string(i) + (read ? ",R," : ",W,") + std::to_string(block * 4096) +
                ",4096\n";
        mirror.push_back({BlockRef{0, block}, read ? Op::Read : Op::Write});
    }
    auto path = dir.write_file("r.csv", text);
    TraceHandle trace;
    open_single(path, trace);

    const std::pair<const char*, WritePolicy> policies[] = {
        {"wb", WritePolicy::WriteBack},    {"wt", WritePolicy::WriteThrough},
        {"ro", WritePolicy::ReadOnly},     {"wo", WritePolicy::WriteOnly},
        {"wbwo", WritePolicy::WriteOnly},
    };
    for (const auto& [name, policy] : policies) {
        CAPTURE(name);
        ResultHandle res;
        char err[256] = {};
        REQUIRE(etica_single_level(trace.h, name, 16, 4, 4096, nullptr, &res.h, err,
                                   sizeof err) == ETICA_OK);
        json doc = res.doc();
        CHECK(doc.at("schema") == "etica-single/1");

        SingleLevelStats expect = simulate_policy(mirror, policy, 16, 4);
        const json& t = doc.at("totals");
        CHECK(t.at("requests") == 400);
        CHECK(t.at("block_accesses") == expect.accesses);
        CHECK(t.at("reads") == expect.reads);
        CHECK(t.at("writes") == expect.writes);
        CHECK(t.at("read_hits") == expect.read_hits);
        CHECK(t.at("read_misses") == expect.read_misses);
        CHECK(t.at("write_hits") == expect.write_hits);
        CHECK(t.at("write_misses") == expect.write_misses);
        CHECK(t.at("cache_device_writes") == expect.cache_device_writes);
        CHECK(t.at("backing_reads") == expect.backing_reads);
        CHECK(t.at("backing_writes") == expect.backing_writes);
        CHECK(t.at("evictions") == expect.evictions);
        CHECK(t.at("dirty_evictions") == expect.dirty_evictions);
    }

    ResultHandle res;
    char err[256] = {};
    CHECK(etica_single_level(trace.h, "zz", 16, 4, 4096, nullptr, &res.h, err, sizeof err) ==
          ETICA_E_INVALID);
    CHECK(std::string(err).find("unknown policy") != std::string::npos);
    CHECK(etica_single_level(trace.h, "wb", 0, 4, 4096, nullptr, &res.h, err, sizeof err) ==
          ETICA_E_CONFIG);
    CHECK(etica_single_level(trace.h, "wb", 16, 4, 4096, "{\"ssd_erase_us\":1}", &res.h, err,
                             sizeof err) == ETICA_E_CONFIG);
    CHECK(std::string(err).find("unknown latency field") != std::string::npos);
}

TEST_CASE("a latency override flows into the reported mean") {
    TempDir dir;
    auto path = dir.write_file("t.csv", "0,R,0,4096\n1,R,0,4096\n");
    TraceHandle trace;
    open_single(path, trace);

    // One miss (backing read + fill write), one hit (cache read).
    const char* lat = R"({"dram_read_us":1,"dram_write_us":1,"ssd_read_us":10,
                          "ssd_write_us":20,"hdd_read_us":1000,"hdd_write_us":1000})";
    ResultHandle res;
    char err[256] = {};
    REQUIRE(etica_single_level(trace.h, "wb", 4, 4, 4096, lat, &res.h, err, sizeof err) ==
            ETICA_OK);
    json doc = res.doc();
    CHECK(doc.at("totals").at("mean_latency_us") ==
          doctest::Approx(((1000.0 + 20.0) + 10.0) / 2.0));
}

TEST_CASE("simulate runs a config document end to end") {
    TempDir dir;
    auto path = dir.write_file("t.csv",
                               "0,R,4096,4096\n"
                               "1,R,8192,4096\n"
                               "2,R,12288,4096\n"
                               "3,W,4096,4096\n"
                               "4,W,16384,4096\n"
                               "5,R,4096,4096\n"
                               "6,R,16384,4096\n");
    std::string cfg = fixture_config(path, /*queues=*/false);

    ResultHandle res;
    char err[256] = {};
    REQUIRE(etica_simulate(cfg.c_str(), 1, &res.h, err, sizeof err) == ETICA_OK);
    json doc = res.doc();
    CHECK(doc.at("schema") == "etica-report/1");
    CHECK(doc.at("mode") == "npe");
    CHECK(doc.at("config").at("dram_capacity_blocks") == 3);
    const json& totals = doc.at("totals");
    CHECK(totals.at("requests") == 7);
    CHECK(totals.at("ssd_writes_total") == 2);
    CHECK(totals.at("disk_reads") == 3);
    CHECK(totals.at("promotions") == 0);

    REQUIRE(doc.at("metadata").at("trace_provenance").size() == 1);
    CHECK(doc.at("metadata").at("trace_provenance")[0].at("records") == 7);
    CHECK(doc.at("metadata").at("trace_provenance")[0].at("path") == path);

    const char* csv = etica_result_csv(res.h);
    REQUIRE(csv != nullptr);
    CHECK(std::string(csv).find("vm,interval,") == 0);

    const char* pop = etica_result_popularity_csv(res.h);
    REQUIRE(pop != nullptr);
    CHECK(std::string(pop).find("vm_id,block,score,num_acc") == 0);

    ResultHandle quiet;
    REQUIRE(etica_simulate(cfg.c_str(), 0, &quiet.h, err, sizeof err) == ETICA_OK);
    CHECK(etica_result_popularity_csv(quiet.h) == nullptr);

    etica_result_free(nullptr);  // must be a no-op
    CHECK(etica_result_json(nullptr) == nullptr);
    CHECK(etica_result_csv(nullptr) == nullptr);
}

TEST_CASE("simulate maps failures onto the status taxonomy") {
    char err[256] = {};
    etica_result* out = nullptr;

    CHECK(etica_simulate("{oops", 0, &out, err, sizeof err) == ETICA_E_CONFIG);
    CHECK(std::string(err).find("parse error") != std::string::npos);

    CHECK(etica_simulate("{}", 0, &out, err, sizeof err) == ETICA_E_CONFIG);
    CHECK(std::string(err).find("schema") != std::string::npos);

    std::string cfg = fixture_config("/nonexistent/trace.csv", false);
    CHECK(etica_simulate(cfg.c_str(), 0, &out, err, sizeof err) == ETICA_E_TRACE);
    CHECK(std::string(err).find("trace not found") != std::string::npos);

    CHECK(etica_simulate(nullptr, 0, &out, err, sizeof err) == ETICA_E_INVALID);
    CHECK(etica_simulate(cfg.c_str(), 0, nullptr, err, sizeof err) == ETICA_E_INVALID);
}

TEST_CASE("compare joins one labeled row per config") {
    TempDir dir;
    auto path = dir.write_file("t.csv",
                               "0,R,4096,4096\n"
                               "1,R,8192,4096\n"
                               "2,R,12288,4096\n"
                               "3,W,4096,4096\n"
                               "4,W,16384,4096\n"
                               "5,R,4096,4096\n"
                               "6,R,16384,4096\n");
    std::string full = fixture_config(path, true);
    std::string npe = fixture_config(path, false);
    const char* cfgs[] = {full.c_str(), npe.c_str()};
    const char* labels[] = {"with-queues", "without-queues"};

    ResultHandle res;
    char err[256] = {};
    REQUIRE(etica_compare(cfgs, labels, 2, &res.h, err, sizeof err) == ETICA_OK);
    json doc = res.doc();
    CHECK(doc.at("schema") == "etica-compare/1");
    REQUIRE(doc.at("members").size() == 2);
    CHECK(doc.at("members")[0].at("label") == "with-queues");
    CHECK(doc.at("members")[0].at("mode") == "full");
    CHECK(doc.at("members")[0].at("ssd_writes") == 0);  // write misses bypass the SSD
    CHECK(doc.at("members")[1].at("label") == "without-queues");
    CHECK(doc.at("members")[1].at("mode") == "npe");
    CHECK(doc.at("members")[1].at("ssd_writes") == 2);

    auto other = dir.write_file("other.csv", "0,R,0,4096\n");
    std::string mismatched = fixture_config(other, false);
    const char* bad[] = {full.c_str(), mismatched.c_str()};
    ResultHandle rej;  // rejections null the out pointer, so keep them off res
    CHECK(etica_compare(bad, labels, 2, &rej.h, err, sizeof err) == ETICA_E_CONFIG);
    CHECK(std::string(err).find("identical trace sets") != std::string::npos);

    CHECK(etica_compare(nullptr, labels, 0, &rej.h, err, sizeof err) == ETICA_E_INVALID);
}

TEST_CASE("an interval sweep reruns the engine per promotion cadence") {
    TempDir dir;
    Rng rng(5);
    std::string text;
    for (int i = 0; i < 300; ++i) {
        uint64_t block = rng() % 40;
        bool read = (rng() % 10) < 9;
        text += std::to_string(i) + (read ? ",R," : ",W,") + std::to_string(block * 4096) +
                ",4096\n";
    }
    auto path = dir.write_file("t.csv", text);
    json cfg = {
        {"schema", "etica-config/1"},
        {"dram_capacity_blocks", 4},
        {"ssd_capacity_blocks", 16},
        {"partitioning", false},
        {"traces", json::array({{{"path", path},
                                 {"vm", 0},
                                 {"initial_dram_blocks", 4},
                                 {"initial_ssd_blocks", 16}}})},
    };
    std::string cfg_text = cfg.dump();
    const uint64_t intervals[] = {30, 300};

    ResultHandle res;
    char err[256] = {};
    REQUIRE(etica_interval_sweep(cfg_text.c_str(), intervals, 2, &res.h, err, sizeof err) ==
            ETICA_OK);
    json doc = res.doc();
    CHECK(doc.at("schema") == "etica-sweep/1");
    REQUIRE(doc.at("rows").size() == 2);
    double best_write_norm = 0.0, best_perf_norm = 0.0;
    for (size_t i = 0; i < 2; ++i) {
        const json& row = doc.at("rows")[i];
        CHECK(row.at("promo_interval") == intervals[i]);
        CHECK(row.at("ssd_writes_norm").get<double>() <= 1.0);
        CHECK(row.at("performance_norm").get<double>() <= 1.0);
        best_write_norm = std::max(best_write_norm, row.at("ssd_writes_norm").get<double>());
        best_perf_norm = std::max(best_perf_norm, row.at("performance_norm").get<double>());
    }
    CHECK(best_write_norm == doctest::Approx(1.0));  // columns are max-normalized
    CHECK(best_perf_norm == doctest::Approx(1.0));

    const uint64_t zero[] = {0};
    ResultHandle rej;  // rejections null the out pointer, so keep them off res
    CHECK(etica_interval_sweep(cfg_text.c_str(), zero, 1, &rej.h, err, sizeof err) ==
          ETICA_E_CONFIG);
    CHECK(std::string(err).find("positive") != std::string::npos);

    json single = {{"schema", "etica-config/1"}, {"engine", "single-level"},
                   {"policy", "wb"},             {"capacity_blocks", 8},
                   {"traces", json::array({{{"path", path}, {"vm", 0}}})}};
    std::string single_text = single.dump();
    CHECK(etica_interval_sweep(single_text.c_str(), intervals, 2, &rej.h, err, sizeof err) ==
          ETICA_E_CONFIG);
    CHECK(std::string(err).find("two-level engine") != std::string::npos);

    CHECK(etica_interval_sweep(cfg_text.c_str(), nullptr, 0, &rej.h, err, sizeof err) ==
          ETICA_E_INVALID);
}
