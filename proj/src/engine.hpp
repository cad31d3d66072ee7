#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "config.hpp"
#include "metrics.hpp"
#include "popularity.hpp"
#include "reuse.hpp"
#include "types.hpp"

namespace etica {

// Set-associative LRU pool with a dynamically resizable allocation, used for
// both levels of every VM's partition. Zero allocation is valid and simply
// holds nothing; callers check before inserting.
class CacheLevel {
public:
    explicit CacheLevel(uint64_t associativity);

    struct Resident {
        uint64_t block = 0;
        bool dirty = false;
        uint64_t seq = 0;  // recency stamp, larger = more recent
    };

    uint64_t allocation() const { return allocation_; }
    uint64_t occupancy() const { return index_.size(); }
    bool contains(uint64_t block) const;
    bool is_dirty(uint64_t block) const;
    void touch(uint64_t block);
    void mark_dirty(uint64_t block);

    // Inserts, evicting the target set's LRU entry when the set is full.
    // Allocation must be positive. Returns the victim, if any.
    std::optional<Resident> insert(uint64_t block, bool dirty);

    // Inserts only into leftover space: fails (without side effects) when the
    // target set is at capacity.
    bool insert_if_free(uint64_t block, bool dirty);

    bool erase(uint64_t block);

    std::vector<Resident> residents() const;  // ascending block number
    uint64_t dirty_scan() const;              // direct walk over the entries

    // Changes the allocation and redistributes residents over the new set
    // layout, most recent first. Entries that no longer fit are returned for
    // the caller to flush; they are evicted least-recent-last per set.
    std::vector<Resident> set_allocation(uint64_t blocks);

private:
    struct Entry {
        bool dirty = false;
        uint64_t seq = 0;
        size_t set = 0;
        std::list<uint64_t>::iterator pos;  // into sets_[set], front = MRU
    };
    size_t set_of(uint64_t block) const { return block % sets_.size(); }
    uint64_t set_cap(size_t s) const;
    void place(uint64_t block, bool dirty, uint64_t seq);

    uint64_t associativity_;
    uint64_t allocation_ = 0;
    uint64_t next_seq_ = 1;
    std::vector<std::list<uint64_t>> sets_;
    std::unordered_map<uint64_t, Entry> index_;
};

// The two-level engine: a read-only DRAM level over a write-back/write-only
// SSD level, with popularity-driven promotion/eviction and optional periodic
// repartitioning across VMs. Drive it one request at a time, then call
// finish() exactly once for the assembled report.
class EticaEngine {
public:
    explicit EticaEngine(const RunConfig& cfg, bool verify_each_step = false);
    ~EticaEngine();
    EticaEngine(EticaEngine&&) noexcept;
    EticaEngine& operator=(EticaEngine&&) noexcept;

    void dispatch(uint32_t vm_id, const std::vector<BlockAccess>& blocks);
    RunReport finish();

    // Introspection for tests and tools.
    bool dram_resident(BlockRef b) const;
    bool ssd_resident(BlockRef b) const;
    bool ssd_dirty(BlockRef b) const;
    uint64_t dirty_dram_blocks() const;  // must stay zero
    uint64_t dram_allocation(uint32_t vm_id) const;
    uint64_t ssd_allocation(uint32_t vm_id) const;
    const PopularityTable* popularity(uint32_t vm_id) const;
    std::vector<uint32_t> vm_ids() const;  // ascending
    uint64_t request_count() const;

private:
    struct VmState;
    VmState& vm_state(uint32_t vm_id);
    const VmState* find_vm(uint32_t vm_id) const;
    void serve_read(VmState& vm, uint64_t block);
    void serve_write(VmState& vm, uint64_t block);
    void promo_boundary(VmState& vm);
    void close_interval(VmState& vm);
    void resize_boundary();
    void process_departures();
    void depart(uint32_t vm_id);
    void verify_state() const;

    RunConfig cfg_;
    bool verify_each_step_ = false;
    uint64_t global_requests_ = 0;
    size_t next_departure_ = 0;
    std::vector<Departure> departures_;  // sorted by after_requests
    std::map<uint32_t, std::unique_ptr<VmState>> vms_;
    bool finished_ = false;
};

// Convenience driver: merge-ready block streams in, report out.
RunReport run_engine(const RunConfig& cfg,
                     const std::vector<TraceRecord>& timeline,
                     bool verify_each_step = false);

}  // namespace etica
