#pragma once

#include <cstdint>
#include <list>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "types.hpp"

namespace etica {

// Single-level cache write policies. WriteOnly is the write-path half of the
// combined scheme (writes handled as write-back, read misses never allocate);
// the CLI accepts both "wo" and "wbwo" for it.
enum class WritePolicy : uint8_t { WriteBack, WriteThrough, ReadOnly, WriteOnly };

const char* policy_name(WritePolicy p);
std::optional<WritePolicy> policy_from_name(const std::string& name);

struct SingleLevelStats {
    uint64_t accesses = 0;
    uint64_t reads = 0;
    uint64_t writes = 0;
    uint64_t read_hits = 0;
    uint64_t read_misses = 0;
    uint64_t write_hits = 0;   // block was resident (ReadOnly: found-then-invalidated)
    uint64_t write_misses = 0;
    uint64_t cache_device_writes = 0;  // fills + in-cache write updates
    uint64_t backing_reads = 0;
    uint64_t backing_writes = 0;
    uint64_t evictions = 0;
    uint64_t dirty_evictions = 0;  // subset of evictions; each adds a backing write
};

// Set-associative LRU cache over logical blocks, one policy per instance.
// Capacity is in blocks; sets are formed as capacity / associativity (at
// least one), so any capacity at or below the associativity runs fully
// associative.
class SingleLevelCache {
public:
    SingleLevelCache(WritePolicy policy, uint64_t capacity_blocks,
                     uint64_t associativity = 512);

    void access(uint64_t block, Op op);

    const SingleLevelStats& stats() const { return stats_; }
    WritePolicy policy() const { return policy_; }
    uint64_t capacity() const { return capacity_; }
    uint64_t resident_blocks() const;
    uint64_t dirty_blocks() const;
    bool contains(uint64_t block) const;

private:
    struct Entry {
        uint64_t block = 0;
        bool dirty = false;
    };
    struct Set {
        uint64_t cap = 0;
        std::list<Entry> lru;  // front = most recently used
        std::unordered_map<uint64_t, std::list<Entry>::iterator> index;
    };
    Set& set_for(uint64_t block);
    void fill(uint64_t block, bool dirty);

    WritePolicy policy_;
    uint64_t capacity_ = 0;
    std::vector<Set> sets_;
    SingleLevelStats stats_;
};

SingleLevelStats simulate_policy(const std::vector<BlockAccess>& accesses, WritePolicy policy,
                                 uint64_t capacity_blocks, uint64_t associativity = 512);

}  // namespace etica
