#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "types.hpp"

namespace etica {

struct BlockPopularity {
    double score = 0.0;
    uint64_t num_acc = 0;
};

// One access's score contribution: exp(-pod / cache_size) for a finite
// distance, zero for a cold access (the limit of the expression).
double popularity_contribution(std::optional<uint64_t> pod, uint64_t cache_size_blocks);

// Accumulated per-block scores. Deterministically ordered so dumps and queue
// selection never depend on hash iteration.
class PopularityTable {
public:
    double update(BlockRef b, std::optional<uint64_t> pod, uint64_t cache_size_blocks);

    // Ages every score by the given factor in [0, 1]: 0 keeps history forever,
    // 1 forgets it completely.
    void decay(double factor);

    double score(BlockRef b) const;
    const BlockPopularity* find(BlockRef b) const;
    size_t tracked_blocks() const { return entries_.size(); }
    const std::map<BlockRef, BlockPopularity>& entries() const { return entries_; }
    void erase_vm(uint32_t vm_id);

private:
    std::map<BlockRef, BlockPopularity> entries_;
};

struct QueueSet {
    std::vector<BlockRef> eviction;   // least popular SSD residents, ascending score
    std::vector<BlockRef> promotion;  // most popular accessed disk blocks, descending score
};

// Picks the bottom `fraction` of SSD residents and the top `fraction` of
// disk-resident blocks seen this interval (sizes rounded up, ties broken
// toward the lower block number). Blocks missing from the table score zero.
QueueSet select_queues(const PopularityTable& table, const std::vector<BlockRef>& ssd_resident,
                       const std::vector<BlockRef>& disk_resident_accessed,
                       double fraction = 0.05);

}  // namespace etica
