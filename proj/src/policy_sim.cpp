#include "policy_sim.hpp"

#include <algorithm>

namespace etica {

const char* policy_name(WritePolicy p) {
    switch (p) {
        case WritePolicy::WriteBack: return "wb";
        case WritePolicy::WriteThrough: return "wt";
        case WritePolicy::ReadOnly: return "ro";
        case WritePolicy::WriteOnly: return "wo";
    }
    return "?";
}

std::optional<WritePolicy> policy_from_name(const std::string& name) {
    if (name == "wb") return WritePolicy::WriteBack;
    if (name == "wt") return WritePolicy::WriteThrough;
    if (name == "ro") return WritePolicy::ReadOnly;
    if (name == "wo" || name == "wbwo") return WritePolicy::WriteOnly;
    return std::nullopt;
}

SingleLevelCache::SingleLevelCache(WritePolicy policy, uint64_t capacity_blocks,
                                   uint64_t associativity)
    : policy_(policy), capacity_(capacity_blocks) {
    if (capacity_blocks == 0) throw ConfigError("cache capacity must be positive");
    if (associativity == 0) throw ConfigError("associativity must be positive");
    uint64_t num_sets = std::max<uint64_t>(1, capacity_blocks / associativity);
    sets_.resize(num_sets);
    uint64_t base = capacity_blocks / num_sets;
    uint64_t extra = capacity_blocks % num_sets;
    for (uint64_t s = 0; s < num_sets; ++s) sets_[s].cap = base + (s < extra ? 1 : 0);
}

SingleLevelCache::Set& SingleLevelCache::set_for(uint64_t block) {
    return sets_[block % sets_.size()];
}

void SingleLevelCache::fill(uint64_t block, bool dirty) {
    Set& set = set_for(block);
    while (set.lru.size() >= set.cap) {
        const Entry& victim = set.lru.back();
        ++stats_.evictions;
        if (victim.dirty) {
            ++stats_.dirty_evictions;
            ++stats_.backing_writes;
        }
        set.index.erase(victim.block);
        set.lru.pop_back();
    }
    set.lru.push_front(Entry{block, dirty});
    set.index[block] = set.lru.begin();
    ++stats_.cache_device_writes;
}

void SingleLevelCache::access(uint64_t block, Op op) {
    ++stats_.accesses;
    Set& set = set_for(block);
    auto it = set.index.find(block);
    bool hit = it != set.index.end();

    if (op == Op::Read) {
        ++stats_.reads;
        if (hit) {
            ++stats_.read_hits;
            set.lru.splice(set.lru.begin(), set.lru, it->second);
        } else {
            ++stats_.read_misses;
            ++stats_.backing_reads;
            if (policy_ != WritePolicy::WriteOnly) fill(block, /*dirty=*/false);
        }
        return;
    }

    ++stats_.writes;
    switch (policy_) {
        case WritePolicy::WriteBack:
        case WritePolicy::WriteOnly:
            if (hit) {
                ++stats_.write_hits;
                it->second->dirty = true;
                set.lru.splice(set.lru.begin(), set.lru, it->second);
                ++stats_.cache_device_writes;
            } else {
                ++stats_.write_misses;
                fill(block, /*dirty=*/true);
            }
            break;
        case WritePolicy::WriteThrough:
            ++stats_.backing_writes;
            if (hit) {
                ++stats_.write_hits;
                it->second->dirty = false;
                set.lru.splice(set.lru.begin(), set.lru, it->second);
                ++stats_.cache_device_writes;
            } else {
                ++stats_.write_misses;
                fill(block, /*dirty=*/false);
            }
            break;
        case WritePolicy::ReadOnly:
            // Writes bypass the cache entirely; a resident copy goes stale and
            // must be dropped.
            ++stats_.backing_writes;
            if (hit) {
                ++stats_.write_hits;
                set.lru.erase(it->second);
                set.index.erase(it);
            } else {
                ++stats_.write_misses;
            }
            break;
    }
}

uint64_t SingleLevelCache::resident_blocks() const {
    uint64_t n = 0;
    for (const auto& s : sets_) n += s.lru.size();
    return n;
}

uint64_t SingleLevelCache::dirty_blocks() const {
    uint64_t n = 0;
    for (const auto& s : sets_)
        for (const auto& e : s.lru)
            if (e.dirty) ++n;
    return n;
}

bool SingleLevelCache::contains(uint64_t block) const {
    const Set& set = sets_[block % sets_.size()];
    return set.index.count(block) != 0;
}

SingleLevelStats simulate_policy(const std::vector<BlockAccess>& accesses, WritePolicy policy,
                                 uint64_t capacity_blocks, uint64_t associativity) {
    SingleLevelCache cache(policy, capacity_blocks, associativity);
    for (const auto& a : accesses) cache.access(a.block.block, a.op);
    return cache.stats();
}

}  // namespace etica
