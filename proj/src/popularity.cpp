#include "popularity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace etica {

double popularity_contribution(std::optional<uint64_t> pod, uint64_t cache_size_blocks) {
    if (cache_size_blocks == 0)
        throw std::invalid_argument("popularity needs a positive cache size");
    if (!pod) return 0.0;
    return std::exp(-static_cast<double>(*pod) / static_cast<double>(cache_size_blocks));
}

double PopularityTable::update(BlockRef b, std::optional<uint64_t> pod,
                               uint64_t cache_size_blocks) {
    auto& entry = entries_[b];
    entry.score += popularity_contribution(pod, cache_size_blocks);
    entry.num_acc += 1;
    return entry.score;
}

void PopularityTable::decay(double factor) {
    if (factor < 0.0 || factor > 1.0)
        throw std::invalid_argument("decay factor must lie in [0, 1]");
    if (factor == 0.0) return;
    double keep = 1.0 - factor;
    for (auto& [b, entry] : entries_) entry.score *= keep;
}

double PopularityTable::score(BlockRef b) const {
    auto it = entries_.find(b);
    return it == entries_.end() ? 0.0 : it->second.score;
}

const BlockPopularity* PopularityTable::find(BlockRef b) const {
    auto it = entries_.find(b);
    return it == entries_.end() ? nullptr : &it->second;
}

void PopularityTable::erase_vm(uint32_t vm_id) {
    auto it = entries_.lower_bound(BlockRef{vm_id, 0});
    while (it != entries_.end() && it->first.vm_id == vm_id) it = entries_.erase(it);
}

namespace {

uint64_t queue_size(double fraction, size_t population) {
    if (population == 0) return 0;
    return static_cast<uint64_t>(std::ceil(fraction * static_cast<double>(population)));
}

}  // namespace

QueueSet select_queues(const PopularityTable& table, const std::vector<BlockRef>& ssd_resident,
                       const std::vector<BlockRef>& disk_resident_accessed, double fraction) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw std::invalid_argument("queue fraction must lie in (0, 1]");
    QueueSet out;

    auto scored = [&](const std::vector<BlockRef>& blocks) {
        std::vector<std::pair<double, BlockRef>> v;
        v.reserve(blocks.size());
        for (const auto& b : blocks) v.emplace_back(table.score(b), b);
        return v;
    };

    auto evict_pool = scored(ssd_resident);
    std::sort(evict_pool.begin(), evict_pool.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    uint64_t evict_n = queue_size(fraction, evict_pool.size());
    for (uint64_t i = 0; i < evict_n; ++i) out.eviction.push_back(evict_pool[i].second);

    auto promo_pool = scored(disk_resident_accessed);
    std::sort(promo_pool.begin(), promo_pool.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    uint64_t promo_n = queue_size(fraction, promo_pool.size());
    for (uint64_t i = 0; i < promo_n; ++i) out.promotion.push_back(promo_pool[i].second);

    return out;
}

}  // namespace etica
