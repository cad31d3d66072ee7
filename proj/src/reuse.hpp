#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "types.hpp"

namespace etica {

// Reuse-distance flavors. Trd counts every access against every intervening
// block. Urd keeps only read reuse (read-after-read and read-after-write).
// The Pod variants additionally honor a write policy: PodWbwo counts only
// written intervening blocks for reads of previously written blocks (a
// write-only cache never fills on read misses), PodRo counts only read
// intervening blocks for read-after-read pairs (writes bypass a read-only
// cache and invalidate it). PodWb is Urd under another name: a write-back
// cache fills on both kinds of access, so the policy filter is a no-op.
enum class DistanceMetric : uint8_t { Trd, Urd, PodRo, PodWbwo, PodWb };

const char* metric_name(DistanceMetric m);
std::optional<DistanceMetric> metric_from_name(const std::string& name);

struct AccessDistance {
    size_t index = 0;  // position in the input access sequence
    BlockRef block;
    std::optional<uint64_t> distance;  // empty = no qualifying prior access
};

struct DistanceProfile {
    DistanceMetric metric = DistanceMetric::Trd;
    std::vector<AccessDistance> accesses;      // qualifying accesses only, in order
    std::map<uint64_t, uint64_t> histogram;    // finite distance -> count
    uint64_t infinite_count = 0;
    std::optional<uint64_t> max_finite;
};

// Distance tracking is intentionally incremental so the two-level engine
// can ask for each access's distance as it dispatches it. The batch
// compute_distances below is a thin wrapper.
//
// For every access define its distance as the number of DISTINCT qualifying
// blocks touched strictly between it and the most recent prior access to the
// same block, or none when the metric's precondition fails (first touch, or a
// policy that would not have kept the block). A read of a written-then-reread
// block qualifies under PodWbwo gap by gap: each re-read pairs with the
// block's most recent prior access, so the profile's maximum reflects the
// widest gap a cache must bridge to serve the whole chain.
class DistanceTracker {
public:
    explicit DistanceTracker(DistanceMetric metric);
    ~DistanceTracker();
    DistanceTracker(DistanceTracker&&) noexcept;
    DistanceTracker& operator=(DistanceTracker&&) noexcept;

    // Feeds the next access; returns its distance when the access qualifies
    // under the metric, std::nullopt when it qualifies but is cold, and
    // "unqualified" via the bool in the pair.
    struct Observation {
        bool qualifies = false;
        std::optional<uint64_t> distance;
    };
    Observation observe(uint64_t block, Op op);

    DistanceMetric metric() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

DistanceProfile compute_distances(const std::vector<BlockAccess>& accesses,
                                  DistanceMetric metric);

std::optional<uint64_t> max_pod(const DistanceProfile& profile);

// Step-function hit-ratio curve over cache sizes in blocks: H(c) is the share
// of the denominator whose distance is finite and < c. Breakpoints sit at
// distance+1 for every distinct finite distance.
class Mrc {
public:
    Mrc() = default;
    Mrc(const DistanceProfile& profile, uint64_t total_requests);

    double hit_ratio(uint64_t cache_blocks) const;
    const std::vector<uint64_t>& breakpoints() const { return breakpoints_; }
    uint64_t total() const { return total_; }
    // Hit count with distance < c, for exact-arithmetic consumers.
    uint64_t hits_below(uint64_t cache_blocks) const;

private:
    std::vector<uint64_t> breakpoints_;        // sorted distinct finite distances + 1
    std::vector<uint64_t> cumulative_hits_;    // aligned with breakpoints_
    uint64_t total_ = 0;
};

Mrc build_mrc(const DistanceProfile& profile, uint64_t total_requests);

}  // namespace etica
