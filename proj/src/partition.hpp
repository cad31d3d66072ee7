#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "reuse.hpp"
#include "types.hpp"

namespace etica {

// Block count a VM needs to serve every finite-distance access at a level: a
// distance of d needs d+1 resident blocks, and no finite distance means
// nothing is cacheable there.
uint64_t demand_from_pod(std::optional<uint64_t> pod_max);

struct VmDemand {
    uint32_t vm_id = 0;
    uint64_t dram_demand = 0;
    uint64_t ssd_demand = 0;
    Mrc mrc_dram;  // meaningful only when the matching demand is positive
    Mrc mrc_ssd;
};

struct VmAllocation {
    uint32_t vm_id = 0;
    uint64_t dram_blocks = 0;
    uint64_t ssd_blocks = 0;
};

struct AllocationPlan {
    std::vector<VmAllocation> vms;  // ascending vm_id
};

// Performance-per-cost objective: sum of hit-ratio-per-block over the given
// (allocation, curve) pairs. Callers exclude zeroallocations before calling;
// a zero inside the sum is a contract violation.
double ppc(const std::vector<std::pair<uint64_t, const Mrc*>>& terms);

struct LevelDemand {
    uint64_t demand = 0;
    const Mrc* mrc = nullptr;  // required when demand > 0
};

// Allocates one level's capacity. Uncontended capacity hands every VM its
// full demand; under contention the search space per VM is {0} plus the
// curve's breakpoints (the only sizes where the step function moves), solved
// exhaustively when the candidate grid is small enough and by deterministic
// steepest-ascent hill climbing otherwise. Ties prefer the lexicographically
// smallest allocation vector.
std::vector<uint64_t> optimize_level(const std::vector<LevelDemand>& vms, uint64_t capacity);

// Both levels, each on its own budget.
AllocationPlan optimize_partition(const std::vector<VmDemand>& demands, uint64_t dram_capacity,
                                  uint64_t ssd_capacity);

}  // namespace etica
