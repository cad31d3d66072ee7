#include "partition.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "logging.hpp"

namespace etica {

uint64_t demand_from_pod(std::optional<uint64_t> pod_max) {
    return pod_max ? *pod_max + 1 : 0;
}

double ppc(const std::vector<std::pair<uint64_t, const Mrc*>>& terms) {
    double sum = 0.0;
    for (const auto& [alloc, mrc] : terms) {
        if (alloc == 0) throw std::invalid_argument("zero allocation inside the objective");
        sum += mrc->hit_ratio(alloc) / static_cast<double>(alloc);
    }
    return sum;
}

namespace {

// Demands are unbounded inputs, so totals clamp instead of wrapping; a
// clamped total is already far beyond any capacity, which is all the
// comparisons below care about.
uint64_t add_saturating(uint64_t a, uint64_t b) {
    constexpr uint64_t kMax = std::numeric_limits<uint64_t>::max();
    return b > kMax - a ? kMax : a + b;
}

// Candidate sizes worth trying for one VM: nothing at all, or one of the
// curve's breakpoints (H is flat between breakpoints and H/c falls within a
// plateau, so interior sizes are never optimal).
std::vector<uint64_t> candidate_sizes(const LevelDemand& vm) {
    std::vector<uint64_t> out{0};
    if (vm.demand == 0) return out;
    for (uint64_t bp : vm.mrc->breakpoints()) {
        uint64_t c = std::clamp<uint64_t>(bp, 1, vm.demand);
        if (c != out.back()) out.push_back(c);
    }
    return out;  // strictly increasing: breakpoints come sorted
}

double plan_ppc(const std::vector<LevelDemand>& vms, const std::vector<uint64_t>& alloc) {
    double sum = 0.0;
    for (size_t i = 0; i < vms.size(); ++i)
        if (alloc[i] > 0)
            sum += vms[i].mrc->hit_ratio(alloc[i]) / static_cast<double>(alloc[i]);
    return sum;
}

std::vector<uint64_t> solve_exhaustive(const std::vector<LevelDemand>& vms,
                                       const std::vector<std::vector<uint64_t>>& cand,
                                       uint64_t capacity) {
    const size_t n = vms.size();
    std::vector<size_t> idx(n, 0);
    std::vector<uint64_t> cur(n, 0), best(n, 0);
    double best_ppc = -1.0;
    bool done = false;
    while (!done) {
        uint64_t total = 0;
        for (size_t i = 0; i < n; ++i) {
            cur[i] = cand[i][idx[i]];
            total = add_saturating(total, cur[i]);
        }
        if (total <= capacity) {
            double value = plan_ppc(vms, cur);
            // Strict improvement only: enumeration is lexicographic ascending,
            // so the first maximizer seen is the lexicographically smallest.
            if (value > best_ppc) {
                best_ppc = value;
                best = cur;
            }
        }
        // Odometer, rightmost digit fastest.
        size_t d = n;
        while (d-- > 0) {
            if (++idx[d] < cand[d].size()) break;
            idx[d] = 0;
            if (d == 0) done = true;
        }
        if (n == 0) done = true;
    }
    return best;
}

std::vector<uint64_t> solve_hill_climb(const std::vector<LevelDemand>& vms,
                                       const std::vector<std::vector<uint64_t>>& cand,
                                       uint64_t capacity) {
    const size_t n = vms.size();
    uint64_t total_demand = 0;
    for (const auto& vm : vms) total_demand = add_saturating(total_demand, vm.demand);

    // Start from proportional scaling snapped down to a candidate, which is
    // feasible because snapping only shrinks.
    std::vector<size_t> idx(n, 0);
    uint64_t used = 0;
    for (size_t i = 0; i < n; ++i) {
        uint64_t share = total_demand == 0
                             ? 0
                             : static_cast<uint64_t>(static_cast<double>(vms[i].demand) /
                                                     static_cast<double>(total_demand) *
                                                     static_cast<double>(capacity));
        auto it = std::upper_bound(cand[i].begin(), cand[i].end(), share);
        idx[i] = static_cast<size_t>(it - cand[i].begin()) - 1;  // cand[i][0] == 0 <= share
        used += cand[i][idx[i]];
    }

    auto value_of = [&](const std::vector<size_t>& ix) {
        std::vector<uint64_t> a(n);
        for (size_t i = 0; i < n; ++i) a[i] = cand[i][ix[i]];
        return plan_ppc(vms, a);
    };

    double cur_value = value_of(idx);
    for (int step = 0; step < 100000; ++step) {
        double best_value = cur_value;
        size_t best_vm = n;
        int best_dir = 0;
        for (size_t i = 0; i < n; ++i) {
            for (int dir : {-1, +1}) {
                if (dir < 0 && idx[i] == 0) continue;
                if (dir > 0 && idx[i] + 1 >= cand[i].size()) continue;
                uint64_t delta_used =
                    add_saturating(used - cand[i][idx[i]], cand[i][idx[i] + dir]);
                if (delta_used > capacity) continue;
                idx[i] += dir;
                double v = value_of(idx);
                idx[i] -= dir;
                if (v > best_value) {
                    best_value = v;
                    best_vm = i;
                    best_dir = dir;
                }
            }
        }
        if (best_vm == n) break;
        used = used - cand[best_vm][idx[best_vm]] + cand[best_vm][idx[best_vm] + best_dir];
        idx[best_vm] += best_dir;
        cur_value = best_value;
    }

    std::vector<uint64_t> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = cand[i][idx[i]];
    return out;
}

}  // namespace

std::vector<uint64_t> optimize_level(const std::vector<LevelDemand>& vms, uint64_t capacity) {
    const size_t n = vms.size();
    std::vector<uint64_t> out(n, 0);
    uint64_t total_demand = 0;
    for (const auto& vm : vms) {
        if (vm.demand > 0 && vm.mrc == nullptr)
            throw std::invalid_argument("positive demand needs a hit-ratio curve");
        total_demand = add_saturating(total_demand, vm.demand);
    }
    if (total_demand <= capacity) {
        for (size_t i = 0; i < n; ++i) out[i] = vms[i].demand;
        return out;
    }

    std::vector<std::vector<uint64_t>> cand(n);
    double grid = 1.0;
    for (size_t i = 0; i < n; ++i) {
        cand[i] = candidate_sizes(vms[i]);
        grid *= static_cast<double>(cand[i].size());
    }
    if (grid <= 1e6) return solve_exhaustive(vms, cand, capacity);
    log_info("partition: candidate grid too large (" + std::to_string(grid) +
             "), using hill climb");
    return solve_hill_climb(vms, cand, capacity);
}

AllocationPlan optimize_partition(const std::vector<VmDemand>& demands, uint64_t dram_capacity,
                                  uint64_t ssd_capacity) {
    std::vector<VmDemand> sorted = demands;
    std::sort(sorted.begin(), sorted.end(),
              [](const VmDemand& a, const VmDemand& b) { return a.vm_id < b.vm_id; });

    std::vector<LevelDemand> dram, ssd;
    dram.reserve(sorted.size());
    ssd.reserve(sorted.size());
    for (const auto& vm : sorted) {
        dram.push_back({vm.dram_demand, &vm.mrc_dram});
        ssd.push_back({vm.ssd_demand, &vm.mrc_ssd});
    }
    auto dram_alloc = optimize_level(dram, dram_capacity);
    auto ssd_alloc = optimize_level(ssd, ssd_capacity);

    AllocationPlan plan;
    plan.vms.reserve(sorted.size());
    for (size_t i = 0; i < sorted.size(); ++i)
        plan.vms.push_back(VmAllocation{sorted[i].vm_id, dram_alloc[i], ssd_alloc[i]});
    return plan;
}

}  // namespace etica
