#include "engine.hpp"

#include <algorithm>

#include "logging.hpp"
#include "partition.hpp"
#include "trace.hpp"

namespace etica {

// ---------------------------------------------------------------------------
// CacheLevel

CacheLevel::CacheLevel(uint64_t associativity) : associativity_(associativity) {
    if (associativity_ == 0) throw ConfigError("associativity must be positive");
    sets_.resize(1);
}

uint64_t CacheLevel::set_cap(size_t s) const {
    uint64_t n = sets_.size();
    uint64_t base = allocation_ / n;
    uint64_t extra = allocation_ % n;
    return base + (s < extra ? 1 : 0);
}

bool CacheLevel::contains(uint64_t block) const { return index_.count(block) != 0; }

bool CacheLevel::is_dirty(uint64_t block) const {
    auto it = index_.find(block);
    return it != index_.end() && it->second.dirty;
}

void CacheLevel::touch(uint64_t block) {
    auto it = index_.find(block);
    if (it == index_.end()) throw InternalError("touch of a non-resident block");
    auto& set = sets_[it->second.set];
    set.splice(set.begin(), set, it->second.pos);
    it->second.seq = next_seq_++;
}

void CacheLevel::mark_dirty(uint64_t block) {
    auto it = index_.find(block);
    if (it == index_.end()) throw InternalError("dirty mark on a non-resident block");
    it->second.dirty = true;
}

std::optional<CacheLevel::Resident> CacheLevel::insert(uint64_t block, bool dirty) {
    if (allocation_ == 0) throw InternalError("insert into a zero-allocation level");
    if (contains(block)) throw InternalError("insert of an already-resident block");
    size_t s = set_of(block);
    std::optional<Resident> victim;
    if (sets_[s].size() >= set_cap(s)) {
        uint64_t victim_block = sets_[s].back();
        auto vit = index_.find(victim_block);
        victim = Resident{victim_block, vit->second.dirty, vit->second.seq};
        sets_[s].pop_back();
        index_.erase(vit);
    }
    sets_[s].push_front(block);
    index_[block] = Entry{dirty, next_seq_++, s, sets_[s].begin()};
    return victim;
}

bool CacheLevel::insert_if_free(uint64_t block, bool dirty) {
    if (allocation_ == 0) return false;
    if (contains(block)) throw InternalError("free-space insert of an already-resident block");
    size_t s = set_of(block);
    if (sets_[s].size() >= set_cap(s)) return false;
    sets_[s].push_front(block);
    index_[block] = Entry{dirty, next_seq_++, s, sets_[s].begin()};
    return true;
}

bool CacheLevel::erase(uint64_t block) {
    auto it = index_.find(block);
    if (it == index_.end()) return false;
    sets_[it->second.set].erase(it->second.pos);
    index_.erase(it);
    return true;
}

uint64_t CacheLevel::dirty_scan() const {
    uint64_t n = 0;
    for (const auto& [block, e] : index_) {
        (void)block;
        if (e.dirty) ++n;
    }
    return n;
}

std::vector<CacheLevel::Resident> CacheLevel::residents() const {
    std::vector<Resident> out;
    out.reserve(index_.size());
    for (const auto& [block, e] : index_) out.push_back(Resident{block, e.dirty, e.seq});
    std::sort(out.begin(), out.end(),
              [](const Resident& a, const Resident& b) { return a.block < b.block; });
    return out;
}

std::vector<CacheLevel::Resident> CacheLevel::set_allocation(uint64_t blocks) {
    allocation_ = blocks;
    uint64_t num_sets = std::max<uint64_t>(1, blocks / associativity_);

    auto entries = residents();
    std::sort(entries.begin(), entries.end(),
              [](const Resident& a, const Resident& b) { return a.seq > b.seq; });

    sets_.assign(num_sets, {});
    index_.clear();
    std::vector<Resident> overflow;
    for (const auto& r : entries) {
        size_t s = r.block % num_sets;
        if (sets_[s].size() >= set_cap(s)) {
            overflow.push_back(r);
            continue;
        }
        sets_[s].push_back(r.block);  // iterating most recent first keeps LRU order
        index_[r.block] = Entry{r.dirty, r.seq, s, std::prev(sets_[s].end())};
    }
    return overflow;
}

// ---------------------------------------------------------------------------
// EticaEngine

struct EticaEngine::VmState {
    VmState(uint32_t id, uint64_t associativity)
        : vm_id(id),
          dram(associativity),
          ssd(associativity),
          pod_tracker(DistanceMetric::PodWbwo) {}

    uint32_t vm_id;
    CacheLevel dram;
    CacheLevel ssd;
    PopularityTable pops;
    DistanceTracker pod_tracker;
    // Distances observed since the last promotion boundary, applied to the
    // popularity table in batch at the boundary.
    std::vector<std::pair<uint64_t, std::optional<uint64_t>>> pending_pods;
    std::set<uint64_t> window_accessed;     // since last promotion boundary
    std::vector<BlockAccess> resize_window;  // since last repartition
    uint64_t requests_seen = 0;
    uint64_t interval_index = 0;
    Counters current;
    Counters totals;
    std::vector<IntervalReport> intervals;
    bool departed = false;
};

EticaEngine::EticaEngine(const RunConfig& cfg, bool verify_each_step)
    : cfg_(cfg), verify_each_step_(verify_each_step) {
    cfg_.validate();
    if (cfg_.engine != EngineKind::Etica)
        throw ConfigError("two-level engine started with a single-level config");

    departures_ = cfg_.departures;
    std::stable_sort(departures_.begin(), departures_.end(),
                     [](const Departure& a, const Departure& b) {
                         return a.after_requests < b.after_requests;
                     });

    std::map<uint32_t, std::pair<uint64_t, uint64_t>> init;
    for (const auto& t : cfg_.traces) {
        auto& alloc = init[t.vm_id];
        alloc.first += t.initial_dram_blocks;
        alloc.second += t.initial_ssd_blocks;
    }
    for (const auto& [id, alloc] : init) {
        auto vm = std::make_unique<VmState>(id, cfg_.associativity);
        vm->dram.set_allocation(alloc.first);
        vm->ssd.set_allocation(alloc.second);
        vms_.emplace(id, std::move(vm));
    }
}

EticaEngine::~EticaEngine() = default;
EticaEngine::EticaEngine(EticaEngine&&) noexcept = default;
EticaEngine& EticaEngine::operator=(EticaEngine&&) noexcept = default;

EticaEngine::VmState& EticaEngine::vm_state(uint32_t vm_id) {
    auto it = vms_.find(vm_id);
    if (it != vms_.end()) return *it->second;
    // A VM first seen mid-timeline arrives with nothing and competes for
    // capacity at the next repartition.
    log_info("vm " + std::to_string(vm_id) + " arrived at request " +
             std::to_string(global_requests_));
    auto vm = std::make_unique<VmState>(vm_id, cfg_.associativity);
    auto [pos, ok] = vms_.emplace(vm_id, std::move(vm));
    (void)ok;
    return *pos->second;
}

const EticaEngine::VmState* EticaEngine::find_vm(uint32_t vm_id) const {
    auto it = vms_.find(vm_id);
    return it == vms_.end() ? nullptr : it->second.get();
}

void EticaEngine::dispatch(uint32_t vm_id, const std::vector<BlockAccess>& blocks) {
    if (finished_) throw InternalError("dispatch after finish");
    process_departures();
    VmState& vm = vm_state(vm_id);
    ++global_requests_;
    ++vm.requests_seen;
    ++vm.current.requests;

    for (const auto& a : blocks) {
        ++vm.current.block_accesses;
        if (a.op == Op::Read) ++vm.current.reads;
        else ++vm.current.writes;

        if (!vm.departed) {
            auto obs = vm.pod_tracker.observe(a.block.block, a.op);
            vm.pending_pods.emplace_back(a.block.block,
                                         obs.qualifies ? obs.distance : std::nullopt);
            vm.window_accessed.insert(a.block.block);
            if (cfg_.partitioning)
                vm.resize_window.push_back(BlockAccess{BlockRef{vm_id, a.block.block}, a.op});
        }

        if (a.op == Op::Read) serve_read(vm, a.block.block);
        else serve_write(vm, a.block.block);
        if (verify_each_step_) verify_state();
    }

    if (vm.requests_seen % cfg_.promo_interval_requests == 0) promo_boundary(vm);
    if (cfg_.partitioning && global_requests_ % cfg_.resize_interval_requests == 0)
        resize_boundary();
}

void EticaEngine::serve_read(VmState& vm, uint64_t block) {
    if (vm.dram.contains(block)) {
        vm.dram.touch(block);
        vm.current.record_path(ServicePath::DramHit);
        return;
    }
    if (vm.ssd.contains(block)) {
        // Serve from the SSD and pull a copy up into DRAM; the SSD keeps its
        // copy, so nothing is written to the SSD here.
        vm.ssd.touch(block);
        if (vm.dram.allocation() > 0) {
            auto victim = vm.dram.insert(block, /*dirty=*/false);
            if (victim && victim->dirty)
                throw InternalError("dirty block surfaced in the read-only DRAM level");
        }
        vm.current.record_path(ServicePath::SsdReadHit);
        return;
    }
    // Disk read, cached in DRAM only — a read miss never writes the SSD.
    ++vm.current.disk_reads;
    if (vm.dram.allocation() > 0) {
        auto victim = vm.dram.insert(block, /*dirty=*/false);
        if (victim && victim->dirty)
            throw InternalError("dirty block surfaced in the read-only DRAM level");
    }
    vm.current.record_path(ServicePath::ReadMiss);
}

void EticaEngine::serve_write(VmState& vm, uint64_t block) {
    // Writes bypass DRAM; any cached copy there is now stale.
    vm.dram.erase(block);
    if (vm.ssd.contains(block)) {
        vm.ssd.touch(block);
        vm.ssd.mark_dirty(block);
        ++vm.current.ssd_writes_total;
        vm.current.record_path(ServicePath::SsdWriteHit);
        return;
    }
    if (!cfg_.promotion_eviction && vm.ssd.allocation() > 0) {
        // With background promotion disabled the SSD level itself absorbs new
        // writes (write-back allocation); a displaced dirty victim is flushed.
        auto victim = vm.ssd.insert(block, /*dirty=*/true);
        if (victim && victim->dirty) ++vm.current.disk_writes;
        ++vm.current.ssd_writes_total;
        vm.current.record_path(ServicePath::SsdWriteHit);
        return;
    }
    // Cold writes go straight to disk; promotion may bring the block into the
    // SSD later if it proves popular.
    ++vm.current.disk_writes;
    vm.current.record_path(ServicePath::WriteMiss);
}

void EticaEngine::promo_boundary(VmState& vm) {
    if (!vm.departed) {
        vm.pops.decay(cfg_.popularity_decay);
        uint64_t denom = std::max<uint64_t>(1, vm.ssd.allocation());
        for (const auto& [block, pod] : vm.pending_pods)
            vm.pops.update(BlockRef{vm.vm_id, block}, pod, denom);
        vm.pending_pods.clear();

        if (cfg_.promotion_eviction) {
            std::vector<BlockRef> ssd_refs;
            for (const auto& r : vm.ssd.residents())
                ssd_refs.push_back(BlockRef{vm.vm_id, r.block});
            std::vector<BlockRef> disk_refs;
            for (uint64_t b : vm.window_accessed)
                if (!vm.ssd.contains(b)) disk_refs.push_back(BlockRef{vm.vm_id, b});

            auto queues =
                select_queues(vm.pops, ssd_refs, disk_refs, cfg_.queue_fraction);
            for (const auto& b : queues.eviction) {
                if (vm.ssd.is_dirty(b.block)) ++vm.current.disk_writes;
                vm.ssd.erase(b.block);
                ++vm.current.evictions;
            }
            for (const auto& b : queues.promotion) {
                // Promotions fill leftover space only; they never displace a
                // resident block, so a full set just skips the candidate.
                if (vm.ssd.insert_if_free(b.block, /*dirty=*/false)) {
                    ++vm.current.disk_reads;
                    ++vm.current.ssd_writes_total;
                    ++vm.current.promotions;
                }
            }
        }
        vm.window_accessed.clear();
    }
    close_interval(vm);
}

void EticaEngine::close_interval(VmState& vm) {
    IntervalReport iv;
    iv.interval = vm.interval_index++;
    iv.counters = vm.current;
    iv.dram_blocks = vm.dram.allocation();
    iv.ssd_blocks = vm.ssd.allocation();
    vm.intervals.push_back(std::move(iv));
    vm.totals += vm.current;
    vm.current = Counters{};
}

namespace {

// Popularity-ordered shrink: release the least popular residents first.
std::vector<CacheLevel::Resident> pick_shrink_victims(const CacheLevel& level,
                                                      const PopularityTable& pops,
                                                      uint32_t vm_id, uint64_t excess) {
    auto residents = level.residents();
    std::stable_sort(residents.begin(), residents.end(),
                     [&](const CacheLevel::Resident& a, const CacheLevel::Resident& b) {
                         double sa = pops.score(BlockRef{vm_id, a.block});
                         double sb = pops.score(BlockRef{vm_id, b.block});
                         if (sa != sb) return sa < sb;
                         return a.block < b.block;
                     });
    residents.resize(std::min<size_t>(residents.size(), excess));
    return residents;
}

}  // namespace

void EticaEngine::resize_boundary() {
    std::vector<VmDemand> demands;
    for (const auto& [id, vm] : vms_) {
        if (vm->departed) continue;
        VmDemand d;
        d.vm_id = id;
        auto ro = compute_distances(vm->resize_window, DistanceMetric::PodRo);
        auto wbwo = compute_distances(vm->resize_window, DistanceMetric::PodWbwo);
        d.dram_demand = demand_from_pod(max_pod(ro));
        d.ssd_demand = demand_from_pod(max_pod(wbwo));
        uint64_t window_total = vm->resize_window.size();
        if (d.dram_demand > 0) d.mrc_dram = build_mrc(ro, window_total);
        if (d.ssd_demand > 0) d.mrc_ssd = build_mrc(wbwo, window_total);
        demands.push_back(std::move(d));
    }

    auto plan = optimize_partition(demands, cfg_.dram_capacity_blocks, cfg_.ssd_capacity_blocks);
    for (const auto& alloc : plan.vms) {
        VmState& vm = *vms_.at(alloc.vm_id);

        if (vm.dram.occupancy() > alloc.dram_blocks) {
            auto victims = pick_shrink_victims(vm.dram, vm.pops, vm.vm_id,
                                               vm.dram.occupancy() - alloc.dram_blocks);
            for (const auto& r : victims) {
                if (r.dirty) throw InternalError("dirty block surfaced in the DRAM level");
                vm.dram.erase(r.block);
            }
        }
        for (const auto& r : vm.dram.set_allocation(alloc.dram_blocks))
            if (r.dirty) throw InternalError("dirty block surfaced in the DRAM level");

        if (vm.ssd.occupancy() > alloc.ssd_blocks) {
            auto victims = pick_shrink_victims(vm.ssd, vm.pops, vm.vm_id,
                                               vm.ssd.occupancy() - alloc.ssd_blocks);
            for (const auto& r : victims) {
                if (r.dirty) ++vm.current.disk_writes;
                vm.ssd.erase(r.block);
            }
        }
        for (const auto& r : vm.ssd.set_allocation(alloc.ssd_blocks))
            if (r.dirty) ++vm.current.disk_writes;
    }
    for (auto& [id, vm] : vms_) vm->resize_window.clear();
}

void EticaEngine::process_departures() {
    while (next_departure_ < departures_.size() &&
           departures_[next_departure_].after_requests <= global_requests_) {
        depart(departures_[next_departure_].vm_id);
        ++next_departure_;
    }
}

void EticaEngine::depart(uint32_t vm_id) {
    auto it = vms_.find(vm_id);
    if (it == vms_.end()) return;
    VmState& vm = *it->second;
    if (vm.departed) return;
    log_info("vm " + std::to_string(vm_id) + " departed at request " +
             std::to_string(global_requests_));
    for (const auto& r : vm.ssd.set_allocation(0))
        if (r.dirty) ++vm.current.disk_writes;
    for (const auto& r : vm.dram.set_allocation(0))
        if (r.dirty) throw InternalError("dirty block surfaced in the DRAM level");
    vm.pops = PopularityTable{};
    vm.pending_pods.clear();
    vm.window_accessed.clear();
    vm.resize_window.clear();
    vm.departed = true;
}

void EticaEngine::verify_state() const {
    for (const auto& [id, vm] : vms_) {
        if (vm->dram.dirty_scan() != 0)
            throw InternalError("dirty block resident in DRAM of vm " + std::to_string(id));
        if (vm->dram.occupancy() > vm->dram.allocation() ||
            vm->ssd.occupancy() > vm->ssd.allocation())
            throw InternalError("occupancy exceeds allocation in vm " + std::to_string(id));
    }
}

RunReport EticaEngine::finish() {
    if (finished_) throw InternalError("finish called twice");
    process_departures();
    finished_ = true;

    RunReport report;
    report.promotion_eviction = cfg_.promotion_eviction;
    for (auto& [id, vm] : vms_) {
        // Account pending distance observations so the metadata overhead
        // reflects every tracked block.
        uint64_t denom = std::max<uint64_t>(1, vm->ssd.allocation());
        for (const auto& [block, pod] : vm->pending_pods)
            vm->pops.update(BlockRef{id, block}, pod, denom);
        vm->pending_pods.clear();

        if (vm->current.any() || vm->intervals.empty()) close_interval(*vm);
        VmReport vr;
        vr.vm_id = id;
        vr.totals = vm->totals;
        vr.intervals = vm->intervals;
        vr.final_dram_blocks = vm->dram.allocation();
        vr.final_ssd_blocks = vm->ssd.allocation();
        report.totals += vr.totals;
        report.vms.push_back(std::move(vr));
        report.popularity_tracked_blocks += vm->pops.tracked_blocks();
    }
    verify_report(report);
    return report;
}

bool EticaEngine::dram_resident(BlockRef b) const {
    const VmState* vm = find_vm(b.vm_id);
    return vm && vm->dram.contains(b.block);
}

bool EticaEngine::ssd_resident(BlockRef b) const {
    const VmState* vm = find_vm(b.vm_id);
    return vm && vm->ssd.contains(b.block);
}

bool EticaEngine::ssd_dirty(BlockRef b) const {
    const VmState* vm = find_vm(b.vm_id);
    return vm && vm->ssd.is_dirty(b.block);
}

uint64_t EticaEngine::dirty_dram_blocks() const {
    uint64_t n = 0;
    for (const auto& [id, vm] : vms_) {
        (void)id;
        n += vm->dram.dirty_scan();
    }
    return n;
}

uint64_t EticaEngine::dram_allocation(uint32_t vm_id) const {
    const VmState* vm = find_vm(vm_id);
    return vm ? vm->dram.allocation() : 0;
}

uint64_t EticaEngine::ssd_allocation(uint32_t vm_id) const {
    const VmState* vm = find_vm(vm_id);
    return vm ? vm->ssd.allocation() : 0;
}

const PopularityTable* EticaEngine::popularity(uint32_t vm_id) const {
    const VmState* vm = find_vm(vm_id);
    return vm ? &vm->pops : nullptr;
}

std::vector<uint32_t> EticaEngine::vm_ids() const {
    std::vector<uint32_t> ids;
    ids.reserve(vms_.size());
    for (const auto& [id, vm] : vms_) ids.push_back(id);
    return ids;
}

uint64_t EticaEngine::request_count() const { return global_requests_; }

RunReport run_engine(const RunConfig& cfg, const std::vector<TraceRecord>& timeline,
                     bool verify_each_step) {
    EticaEngine engine(cfg, verify_each_step);
    for (const auto& r : timeline) engine.dispatch(r.vm_id, to_blocks(r, cfg.block_size));
    return engine.finish();
}

}  // namespace etica
