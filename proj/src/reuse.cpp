#include "reuse.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace etica {

const char* metric_name(DistanceMetric m) {
    switch (m) {
        case DistanceMetric::Trd: return "trd";
        case DistanceMetric::Urd: return "urd";
        case DistanceMetric::PodRo: return "pod-ro";
        case DistanceMetric::PodWbwo: return "pod-wbwo";
        case DistanceMetric::PodWb: return "pod-wb";
    }
    return "?";
}

std::optional<DistanceMetric> metric_from_name(const std::string& name) {
    if (name == "trd") return DistanceMetric::Trd;
    if (name == "urd") return DistanceMetric::Urd;
    if (name == "pod-ro") return DistanceMetric::PodRo;
    if (name == "pod-wbwo") return DistanceMetric::PodWbwo;
    if (name == "pod-wb") return DistanceMetric::PodWb;
    return std::nullopt;
}

namespace {

// Fenwick tree over access positions holding at most one marker per block.
// A marker at position p means "some block's most recent qualifying touch was
// at p", so the number of distinct qualifying blocks touched in a position
// range equals the number of markers in it. Grows by doubling; the raw marker
// array is kept so the tree can be rebuilt in O(n) on growth.
class MarkerBit {
public:
    void set(size_t pos) {
        ensure(pos + 1);
        if (!mark_[pos]) {
            mark_[pos] = 1;
            update(pos, +1);
        }
    }

    void clear(size_t pos) {
        if (pos < cap_ && mark_[pos]) {
            mark_[pos] = 0;
            update(pos, -1);
        }
    }

    // Markers in [lo, hi], inclusive; empty ranges count zero. Positions only
    // enter the tree when marked, so everything at or past cap_ is unmarked
    // and a range starting there holds nothing.
    uint64_t count(size_t lo, size_t hi) const {
        if (cap_ == 0 || hi < lo || lo >= cap_) return 0;
        hi = std::min(hi, cap_ - 1);
        int64_t total = prefix(hi) - (lo > 0 ? prefix(lo - 1) : 0);
        return static_cast<uint64_t>(total);
    }

private:
    void update(size_t pos, int delta) {
        for (size_t i = pos + 1; i <= cap_; i += i & (~i + 1)) tree_[i] += delta;
    }

    int64_t prefix(size_t pos) const {
        int64_t sum = 0;
        for (size_t i = pos + 1; i > 0; i -= i & (~i + 1)) sum += tree_[i];
        return sum;
    }

    void ensure(size_t n) {
        if (n <= cap_) return;
        size_t grown = std::max<size_t>(cap_ ? cap_ * 2 : 1024, n);
        mark_.resize(grown, 0);
        tree_.assign(grown + 1, 0);
        cap_ = grown;
        // O(n) rebuild: place raw values then push partial sums upward.
        for (size_t i = 1; i <= cap_; ++i) tree_[i] += mark_[i - 1];
        for (size_t i = 1; i <= cap_; ++i) {
            size_t parent = i + (i & (~i + 1));
            if (parent <= cap_) tree_[parent] += tree_[i];
        }
    }

    std::vector<int64_t> tree_;
    std::vector<uint8_t> mark_;
    size_t cap_ = 0;
};

enum class MarkRule : uint8_t { AllAccesses, WritesOnly, ReadsOnly };

MarkRule mark_rule_for(DistanceMetric m) {
    switch (m) {
        case DistanceMetric::Trd:
        case DistanceMetric::Urd:
        case DistanceMetric::PodWb:
            return MarkRule::AllAccesses;
        case DistanceMetric::PodWbwo:
            return MarkRule::WritesOnly;
        case DistanceMetric::PodRo:
            return MarkRule::ReadsOnly;
    }
    return MarkRule::AllAccesses;
}

}  // namespace

struct DistanceTracker::Impl {
    struct BlockState {
        size_t last_access = 0;
        size_t marker = 0;       // position of this block's marker, if marked
        bool has_marker = false;
        bool has_write = false;
        Op last_op = Op::Read;
        bool seen = false;
    };

    DistanceMetric metric;
    MarkRule rule;
    MarkerBit bit;
    std::unordered_map<uint64_t, BlockState> blocks;
    size_t position = 0;

    explicit Impl(DistanceMetric m) : metric(m), rule(mark_rule_for(m)) {}
};

DistanceTracker::DistanceTracker(DistanceMetric metric) : impl_(new Impl(metric)) {}
DistanceTracker::~DistanceTracker() = default;
DistanceTracker::DistanceTracker(DistanceTracker&&) noexcept = default;
DistanceTracker& DistanceTracker::operator=(DistanceTracker&&) noexcept = default;

DistanceMetric DistanceTracker::metric() const { return impl_->metric; }

DistanceTracker::Observation DistanceTracker::observe(uint64_t block, Op op) {
    Impl& im = *impl_;
    const size_t t = im.position++;
    auto& st = im.blocks[block];

    Observation obs;
    switch (im.metric) {
        case DistanceMetric::Trd:
            obs.qualifies = true;
            break;
        case DistanceMetric::Urd:
        case DistanceMetric::PodWb:
        case DistanceMetric::PodRo:
        case DistanceMetric::PodWbwo:
            obs.qualifies = (op == Op::Read);
            break;
    }

    if (obs.qualifies) {
        bool anchored = false;
        switch (im.metric) {
            case DistanceMetric::Trd:
            case DistanceMetric::Urd:
            case DistanceMetric::PodWb:
                anchored = st.seen;
                break;
            case DistanceMetric::PodRo:
                anchored = st.seen && st.last_op == Op::Read;
                break;
            case DistanceMetric::PodWbwo:
                anchored = st.has_write;
                break;
        }
        if (anchored) {
            // Anchored implies a prior access exists, so t >= 1 here. The
            // block's own marker sits at or before its last access and can
            // never fall inside the open interval being counted.
            obs.distance = im.bit.count(st.last_access + 1, t - 1);
        }
    }

    bool move_marker = im.rule == MarkRule::AllAccesses ||
                       (im.rule == MarkRule::WritesOnly && op == Op::Write) ||
                       (im.rule == MarkRule::ReadsOnly && op == Op::Read);
    if (move_marker) {
        if (st.has_marker) im.bit.clear(st.marker);
        im.bit.set(t);
        st.marker = t;
        st.has_marker = true;
    }
    st.last_access = t;
    st.last_op = op;
    st.seen = true;
    if (op == Op::Write) st.has_write = true;
    return obs;
}

DistanceProfile compute_distances(const std::vector<BlockAccess>& accesses,
                                  DistanceMetric metric) {
    DistanceProfile profile;
    profile.metric = metric;
    DistanceTracker tracker(metric);
    for (size_t i = 0; i < accesses.size(); ++i) {
        auto obs = tracker.observe(accesses[i].block.block, accesses[i].op);
        if (!obs.qualifies) continue;
        profile.accesses.push_back(AccessDistance{i, accesses[i].block, obs.distance});
        if (obs.distance) {
            ++profile.histogram[*obs.distance];
            if (!profile.max_finite || *obs.distance > *profile.max_finite)
                profile.max_finite = *obs.distance;
        } else {
            ++profile.infinite_count;
        }
    }
    return profile;
}

std::optional<uint64_t> max_pod(const DistanceProfile& profile) { return profile.max_finite; }

Mrc::Mrc(const DistanceProfile& profile, uint64_t total_requests) {
    if (total_requests == 0)
        throw std::invalid_argument("hit-ratio curve needs a positive request total");
    if (total_requests < profile.accesses.size())
        throw std::invalid_argument("request total smaller than qualifying access count");
    total_ = total_requests;
    uint64_t running = 0;
    for (const auto& [dist, count] : profile.histogram) {  // std::map: ascending
        running += count;
        breakpoints_.push_back(dist + 1);
        cumulative_hits_.push_back(running);
    }
}

uint64_t Mrc::hits_below(uint64_t cache_blocks) const {
    // Hits are accesses with distance < cache_blocks, i.e. breakpoint <= cache_blocks.
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), cache_blocks);
    if (it == breakpoints_.begin()) return 0;
    return cumulative_hits_[static_cast<size_t>(it - breakpoints_.begin()) - 1];
}

double Mrc::hit_ratio(uint64_t cache_blocks) const {
    if (total_ == 0) return 0.0;
    return static_cast<double>(hits_below(cache_blocks)) / static_cast<double>(total_);
}

Mrc build_mrc(const DistanceProfile& profile, uint64_t total_requests) {
    return Mrc(profile, total_requests);
}

}  // namespace etica
