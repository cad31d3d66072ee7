#pragma once

// Shared helpers for the test suite: deterministic generators, scratch files,
// and brute-force reference implementations ("oracles") that restate the
// intended semantics as directly as possible. The oracles deliberately avoid
// the data structures used by the library so that agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "reuse.hpp"
#include "types.hpp"

namespace etica::test {

// ---------------------------------------------------------------------------
// scratch files

class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        for (int attempt = 0; attempt < 100; ++attempt) {
            auto candidate = base / ("etica_test_" + std::to_string(std::random_device{}()));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("could not create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path path() const { return path_; }

    std::string write_file(const std::string& name, const std::string& content) const {
        auto p = path_ / name;
        std::ofstream out(p, std::ios::binary);
        out << content;
        out.close();
        return p.string();
    }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

// ---------------------------------------------------------------------------
// deterministic random workloads

using Rng = std::mt19937_64;

inline std::vector<BlockAccess> random_accesses(Rng& rng, size_t count, uint64_t num_blocks,
                                                double read_prob, uint32_t vm = 0) {
    std::vector<BlockAccess> out;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        uint64_t block = rng() % num_blocks;
        Op op = (rng() % 1000) < static_cast<uint64_t>(read_prob * 1000) ? Op::Read : Op::Write;
        out.push_back(BlockAccess{BlockRef{vm, block}, op});
    }
    return out;
}

// Zipf-like sampler via inverse CDF over a fixed table; independent of any
// standard-library distribution so results are identical on every platform.
class ZipfSampler {
public:
    ZipfSampler(uint64_t num_items, double exponent) : cdf_(num_items) {
        double sum = 0.0;
        for (uint64_t i = 0; i < num_items; ++i) {
            sum += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
            cdf_[i] = sum;
        }
        for (auto& v : cdf_) v /= sum;
    }
    uint64_t sample(Rng& rng) const {
        double u = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        return static_cast<uint64_t>(it - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
};

// ---------------------------------------------------------------------------
// reuse-distance oracle: O(N^2) backward re-scan straight off the definition

inline bool oracle_qualifies(const std::vector<BlockAccess>& a, size_t t, DistanceMetric m) {
    const auto& cur = a[t];
    switch (m) {
        case DistanceMetric::Trd:
            return true;
        case DistanceMetric::Urd:
        case DistanceMetric::PodWb:
        case DistanceMetric::PodRo:
        case DistanceMetric::PodWbwo:
            return cur.op == Op::Read;
    }
    return false;
}

// Distance of access t, or nullopt when there is no qualifying prior access.
inline std::optional<uint64_t> oracle_distance(const std::vector<BlockAccess>& a, size_t t,
                                               DistanceMetric m) {
    const auto& cur = a[t];
    // Most recent prior access to the same block, any type.
    std::optional<size_t> prev;
    for (size_t i = t; i-- > 0;) {
        if (a[i].block == cur.block) {
            prev = i;
            break;
        }
    }
    switch (m) {
        case DistanceMetric::Trd:
        case DistanceMetric::Urd:
        case DistanceMetric::PodWb:
            if (!prev) return std::nullopt;
            break;
        case DistanceMetric::PodRo:
            // Only read-after-read pairs: a preceding write means the cache
            // copy (if any) was invalidated.
            if (!prev || a[*prev].op != Op::Read) return std::nullopt;
            break;
        case DistanceMetric::PodWbwo: {
            // Served only when the block was written at some point before;
            // re-reads of the written block pair gap by gap.
            bool written_before = false;
            for (size_t i = 0; i < t; ++i)
                if (a[i].block == cur.block && a[i].op == Op::Write) written_before = true;
            if (!written_before) return std::nullopt;
            break;
        }
    }
    std::set<BlockRef> distinct;
    for (size_t i = *prev + 1; i < t; ++i) {
        bool counts = false;
        switch (m) {
            case DistanceMetric::Trd:
            case DistanceMetric::Urd:
            case DistanceMetric::PodWb:
                counts = true;
                break;
            case DistanceMetric::PodWbwo:
                counts = a[i].op == Op::Write;
                break;
            case DistanceMetric::PodRo:
                counts = a[i].op == Op::Read;
                break;
        }
        if (counts) distinct.insert(a[i].block);
    }
    return static_cast<uint64_t>(distinct.size());
}

struct OracleProfile {
    std::vector<std::pair<size_t, std::optional<uint64_t>>> entries;  // (index, distance)
    std::optional<uint64_t> max_finite;
};

inline OracleProfile oracle_distances(const std::vector<BlockAccess>& a, DistanceMetric m) {
    OracleProfile p;
    for (size_t t = 0; t < a.size(); ++t) {
        if (!oracle_qualifies(a, t, m)) continue;
        auto d = oracle_distance(a, t, m);
        p.entries.emplace_back(t, d);
        if (d && (!p.max_finite || *d > *p.max_finite)) p.max_finite = *d;
    }
    return p;
}

// Direct-counting hit-ratio oracle: share of qualifying accesses with finite
// distance strictly below the cache size.
inline double oracle_hit_ratio(const OracleProfile& p, uint64_t total, uint64_t cache_blocks) {
    uint64_t hits = 0;
    for (const auto& [idx, d] : p.entries)
        if (d && *d < cache_blocks) ++hits;
    return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace etica::test
