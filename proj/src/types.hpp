#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace etica {

enum class Op : uint8_t { Read, Write };

inline const char* op_name(Op op) { return op == Op::Read ? "R" : "W"; }

// One I/O request as it appears in a trace. Offsets and lengths are in bytes;
// timestamps are opaque monotone ticks used only for merge ordering.
struct TraceRecord {
    uint64_t timestamp = 0;
    uint32_t vm_id = 0;
    Op op = Op::Read;
    uint64_t offset = 0;
    uint64_t length = 0;
};

// A fixed-size logical block owned by one VM: the unit of caching, distance
// counting and popularity. Blocks of different VMs never alias.
struct BlockRef {
    uint32_t vm_id = 0;
    uint64_t block = 0;
    auto operator<=>(const BlockRef&) const = default;
};

struct BlockAccess {
    BlockRef block;
    Op op = Op::Read;
};

// Error taxonomy mirrored by the C API status codes and CLI exit codes:
// config = 2, trace = 3, internal consistency = 4.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class TraceError : public std::runtime_error {
public:
    explicit TraceError(const std::string& what) : std::runtime_error(what) {}
};

class InternalError : public std::runtime_error {
public:
    explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace etica
