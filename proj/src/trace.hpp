#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "types.hpp"

namespace etica {

enum class TraceFormat : uint8_t { Msr, Simple };

// Side-channel facts about a parsed file, kept for report provenance only.
struct TraceFileMeta {
    std::string path;       // as given by the caller ("<stream>" for in-memory input)
    std::string hostname;   // msr column 2 of the first record, empty for simple
    std::string disk;       // msr column 3 of the first record, empty for simple
    uint64_t records = 0;
};

struct ParsedTrace {
    std::vector<TraceRecord> records;
    TraceFileMeta meta;
};

// Parses one CSV trace stream.
//
// msr lines:    Timestamp,Hostname,DiskNumber,Type,Offset,Size,ResponseTime
//               Type is Read/Write (case-insensitive); ResponseTime is parsed
//               for validity and discarded (latency is modeled, not replayed).
// simple lines: timestamp,op,offset,length with op R or W.
//
// Empty lines are skipped; anything else malformed raises TraceError carrying
// the 1-based line number. An empty stream yields an empty record list.
// Every record is stamped with vm_id.
ParsedTrace parse_trace(std::istream& in, TraceFormat format, uint32_t vm_id,
                        const std::string& name = "<stream>");

// File-level loader; transparently inflates files whose name ends in ".gz".
// Raises TraceError "trace not found: <path>" when the file cannot be opened.
ParsedTrace load_trace_file(const std::string& path, TraceFormat format, uint32_t vm_id);

// Picks a format from the first non-empty line: 7 comma-separated fields with a
// Read/Write type column = msr, 4 fields = simple. Raises TraceError otherwise.
TraceFormat detect_format(const std::string& path);

// Writes records back out in the given format. msr provenance columns that the
// records do not carry (hostname, disk, response time) serialize as host,0,0;
// re-parsing reproduces every record field exactly.
std::string serialize_records(const std::vector<TraceRecord>& records, TraceFormat format);

// Splits one request into the consecutive blocks it touches, in ascending
// block order, each tagged with the request's op.
std::vector<BlockAccess> to_blocks(const TraceRecord& r, uint64_t block_size);

// K-way merge of per-file record sequences into one timeline. Each input must
// be timestamp-sorted (TraceError names the stream and offending index if
// not); ties are broken by (vm_id, stream order, in-stream order) so the
// result is reproducible bit for bit.
std::vector<TraceRecord> merge_streams(const std::vector<std::vector<TraceRecord>>& streams);

bool is_power_of_two(uint64_t v);

}  // namespace etica
