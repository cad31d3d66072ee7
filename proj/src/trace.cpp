#include "trace.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <queue>
#include <sstream>

namespace etica {

namespace {

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string_view> split_fields(const std::string& line) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.emplace_back(line.data() + start, line.size() - start);
            break;
        }
        out.emplace_back(line.data() + start, comma - start);
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void fail(const std::string& name, uint64_t lineno, const std::string& what) {
    throw TraceError(name + ":" + std::to_string(lineno) + ": " + what);
}

uint64_t parse_u64(std::string_view field, const std::string& name, uint64_t lineno,
                   const char* what) {
    uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        fail(name, lineno, std::string("bad ") + what + " '" + std::string(field) + "'");
    return value;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

Op parse_msr_op(std::string_view field, const std::string& name, uint64_t lineno) {
    if (iequals(field, "Read")) return Op::Read;
    if (iequals(field, "Write")) return Op::Write;
    fail(name, lineno, "unknown op '" + std::string(field) + "'");
}

Op parse_simple_op(std::string_view field, const std::string& name, uint64_t lineno) {
    if (field == "R") return Op::Read;
    if (field == "W") return Op::Write;
    fail(name, lineno, "unknown op '" + std::string(field) + "'");
}

void check_record(const TraceRecord& r, const std::string& name, uint64_t lineno) {
    if (r.length == 0) fail(name, lineno, "zero-length request");
    if (r.offset + r.length < r.offset) fail(name, lineno, "offset + length overflows");
}

// Reads a whole file into memory, inflating when the name ends in ".gz".
// Traces at simulation scale are a few hundred MB at most, so buffering the
// text is simpler and faster than a streaming inflate wrapper.
std::string slurp(const std::string& path) {
    if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
        gzFile gz = gzopen(path.c_str(), "rb");
        if (!gz) throw TraceError("trace not found: " + path);
        std::string out;
        char buf[1 << 16];
        int n = 0;
        while ((n = gzread(gz, buf, sizeof(buf))) > 0) out.append(buf, static_cast<size_t>(n));
        bool bad = n < 0;
        gzclose(gz);
        if (bad) throw TraceError("gzip read error in " + path);
        return out;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TraceError("trace not found: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

ParsedTrace parse_trace(std::istream& in, TraceFormat format, uint32_t vm_id,
                        const std::string& name) {
    ParsedTrace result;
    result.meta.path = name;
    std::string line;
    uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_fields(line);
        TraceRecord r;
        r.vm_id = vm_id;
        if (format == TraceFormat::Msr) {
            if (fields.size() != 7)
                fail(name, lineno, "expected 7 fields, got " + std::to_string(fields.size()));
            r.timestamp = parse_u64(fields[0], name, lineno, "timestamp");
            r.op = parse_msr_op(fields[3], name, lineno);
            r.offset = parse_u64(fields[4], name, lineno, "offset");
            r.length = parse_u64(fields[5], name, lineno, "size");
            parse_u64(fields[6], name, lineno, "response time");  // validated, not used
            if (result.records.empty()) {
                result.meta.hostname = std::string(fields[1]);
                result.meta.disk = std::string(fields[2]);
            }
        } else {
            if (fields.size() != 4)
                fail(name, lineno, "expected 4 fields, got " + std::to_string(fields.size()));
            r.timestamp = parse_u64(fields[0], name, lineno, "timestamp");
            r.op = parse_simple_op(fields[1], name, lineno);
            r.offset = parse_u64(fields[2], name, lineno, "offset");
            r.length = parse_u64(fields[3], name, lineno, "length");
        }
        check_record(r, name, lineno);
        result.records.push_back(r);
    }
    result.meta.records = result.records.size();
    return result;
}

ParsedTrace load_trace_file(const std::string& path, TraceFormat format, uint32_t vm_id) {
    std::string text = slurp(path);
    std::istringstream in(text);
    return parse_trace(in, format, vm_id, path);
}

TraceFormat detect_format(const std::string& path) {
    std::string text = slurp(path);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() == 7) return TraceFormat::Msr;
        if (fields.size() == 4) return TraceFormat::Simple;
        throw TraceError(path + ": cannot detect trace format (line has " +
                         std::to_string(fields.size()) + " fields, expected 7 or 4)");
    }
    // An empty file parses identically either way.
    return TraceFormat::Simple;
}

std::string serialize_records(const std::vector<TraceRecord>& records, TraceFormat format) {
    std::ostringstream out;
    for (const auto& r : records) {
        if (format == TraceFormat::Msr) {
            out << r.timestamp << ",host,0," << (r.op == Op::Read ? "Read" : "Write") << ','
                << r.offset << ',' << r.length << ",0\n";
        } else {
            out << r.timestamp << ',' << op_name(r.op) << ',' << r.offset << ',' << r.length
                << '\n';
        }
    }
    return out.str();
}

std::vector<BlockAccess> to_blocks(const TraceRecord& r, uint64_t block_size) {
    uint64_t first = r.offset / block_size;
    uint64_t last = (r.offset + r.length - 1) / block_size;
    std::vector<BlockAccess> out;
    out.reserve(static_cast<size_t>(last - first + 1));
    for (uint64_t b = first; b <= last; ++b)
        out.push_back(BlockAccess{BlockRef{r.vm_id, b}, r.op});
    return out;
}

std::vector<TraceRecord> merge_streams(const std::vector<std::vector<TraceRecord>>& streams) {
    for (size_t s = 0; s < streams.size(); ++s) {
        for (size_t i = 1; i < streams[s].size(); ++i) {
            if (streams[s][i].timestamp < streams[s][i - 1].timestamp)
                throw TraceError("stream " + std::to_string(s) +
                                 " is not timestamp-sorted at index " + std::to_string(i));
        }
    }

    // Heap keyed so equal timestamps come out ordered by vm, then by stream,
    // then by position within the stream.
    using Key = std::tuple<uint64_t, uint32_t, size_t, size_t>;  // ts, vm, stream, index
    auto greater = [](const Key& a, const Key& b) { return a > b; };
    std::priority_queue<Key, std::vector<Key>, decltype(greater)> heap(greater);

    size_t total = 0;
    for (size_t s = 0; s < streams.size(); ++s) {
        total += streams[s].size();
        if (!streams[s].empty())
            heap.emplace(streams[s][0].timestamp, streams[s][0].vm_id, s, 0);
    }

    std::vector<TraceRecord> out;
    out.reserve(total);
    while (!heap.empty()) {
        auto [ts, vm, s, i] = heap.top();
        heap.pop();
        out.push_back(streams[s][i]);
        if (i + 1 < streams[s].size())
            heap.emplace(streams[s][i + 1].timestamp, streams[s][i + 1].vm_id, s, i + 1);
    }
    return out;
}

bool is_power_of_two(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

}  // namespace etica
