/* Public C API for the etica two-level I/O cache simulator.
 *
 * Every entry point is thread-compatible (distinct handles may be used from
 * distinct threads; one handle must not be shared without external locking).
 * Functions that can fail return an etica_status and describe the failure in
 * the caller-supplied error buffer; out-parameters are set to NULL on
 * failure. All returned strings are UTF-8, NUL-terminated, and owned by the
 * handle they came from.
 */
#ifndef ETICA_H
#define ETICA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ETICA_API __declspec(dllexport)
#else
#define ETICA_API __attribute__((visibility("default")))
#endif

typedef enum etica_status {
    ETICA_OK = 0,
    ETICA_E_INVALID = 1,  /* bad arguments (null pointers, unknown names) */
    ETICA_E_CONFIG = 2,   /* malformed or inconsistent configuration/document */
    ETICA_E_TRACE = 3,    /* missing or malformed trace input */
    ETICA_E_INTERNAL = 4  /* broken internal invariant; indicates a bug */
} etica_status;

/* A parsed, merged set of trace files. */
typedef struct etica_trace etica_trace;

/* One analysis or simulation outcome: a JSON document plus its CSV
 * flattening, and for two-level simulations optionally a popularity dump. */
typedef struct etica_result etica_result;

/* Library version, e.g. "1.0.0". Static storage; never freed. */
ETICA_API const char* etica_version(void);

/* Opens `count` trace files and merges them into one timeline.
 *
 * paths:   array of `count` file paths; names ending in .gz are inflated.
 * vm_ids:  array of `count` VM owners, or NULL for all zero.
 * format:  "auto" (or NULL) to sniff each file, "msr" or "simple" to force.
 *
 * On success *out owns the traces; release with etica_trace_free. */
ETICA_API etica_status etica_trace_open(const char* const* paths, const uint32_t* vm_ids,
                                        size_t count, const char* format, etica_trace** out,
                                        char* errbuf, size_t errbuf_len);

ETICA_API void etica_trace_free(etica_trace* trace);

/* Total records across all files; 0 for NULL. */
ETICA_API uint64_t etica_trace_num_records(const etica_trace* trace);

/* Reuse-distance profile per VM under one metric: "trd", "urd", "pod-ro",
 * "pod-wbwo", or "pod-wb". Nonzero per_access additionally records every
 * qualifying access's distance. Result schema: etica-reuse/1. */
ETICA_API etica_status etica_reuse(const etica_trace* trace, const char* metric,
                                   uint64_t block_size, int per_access, etica_result** out,
                                   char* errbuf, size_t errbuf_len);

/* Hit-ratio curve per VM under one metric. Result schema: etica-mrc/1. */
ETICA_API etica_status etica_mrc(const etica_trace* trace, const char* metric,
                                 uint64_t block_size, etica_result** out, char* errbuf,
                                 size_t errbuf_len);

/* Per-VM cache demands for both levels (DRAM via pod-ro, SSD via pod-wbwo),
 * with the full histograms a later planning step needs. Result schema:
 * etica-demands/1. */
ETICA_API etica_status etica_demands(const etica_trace* trace, uint64_t block_size,
                                     etica_result** out, char* errbuf, size_t errbuf_len);

/* Optimizes the two capacity splits for a previously produced etica-demands/1
 * document (passed as its JSON text). Result schema: etica-plan/1. */
ETICA_API etica_status etica_partition(const char* demands_json, uint64_t dram_capacity_blocks,
                                       uint64_t ssd_capacity_blocks, etica_result** out,
                                       char* errbuf, size_t errbuf_len);

/* Runs a single-level baseline cache over the traces. policy is one of "wb",
 * "wt", "ro", "wo" (alias "wbwo"); latency_json optionally overrides the
 * device latency table (same object shape as in run configs, NULL for
 * defaults). Result schema: etica-single/1. */
ETICA_API etica_status etica_single_level(const etica_trace* trace, const char* policy,
                                          uint64_t capacity_blocks, uint64_t associativity,
                                          uint64_t block_size, const char* latency_json,
                                          etica_result** out, char* errbuf, size_t errbuf_len);

/* Runs the engine described by an etica-config/1 document (JSON text); trace
 * files are resolved from the document. dump_popularity nonzero additionally
 * captures the per-block popularity table (two-level engine only). Result
 * schema: etica-report/1, or etica-single/1 for single-level configs. */
ETICA_API etica_status etica_simulate(const char* config_json, int dump_popularity,
                                      etica_result** out, char* errbuf, size_t errbuf_len);

/* Runs every config (each an etica-config/1 JSON text) in parallel and joins
 * the headline numbers, one labeled row per config. All configs must name the
 * identical trace set. Result schema: etica-compare/1. */
ETICA_API etica_status etica_compare(const char* const* config_jsons, const char* const* labels,
                                     size_t count, etica_result** out, char* errbuf,
                                     size_t errbuf_len);

/* Re-runs one two-level config once per promotion-interval value and
 * tabulates SSD write traffic against performance. Result schema:
 * etica-sweep/1. */
ETICA_API etica_status etica_interval_sweep(const char* config_json, const uint64_t* intervals,
                                            size_t count, etica_result** out, char* errbuf,
                                            size_t errbuf_len);

/* Accessors; the strings live until etica_result_free. */
ETICA_API const char* etica_result_json(const etica_result* result);
ETICA_API const char* etica_result_csv(const etica_result* result);
/* NULL unless the run was asked to dump popularity. */
ETICA_API const char* etica_result_popularity_csv(const etica_result* result);

ETICA_API void etica_result_free(etica_result* result);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ETICA_H */
