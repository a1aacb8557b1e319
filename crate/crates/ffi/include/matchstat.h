/* C interface to the matchstat library. */

#pragma once

/* Generated with cbindgen:0.26.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum MsStatus {
  MS_STATUS_OK = 0,
  MS_STATUS_NULL_POINTER = 1,
  MS_STATUS_INVALID_ARGUMENT = 2,
  MS_STATUS_CAP_EXCEEDED = 3,
  MS_STATUS_IO_ERROR = 4,
  MS_STATUS_INTERNAL_ERROR = 5,
} MsStatus;

/**
 * Opaque graph handle.
 */
typedef struct MsGraph MsGraph;

/**
 * Library version as a static NUL-terminated string.
 */
const char *ms_version(void);

/**
 * Message for the most recent error on this thread, or NULL. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ms_last_error(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by a matchstat function, or
 * NULL, and must not be used afterwards.
 */
void ms_string_free(char *s);

/**
 * Create an empty graph on n >= 1 vertices.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MsStatus ms_graph_empty(uint32_t n, struct MsGraph **out);

/**
 * Create the complete graph K_n.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MsStatus ms_graph_complete(uint32_t n, struct MsGraph **out);

/**
 * Add the edge {u, v}.
 *
 * # Safety
 * `g` must be a live handle from this library.
 */
enum MsStatus ms_graph_add_edge(struct MsGraph *g, uint32_t u, uint32_t v);

/**
 * Parse the text format ("n m" header, then "u v" lines).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid.
 */
enum MsStatus ms_graph_parse(const char *text, struct MsGraph **out);

/**
 * Serialize a graph into the text format.
 *
 * # Safety
 * `g` must be a live handle; `out` must be valid. Free the result with
 * [`ms_string_free`].
 */
enum MsStatus ms_graph_to_text(const struct MsGraph *g, char **out);

/**
 * Vertex count.
 *
 * # Safety
 * `g` must be a live handle; `out` must be valid.
 */
enum MsStatus ms_graph_n(const struct MsGraph *g, uint32_t *out);

/**
 * Edge count.
 *
 * # Safety
 * `g` must be a live handle; `out` must be valid.
 */
enum MsStatus ms_graph_edge_count(const struct MsGraph *g, uint64_t *out);

/**
 * Release a graph handle.
 *
 * # Safety
 * `g` must be a handle from this library, not yet freed, or NULL.
 */
void ms_graph_free(struct MsGraph *g);

/**
 * Sample G(n, p) deterministically from (seed, stream).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MsStatus ms_gnp_sample(uint32_t n,
                            double p,
                            uint64_t seed,
                            uint64_t stream,
                            struct MsGraph **out);

/**
 * Sample G(n, m) deterministically from (seed, stream).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MsStatus ms_gnm_sample(uint32_t n,
                            uint64_t m,
                            uint64_t seed,
                            uint64_t stream,
                            struct MsGraph **out);

/**
 * Exact matching-count vector as a JSON array of decimal strings
 * ["m_0", "m_1", ...]; n_cap bounds the polynomial kernel.
 *
 * # Safety
 * `g` must be a live handle; `out` must be valid. Free the result with
 * [`ms_string_free`].
 */
enum MsStatus ms_count_matchings_json(const struct MsGraph *g, uint32_t n_cap, char **out);

/**
 * Exact number of l-matchings (l <= 4, any graph size) as a decimal
 * string.
 *
 * # Safety
 * `g` must be a live handle; `out` must be valid. Free the result with
 * [`ms_string_free`].
 */
enum MsStatus ms_count_l_matchings(const struct MsGraph *g, uint64_t l, char **out);

/**
 * Exact number of ordered pairs of l-matchings of K_n sharing exactly i
 * edges, as a decimal string.
 *
 * # Safety
 * `out` must be a valid pointer. Free the result with
 * [`ms_string_free`].
 */
enum MsStatus ms_pair_count(uint64_t n, uint64_t l, uint64_t i, char **out);

/**
 * ln of the mean l-matching count under G(n,p).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MsStatus ms_gnp_mean_ln(uint32_t n, uint32_t l, double p, double *out);

/**
 * ln of the asymptotic standard deviation sigma_bar.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MsStatus ms_sigma_bar_ln(uint32_t n, uint32_t l, double p, double *out);

/**
 * Log-normal scale beta = l sqrt((1-p)/(p C(n,2))).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MsStatus ms_beta(uint32_t n, uint32_t l, double p, double *out);
