#ifndef ARK_H
#define ARK_H

/* C interface to the Ark simulator. Every call returns an ARK_* code; on
 * failure a message is written to err (truncated to errlen, always NUL
 * terminated when errlen > 0). Strings handed out through char** must be
 * released with ark_string_free. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ARK_API __declspec(dllexport)
#else
#define ARK_API __attribute__((visibility("default")))
#endif

enum {
    ARK_OK = 0,
    ARK_ERR_CONFIG = 2,       /* malformed config or parameter out of range */
    ARK_ERR_UNKNOWN = 3,      /* unknown scenario name */
    ARK_ERR_ARGUMENT = 4,     /* null handle or pointer */
    ARK_ERR_INTERNAL = 5
};

typedef struct ark_ctx ark_ctx;

ARK_API ark_ctx* ark_ctx_new(void);
ARK_API void ark_ctx_free(ark_ctx* ctx);

/* JSON array of the built-in scenario names. */
ARK_API int ark_scenario_names(char** json_out, char* err, size_t errlen);

/* Runs one scenario. config_json may be NULL or an object with the tunables
 * (seed, k, t_u, t_e, t_b, t_r, epsilon, operator_fee, fee_rate, resets,
 * unsafe, ff, delta, collateral, users); a "scenario" key must match name.
 * *report_out receives the report JSON, *ok_out 1 iff every check passed. */
ARK_API int ark_run_scenario(ark_ctx* ctx, const char* name, const char* config_json, char** report_out,
                             int* ok_out, char* err, size_t errlen);

/* CSV cost table: n, depth, vB, sats. */
ARK_API int ark_footprint_table(const int64_t* ns, size_t count, double fee_rate, char** csv_out, char* err,
                                size_t errlen);

/* vB of a transaction shape, rounded up. */
ARK_API int ark_footprint_vbytes(int keypath_ins, int scriptpath_ins, int p2tr_outs, int anchor_outs,
                                 int64_t* vbytes_out, char* err, size_t errlen);

/* Times assembly plus signing per n; JSON {rows:[{n,seconds}], fitted, a0, a1, r2}.
 * ns == NULL uses the default list. */
ARK_API int ark_bench_commit(ark_ctx* ctx, const int64_t* ns, size_t count, int reps, char** json_out, char* err,
                             size_t errlen);

ARK_API void ark_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
