/*
 * maxq: busy-period maximum queue length of M^X/G/1 queues under preemptive
 * LCFS disciplines (resume, repeat with resampling, repeat without
 * resampling).
 *
 * C interface. All objects are opaque handles created by a maxq_*_create or
 * maxq_*_parse call and released with the matching maxq_*_free. Every
 * fallible call returns a maxq_status; on failure maxq_last_error() returns a
 * message for the calling thread. Strings returned through `char**` are
 * owned by the caller and released with maxq_string_free.
 */
#ifndef MAXQ_MAXQ_H
#define MAXQ_MAXQ_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(MAXQ_BUILDING_LIBRARY)
#    define MAXQ_API __declspec(dllexport)
#  else
#    define MAXQ_API __declspec(dllimport)
#  endif
#else
#  define MAXQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum maxq_status {
    MAXQ_OK = 0,
    MAXQ_ERR_INVALID_ARGUMENT = 1,
    MAXQ_ERR_NUMERIC = 2,
    MAXQ_ERR_INTERNAL = 3
} maxq_status;

typedef enum maxq_discipline {
    MAXQ_RESUME = 0,
    MAXQ_REPEAT_RESAMPLE = 1,
    MAXQ_REPEAT_NORESAMPLE = 2
} maxq_discipline;

typedef enum maxq_truth { MAXQ_FALSE = 0, MAXQ_TRUE = 1, MAXQ_UNKNOWN = 2 } maxq_truth;

typedef enum maxq_relation {
    MAXQ_REL_LT = 0,
    MAXQ_REL_TRANSFORM_AT_LAMBDA = 1,
    MAXQ_REL_ICV_ASSUMED = 2,
    MAXQ_REL_CX_ASSUMED = 3,
    MAXQ_REL_STOCHASTIC = 4
} maxq_relation;

typedef struct maxq_service maxq_service;
typedef struct maxq_batch maxq_batch;
typedef struct maxq_model maxq_model;
typedef struct maxq_table maxq_table;
typedef struct maxq_estimate maxq_estimate;
typedef struct maxq_family maxq_family;

MAXQ_API const char* maxq_version(void);
MAXQ_API const char* maxq_last_error(void);
MAXQ_API void maxq_string_free(char* s);
MAXQ_API const char* maxq_status_name(maxq_status status);

/* --- distributions -------------------------------------------------------
 * Service specifiers: det:d exp:rate unif:a,b pareto:alpha
 *                     hyperexp:p1,r1;p2,r2;...  disc:v1,p1;v2,p2;...
 * Batch specifiers:   unit  disc:k1,p1;k2,p2;...
 */
MAXQ_API maxq_status maxq_service_parse(const char* spec, maxq_service** out);
MAXQ_API maxq_service* maxq_service_clone(const maxq_service* s);
MAXQ_API void maxq_service_free(maxq_service* s);
MAXQ_API maxq_status maxq_service_describe(const maxq_service* s, char** out);
MAXQ_API maxq_status maxq_service_mean(const maxq_service* s, double* out);
/* E exp(-theta S), theta >= 0 */
MAXQ_API maxq_status maxq_service_laplace(const maxq_service* s, double theta, double* out);
/* E exp(lambda S); *out is +infinity when divergent */
MAXQ_API maxq_status maxq_service_exp_moment(const maxq_service* s, double lambda, double* out);
MAXQ_API maxq_status maxq_service_cdf(const maxq_service* s, double x, double* out);
/* Draws `count` samples from a stream seeded with `seed`. */
MAXQ_API maxq_status maxq_service_sample(const maxq_service* s, uint64_t seed, double* out, size_t count);

MAXQ_API maxq_status maxq_batch_parse(const char* spec, maxq_batch** out);
MAXQ_API void maxq_batch_free(maxq_batch* b);
MAXQ_API maxq_status maxq_batch_mean(const maxq_batch* b, double* out);
MAXQ_API maxq_status maxq_batch_describe(const maxq_batch* b, char** out);

MAXQ_API maxq_status maxq_discipline_parse(const char* text, maxq_discipline* out);
MAXQ_API const char* maxq_discipline_name(maxq_discipline d);

/* --- model ---------------------------------------------------------------- */
/* Copies service and batch. */
MAXQ_API maxq_status maxq_model_create(double lambda, const maxq_service* service, const maxq_batch* batch,
                                       maxq_discipline discipline, maxq_model** out);
MAXQ_API void maxq_model_free(maxq_model* m);
MAXQ_API maxq_status maxq_model_describe(const maxq_model* m, char** out);

typedef struct maxq_stability {
    maxq_discipline discipline;
    double effective_mean_service; /* +infinity when E exp(lambda S) diverges */
    double offered_load;           /* lambda * mu * effective_mean_service */
    int stable;                    /* offered_load < 1 */
    double margin;                 /* 1 - offered_load */
} maxq_stability;

MAXQ_API maxq_status maxq_stability_compute(const maxq_model* m, maxq_stability* out);
MAXQ_API maxq_status maxq_stability_describe(const maxq_model* m, char** out);

/* --- analytic tables: P(k,b) = P(M(k) <= b), P(b) = P(M <= b) ------------ */
MAXQ_API maxq_status maxq_cdf_compute(const maxq_model* m, int b_max, maxq_table** out);
MAXQ_API void maxq_table_free(maxq_table* t);
MAXQ_API int maxq_table_bmax(const maxq_table* t);
/* 1 when the model is unstable and P(b) need not approach 1 */
MAXQ_API int maxq_table_defective(const maxq_table* t);
MAXQ_API maxq_status maxq_table_marginal(const maxq_table* t, int b, double* out);
MAXQ_API maxq_status maxq_table_entry(const maxq_table* t, int k, int b, double* out);
/* header `b,P_marginal,P_1_b,...`; one row per b = 1..b_max, 12 significant digits */
MAXQ_API maxq_status maxq_table_csv(const maxq_table* t, char** out);

/* Probability that a +-1 walk (down w.p. q) from k hits 0 before b + 1. */
MAXQ_API maxq_status maxq_ruin_closed_form(double q, int k, int b, double* out);

/* --- simulation ------------------------------------------------------------ */
typedef struct maxq_sim_options {
    uint64_t max_events; /* per busy period; 0 selects 10^7 */
    uint64_t max_queue;  /* per busy period; 0 selects 10^5 */
    unsigned threads;    /* 0 selects hardware concurrency */
} maxq_sim_options;

/* options may be NULL */
MAXQ_API maxq_status maxq_simulate(const maxq_model* m, int n_max, uint64_t replications, uint64_t seed,
                                   const maxq_sim_options* options, maxq_estimate** out);
MAXQ_API void maxq_estimate_free(maxq_estimate* e);
MAXQ_API int maxq_estimate_nmax(const maxq_estimate* e);
MAXQ_API uint64_t maxq_estimate_replications(const maxq_estimate* e);
MAXQ_API uint64_t maxq_estimate_overflow(const maxq_estimate* e);
MAXQ_API maxq_status maxq_estimate_cdf(const maxq_estimate* e, int n, double* p_hat, double* ci_halfwidth);
MAXQ_API maxq_status maxq_estimate_count(const maxq_estimate* e, int n, uint64_t* out);
/* header `n,p_hat,ci_lo,ci_hi,count`, preceded by '#' metadata lines */
MAXQ_API maxq_status maxq_estimate_csv(const maxq_estimate* e, char** out);

/* --- ordering --------------------------------------------------------------- */
typedef struct maxq_verdict {
    maxq_relation relation;
    maxq_truth holds;
    double min_margin;
    double witness_value;
    char witness_name[16]; /* "theta", "lambda", "b" or "family" */
    char note[48];
    char report[192];      /* one-line `relation=... holds=... ...` */
} maxq_verdict;

/* theta_grid NULL selects 64 log-spaced points in [1e-3, 50]. A plays S'. */
MAXQ_API maxq_status maxq_check_lt_order(const maxq_service* a, const maxq_service* b,
                                         const double* theta_grid, size_t grid_len, maxq_verdict* out);
MAXQ_API maxq_status maxq_check_transform_at_lambda(const maxq_service* a, const maxq_service* b,
                                                    double lambda, maxq_verdict* out);
MAXQ_API maxq_status maxq_check_structural_cx(const maxq_service* a, const maxq_service* b,
                                              maxq_verdict* out);
MAXQ_API maxq_status maxq_check_icv(const maxq_service* a, const maxq_service* b, maxq_verdict* out);
MAXQ_API maxq_status maxq_verify_dominance(const maxq_model* a, const maxq_model* b, int b_max,
                                           double tolerance, maxq_verdict* out);

/* family: "uniform", "pareto" or "hyperexp"; params NULL selects the defaults */
MAXQ_API maxq_status maxq_family_create(const char* family, const double* params, size_t n_params,
                                        maxq_family** out);
MAXQ_API void maxq_family_free(maxq_family* f);
MAXQ_API size_t maxq_family_size(const maxq_family* f);
/* default arrival rate and largest n for this family */
MAXQ_API double maxq_family_lambda(const maxq_family* f);
MAXQ_API int maxq_family_nmax(const maxq_family* f);
MAXQ_API maxq_status maxq_family_param(const maxq_family* f, size_t i, double* out);
/* New handle, owned by the caller. */
MAXQ_API maxq_status maxq_family_member(const maxq_family* f, size_t i, maxq_service** out);

#ifdef __cplusplus
}
#endif

#endif /* MAXQ_MAXQ_H */
