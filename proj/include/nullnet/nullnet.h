/* C interface of the nullnet shared library.
 *
 * Every function returns a status code; on failure a message is available
 * from nullnet_last_error() on the calling thread. Strings returned through
 * `const char**` out-parameters stay valid until the next call on the same
 * thread unless documented as owned by a handle.
 */
#ifndef NULLNET_H
#define NULLNET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NULLNET_API __declspec(dllexport)
#else
#define NULLNET_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nullnet_status {
  NULLNET_OK = 0,
  NULLNET_INVALID_ARGUMENT = 1,
  NULLNET_EMPTY_INPUT = 2,
  NULLNET_DEGENERATE_DEGREE = 3,
  NULLNET_NOT_CONVERGED = 4,
  NULLNET_IO = 5,
  NULLNET_PARSE = 6,
  NULLNET_STAGE_FAILURE = 7,
  NULLNET_INTERNAL = 8
} nullnet_status;

enum { NULLNET_LAYER_LEFT = 0, NULLNET_LAYER_RIGHT = 1 };
enum { NULLNET_MODEL_EXACT = 0, NULLNET_MODEL_CHUNG_LU = 1, NULLNET_MODEL_AUTO = 2 };
enum { NULLNET_FAMILY_NONZERO = 0, NULLNET_FAMILY_ALL_PAIRS = 1 };
enum { NULLNET_DIST_POISSON = 0, NULLNET_DIST_POISSON_BINOMIAL = 1 };

NULLNET_API const char* nullnet_version(void);
NULLNET_API const char* nullnet_last_error(void);
NULLNET_API const char* nullnet_status_name(nullnet_status status);

/* --- bipartite graphs --- */
typedef struct nullnet_graph nullnet_graph;

NULLNET_API nullnet_status nullnet_graph_from_edges(const char* const* left_ids,
                                                    const char* const* right_ids, size_t n_edges,
                                                    nullnet_graph** out);
NULLNET_API nullnet_status nullnet_graph_read_csv(const char* path, nullnet_graph** out);
NULLNET_API void nullnet_graph_free(nullnet_graph* g);

NULLNET_API size_t nullnet_graph_n_left(const nullnet_graph* g);
NULLNET_API size_t nullnet_graph_n_right(const nullnet_graph* g);
NULLNET_API size_t nullnet_graph_n_edges(const nullnet_graph* g);
NULLNET_API nullnet_status nullnet_graph_connectance(const nullnet_graph* g, double* out);
/* Copies min(capacity, layer size) degrees into `out`. */
NULLNET_API nullnet_status nullnet_graph_degrees(const nullnet_graph* g, int layer, int64_t* out,
                                                 size_t capacity);
/* Owned by the graph. */
NULLNET_API nullnet_status nullnet_graph_node_id(const nullnet_graph* g, int layer, size_t index,
                                                 const char** out);

/* --- null model --- */
typedef struct nullnet_model nullnet_model;

NULLNET_API nullnet_status nullnet_fit(const nullnet_graph* g, int model, double tol, int max_iter,
                                       double sparse_threshold, nullnet_model** out);
NULLNET_API void nullnet_model_free(nullnet_model* m);
NULLNET_API nullnet_status nullnet_model_probability(const nullnet_model* m, uint32_t i,
                                                     uint32_t alpha, double* out);
NULLNET_API nullnet_status nullnet_model_max_residual(const nullnet_model* m, double* out);
/* "fixed_point", "newton", "chung_lu"... Owned by the model. */
NULLNET_API const char* nullnet_model_method(const nullnet_model* m);

/* --- validated projection --- */
typedef struct nullnet_projection nullnet_projection;

NULLNET_API nullnet_status nullnet_validate(const nullnet_graph* g, const nullnet_model* m,
                                            double alpha, int family, int distribution,
                                            nullnet_projection** out);
NULLNET_API void nullnet_projection_free(nullnet_projection* p);
NULLNET_API size_t nullnet_projection_n_edges(const nullnet_projection* p);
/* Ids are owned by the projection. */
NULLNET_API nullnet_status nullnet_projection_edge(const nullnet_projection* p, size_t k,
                                                   const char** source, const char** target,
                                                   int64_t* observed, double* p_value);
NULLNET_API nullnet_status nullnet_projection_write(const nullnet_projection* p, const char* path);

/* --- statistics --- */
NULLNET_API nullnet_status nullnet_poisson_tail(int64_t observed, double lambda, double* out);
NULLNET_API nullnet_status nullnet_poisson_binomial_tail(int64_t observed, const double* probs,
                                                         size_t n, double* out);
/* rejected[k] is set to 1 for rejected hypotheses, 0 otherwise. family_size 0 means n. */
NULLNET_API nullnet_status nullnet_benjamini_hochberg(const double* p_values, size_t n, double alpha,
                                                      size_t family_size, unsigned char* rejected);

/* --- reputability --- */
NULLNET_API nullnet_status nullnet_extract_domain(const char* url, int keep_subdomains,
                                                  const char** out);
NULLNET_API nullnet_status nullnet_score_to_label(double score, const char** out);
/* Row-major items x categories matrix of rater counts. */
NULLNET_API nullnet_status nullnet_fleiss_kappa(const int* counts, size_t items, size_t categories,
                                                double* out);

/* --- pipeline --- */
typedef struct nullnet_config nullnet_config;

NULLNET_API nullnet_status nullnet_config_new(nullnet_config** out);
NULLNET_API nullnet_status nullnet_config_load(const char* path, nullnet_config** out);
NULLNET_API void nullnet_config_free(nullnet_config* c);
NULLNET_API nullnet_status nullnet_config_set(nullnet_config* c, const char* key, const char* value);
NULLNET_API nullnet_status nullnet_config_get(const nullnet_config* c, const char* key,
                                              const char** out);
NULLNET_API nullnet_status nullnet_config_validate(const nullnet_config* c);

NULLNET_API nullnet_status nullnet_run_stage(const nullnet_config* c, const char* stage);
/* from_stage may be NULL to run every stage. */
NULLNET_API nullnet_status nullnet_run_pipeline(const nullnet_config* c, const char* from_stage);
NULLNET_API nullnet_status nullnet_project_file(const nullnet_config* c, const char* input,
                                                int directed, const char* output);

/* Writes a planted four-community fixture into out_dir. */
NULLNET_API nullnet_status nullnet_synth(const char* out_dir, uint64_t seed, size_t n_users);

#ifdef __cplusplus
}
#endif

#endif /* NULLNET_H */
