#include "nullnet/nullnet.h"

#include <exception>
#include <string>
#include <vector>

#include "nullnet/error.hpp"
#include "nullnet/graph.hpp"
#include "nullnet/io.hpp"
#include "nullnet/nullmodel.hpp"
#include "nullnet/pipeline.hpp"
#include "nullnet/projection.hpp"
#include "nullnet/reputability.hpp"
#include "nullnet/synth.hpp"

struct nullnet_graph {
  nullnet::BipartiteGraph g;
};

struct nullnet_model {
  nullnet::BicmParams params;
};

struct nullnet_projection {
  nullnet::ValidatedProjection p;
};

struct nullnet_config {
  nullnet::PipelineConfig c;
};

namespace {

thread_local std::string last_error;
thread_local std::string scratch;

nullnet_status status_of(nullnet::ErrorCode code) {
  using nullnet::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return NULLNET_INVALID_ARGUMENT;
    case ErrorCode::empty_input: return NULLNET_EMPTY_INPUT;
    case ErrorCode::degenerate_degree: return NULLNET_DEGENERATE_DEGREE;
    case ErrorCode::not_converged: return NULLNET_NOT_CONVERGED;
    case ErrorCode::io: return NULLNET_IO;
    case ErrorCode::parse: return NULLNET_PARSE;
    case ErrorCode::stage_failure: return NULLNET_STAGE_FAILURE;
  }
  return NULLNET_INTERNAL;
}

template <typename F>
nullnet_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return NULLNET_OK;
  } catch (const nullnet::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return NULLNET_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return NULLNET_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw nullnet::Error(nullnet::ErrorCode::invalid_argument, what);
}

nullnet::Layer layer_of(int layer) {
  require(layer == NULLNET_LAYER_LEFT || layer == NULLNET_LAYER_RIGHT, "bad layer");
  return layer == NULLNET_LAYER_LEFT ? nullnet::Layer::left : nullnet::Layer::right;
}

}  // namespace

extern "C" {

const char* nullnet_version(void) { return "0.1.0"; }

const char* nullnet_last_error(void) { return last_error.c_str(); }

const char* nullnet_status_name(nullnet_status status) {
  switch (status) {
    case NULLNET_OK: return "ok";
    case NULLNET_INVALID_ARGUMENT: return "invalid_argument";
    case NULLNET_EMPTY_INPUT: return "empty_input";
    case NULLNET_DEGENERATE_DEGREE: return "degenerate_degree";
    case NULLNET_NOT_CONVERGED: return "not_converged";
    case NULLNET_IO: return "io";
    case NULLNET_PARSE: return "parse";
    case NULLNET_STAGE_FAILURE: return "stage_failure";
    case NULLNET_INTERNAL: return "internal";
  }
  return "unknown";
}

nullnet_status nullnet_graph_from_edges(const char* const* left_ids, const char* const* right_ids,
                                        size_t n_edges, nullnet_graph** out) {
  return guarded([&] {
    require(out && (n_edges == 0 || (left_ids && right_ids)), "null argument");
    std::vector<std::pair<std::string, std::string>> edges;
    edges.reserve(n_edges);
    for (size_t k = 0; k < n_edges; ++k) {
      require(left_ids[k] && right_ids[k], "null id");
      edges.emplace_back(left_ids[k], right_ids[k]);
    }
    *out = new nullnet_graph{nullnet::BipartiteGraph::from_edge_list(edges)};
  });
}

nullnet_status nullnet_graph_read_csv(const char* path, nullnet_graph** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new nullnet_graph{nullnet::io::read_bipartite_csv(path)};
  });
}

void nullnet_graph_free(nullnet_graph* g) { delete g; }

size_t nullnet_graph_n_left(const nullnet_graph* g) { return g ? g->g.n_left() : 0; }
size_t nullnet_graph_n_right(const nullnet_graph* g) { return g ? g->g.n_right() : 0; }
size_t nullnet_graph_n_edges(const nullnet_graph* g) { return g ? g->g.n_edges() : 0; }

nullnet_status nullnet_graph_connectance(const nullnet_graph* g, double* out) {
  return guarded([&] {
    require(g && out, "null argument");
    *out = nullnet::connectance(g->g);
  });
}

nullnet_status nullnet_graph_degrees(const nullnet_graph* g, int layer, int64_t* out,
                                     size_t capacity) {
  return guarded([&] {
    require(g && (out || capacity == 0), "null argument");
    const auto d = nullnet::degrees(g->g, layer_of(layer));
    for (size_t k = 0; k < std::min(capacity, d.size()); ++k) out[k] = d[k];
  });
}

nullnet_status nullnet_graph_node_id(const nullnet_graph* g, int layer, size_t index,
                                     const char** out) {
  return guarded([&] {
    require(g && out, "null argument");
    const auto& ids = g->g.ids(layer_of(layer));
    require(index < ids.size(), "node index out of range");
    *out = ids[index].c_str();
  });
}

nullnet_status nullnet_fit(const nullnet_graph* g, int model, double tol, int max_iter,
                           double sparse_threshold, nullnet_model** out) {
  return guarded([&] {
    require(g && out, "null argument");
    require(model >= NULLNET_MODEL_EXACT && model <= NULLNET_MODEL_AUTO, "bad model");
    nullnet::FitOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    o.sparse_threshold = sparse_threshold;
    const auto choice = model == NULLNET_MODEL_EXACT      ? nullnet::NullModelChoice::exact
                        : model == NULLNET_MODEL_CHUNG_LU ? nullnet::NullModelChoice::chung_lu
                                                          : nullnet::NullModelChoice::auto_select;
    *out = new nullnet_model{nullnet::fit_null_model(g->g, choice, o)};
  });
}

void nullnet_model_free(nullnet_model* m) { delete m; }

nullnet_status nullnet_model_probability(const nullnet_model* m, uint32_t i, uint32_t alpha,
                                         double* out) {
  return guarded([&] {
    require(m && out, "null argument");
    *out = m->params.link_probability(i, alpha);
  });
}

nullnet_status nullnet_model_max_residual(const nullnet_model* m, double* out) {
  return guarded([&] {
    require(m && out, "null argument");
    *out = nullnet::max_degree_residual(m->params);
  });
}

const char* nullnet_model_method(const nullnet_model* m) {
  return m ? m->params.diagnostics.method.c_str() : "";
}

nullnet_status nullnet_validate(const nullnet_graph* g, const nullnet_model* m, double alpha,
                                int family, int distribution, nullnet_projection** out) {
  return guarded([&] {
    require(g && m && out, "null argument");
    require(family == NULLNET_FAMILY_NONZERO || family == NULLNET_FAMILY_ALL_PAIRS, "bad family");
    require(distribution == NULLNET_DIST_POISSON || distribution == NULLNET_DIST_POISSON_BINOMIAL,
            "bad distribution");
    nullnet::ValidationOptions o;
    o.alpha = alpha;
    o.family = family == NULLNET_FAMILY_NONZERO ? nullnet::FdrFamily::nonzero
                                                : nullnet::FdrFamily::all_pairs;
    o.distribution = distribution == NULLNET_DIST_POISSON
                         ? nullnet::DistributionMode::poisson
                         : nullnet::DistributionMode::poisson_binomial;
    *out = new nullnet_projection{nullnet::validate_projection(g->g, m->params, o)};
  });
}

void nullnet_projection_free(nullnet_projection* p) { delete p; }

size_t nullnet_projection_n_edges(const nullnet_projection* p) {
  return p ? p->p.edges.size() : 0;
}

nullnet_status nullnet_projection_edge(const nullnet_projection* p, size_t k, const char** source,
                                       const char** target, int64_t* observed, double* p_value) {
  return guarded([&] {
    require(p, "null argument");
    require(k < p->p.edges.size(), "edge index out of range");
    const auto& e = p->p.edges[k];
    if (source) *source = p->p.node_ids[e.source].c_str();
    if (target) *target = p->p.node_ids[e.target].c_str();
    if (observed) *observed = e.observed;
    if (p_value) *p_value = e.p_value;
  });
}

nullnet_status nullnet_projection_write(const nullnet_projection* p, const char* path) {
  return guarded([&] {
    require(p && path, "null argument");
    nullnet::write_projection(p->p, path);
  });
}

nullnet_status nullnet_poisson_tail(int64_t observed, double lambda, double* out) {
  return guarded([&] {
    require(out, "null argument");
    *out = nullnet::poisson_upper_tail(observed, lambda);
  });
}

nullnet_status nullnet_poisson_binomial_tail(int64_t observed, const double* probs, size_t n,
                                             double* out) {
  return guarded([&] {
    require(out && (probs || n == 0), "null argument");
    *out = nullnet::poisson_binomial_upper_tail(observed, std::span<const double>(probs, n));
  });
}

nullnet_status nullnet_benjamini_hochberg(const double* p_values, size_t n, double alpha,
                                          size_t family_size, unsigned char* rejected) {
  return guarded([&] {
    require((p_values && rejected) || n == 0, "null argument");
    const auto r = nullnet::benjamini_hochberg(std::span<const double>(p_values, n), alpha,
                                               family_size);
    std::fill(rejected, rejected + n, static_cast<unsigned char>(0));
    for (auto k : r.rejected) rejected[k] = 1;
  });
}

nullnet_status nullnet_extract_domain(const char* url, int keep_subdomains, const char** out) {
  return guarded([&] {
    require(url && out, "null argument");
    scratch = nullnet::extract_domain(url, keep_subdomains != 0);
    *out = scratch.c_str();
  });
}

nullnet_status nullnet_score_to_label(double score, const char** out) {
  return guarded([&] {
    require(out, "null argument");
    scratch = nullnet::report_name(nullnet::score_to_label(score));
    *out = scratch.c_str();
  });
}

nullnet_status nullnet_fleiss_kappa(const int* counts, size_t items, size_t categories,
                                    double* out) {
  return guarded([&] {
    require(counts && out, "null argument");
    std::vector<std::vector<int>> m(items, std::vector<int>(categories));
    for (size_t i = 0; i < items; ++i)
      for (size_t j = 0; j < categories; ++j) m[i][j] = counts[i * categories + j];
    *out = nullnet::fleiss_kappa(m);
  });
}

nullnet_status nullnet_config_new(nullnet_config** out) {
  return guarded([&] {
    require(out, "null argument");
    *out = new nullnet_config{};
  });
}

nullnet_status nullnet_config_load(const char* path, nullnet_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new nullnet_config{nullnet::load_config(path)};
  });
}

void nullnet_config_free(nullnet_config* c) { delete c; }

nullnet_status nullnet_config_set(nullnet_config* c, const char* key, const char* value) {
  return guarded([&] {
    require(c && key && value, "null argument");
    c->c.set(key, value);
  });
}

nullnet_status nullnet_config_get(const nullnet_config* c, const char* key, const char** out) {
  return guarded([&] {
    require(c && key && out, "null argument");
    scratch = c->c.get(key);
    *out = scratch.c_str();
  });
}

nullnet_status nullnet_config_validate(const nullnet_config* c) {
  return guarded([&] {
    require(c, "null argument");
    c->c.validate();
  });
}

nullnet_status nullnet_run_stage(const nullnet_config* c, const char* stage) {
  return guarded([&] {
    require(c && stage, "null argument");
    nullnet::run_stage(c->c, stage);
  });
}

nullnet_status nullnet_run_pipeline(const nullnet_config* c, const char* from_stage) {
  return guarded([&] {
    require(c, "null argument");
    nullnet::run_pipeline(c->c, from_stage ? std::optional<std::string>(from_stage) : std::nullopt);
  });
}

nullnet_status nullnet_project_file(const nullnet_config* c, const char* input, int directed,
                                    const char* output) {
  return guarded([&] {
    require(c && input && output, "null argument");
    nullnet::write_projection(nullnet::project_file(input, directed != 0, c->c), output);
  });
}

nullnet_status nullnet_synth(const char* out_dir, uint64_t seed, size_t n_users) {
  return guarded([&] {
    require(out_dir, "null argument");
    nullnet::SynthOptions o;
    o.seed = seed;
    if (n_users > 0) o.n_users = n_users;
    nullnet::write_synthetic(nullnet::generate_synthetic(o), out_dir, seed);
  });
}

}  // extern "C"
