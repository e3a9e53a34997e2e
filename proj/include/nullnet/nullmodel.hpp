#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "nullnet/graph.hpp"

namespace nullnet {

enum class NullModelMode { exact, chung_lu };
/// `auto_select` picks chung_lu below the sparsity threshold, exact otherwise.
enum class NullModelChoice { exact, chung_lu, auto_select };

std::string to_string(NullModelMode mode);
std::string to_string(NullModelChoice choice);
NullModelChoice parse_null_model_choice(const std::string& text);

struct FitDiagnostics {
  int iterations = 0;
  int newton_steps = 0;
  double max_residual = 0.0;
  std::string method;  // "fixed_point", "newton", "closed_form", "chung_lu"
  std::size_t capped_pairs = 0;
  std::vector<std::string> warnings;
};

struct FitOptions {
  double tol = 1e-8;
  int max_iter = 10'000;
  double sparse_threshold = 1e-2;
};

/// Fitted bipartite configuration model. In exact mode p = xy/(1+xy); in
/// Chung-Lu mode x = k/sqrt(m), y = k/sqrt(m) and p = min(1, xy).
struct BicmParams {
  NullModelMode mode = NullModelMode::exact;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::int64_t> left_degrees;
  std::vector<std::int64_t> right_degrees;
  std::int64_t n_edges = 0;
  FitDiagnostics diagnostics;

  std::size_t n_left() const { return x.size(); }
  std::size_t n_right() const { return y.size(); }

  /// Throws `invalid_argument` on out-of-range indices.
  double link_probability(NodeIndex i, NodeIndex alpha) const;
  /// Same formula on raw multipliers; no bounds checks.
  double probability_from(double xi, double ya) const;

  /// Expected degree of a node under the fitted ensemble.
  double expected_degree(Layer layer, NodeIndex node) const;
};

/// Maximum-likelihood multipliers by damped fixed-point iteration with a
/// Newton fallback when progress stalls. Nodes sharing a degree share a
/// multiplier, so the solve runs on degree classes.
///
/// Throws `degenerate_degree` when a node is linked to every non-isolated node
/// of the opposite layer, `empty_input` for an edgeless graph, and
/// `ConvergenceError` when `max_iter` is exhausted.
BicmParams fit_bicm(const BipartiteGraph& g, const FitOptions& options = {});

/// Chung-Lu approximation p = k_i k_a / m, capped at 1.
BicmParams fit_chung_lu(const BipartiteGraph& g, const FitOptions& options = {});

/// Dispatches on `choice`. In auto mode an exact fit that hits a degenerate
/// degree falls back to Chung-Lu and records a warning.
BicmParams fit_null_model(const BipartiteGraph& g, NullModelChoice choice,
                          const FitOptions& options = {});

/// Log-likelihood of the observed graph under `params`.
double bicm_log_likelihood(const BipartiteGraph& g, const BicmParams& params);

/// Maximum over both layers of |<k> - k*|.
double max_degree_residual(const BicmParams& params);

nlohmann::json to_json(const BicmParams& params);
BicmParams bicm_from_json(const nlohmann::json& doc);

struct BidcmOptions {
  NullModelChoice retweet_model = NullModelChoice::auto_select;
  /// Use the general solver on the authorship block instead of k_out / N_posts.
  bool general_authorship = false;
  FitOptions fit;
};

/// Bipartite directed configuration model over users (L) and posts (Γ).
/// Authorship links are independent of retweet links, so each block carries
/// its own parameters.
struct BidcmParams {
  std::vector<std::int64_t> user_out;     // posts authored
  std::vector<std::int64_t> user_in;      // posts retweeted
  std::vector<std::int64_t> post_out;     // retweets received
  std::size_t n_posts = 0;
  bool closed_form = true;
  BicmParams authorship;                  // only used when !closed_form
  BicmParams retweet;

  std::size_t n_users() const { return user_out.size(); }

  /// Probability that user i wrote post alpha.
  double authorship_probability(NodeIndex i, NodeIndex alpha) const;
  /// Probability that user i retweeted post alpha.
  double retweet_probability(NodeIndex i, NodeIndex alpha) const;
};

/// Throws `empty_input` when there are no posts.
BidcmParams fit_bidcm(const DirectedBipartiteGraph& g, const BidcmOptions& options = {});

nlohmann::json to_json(const BidcmParams& params);
BidcmParams bidcm_from_json(const nlohmann::json& doc);

}  // namespace nullnet
