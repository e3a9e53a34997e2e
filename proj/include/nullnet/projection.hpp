#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nullnet/graph.hpp"
#include "nullnet/nullmodel.hpp"

namespace nullnet {

enum class DistributionMode { poisson, poisson_binomial };
/// Hypothesis family for the FDR correction: only pairs with at least one
/// shared motif, or every ordered/unordered pair of the projected layer.
enum class FdrFamily { nonzero, all_pairs };

std::string to_string(DistributionMode mode);
std::string to_string(FdrFamily family);
DistributionMode parse_distribution_mode(const std::string& text);
FdrFamily parse_fdr_family(const std::string& text);

using NodePair = std::pair<NodeIndex, NodeIndex>;

struct MotifStatistics {
  NodeIndex source = 0;
  NodeIndex target = 0;
  std::int64_t observed = 0;
  double expected = 0.0;
  double p_value = 1.0;
  DistributionMode distribution = DistributionMode::poisson;
};

// --- motif counts -----------------------------------------------------------

/// Number of Γ-nodes shared by L-nodes i and j. Throws when i == j.
std::int64_t count_v_motifs(const BipartiteGraph& g, NodeIndex i, NodeIndex j);

/// Number of posts authored by i and retweeted by j. Throws when i == j.
std::int64_t count_directed_v_motifs(const DirectedBipartiteGraph& g, NodeIndex i, NodeIndex j);

// --- null expectations --------------------------------------------------------

/// sum_a p_ia p_ja
double expected_v_motifs(const BicmParams& params, NodeIndex i, NodeIndex j);
/// k_out(i) k_in(j) / N_posts in closed form, sum_a q_ia q'_ja otherwise.
double expected_directed_v_motifs(const BidcmParams& params, NodeIndex i, NodeIndex j);

/// Per-Γ-node motif probabilities, the Bernoulli family behind a V-motif count.
std::vector<double> v_motif_probabilities(const BicmParams& params, NodeIndex i, NodeIndex j);
std::vector<double> directed_v_motif_probabilities(const BidcmParams& params, NodeIndex i,
                                                   NodeIndex j);

// --- p-values -------------------------------------------------------------------

/// P(X >= observed) for X ~ Poisson(lambda). Returns 1 when observed == 0.
double poisson_upper_tail(std::int64_t observed, double lambda);

/// P(X >= observed) for X a sum of independent Bernoulli(probabilities[k]).
double poisson_binomial_upper_tail(std::int64_t observed, std::span<const double> probabilities);

/// Same, where probability `probabilities[k]` is repeated `multiplicities[k]` times.
double poisson_binomial_upper_tail(std::int64_t observed, std::span<const double> probabilities,
                                   std::span<const double> multiplicities);

/// Tail p-value of an observed motif count. Poisson mode uses lambda = sum of
/// the probabilities. Throws on negative counts or probabilities outside [0,1].
double motif_p_value(std::int64_t observed, std::span<const double> probabilities,
                     DistributionMode mode);
double motif_p_value(std::int64_t observed, double poisson_mean);

// --- multiple testing ---------------------------------------------------------------

struct BhResult {
  std::vector<std::size_t> rejected;  // positions into the input, ascending
  double threshold = 0.0;             // largest p-value rejected (0 when none)
  std::size_t family_size = 0;
};

/// Benjamini-Hochberg step-up. `family_size` may exceed p_values.size() when
/// untested hypotheses (p = 1) belong to the family.
BhResult benjamini_hochberg(std::span<const double> p_values, double alpha,
                            std::size_t family_size = 0);

struct PairPValue {
  NodePair pair;
  double p_value = 1.0;
};

/// Rejected pairs, sorted. Throws `empty_input` on an empty family and
/// `invalid_argument` when alpha is outside (0,1).
std::vector<NodePair> fdr_select(std::span<const PairPValue> family, double alpha);

// --- validated projections -----------------------------------------------------------

struct ValidationOptions {
  double alpha = 0.05;
  FdrFamily family = FdrFamily::nonzero;
  DistributionMode distribution = DistributionMode::poisson;
  /// Poisson-binomial p-values are only computed when the opposite layer has
  /// at most this many nodes; larger graphs fall back to Poisson.
  std::size_t exact_cutoff = 2000;
  unsigned threads = 1;
};

struct ValidatedProjection {
  std::vector<std::string> node_ids;     // full projected layer
  std::vector<MotifStatistics> edges;    // sorted by (source, target)
  bool directed = false;
  double alpha = 0.05;
  FdrFamily family = FdrFamily::nonzero;
  DistributionMode distribution = DistributionMode::poisson;
  std::string null_model;
  std::size_t family_size = 0;
  std::size_t tested_pairs = 0;
  std::size_t rejected_count = 0;
  double bh_threshold = 0.0;

  /// Nodes with at least one validated edge, ascending.
  std::vector<NodeIndex> nodes() const;
  /// Projected-layer nodes left without any validated edge.
  std::size_t isolated_dropped() const { return node_ids.size() - nodes().size(); }
  /// Symmetric in (i, j) for undirected projections.
  bool has_edge(NodeIndex i, NodeIndex j) const;
};

/// Undirected projection onto the L layer.
ValidatedProjection validate_projection(const BipartiteGraph& g, const BicmParams& params,
                                        const ValidationOptions& options = {});

/// Directed projection onto users: i -> j when j retweets i's posts more than
/// the null model explains.
ValidatedProjection validate_projection(const DirectedBipartiteGraph& g, const BidcmParams& params,
                                        const ValidationOptions& options = {});

nlohmann::json projection_manifest(const ValidatedProjection& p);

/// Writes `source,target,observed,expected,p_value` and a JSON manifest next to it.
void write_projection(const ValidatedProjection& p, const std::filesystem::path& csv_path);
/// Reads a projection CSV; the manifest, when present, supplies the metadata.
ValidatedProjection read_projection(const std::filesystem::path& csv_path, bool directed);

}  // namespace nullnet
