#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nullnet/graph.hpp"
#include "nullnet/projection.hpp"

namespace nullnet {

/// Simple undirected graph over compact node indices. Built from a validated
/// projection with isolated nodes dropped and edge direction ignored.
struct UndirectedGraph {
  std::vector<std::string> node_ids;
  std::vector<std::vector<NodeIndex>> adjacency;  // sorted, no self loops
  std::size_t n_edges = 0;

  std::size_t size() const { return node_ids.size(); }

  static UndirectedGraph from_edges(std::vector<std::string> node_ids,
                                    const std::vector<NodePair>& edges);
  static UndirectedGraph from_projection(const ValidatedProjection& p);

  /// Induced subgraph on `nodes` (indices into this graph), in the given order.
  UndirectedGraph induced(const std::vector<NodeIndex>& nodes) const;
};

/// Directed graph over compact node indices, for hub/authority scoring.
struct DirectedGraph {
  std::vector<std::string> node_ids;
  std::vector<std::vector<NodeIndex>> out;  // sorted successors
  std::size_t n_edges = 0;

  std::size_t size() const { return node_ids.size(); }

  static DirectedGraph from_edges(std::vector<std::string> node_ids,
                                  const std::vector<NodePair>& edges);
  static DirectedGraph from_projection(const ValidatedProjection& p);
};

struct Partition {
  std::vector<std::string> node_ids;
  std::vector<int> community;  // contiguous 0..k-1, largest community first
  double modularity = 0.0;
  int restart_count = 0;
  std::uint64_t rng_seed = 0;
  std::string prefix;          // "" at top level, "<parent>." for sub-communities
  std::vector<double> restart_modularities;

  int n_communities() const;
  std::string label(NodeIndex node) const { return prefix + std::to_string(community[node]); }
  std::vector<NodeIndex> members(int community_id) const;
};

/// Newman-Girvan modularity (resolution 1). Zero for an edgeless graph.
/// Throws when the partition does not cover every node.
double modularity(const UndirectedGraph& g, const std::vector<int>& community);

struct LouvainOptions {
  int restarts = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// One Louvain run with the node visiting order shuffled by `rng_seed`.
std::vector<int> louvain_once(const UndirectedGraph& g, std::uint64_t rng_seed);

/// Runs Louvain `restarts` times with independently shuffled node orders and
/// keeps the highest-modularity partition (earliest restart on ties).
Partition louvain_best(const UndirectedGraph& g, const LouvainOptions& options);

/// Louvain-best on the subgraph induced by one community. Member ids are
/// namespaced as "<parent label>.<k>".
Partition subcommunities(const UndirectedGraph& g, const Partition& partition, int community_id,
                         const LouvainOptions& options);

struct LabelAssignment {
  std::vector<std::string> node_ids;
  std::vector<std::optional<std::string>> label;
  std::vector<bool> is_seed;
  int iterations_to_converge = 0;
  std::uint64_t rng_seed = 0;

  std::size_t labeled_count() const;
};

struct PropagationOptions {
  int max_sweeps = 100;
  std::uint64_t seed = 0;
};

/// Asynchronous label propagation. Non-seed nodes repeatedly adopt the most
/// frequent label among their labelled neighbours, breaking ties uniformly at
/// random; a node keeps its label while it is among the most frequent. Seeds
/// never change and nodes unreachable from any seed stay unlabelled. A node's
/// first label comes only from neighbours labelled in an earlier sweep.
///
/// Throws `invalid_argument` when `seeds` is empty or names a node not in g.
LabelAssignment propagate_labels(const UndirectedGraph& g,
                                 const std::map<std::string, std::string>& seeds,
                                 const PropagationOptions& options = {});

struct HubScores {
  std::vector<std::string> node_ids;
  std::vector<double> hub;
  std::vector<double> authority;
  int iterations = 0;
};

/// Hub and authority scores by power iteration, each vector renormalised to
/// unit Euclidean norm every step. Throws `invalid_argument` on an edgeless
/// graph and `ConvergenceError` when `max_iter` is reached.
HubScores hits_scores(const DirectedGraph& g, double tol = 1e-10, int max_iter = 10'000);

// --- file formats -----------------------------------------------------------

void write_partition(const Partition& p, const std::filesystem::path& csv_path,
                     const nlohmann::json& extra = nlohmann::json::object());
void write_labels(const LabelAssignment& labels, const std::filesystem::path& csv_path);
void write_hubs(const HubScores& scores, const std::filesystem::path& csv_path);

/// `node_id,community` rows; empty community fields are skipped.
std::map<std::string, std::string> read_labels(const std::filesystem::path& csv_path);

}  // namespace nullnet
