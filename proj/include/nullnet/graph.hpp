#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nullnet {

using NodeIndex = std::uint32_t;

/// L is the anchor layer (verified users, or all users in the directed
/// representation); Γ is the opposite layer (unverified users, or posts).
enum class Layer { left, right };
enum class Direction { out, in };

struct IndexEdge {
  NodeIndex left = 0;
  NodeIndex right = 0;
  auto operator<=>(const IndexEdge&) const = default;
};

struct DegreeSequence {
  std::vector<std::int64_t> values;

  std::int64_t total() const;
  std::size_t size() const { return values.size(); }
  std::int64_t operator[](std::size_t i) const { return values[i]; }
};

/// Binary, undirected bipartite network stored as two CSR adjacency lists so
/// that both layers can be walked without a transpose. Immutable once built.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  /// Builds from index edges over explicit node id tables. Duplicate edges are
  /// collapsed; out-of-range endpoints throw. An empty edge set is allowed here
  /// (the directed retweet block may legitimately be empty).
  BipartiteGraph(std::vector<std::string> left_ids, std::vector<std::string> right_ids,
                 std::vector<IndexEdge> edges);

  /// Builds from external ids. Node indices follow lexicographic id order per
  /// layer. Throws `empty_input` ("empty graph") when the list is empty.
  static BipartiteGraph from_edge_list(
      std::span<const std::pair<std::string, std::string>> edges);

  std::size_t n_left() const { return left_ids_.size(); }
  std::size_t n_right() const { return right_ids_.size(); }
  std::size_t n_edges() const { return left_adj_.size(); }
  std::size_t layer_size(Layer layer) const {
    return layer == Layer::left ? n_left() : n_right();
  }

  const std::vector<std::string>& left_ids() const { return left_ids_; }
  const std::vector<std::string>& right_ids() const { return right_ids_; }
  const std::vector<std::string>& ids(Layer layer) const {
    return layer == Layer::left ? left_ids_ : right_ids_;
  }

  /// Sorted Γ-neighbours of L-node i.
  std::span<const NodeIndex> right_neighbors(NodeIndex i) const;
  /// Sorted L-neighbours of Γ-node alpha.
  std::span<const NodeIndex> left_neighbors(NodeIndex alpha) const;

  std::int64_t degree(Layer layer, NodeIndex node) const;
  bool has_edge(NodeIndex i, NodeIndex alpha) const;

  /// Edges in (left, right) lexicographic order.
  std::vector<IndexEdge> edges() const;

  std::optional<NodeIndex> find(Layer layer, const std::string& id) const;

 private:
  std::vector<std::string> left_ids_;
  std::vector<std::string> right_ids_;
  std::vector<std::size_t> left_offsets_{0};
  std::vector<NodeIndex> left_adj_;
  std::vector<std::size_t> right_offsets_{0};
  std::vector<NodeIndex> right_adj_;
};

double connectance(const BipartiteGraph& g);

enum class LinkKind { author, retweet };

struct DirectedLink {
  std::string user_id;
  std::string post_id;
  LinkKind kind = LinkKind::author;
};

struct OrphanRetweet {
  std::string user_id;
  std::string post_id;
};

struct DirectedIngestStats {
  std::size_t duplicate_links = 0;
  std::size_t self_retweets_dropped = 0;
  std::size_t orphan_retweets = 0;
};

/// User/post network with an authorship block M (user writes post) and a
/// retweet block N (user retweets post). Both blocks share the node tables.
/// Every post has exactly one author; retweets of posts with no known author
/// are kept aside as orphans and never enter the blocks.
class DirectedBipartiteGraph {
 public:
  DirectedBipartiteGraph() = default;

  /// Throws `invalid_argument` when a post has two authors and `empty_input`
  /// when no authorship link survives.
  static DirectedBipartiteGraph from_links(std::span<const DirectedLink> links);

  /// Index-level constructor; validates the single-author invariant.
  DirectedBipartiteGraph(std::vector<std::string> user_ids, std::vector<std::string> post_ids,
                         std::vector<IndexEdge> authorship, std::vector<IndexEdge> retweets);

  std::size_t n_users() const { return authorship_.n_left(); }
  std::size_t n_posts() const { return authorship_.n_right(); }

  const BipartiteGraph& authorship() const { return authorship_; }
  const BipartiteGraph& retweets() const { return retweets_; }
  const std::vector<std::string>& user_ids() const { return authorship_.left_ids(); }
  const std::vector<std::string>& post_ids() const { return authorship_.right_ids(); }

  /// Author of each post, indexed by post.
  NodeIndex author_of(NodeIndex post) const { return author_of_[post]; }

  const std::vector<OrphanRetweet>& orphans() const { return orphans_; }
  const DirectedIngestStats& stats() const { return stats_; }

 private:
  BipartiteGraph authorship_;
  BipartiteGraph retweets_;
  std::vector<NodeIndex> author_of_;
  std::vector<OrphanRetweet> orphans_;
  DirectedIngestStats stats_;
};

/// Degree vector for one layer. `direction` must be absent for undirected
/// graphs and present for directed ones. For users, out = posts authored and
/// in = posts retweeted; for posts, in = authors (always 1) and out = retweets
/// received.
DegreeSequence degrees(const BipartiteGraph& g, Layer layer,
                       std::optional<Direction> direction = std::nullopt);
DegreeSequence degrees(const DirectedBipartiteGraph& g, Layer layer,
                       std::optional<Direction> direction);

}  // namespace nullnet
