#include "nullnet/graph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "nullnet/error.hpp"

namespace nullnet {

namespace {

void build_csr(std::size_t n_rows, const std::vector<IndexEdge>& edges, bool by_left,
               std::vector<std::size_t>& offsets, std::vector<NodeIndex>& adj) {
  offsets.assign(n_rows + 1, 0);
  for (const auto& e : edges) ++offsets[(by_left ? e.left : e.right) + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  adj.assign(edges.size(), 0);
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& e : edges) {
    const NodeIndex row = by_left ? e.left : e.right;
    adj[cursor[row]++] = by_left ? e.right : e.left;
  }
  for (std::size_t r = 0; r < n_rows; ++r)
    std::sort(adj.begin() + offsets[r], adj.begin() + offsets[r + 1]);
}

std::vector<std::string> sorted_unique(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

NodeIndex index_of(const std::vector<std::string>& sorted, const std::string& id) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), id);
  return static_cast<NodeIndex>(it - sorted.begin());
}

}  // namespace

std::int64_t DegreeSequence::total() const {
  return std::accumulate(values.begin(), values.end(), std::int64_t{0});
}

BipartiteGraph::BipartiteGraph(std::vector<std::string> left_ids,
                               std::vector<std::string> right_ids,
                               std::vector<IndexEdge> edges)
    : left_ids_(std::move(left_ids)), right_ids_(std::move(right_ids)) {
  for (const auto& e : edges) {
    if (e.left >= left_ids_.size() || e.right >= right_ids_.size())
      throw Error(ErrorCode::invalid_argument, "edge endpoint out of layer bounds");
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  build_csr(left_ids_.size(), edges, true, left_offsets_, left_adj_);
  build_csr(right_ids_.size(), edges, false, right_offsets_, right_adj_);
}

BipartiteGraph BipartiteGraph::from_edge_list(
    std::span<const std::pair<std::string, std::string>> edges) {
  if (edges.empty()) throw Error(ErrorCode::empty_input, "empty graph");
  std::vector<std::string> lefts, rights;
  lefts.reserve(edges.size());
  rights.reserve(edges.size());
  for (const auto& [l, r] : edges) {
    if (l.empty() || r.empty()) throw Error(ErrorCode::invalid_argument, "empty node id");
    lefts.push_back(l);
    rights.push_back(r);
  }
  lefts = sorted_unique(std::move(lefts));
  rights = sorted_unique(std::move(rights));
  std::vector<IndexEdge> index_edges;
  index_edges.reserve(edges.size());
  for (const auto& [l, r] : edges)
    index_edges.push_back({index_of(lefts, l), index_of(rights, r)});
  return BipartiteGraph(std::move(lefts), std::move(rights), std::move(index_edges));
}

std::span<const NodeIndex> BipartiteGraph::right_neighbors(NodeIndex i) const {
  return {left_adj_.data() + left_offsets_[i], left_offsets_[i + 1] - left_offsets_[i]};
}

std::span<const NodeIndex> BipartiteGraph::left_neighbors(NodeIndex alpha) const {
  return {right_adj_.data() + right_offsets_[alpha],
          right_offsets_[alpha + 1] - right_offsets_[alpha]};
}

std::int64_t BipartiteGraph::degree(Layer layer, NodeIndex node) const {
  if (node >= layer_size(layer)) throw Error(ErrorCode::invalid_argument, "node out of range");
  const auto& off = layer == Layer::left ? left_offsets_ : right_offsets_;
  return static_cast<std::int64_t>(off[node + 1] - off[node]);
}

bool BipartiteGraph::has_edge(NodeIndex i, NodeIndex alpha) const {
  auto nb = right_neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), alpha);
}

std::vector<IndexEdge> BipartiteGraph::edges() const {
  std::vector<IndexEdge> out;
  out.reserve(n_edges());
  for (NodeIndex i = 0; i < n_left(); ++i)
    for (NodeIndex a : right_neighbors(i)) out.push_back({i, a});
  return out;
}

std::optional<NodeIndex> BipartiteGraph::find(Layer layer, const std::string& id) const {
  const auto& table = ids(layer);
  // Tables built from edge lists are sorted; index-built tables may not be.
  if (std::is_sorted(table.begin(), table.end())) {
    auto it = std::lower_bound(table.begin(), table.end(), id);
    if (it != table.end() && *it == id) return static_cast<NodeIndex>(it - table.begin());
    return std::nullopt;
  }
  auto it = std::find(table.begin(), table.end(), id);
  if (it == table.end()) return std::nullopt;
  return static_cast<NodeIndex>(it - table.begin());
}

double connectance(const BipartiteGraph& g) {
  if (g.n_left() == 0 || g.n_right() == 0)
    throw Error(ErrorCode::invalid_argument, "connectance needs non-empty layers");
  return static_cast<double>(g.n_edges()) /
         (static_cast<double>(g.n_left()) * static_cast<double>(g.n_right()));
}

DirectedBipartiteGraph::DirectedBipartiteGraph(std::vector<std::string> user_ids,
                                               std::vector<std::string> post_ids,
                                               std::vector<IndexEdge> authorship,
                                               std::vector<IndexEdge> retweets)
    : authorship_(user_ids, post_ids, std::move(authorship)),
      retweets_(std::move(user_ids), std::move(post_ids), std::move(retweets)) {
  author_of_.resize(n_posts());
  for (NodeIndex a = 0; a < n_posts(); ++a) {
    auto authors = authorship_.left_neighbors(a);
    if (authors.size() != 1)
      throw Error(ErrorCode::invalid_argument,
                  "post '" + authorship_.right_ids()[a] + "' must have exactly one author");
    author_of_[a] = authors[0];
  }
}

DirectedBipartiteGraph DirectedBipartiteGraph::from_links(std::span<const DirectedLink> links) {
  std::map<std::string, std::string> author;
  std::size_t duplicates = 0;
  for (const auto& l : links) {
    if (l.user_id.empty() || l.post_id.empty())
      throw Error(ErrorCode::invalid_argument, "empty node id");
    if (l.kind != LinkKind::author) continue;
    auto [it, inserted] = author.emplace(l.post_id, l.user_id);
    if (!inserted) {
      if (it->second != l.user_id)
        throw Error(ErrorCode::invalid_argument,
                    "post '" + l.post_id + "' has more than one author");
      ++duplicates;
    }
  }
  if (author.empty()) throw Error(ErrorCode::empty_input, "empty graph");

  DirectedIngestStats stats;
  std::vector<OrphanRetweet> orphans;
  std::set<std::pair<std::string, std::string>> retweet_pairs;
  for (const auto& l : links) {
    if (l.kind != LinkKind::retweet) continue;
    auto it = author.find(l.post_id);
    if (it == author.end()) {
      orphans.push_back({l.user_id, l.post_id});
      continue;
    }
    if (it->second == l.user_id) {
      ++stats.self_retweets_dropped;
      continue;
    }
    if (!retweet_pairs.emplace(l.user_id, l.post_id).second) ++duplicates;
  }
  stats.duplicate_links = duplicates;
  stats.orphan_retweets = orphans.size();

  std::vector<std::string> users, posts;
  for (const auto& [post, user] : author) {
    posts.push_back(post);
    users.push_back(user);
  }
  for (const auto& [user, post] : retweet_pairs) users.push_back(user);
  users = sorted_unique(std::move(users));

  std::vector<IndexEdge> m_edges, n_edges;
  m_edges.reserve(author.size());
  NodeIndex p = 0;
  for (const auto& entry : author) m_edges.push_back({index_of(users, entry.second), p++});
  n_edges.reserve(retweet_pairs.size());
  for (const auto& [user, post] : retweet_pairs)
    n_edges.push_back({index_of(users, user), index_of(posts, post)});

  DirectedBipartiteGraph g(std::move(users), std::move(posts), std::move(m_edges),
                           std::move(n_edges));
  g.orphans_ = std::move(orphans);
  g.stats_ = stats;
  return g;
}

DegreeSequence degrees(const BipartiteGraph& g, Layer layer, std::optional<Direction> direction) {
  if (direction) throw Error(ErrorCode::invalid_argument, "direction given for undirected graph");
  DegreeSequence d;
  const auto n = static_cast<NodeIndex>(g.layer_size(layer));
  d.values.resize(n);
  for (NodeIndex v = 0; v < n; ++v) d.values[v] = g.degree(layer, v);
  return d;
}

DegreeSequence degrees(const DirectedBipartiteGraph& g, Layer layer,
                       std::optional<Direction> direction) {
  if (!direction) throw Error(ErrorCode::invalid_argument, "directed graph needs a direction");
  // users: out -> M, in -> N; posts: in -> M, out -> N
  const bool use_m = (layer == Layer::left) == (*direction == Direction::out);
  return degrees(use_m ? g.authorship() : g.retweets(), layer);
}

}  // namespace nullnet
