#include "nullnet/communities.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>
#include <unordered_map>

#include "nullnet/error.hpp"
#include "nullnet/io.hpp"
#include "nullnet/random.hpp"

namespace nullnet {

UndirectedGraph UndirectedGraph::from_edges(std::vector<std::string> node_ids,
                                            const std::vector<NodePair>& edges) {
  UndirectedGraph g;
  g.node_ids = std::move(node_ids);
  g.adjacency.resize(g.node_ids.size());
  for (const auto& [a, b] : edges) {
    if (a >= g.size() || b >= g.size()) throw Error(ErrorCode::invalid_argument, "edge out of range");
    if (a == b) continue;
    g.adjacency[a].push_back(b);
    g.adjacency[b].push_back(a);
  }
  for (auto& nb : g.adjacency) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    g.n_edges += nb.size();
  }
  g.n_edges /= 2;
  return g;
}

namespace {

/// Compact index over the non-isolated nodes of a projection.
std::pair<std::vector<std::string>, std::vector<NodePair>> compact(const ValidatedProjection& p) {
  const auto nodes = p.nodes();
  std::vector<NodeIndex> remap(p.node_ids.size(), 0);
  std::vector<std::string> ids;
  ids.reserve(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    remap[nodes[k]] = static_cast<NodeIndex>(k);
    ids.push_back(p.node_ids[nodes[k]]);
  }
  std::vector<NodePair> edges;
  edges.reserve(p.edges.size());
  for (const auto& e : p.edges) edges.emplace_back(remap[e.source], remap[e.target]);
  return {std::move(ids), std::move(edges)};
}

}  // namespace

UndirectedGraph UndirectedGraph::from_projection(const ValidatedProjection& p) {
  auto [ids, edges] = compact(p);
  return from_edges(std::move(ids), edges);
}

UndirectedGraph UndirectedGraph::induced(const std::vector<NodeIndex>& nodes) const {
  std::vector<NodeIndex> remap(size(), static_cast<NodeIndex>(-1));
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    remap[nodes[k]] = static_cast<NodeIndex>(k);
    ids.push_back(node_ids[nodes[k]]);
  }
  std::vector<NodePair> edges;
  for (NodeIndex u : nodes)
    for (NodeIndex v : adjacency[u])
      if (remap[v] != static_cast<NodeIndex>(-1) && u < v) edges.emplace_back(remap[u], remap[v]);
  return from_edges(std::move(ids), edges);
}

DirectedGraph DirectedGraph::from_edges(std::vector<std::string> node_ids,
                                        const std::vector<NodePair>& edges) {
  DirectedGraph g;
  g.node_ids = std::move(node_ids);
  g.out.resize(g.node_ids.size());
  for (const auto& [a, b] : edges) {
    if (a >= g.size() || b >= g.size()) throw Error(ErrorCode::invalid_argument, "edge out of range");
    g.out[a].push_back(b);
  }
  for (auto& nb : g.out) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    g.n_edges += nb.size();
  }
  return g;
}

DirectedGraph DirectedGraph::from_projection(const ValidatedProjection& p) {
  auto [ids, edges] = compact(p);
  return from_edges(std::move(ids), edges);
}

int Partition::n_communities() const {
  return community.empty() ? 0 : *std::max_element(community.begin(), community.end()) + 1;
}

std::vector<NodeIndex> Partition::members(int community_id) const {
  std::vector<NodeIndex> out;
  for (std::size_t v = 0; v < community.size(); ++v)
    if (community[v] == community_id) out.push_back(static_cast<NodeIndex>(v));
  return out;
}

double modularity(const UndirectedGraph& g, const std::vector<int>& community) {
  if (community.size() != g.size())
    throw Error(ErrorCode::invalid_argument, "partition does not cover every node");
  if (g.n_edges == 0) return 0.0;
  std::unordered_map<int, double> internal, degree;
  for (NodeIndex u = 0; u < g.size(); ++u) {
    if (community[u] < 0) throw Error(ErrorCode::invalid_argument, "uncovered node in partition");
    degree[community[u]] += static_cast<double>(g.adjacency[u].size());
    for (NodeIndex v : g.adjacency[u])
      if (u < v && community[u] == community[v]) internal[community[u]] += 1.0;
  }
  const double m = static_cast<double>(g.n_edges);
  double q = 0.0;
  for (const auto& [c, d] : degree) {
    const double l = internal.count(c) ? internal.at(c) : 0.0;
    q += l / m - (d / (2.0 * m)) * (d / (2.0 * m));
  }
  return q;
}

namespace {

struct WeightedGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;  // no self loops
  std::vector<double> self_loop;
  std::vector<double> strength;
  double two_m = 0.0;

  std::size_t size() const { return adj.size(); }
};

WeightedGraph to_weighted(const UndirectedGraph& g) {
  WeightedGraph w;
  w.adj.resize(g.size());
  w.self_loop.assign(g.size(), 0.0);
  w.strength.assign(g.size(), 0.0);
  for (NodeIndex u = 0; u < g.size(); ++u) {
    for (NodeIndex v : g.adjacency[u]) w.adj[u].emplace_back(static_cast<int>(v), 1.0);
    w.strength[u] = static_cast<double>(g.adjacency[u].size());
    w.two_m += w.strength[u];
  }
  return w;
}

/// Local-moving phase. Returns true when at least one node changed community.
bool local_moving(const WeightedGraph& g, std::vector<int>& comm, std::mt19937_64& rng) {
  const std::size_t n = g.size();
  std::vector<double> tot(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) tot[comm[u]] += g.strength[u];
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> link(n, 0.0);
  std::vector<int> touched;
  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (int u : order) {
      const double ku = g.strength[u];
      if (ku == 0.0) continue;
      const int own = comm[u];
      touched.clear();
      touched.push_back(own);
      link[own] = 0.0;
      for (const auto& [v, w] : g.adj[u]) {
        const int c = comm[v];
        if (link[c] == 0.0 && c != own) touched.push_back(c);
        link[c] += w;
      }
      tot[own] -= ku;
      int best = own;
      double best_gain = link[own] - tot[own] * ku / g.two_m;
      for (int c : touched) {
        const double gain = link[c] - tot[c] * ku / g.two_m;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best = c;
        }
      }
      tot[best] += ku;
      if (best != own) {
        comm[u] = best;
        moved = true;
        any_move = true;
      }
      for (int c : touched) link[c] = 0.0;
    }
  }
  return any_move;
}

/// Renumbers communities to 0..k-1 and returns k.
int renumber(std::vector<int>& comm) {
  std::unordered_map<int, int> ids;
  for (int& c : comm) {
    auto [it, inserted] = ids.emplace(c, static_cast<int>(ids.size()));
    c = it->second;
  }
  return static_cast<int>(ids.size());
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<int>& comm, int k) {
  WeightedGraph out;
  out.adj.resize(k);
  out.self_loop.assign(k, 0.0);
  out.strength.assign(k, 0.0);
  out.two_m = g.two_m;
  std::vector<std::unordered_map<int, double>> acc(k);
  for (std::size_t u = 0; u < g.size(); ++u) {
    const int cu = comm[u];
    out.strength[cu] += g.strength[u];
    out.self_loop[cu] += g.self_loop[u];
    for (const auto& [v, w] : g.adj[u]) {
      const int cv = comm[v];
      if (cu == cv) {
        // each internal edge is visited from both ends
        out.self_loop[cu] += 0.5 * w;
      } else {
        acc[cu][cv] += w;
      }
    }
  }
  for (int c = 0; c < k; ++c) {
    out.adj[c].assign(acc[c].begin(), acc[c].end());
    std::sort(out.adj[c].begin(), out.adj[c].end());
  }
  return out;
}

/// Largest community first; ties by smallest member index.
void canonicalize(std::vector<int>& comm) {
  const int k = renumber(comm);
  std::vector<std::size_t> size(k, 0);
  std::vector<std::size_t> first(k, comm.size());
  for (std::size_t v = 0; v < comm.size(); ++v) {
    ++size[comm[v]];
    first[comm[v]] = std::min(first[comm[v]], v);
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return size[a] != size[b] ? size[a] > size[b] : first[a] < first[b];
  });
  std::vector<int> rank(k);
  for (int r = 0; r < k; ++r) rank[order[r]] = r;
  for (int& c : comm) c = rank[c];
}

}  // namespace

std::vector<int> louvain_once(const UndirectedGraph& g, std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  std::vector<int> membership(g.size());
  std::iota(membership.begin(), membership.end(), 0);
  if (g.n_edges == 0) return membership;

  WeightedGraph level = to_weighted(g);
  while (true) {
    std::vector<int> comm(level.size());
    std::iota(comm.begin(), comm.end(), 0);
    if (!local_moving(level, comm, rng)) break;
    const int k = renumber(comm);
    for (int& m : membership) m = comm[m];
    if (static_cast<std::size_t>(k) == level.size()) break;
    level = aggregate(level, comm, k);
  }
  canonicalize(membership);
  return membership;
}

Partition louvain_best(const UndirectedGraph& g, const LouvainOptions& options) {
  if (g.size() == 0) throw Error(ErrorCode::empty_input, "cannot partition an empty graph");
  if (options.restarts < 1) throw Error(ErrorCode::invalid_argument, "restarts must be >= 1");
  const auto restarts = static_cast<std::size_t>(options.restarts);
  std::vector<std::vector<int>> results(restarts);
  std::vector<double> scores(restarts, 0.0);

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      results[r] = louvain_once(g, mix_seed(options.seed, r));
      scores[r] = modularity(g, results[r]);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, options.restarts));
  if (threads == 1) {
    run(0, restarts);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (restarts + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(run, std::min(restarts, t * chunk), std::min(restarts, (t + 1) * chunk));
  }

  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r)
    if (scores[r] > scores[best]) best = r;

  Partition p;
  p.node_ids = g.node_ids;
  p.community = std::move(results[best]);
  p.modularity = scores[best];
  p.restart_count = options.restarts;
  p.rng_seed = options.seed;
  p.restart_modularities = std::move(scores);
  return p;
}

Partition subcommunities(const UndirectedGraph& g, const Partition& partition, int community_id,
                         const LouvainOptions& options) {
  if (partition.community.size() != g.size())
    throw Error(ErrorCode::invalid_argument, "partition does not match graph");
  const auto members = partition.members(community_id);
  if (members.empty())
    throw Error(ErrorCode::invalid_argument,
                "no community " + std::to_string(community_id) + " in partition");
  if (members.size() < 2)
    throw Error(ErrorCode::invalid_argument,
                "community " + std::to_string(community_id) + " has a single node");
  Partition sub = louvain_best(g.induced(members), options);
  sub.prefix = partition.prefix + std::to_string(community_id) + ".";
  return sub;
}

std::size_t LabelAssignment::labeled_count() const {
  return static_cast<std::size_t>(
      std::count_if(label.begin(), label.end(), [](const auto& l) { return l.has_value(); }));
}

LabelAssignment propagate_labels(const UndirectedGraph& g,
                                 const std::map<std::string, std::string>& seeds,
                                 const PropagationOptions& options) {
  if (seeds.empty()) throw Error(ErrorCode::invalid_argument, "label propagation needs seeds");
  const std::size_t n = g.size();

  std::vector<std::string> names;
  std::map<std::string, int> name_index;
  for (const auto& [node, label] : seeds)
    if (name_index.emplace(label, 0).second) names.push_back(label);
  std::sort(names.begin(), names.end());
  for (std::size_t k = 0; k < names.size(); ++k) name_index[names[k]] = static_cast<int>(k);

  std::unordered_map<std::string, NodeIndex> id_index;
  for (NodeIndex v = 0; v < n; ++v) id_index.emplace(g.node_ids[v], v);

  std::vector<int> label(n, -1);
  std::vector<bool> is_seed(n, false);
  for (const auto& [node, name] : seeds) {
    auto it = id_index.find(node);
    if (it == id_index.end())
      throw Error(ErrorCode::invalid_argument, "seed '" + node + "' is not a node of the graph");
    label[it->second] = name_index.at(name);
    is_seed[it->second] = true;
  }

  std::vector<NodeIndex> order;
  for (NodeIndex v = 0; v < n; ++v)
    if (!is_seed[v]) order.push_back(v);

  // Sweep in which each node first got a label. A node still unlabelled when
  // a sweep starts only listens to neighbours labelled in earlier sweeps, so
  // labels advance one hop per sweep and a lone cross edge visited early
  // cannot capture a whole community before its own seeds reach it.
  std::vector<int> labelled_in(n, -1);
  for (NodeIndex v = 0; v < n; ++v)
    if (is_seed[v]) labelled_in[v] = 0;

  std::mt19937_64 rng(options.seed);
  std::vector<int> freq(names.size(), 0);
  std::vector<int> tied;
  int sweeps = 0;
  bool changed = true;
  while (changed && sweeps < options.max_sweeps) {
    changed = false;
    ++sweeps;
    std::shuffle(order.begin(), order.end(), rng);
    for (NodeIndex v : order) {
      const bool fresh = label[v] < 0;
      auto heard = [&](NodeIndex u) {
        return label[u] >= 0 && (!fresh || labelled_in[u] < sweeps);
      };
      int top = 0;
      for (NodeIndex u : g.adjacency[v])
        if (heard(u)) top = std::max(top, ++freq[label[u]]);
      if (top == 0) continue;
      tied.clear();
      for (NodeIndex u : g.adjacency[v])
        if (heard(u) && freq[label[u]] == top) {
          tied.push_back(label[u]);
          freq[label[u]] = -1;  // mark as collected
        }
      for (NodeIndex u : g.adjacency[v])
        if (label[u] >= 0) freq[label[u]] = 0;
      if (!fresh && std::find(tied.begin(), tied.end(), label[v]) != tied.end()) continue;
      std::sort(tied.begin(), tied.end());
      std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
      label[v] = tied[pick(rng)];
      if (fresh) labelled_in[v] = sweeps;
      changed = true;
    }
  }

  LabelAssignment out;
  out.node_ids = g.node_ids;
  out.is_seed = std::move(is_seed);
  out.iterations_to_converge = sweeps;
  out.rng_seed = options.seed;
  out.label.resize(n);
  for (std::size_t v = 0; v < n; ++v)
    if (label[v] >= 0) out.label[v] = names[label[v]];
  return out;
}

HubScores hits_scores(const DirectedGraph& g, double tol, int max_iter) {
  if (g.n_edges == 0) throw Error(ErrorCode::invalid_argument, "hub scores need at least one edge");
  const std::size_t n = g.size();
  std::vector<double> hub(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> auth(hub);
  std::vector<double> next_auth(n), next_hub(n);

  auto normalize = [](std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    if (s > 0)
      for (double& x : v) x /= s;
  };

  double delta = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    std::fill(next_auth.begin(), next_auth.end(), 0.0);
    for (std::size_t u = 0; u < n; ++u)
      for (NodeIndex v : g.out[u]) next_auth[v] += hub[u];
    normalize(next_auth);
    for (std::size_t u = 0; u < n; ++u) {
      double s = 0.0;
      for (NodeIndex v : g.out[u]) s += next_auth[v];
      next_hub[u] = s;
    }
    normalize(next_hub);
    delta = 0.0;
    for (std::size_t v = 0; v < n; ++v)
      delta = std::max({delta, std::abs(next_auth[v] - auth[v]), std::abs(next_hub[v] - hub[v])});
    auth.swap(next_auth);
    hub.swap(next_hub);
    if (delta <= tol) return {g.node_ids, std::move(hub), std::move(auth), it};
  }
  throw ConvergenceError("hub scores did not converge in " + std::to_string(max_iter) +
                             " iterations",
                         delta, max_iter);
}

void write_partition(const Partition& p, const std::filesystem::path& csv_path,
                     const nlohmann::json& extra) {
  std::string out = io::csv_line({"node_id", "community"});
  for (std::size_t v = 0; v < p.node_ids.size(); ++v)
    out += io::csv_line({p.node_ids[v], p.label(static_cast<NodeIndex>(v))});
  io::write_file(csv_path, out);
  nlohmann::json manifest = {{"modularity", p.modularity},
                             {"restarts", p.restart_count},
                             {"seed", p.rng_seed},
                             {"communities", p.n_communities()},
                             {"nodes", p.node_ids.size()},
                             {"checksum", "sha256:" + io::sha256_hex(out)}};
  manifest.update(extra);
  io::write_json(io::manifest_path_for(csv_path), manifest);
}

void write_labels(const LabelAssignment& labels, const std::filesystem::path& csv_path) {
  std::string out = io::csv_line({"node_id", "community"});
  for (std::size_t v = 0; v < labels.node_ids.size(); ++v)
    out += io::csv_line({labels.node_ids[v], labels.label[v].value_or("")});
  io::write_file(csv_path, out);
  const auto seeds = std::count(labels.is_seed.begin(), labels.is_seed.end(), true);
  io::write_json(io::manifest_path_for(csv_path),
                 {{"nodes", labels.node_ids.size()},
                  {"labeled", labels.labeled_count()},
                  {"seeds", seeds},
                  {"sweeps", labels.iterations_to_converge},
                  {"seed", labels.rng_seed},
                  {"checksum", "sha256:" + io::sha256_hex(out)}});
}

void write_hubs(const HubScores& scores, const std::filesystem::path& csv_path) {
  std::vector<std::size_t> order(scores.node_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores.hub[a] > scores.hub[b]; });
  std::string out = io::csv_line({"node_id", "hub", "authority"});
  for (auto v : order)
    out += io::csv_line({scores.node_ids[v], io::format_fixed(scores.hub[v], 12),
                         io::format_fixed(scores.authority[v], 12)});
  io::write_file(csv_path, out);
  io::write_json(io::manifest_path_for(csv_path),
                 {{"nodes", scores.node_ids.size()},
                  {"iterations", scores.iterations},
                  {"checksum", "sha256:" + io::sha256_hex(out)}});
}

std::map<std::string, std::string> read_labels(const std::filesystem::path& csv_path) {
  const auto table = io::read_csv(csv_path);
  const auto ni = table.column("node_id"), ci = table.column("community");
  std::map<std::string, std::string> out;
  for (const auto& r : table.rows)
    if (!r[ci].empty()) out[r[ni]] = r[ci];
  return out;
}

}  // namespace nullnet
