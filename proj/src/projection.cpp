#include "nullnet/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "nullnet/error.hpp"
#include "nullnet/io.hpp"

namespace nullnet {

std::string to_string(DistributionMode mode) {
  return mode == DistributionMode::poisson ? "poisson" : "poisson-binomial";
}

std::string to_string(FdrFamily family) {
  return family == FdrFamily::nonzero ? "nonzero" : "all-pairs";
}

DistributionMode parse_distribution_mode(const std::string& text) {
  if (text == "poisson") return DistributionMode::poisson;
  if (text == "poisson-binomial" || text == "poisson_binomial" || text == "exact")
    return DistributionMode::poisson_binomial;
  throw Error(ErrorCode::invalid_argument, "unknown distribution '" + text + "'");
}

FdrFamily parse_fdr_family(const std::string& text) {
  if (text == "nonzero") return FdrFamily::nonzero;
  if (text == "all-pairs" || text == "all_pairs") return FdrFamily::all_pairs;
  throw Error(ErrorCode::invalid_argument, "unknown fdr family '" + text + "'");
}

std::int64_t count_v_motifs(const BipartiteGraph& g, NodeIndex i, NodeIndex j) {
  if (i == j) throw Error(ErrorCode::invalid_argument, "V-motifs need two distinct nodes");
  if (i >= g.n_left() || j >= g.n_left())
    throw Error(ErrorCode::invalid_argument, "node out of range");
  auto a = g.right_neighbors(i);
  auto b = g.right_neighbors(j);
  std::int64_t shared = 0;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end() && ib != b.end();) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++shared;
      ++ia;
      ++ib;
    }
  }
  return shared;
}

std::int64_t count_directed_v_motifs(const DirectedBipartiteGraph& g, NodeIndex i, NodeIndex j) {
  if (i == j) throw Error(ErrorCode::invalid_argument, "V-motifs need two distinct nodes");
  if (i >= g.n_users() || j >= g.n_users())
    throw Error(ErrorCode::invalid_argument, "node out of range");
  std::int64_t flow = 0;
  for (NodeIndex post : g.authorship().right_neighbors(i))
    if (g.retweets().has_edge(j, post)) ++flow;
  return flow;
}

namespace {

struct Groups {
  std::vector<double> value;
  std::vector<double> count;
};

Groups group(const std::vector<double>& values) {
  std::map<double, double> m;
  for (double v : values) m[v] += 1.0;
  Groups g;
  for (const auto& [v, c] : m) {
    g.value.push_back(v);
    g.count.push_back(c);
  }
  return g;
}

double clamp_p(double p) {
  // p-values live in (0, 1]; underflow is pinned to the smallest normal.
  return std::clamp(p, std::numeric_limits<double>::min(), 1.0);
}

void check_indices(const BicmParams& params, NodeIndex i, NodeIndex j) {
  if (i >= params.n_left() || j >= params.n_left())
    throw Error(ErrorCode::invalid_argument, "node out of range");
}

void check_indices(const BidcmParams& params, NodeIndex i, NodeIndex j) {
  if (i >= params.n_users() || j >= params.n_users())
    throw Error(ErrorCode::invalid_argument, "node out of range");
}

}  // namespace

double expected_v_motifs(const BicmParams& params, NodeIndex i, NodeIndex j) {
  check_indices(params, i, j);
  double s = 0.0;
  for (double ya : params.y)
    s += params.probability_from(params.x[i], ya) * params.probability_from(params.x[j], ya);
  return s;
}

double expected_directed_v_motifs(const BidcmParams& params, NodeIndex i, NodeIndex j) {
  check_indices(params, i, j);
  if (params.closed_form)
    return static_cast<double>(params.user_out[i]) * static_cast<double>(params.user_in[j]) /
           static_cast<double>(params.n_posts);
  double s = 0.0;
  for (NodeIndex a = 0; a < params.n_posts; ++a)
    s += params.authorship_probability(i, a) * params.retweet_probability(j, a);
  return s;
}

std::vector<double> v_motif_probabilities(const BicmParams& params, NodeIndex i, NodeIndex j) {
  check_indices(params, i, j);
  std::vector<double> out;
  out.reserve(params.n_right());
  for (double ya : params.y)
    out.push_back(params.probability_from(params.x[i], ya) *
                  params.probability_from(params.x[j], ya));
  return out;
}

std::vector<double> directed_v_motif_probabilities(const BidcmParams& params, NodeIndex i,
                                                   NodeIndex j) {
  check_indices(params, i, j);
  std::vector<double> out;
  out.reserve(params.n_posts);
  for (NodeIndex a = 0; a < params.n_posts; ++a)
    out.push_back(params.authorship_probability(i, a) * params.retweet_probability(j, a));
  return out;
}

double poisson_upper_tail(std::int64_t observed, double lambda) {
  if (observed < 0) throw Error(ErrorCode::invalid_argument, "negative motif count");
  if (!(lambda >= 0)) throw Error(ErrorCode::invalid_argument, "negative Poisson mean");
  if (observed == 0) return 1.0;
  if (lambda == 0.0) return clamp_p(0.0);
  // P(X >= k) for Poisson(lambda) is the regularized lower incomplete gamma P(k, lambda).
  return clamp_p(boost::math::gamma_p(static_cast<double>(observed), lambda));
}

double poisson_binomial_upper_tail(std::int64_t observed, std::span<const double> probabilities) {
  if (observed < 0) throw Error(ErrorCode::invalid_argument, "negative motif count");
  if (observed == 0) return 1.0;
  const auto k = static_cast<std::size_t>(observed);
  // dist[s] = P(X = s) for s < k; dist[k] accumulates P(X >= k).
  std::vector<double> dist(k + 1, 0.0);
  dist[0] = 1.0;
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(ErrorCode::invalid_argument, "probability outside [0,1]");
    if (p == 0.0) continue;
    dist[k] += dist[k - 1] * p;
    for (std::size_t s = k - 1; s > 0; --s) dist[s] = dist[s] * (1.0 - p) + dist[s - 1] * p;
    dist[0] *= (1.0 - p);
  }
  return clamp_p(dist[k]);
}

double poisson_binomial_upper_tail(std::int64_t observed, std::span<const double> probabilities,
                                   std::span<const double> multiplicities) {
  if (probabilities.size() != multiplicities.size())
    throw Error(ErrorCode::invalid_argument, "probability and multiplicity lengths differ");
  if (observed < 0) throw Error(ErrorCode::invalid_argument, "negative motif count");
  if (observed == 0) return 1.0;
  const auto k = static_cast<std::size_t>(observed);
  std::vector<double> dist(k + 1, 0.0), next(k + 1);
  dist[0] = 1.0;
  for (std::size_t g = 0; g < probabilities.size(); ++g) {
    const double p = probabilities[g];
    const double c = multiplicities[g];
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(ErrorCode::invalid_argument, "probability outside [0,1]");
    if (p == 0.0 || c == 0.0) continue;
    const boost::math::binomial_distribution<double> bin(c, p);
    std::vector<double> pmf(k + 1), tail(k + 1);
    for (std::size_t t = 0; t <= k; ++t) {
      pmf[t] = static_cast<double>(t) <= c ? boost::math::pdf(bin, static_cast<double>(t)) : 0.0;
      // P(Bin >= t)
      tail[t] = t == 0 ? 1.0
                : static_cast<double>(t) <= c
                    ? boost::math::cdf(boost::math::complement(bin, static_cast<double>(t - 1)))
                    : 0.0;
    }
    std::fill(next.begin(), next.end(), 0.0);
    next[k] = dist[k];
    for (std::size_t s = 0; s < k; ++s) {
      if (dist[s] == 0.0) continue;
      for (std::size_t t = 0; s + t < k; ++t) next[s + t] += dist[s] * pmf[t];
      next[k] += dist[s] * tail[k - s];
    }
    dist.swap(next);
  }
  return clamp_p(dist[k]);
}

double motif_p_value(std::int64_t observed, std::span<const double> probabilities,
                     DistributionMode mode) {
  if (observed < 0) throw Error(ErrorCode::invalid_argument, "negative motif count");
  for (double p : probabilities)
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(ErrorCode::invalid_argument, "probability outside [0,1]");
  if (mode == DistributionMode::poisson_binomial)
    return poisson_binomial_upper_tail(observed, probabilities);
  const double lambda = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
  return poisson_upper_tail(observed, lambda);
}

double motif_p_value(std::int64_t observed, double poisson_mean) {
  return poisson_upper_tail(observed, poisson_mean);
}

BhResult benjamini_hochberg(std::span<const double> p_values, double alpha,
                            std::size_t family_size) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::invalid_argument, "alpha must lie in (0,1)");
  BhResult r;
  r.family_size = std::max(family_size, p_values.size());
  std::vector<std::size_t> order(p_values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::size_t last = 0;  // number rejected
  const auto m = static_cast<double>(r.family_size);
  for (std::size_t rank = 1; rank <= order.size(); ++rank)
    if (p_values[order[rank - 1]] <= static_cast<double>(rank) * alpha / m) last = rank;
  r.rejected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(last));
  std::sort(r.rejected.begin(), r.rejected.end());
  if (last > 0) r.threshold = p_values[order[last - 1]];
  return r;
}

std::vector<NodePair> fdr_select(std::span<const PairPValue> family, double alpha) {
  if (family.empty()) throw Error(ErrorCode::empty_input, "empty hypothesis family");
  std::vector<double> p;
  p.reserve(family.size());
  for (const auto& e : family) p.push_back(e.p_value);
  const auto bh = benjamini_hochberg(p, alpha);
  std::vector<NodePair> out;
  out.reserve(bh.rejected.size());
  for (auto idx : bh.rejected) out.push_back(family[idx].pair);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeIndex> ValidatedProjection::nodes() const {
  std::vector<NodeIndex> out;
  out.reserve(2 * edges.size());
  for (const auto& e : edges) {
    out.push_back(e.source);
    out.push_back(e.target);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool ValidatedProjection::has_edge(NodeIndex i, NodeIndex j) const {
  auto lookup = [&](NodeIndex s, NodeIndex t) {
    auto it = std::lower_bound(edges.begin(), edges.end(), NodePair{s, t},
                               [](const MotifStatistics& e, const NodePair& key) {
                                 return NodePair{e.source, e.target} < key;
                               });
    return it != edges.end() && it->source == s && it->target == t;
  };
  if (directed) return lookup(i, j);
  return lookup(std::min(i, j), std::max(i, j));
}

namespace {

/// Splits [0, n) into contiguous ranges, runs `work(begin, end, out)` on each
/// and concatenates the results in range order.
template <typename Work>
std::vector<MotifStatistics> run_partitioned(std::size_t n, unsigned threads, Work work) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::vector<MotifStatistics>> parts(threads);
  if (threads == 1) {
    work(std::size_t{0}, n, parts[0]);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = std::min(n, t * chunk), e = std::min(n, b + chunk);
      pool.emplace_back([&, b, e, t] { work(b, e, parts[t]); });
    }
  }
  std::vector<MotifStatistics> all;
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

ValidatedProjection finish(std::vector<std::string> ids, std::vector<MotifStatistics> tested,
                           std::size_t family_size, bool directed,
                           const ValidationOptions& options, DistributionMode used,
                           std::string null_model) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0))
    throw Error(ErrorCode::invalid_argument, "alpha must lie in (0,1)");
  ValidatedProjection proj;
  proj.node_ids = std::move(ids);
  proj.directed = directed;
  proj.alpha = options.alpha;
  proj.family = options.family;
  proj.distribution = used;
  proj.null_model = std::move(null_model);
  proj.tested_pairs = tested.size();
  proj.family_size = options.family == FdrFamily::all_pairs ? family_size : tested.size();

  std::vector<double> p;
  p.reserve(tested.size());
  for (const auto& t : tested) p.push_back(t.p_value);
  if (!tested.empty()) {
    const auto bh = benjamini_hochberg(p, options.alpha, proj.family_size);
    proj.bh_threshold = bh.threshold;
    proj.edges.reserve(bh.rejected.size());
    for (auto idx : bh.rejected) proj.edges.push_back(tested[idx]);
  }
  std::sort(proj.edges.begin(), proj.edges.end(), [](const auto& a, const auto& b) {
    return NodePair{a.source, a.target} < NodePair{b.source, b.target};
  });
  proj.rejected_count = proj.edges.size();
  return proj;
}

}  // namespace

ValidatedProjection validate_projection(const BipartiteGraph& g, const BicmParams& params,
                                        const ValidationOptions& options) {
  if (params.n_left() != g.n_left() || params.n_right() != g.n_right())
    throw Error(ErrorCode::invalid_argument, "null model was not fitted on this graph");
  const std::size_t n = g.n_left();
  const DistributionMode used = options.distribution == DistributionMode::poisson_binomial &&
                                        g.n_right() <= options.exact_cutoff
                                    ? DistributionMode::poisson_binomial
                                    : DistributionMode::poisson;
  const Groups ygroups = group(params.y);

  auto work = [&](std::size_t begin, std::size_t end, std::vector<MotifStatistics>& out) {
    std::vector<std::int64_t> shared(n, 0);
    std::vector<NodeIndex> touched;
    std::vector<double> probs(ygroups.value.size());
    for (std::size_t ii = begin; ii < end; ++ii) {
      const auto i = static_cast<NodeIndex>(ii);
      touched.clear();
      for (NodeIndex a : g.right_neighbors(i))
        for (NodeIndex j : g.left_neighbors(a)) {
          if (j <= i) continue;
          if (shared[j]++ == 0) touched.push_back(j);
        }
      std::sort(touched.begin(), touched.end());
      for (NodeIndex j : touched) {
        double lambda = 0.0;
        for (std::size_t b = 0; b < ygroups.value.size(); ++b) {
          probs[b] = params.probability_from(params.x[i], ygroups.value[b]) *
                     params.probability_from(params.x[j], ygroups.value[b]);
          lambda += ygroups.count[b] * probs[b];
        }
        MotifStatistics s{i, j, shared[j], lambda, 1.0, used};
        s.p_value = used == DistributionMode::poisson
                        ? poisson_upper_tail(s.observed, lambda)
                        : poisson_binomial_upper_tail(s.observed, probs, ygroups.count);
        out.push_back(s);
        shared[j] = 0;
      }
    }
  };
  auto tested = run_partitioned(n, options.threads, work);
  return finish(g.left_ids(), std::move(tested), n * (n - 1) / 2, false, options, used,
                to_string(params.mode));
}

ValidatedProjection validate_projection(const DirectedBipartiteGraph& g, const BidcmParams& params,
                                        const ValidationOptions& options) {
  if (params.n_users() != g.n_users() || params.n_posts != g.n_posts())
    throw Error(ErrorCode::invalid_argument, "null model was not fitted on this graph");
  const std::size_t n = g.n_users();
  const DistributionMode used = options.distribution == DistributionMode::poisson_binomial &&
                                        g.n_posts() <= options.exact_cutoff
                                    ? DistributionMode::poisson_binomial
                                    : DistributionMode::poisson;

  auto work = [&](std::size_t begin, std::size_t end, std::vector<MotifStatistics>& out) {
    std::vector<std::int64_t> flow(n, 0);
    std::vector<NodeIndex> touched;
    for (std::size_t ii = begin; ii < end; ++ii) {
      const auto i = static_cast<NodeIndex>(ii);
      touched.clear();
      for (NodeIndex post : g.authorship().right_neighbors(i))
        for (NodeIndex j : g.retweets().left_neighbors(post)) {
          if (j == i) continue;
          if (flow[j]++ == 0) touched.push_back(j);
        }
      std::sort(touched.begin(), touched.end());
      for (NodeIndex j : touched) {
        const double lambda = expected_directed_v_motifs(params, i, j);
        MotifStatistics s{i, j, flow[j], lambda, 1.0, used};
        if (used == DistributionMode::poisson) {
          s.p_value = poisson_upper_tail(s.observed, lambda);
        } else {
          const auto probs = directed_v_motif_probabilities(params, i, j);
          s.p_value = poisson_binomial_upper_tail(s.observed, probs);
        }
        out.push_back(s);
        flow[j] = 0;
      }
    }
  };
  auto tested = run_partitioned(n, options.threads, work);
  const std::string model =
      (params.closed_form ? std::string("closed-form") : std::string("general")) + "/" +
      to_string(params.retweet.mode);
  return finish(g.user_ids(), std::move(tested), n * (n - 1), true, options, used, model);
}

nlohmann::json projection_manifest(const ValidatedProjection& p) {
  return {{"directed", p.directed},
          {"alpha", p.alpha},
          {"fdr_family", to_string(p.family)},
          {"family_size", p.family_size},
          {"tested_pairs", p.tested_pairs},
          {"mode", to_string(p.distribution)},
          {"null_model", p.null_model},
          {"rejected_count", p.rejected_count},
          {"bh_threshold", p.bh_threshold},
          {"layer_nodes", p.node_ids.size()},
          {"projected_nodes", p.nodes().size()},
          {"isolated_dropped", p.isolated_dropped()}};
}

void write_projection(const ValidatedProjection& p, const std::filesystem::path& csv_path) {
  std::string out = io::csv_line({"source", "target", "observed", "expected", "p_value"});
  for (const auto& e : p.edges)
    out += io::csv_line({p.node_ids[e.source], p.node_ids[e.target], std::to_string(e.observed),
                         io::format_double(e.expected), io::format_double(e.p_value)});
  io::write_file(csv_path, out);
  auto manifest = projection_manifest(p);
  manifest["checksum"] = "sha256:" + io::sha256_hex(out);
  io::write_json(io::manifest_path_for(csv_path), manifest);
}

ValidatedProjection read_projection(const std::filesystem::path& csv_path, bool directed) {
  const auto table = io::read_csv(csv_path);
  const auto si = table.column("source"), ti = table.column("target");
  const auto oi = table.column("observed"), ei = table.column("expected"),
             pi = table.column("p_value");
  std::vector<std::string> ids;
  for (const auto& r : table.rows) {
    ids.push_back(r[si]);
    ids.push_back(r[ti]);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto index = [&](const std::string& id) {
    return static_cast<NodeIndex>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };

  ValidatedProjection p;
  p.directed = directed;
  const auto manifest_path = io::manifest_path_for(csv_path);
  if (std::filesystem::exists(manifest_path)) {
    const auto m = io::read_json(manifest_path);
    p.directed = m.value("directed", directed);
    p.alpha = m.value("alpha", 0.05);
    p.family = parse_fdr_family(m.value("fdr_family", std::string("nonzero")));
    p.distribution = parse_distribution_mode(m.value("mode", std::string("poisson")));
    p.null_model = m.value("null_model", std::string());
    p.family_size = m.value("family_size", std::size_t{0});
    p.tested_pairs = m.value("tested_pairs", std::size_t{0});
    p.bh_threshold = m.value("bh_threshold", 0.0);
  }
  try {
    for (const auto& r : table.rows) {
      MotifStatistics s;
      s.source = index(r[si]);
      s.target = index(r[ti]);
      if (s.source == s.target) throw Error(ErrorCode::parse, "self-loop in projection");
      if (!p.directed && s.target < s.source) std::swap(s.source, s.target);
      s.observed = std::stoll(r[oi]);
      s.expected = std::stod(r[ei]);
      s.p_value = std::stod(r[pi]);
      s.distribution = p.distribution;
      p.edges.push_back(s);
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::parse, "malformed number in projection CSV");
  }
  std::sort(p.edges.begin(), p.edges.end(), [](const auto& a, const auto& b) {
    return NodePair{a.source, a.target} < NodePair{b.source, b.target};
  });
  p.edges.erase(std::unique(p.edges.begin(), p.edges.end(),
                            [](const auto& a, const auto& b) {
                              return a.source == b.source && a.target == b.target;
                            }),
                p.edges.end());
  p.node_ids = std::move(ids);
  p.rejected_count = p.edges.size();
  return p;
}

}  // namespace nullnet
