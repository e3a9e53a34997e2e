#include "nullnet/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "nullnet/communities.hpp"
#include "nullnet/error.hpp"
#include "nullnet/io.hpp"
#include "nullnet/random.hpp"
#include "nullnet/reputability.hpp"

namespace nullnet {

namespace fs = std::filesystem;

namespace {

std::string id_field(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  std::string out;
  if (v.is_string()) {
    out = v.get<std::string>();
  } else if (v.is_number_integer()) {
    out = std::to_string(v.get<std::int64_t>());
  } else {
    throw Error(ErrorCode::parse, std::string(key) + " must be a string");
  }
  if (out.empty()) throw Error(ErrorCode::parse, std::string(key) + " is empty");
  return out;
}

std::string day_of(std::int64_t ts) { return format_timestamp(ts).substr(0, 10); }

std::int64_t parse_date(const std::string& text) {
  const auto ts = parse_timestamp(nlohmann::json(text + "T00:00:00Z"));
  if (!ts) throw Error(ErrorCode::invalid_argument, "bad date '" + text + "' (want YYYY-MM-DD)");
  return *ts;
}

}  // namespace

TweetRecord parse_tweet(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::parse, "record is not an object");
  try {
    TweetRecord t;
    t.post_id = id_field(j, "post_id");
    t.author_id = id_field(j, "author_id");
    if (j.contains("author_verified")) t.author_verified = j["author_verified"].get<bool>();
    if (j.contains("retweet_of") && !j["retweet_of"].is_null()) {
      t.retweet_of = id_field(j, "retweet_of");
      if (*t.retweet_of == t.post_id) throw Error(ErrorCode::parse, "post retweets itself");
    }
    const auto ts = j.contains("timestamp") ? parse_timestamp(j["timestamp"]) : std::nullopt;
    if (!ts) throw Error(ErrorCode::parse, "missing or bad timestamp");
    t.timestamp = *ts;
    if (j.contains("urls") && !j["urls"].is_null())
      t.urls = j["urls"].get<std::vector<std::string>>();
    if (j.contains("lang") && !j["lang"].is_null()) t.lang = j["lang"].get<std::string>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, e.what());
  }
}

std::string tweet_to_jsonl(const TweetRecord& t) {
  nlohmann::ordered_json j;
  j["post_id"] = t.post_id;
  j["author_id"] = t.author_id;
  j["author_verified"] = t.author_verified;
  if (t.retweet_of) j["retweet_of"] = *t.retweet_of;
  j["timestamp"] = t.timestamp;
  j["urls"] = t.urls;
  if (t.lang) j["lang"] = *t.lang;
  return j.dump() + "\n";
}

TweetStore ingest_text(std::string_view jsonl, const IngestFilters& filters) {
  TweetStore store;
  auto& st = store.stats;
  std::unordered_set<std::string> seen;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    auto end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const auto line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    ++st.lines;
    TweetRecord t;
    try {
      t = parse_tweet(line);
    } catch (const Error&) {
      ++st.malformed;
      continue;
    }
    if (!seen.insert(t.post_id).second) {
      ++st.duplicates;
      continue;
    }
    if (filters.lang && t.lang != filters.lang) {
      ++st.filtered_lang;
      continue;
    }
    if ((filters.from && t.timestamp < *filters.from) || (filters.to && t.timestamp >= *filters.to)) {
      ++st.filtered_date;
      continue;
    }
    ++st.per_day[day_of(t.timestamp)];
    store.records.push_back(std::move(t));
  }
  st.kept = store.records.size();
  if (st.lines > 0 &&
      static_cast<double>(st.malformed) > filters.max_malformed_fraction * static_cast<double>(st.lines))
    throw Error(ErrorCode::parse, std::to_string(st.malformed) + " of " + std::to_string(st.lines) +
                                      " lines are malformed");
  if (st.kept == 0) st.warnings.push_back("empty store: no record passed the filters");
  return store;
}

TweetStore ingest(const std::vector<fs::path>& paths, const IngestFilters& filters) {
  if (paths.empty()) throw Error(ErrorCode::invalid_argument, "no input files");
  std::string text;
  for (const auto& p : paths) {
    text += io::read_file(p);
    if (!text.empty() && text.back() != '\n') text.push_back('\n');
  }
  return ingest_text(text, filters);
}

namespace {

nlohmann::ordered_json stats_json(const IngestStats& s) {
  nlohmann::ordered_json j;
  j["lines"] = s.lines;
  j["malformed"] = s.malformed;
  j["duplicates"] = s.duplicates;
  j["filtered_lang"] = s.filtered_lang;
  j["filtered_date"] = s.filtered_date;
  j["kept"] = s.kept;
  j["warnings"] = s.warnings;
  j["per_day"] = s.per_day;
  return j;
}

}  // namespace

void write_store(const TweetStore& store, const fs::path& dir) {
  std::string out;
  for (const auto& t : store.records) out += tweet_to_jsonl(t);
  io::write_file(dir / "records.jsonl", out);
  auto j = stats_json(store.stats);
  j["checksum"] = "sha256:" + io::sha256_hex(out);
  io::write_json(dir / "ingest.json", j);
}

TweetStore read_store(const fs::path& dir) {
  TweetStore store;
  const auto text = io::read_file(dir / "records.jsonl");
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) store.records.push_back(parse_tweet(line));
  const auto j = io::read_json(dir / "ingest.json");
  auto& s = store.stats;
  s.lines = j.value("lines", std::size_t{0});
  s.malformed = j.value("malformed", std::size_t{0});
  s.duplicates = j.value("duplicates", std::size_t{0});
  s.filtered_lang = j.value("filtered_lang", std::size_t{0});
  s.filtered_date = j.value("filtered_date", std::size_t{0});
  s.kept = store.records.size();
  return store;
}

namespace {

/// Post id -> record index, and the root original of every retweet chain.
struct ChainIndex {
  std::unordered_map<std::string, std::size_t> by_id;

  explicit ChainIndex(const TweetStore& store) {
    for (std::size_t k = 0; k < store.records.size(); ++k) by_id.emplace(store.records[k].post_id, k);
  }

  /// Root original of a retweet, or nullopt when the chain leaves the store
  /// or loops.
  std::optional<std::size_t> root(const TweetStore& store, const TweetRecord& t) const {
    const TweetRecord* cur = &t;
    for (std::size_t hops = 0; hops <= store.records.size(); ++hops) {
      if (!cur->retweet_of) return by_id.at(cur->post_id);
      auto it = by_id.find(*cur->retweet_of);
      if (it == by_id.end()) return std::nullopt;
      cur = &store.records[it->second];
    }
    return std::nullopt;
  }
};

}  // namespace

VerifiedBipartite build_verified_bipartite(const TweetStore& store) {
  std::unordered_set<std::string> verified;
  std::set<std::string> users;
  for (const auto& t : store.records) {
    users.insert(t.author_id);
    if (t.author_verified) verified.insert(t.author_id);
  }
  if (verified.empty()) throw Error(ErrorCode::empty_input, "no verified users in the store");

  VerifiedBipartite out;
  auto& st = out.stats;
  st.verified_users = verified.size();
  st.unverified_users = users.size() - verified.size();

  const ChainIndex chains(store);
  std::vector<std::pair<std::string, std::string>> edges;
  std::map<std::pair<std::string, std::string>, std::int64_t> raw;
  for (const auto& t : store.records) {
    if (!t.is_retweet()) continue;
    const auto root = chains.root(store, t);
    if (!root) {
      ++st.orphan_retweets;
      continue;
    }
    const auto& author = store.records[*root].author_id;
    const auto& retweeter = t.author_id;
    if (author == retweeter) {
      ++st.self_retweets;
      continue;
    }
    ++raw[{retweeter, author}];
    const bool va = verified.count(author) > 0, vr = verified.count(retweeter) > 0;
    if (va && vr) {
      ++st.verified_pairs_skipped;
    } else if (!va && !vr) {
      ++st.unverified_pairs_skipped;
    } else {
      edges.emplace_back(va ? author : retweeter, va ? retweeter : author);
    }
  }
  if (edges.empty())
    throw Error(ErrorCode::empty_input, "no retweet links a verified and an unverified user");
  out.graph = BipartiteGraph::from_edge_list(edges);
  for (const auto& [key, n] : raw) out.raw.push_back({key.first, key.second, n});
  return out;
}

DirectedBipartiteGraph build_user_post_bipartite(const TweetStore& store) {
  if (store.records.empty()) throw Error(ErrorCode::empty_input, "empty store");
  const ChainIndex chains(store);
  std::vector<DirectedLink> links;
  links.reserve(store.records.size());
  for (const auto& t : store.records) {
    if (!t.is_retweet()) {
      links.push_back({t.author_id, t.post_id, LinkKind::author});
      continue;
    }
    const auto root = chains.root(store, t);
    // Unknown parents stay under their own id; the graph keeps them as orphans.
    links.push_back({t.author_id, root ? store.records[*root].post_id : *t.retweet_of,
                     LinkKind::retweet});
  }
  return DirectedBipartiteGraph::from_links(links);
}

// --- configuration ------------------------------------------------------------

namespace {

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::invalid_argument, key + ": expected a boolean, got '" + v + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw Error(ErrorCode::invalid_argument, key + ": bad number '" + v + "'");
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

}  // namespace

void PipelineConfig::set(const std::string& raw_key, const std::string& value) {
  const auto key = normalize_key(raw_key);
  try {
    if (key == "input") input = value;
    else if (key == "annotations") annotations = value;
    else if (key == "output") output = value;
    else if (key == "seeds") seeds = value;
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "alpha") alpha = parse_number<double>(key, value);
    else if (key == "sparse_threshold") sparse_threshold = parse_number<double>(key, value);
    else if (key == "null_model") null_model = parse_null_model_choice(value);
    else if (key == "fdr_family") fdr_family = parse_fdr_family(value);
    else if (key == "distribution") distribution = parse_distribution_mode(value);
    else if (key == "exact_cutoff") exact_cutoff = parse_number<std::size_t>(key, value);
    else if (key == "fit_tol") fit_tol = parse_number<double>(key, value);
    else if (key == "fit_max_iter") fit_max_iter = parse_number<int>(key, value);
    else if (key == "restarts") restarts = parse_number<int>(key, value);
    else if (key == "max_restarts") max_restarts = parse_number<int>(key, value);
    else if (key == "subcommunities") subcommunities = parse_bool(key, value);
    else if (key == "max_sweeps") max_sweeps = parse_number<int>(key, value);
    else if (key == "threads") threads = parse_number<unsigned>(key, value);
    else if (key == "min_occurrence") min_occurrence_verified = min_occurrence_retweet = parse_number<std::int64_t>(key, value);
    else if (key == "min_occurrence_verified") min_occurrence_verified = parse_number<std::int64_t>(key, value);
    else if (key == "min_occurrence_retweet") min_occurrence_retweet = parse_number<std::int64_t>(key, value);
    else if (key == "keep_subdomains") keep_subdomains = parse_bool(key, value);
    else if (key == "split_by_type") split_by_type = parse_bool(key, value);
    else if (key == "bucket_seconds") bucket_seconds = parse_number<std::int64_t>(key, value);
    else if (key == "lang") lang = value.empty() ? std::nullopt : std::optional(value);
    else if (key == "date_from") date_from = value.empty() ? std::nullopt : std::optional(value);
    else if (key == "date_to") date_to = value.empty() ? std::nullopt : std::optional(value);
    else if (key == "max_malformed_fraction") max_malformed_fraction = parse_number<double>(key, value);
    else throw Error(ErrorCode::invalid_argument, "unknown config key '" + raw_key + "'");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_argument) throw;
    throw Error(ErrorCode::invalid_argument, key + ": " + e.what());
  }
}

nlohmann::ordered_json PipelineConfig::to_json() const {
  nlohmann::ordered_json j;
  j["input"] = input.generic_string();
  j["annotations"] = annotations.generic_string();
  j["output"] = output.generic_string();
  j["seeds"] = seeds.generic_string();
  j["seed"] = seed;
  j["alpha"] = alpha;
  j["sparse_threshold"] = sparse_threshold;
  j["null_model"] = to_string(null_model);
  j["fdr_family"] = to_string(fdr_family);
  j["distribution"] = to_string(distribution);
  j["exact_cutoff"] = exact_cutoff;
  j["fit_tol"] = fit_tol;
  j["fit_max_iter"] = fit_max_iter;
  j["restarts"] = restarts;
  j["max_restarts"] = max_restarts;
  j["subcommunities"] = subcommunities;
  j["max_sweeps"] = max_sweeps;
  j["threads"] = threads;
  j["min_occurrence_verified"] = min_occurrence_verified;
  j["min_occurrence_retweet"] = min_occurrence_retweet;
  j["keep_subdomains"] = keep_subdomains;
  j["split_by_type"] = split_by_type;
  j["bucket_seconds"] = bucket_seconds;
  j["lang"] = lang.value_or("");
  j["date_from"] = date_from.value_or("");
  j["date_to"] = date_to.value_or("");
  j["max_malformed_fraction"] = max_malformed_fraction;
  return j;
}

std::string PipelineConfig::get(const std::string& raw_key) const {
  const auto j = to_json();
  const auto key = normalize_key(raw_key);
  if (!j.contains(key)) throw Error(ErrorCode::invalid_argument, "unknown config key '" + raw_key + "'");
  const auto& v = j[key];
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return bool_str(v.get<bool>());
  if (v.is_number_float()) return io::format_double(v.get<double>());
  return v.dump();
}

IngestFilters PipelineConfig::filters() const {
  IngestFilters f;
  f.lang = lang;
  if (date_from) f.from = parse_date(*date_from);
  if (date_to) f.to = parse_date(*date_to);
  f.max_malformed_fraction = max_malformed_fraction;
  return f;
}

void PipelineConfig::validate() const {
  auto bad = [](const std::string& what) { return Error(ErrorCode::invalid_argument, what); };
  if (!(alpha > 0.0 && alpha < 1.0)) throw bad("alpha must lie in (0, 1)");
  if (!(sparse_threshold >= 0.0 && sparse_threshold <= 1.0))
    throw bad("sparse_threshold must lie in [0, 1]");
  if (!(fit_tol > 0.0)) throw bad("fit_tol must be positive");
  if (fit_max_iter < 1) throw bad("fit_max_iter must be >= 1");
  if (restarts < 0) throw bad("restarts must be >= 0");
  if (max_restarts < 1) throw bad("max_restarts must be >= 1");
  if (max_sweeps < 1) throw bad("max_sweeps must be >= 1");
  if (threads < 1) throw bad("threads must be >= 1");
  if (min_occurrence_verified < 1 || min_occurrence_retweet < 1)
    throw bad("min_occurrence must be >= 1");
  if (bucket_seconds < 1) throw bad("bucket_seconds must be >= 1");
  if (!(max_malformed_fraction >= 0.0 && max_malformed_fraction <= 1.0))
    throw bad("max_malformed_fraction must lie in [0, 1]");
  const auto f = filters();
  if (f.from && f.to && *f.from >= *f.to) throw bad("date_from must precede date_to");
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';' || t[0] == '[') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::invalid_argument, "config line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(std::string_view(t).substr(0, eq));
    auto value = trim(std::string_view(t).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    } else if (const auto hash = value.find(" #"); hash != std::string::npos) {
      value = trim(value.substr(0, hash));
    }
    config.set(key, value);
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const fs::path& path) {
  auto config = parse_config(io::read_file(path));
  const auto base = path.parent_path();
  for (auto* p : {&config.input, &config.annotations, &config.output, &config.seeds})
    if (!p->empty() && p->is_relative()) *p = base / *p;
  return config;
}

// --- stages -------------------------------------------------------------------

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"ingest",      "build",     "fit",  "project",
                                              "communities", "propagate", "hubs", "report"};
  return names;
}

std::size_t stage_index(const std::string& name) {
  const auto& names = stage_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(ErrorCode::invalid_argument, "unknown stage '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

namespace {

struct Layout {
  fs::path root;
  fs::path store() const { return root / "store"; }
  fs::path verified_graph() const { return root / "graphs" / "verified.csv"; }
  fs::path user_post_graph() const { return root / "graphs" / "user_post.csv"; }
  fs::path raw_retweets() const { return root / "graphs" / "raw_retweets.csv"; }
  fs::path build_stats() const { return root / "graphs" / "build.json"; }
  fs::path bicm() const { return root / "models" / "bicm.json"; }
  fs::path bidcm() const { return root / "models" / "bidcm.json"; }
  fs::path verified_projection() const { return root / "projections" / "verified.csv"; }
  fs::path retweet_projection() const { return root / "projections" / "retweet.csv"; }
  fs::path partition() const { return root / "communities" / "verified.csv"; }
  fs::path subpartition() const { return root / "communities" / "subcommunities.csv"; }
  fs::path seeds() const { return root / "communities" / "seeds.csv"; }
  fs::path labels() const { return root / "communities" / "labels.csv"; }
  fs::path hubs() const { return root / "hubs" / "hubs.csv"; }
  fs::path top_hubs() const { return root / "hubs" / "top_hubs.csv"; }
  fs::path reports() const { return root / "reports"; }
  fs::path manifest() const { return root / "run_manifest.json"; }
};

FitOptions fit_options(const PipelineConfig& c) {
  FitOptions o;
  o.tol = c.fit_tol;
  o.max_iter = c.fit_max_iter;
  o.sparse_threshold = c.sparse_threshold;
  return o;
}

ValidationOptions validation_options(const PipelineConfig& c) {
  ValidationOptions o;
  o.alpha = c.alpha;
  o.family = c.fdr_family;
  o.distribution = c.distribution;
  o.exact_cutoff = c.exact_cutoff;
  o.threads = c.threads;
  return o;
}

void stage_ingest(const PipelineConfig& c, const Layout& out) {
  if (c.input.empty()) throw Error(ErrorCode::invalid_argument, "config has no input");
  const auto store = ingest({c.input}, c.filters());
  write_store(store, out.store());
}

void stage_build(const PipelineConfig&, const Layout& out) {
  const auto store = read_store(out.store());
  const auto verified = build_verified_bipartite(store);
  io::write_bipartite(verified.graph, out.verified_graph());
  const auto directed = build_user_post_bipartite(store);
  io::write_directed(directed, out.user_post_graph());

  std::string raw = io::csv_line({"retweeter", "author", "count"});
  for (const auto& r : verified.raw) raw += io::csv_line({r.retweeter, r.author, std::to_string(r.count)});
  io::write_file(out.raw_retweets(), raw);

  const auto& vs = verified.stats;
  const auto& ds = directed.stats();
  nlohmann::ordered_json j;
  j["verified_users"] = vs.verified_users;
  j["unverified_users"] = vs.unverified_users;
  j["verified_verified_retweets"] = vs.verified_pairs_skipped;
  j["unverified_unverified_retweets"] = vs.unverified_pairs_skipped;
  j["self_retweets"] = vs.self_retweets;
  j["orphan_retweets"] = vs.orphan_retweets;
  j["directed_duplicate_links"] = ds.duplicate_links;
  j["directed_self_retweets_dropped"] = ds.self_retweets_dropped;
  j["directed_orphan_retweets"] = ds.orphan_retweets;
  io::write_json(out.build_stats(), j);
}

void stage_fit(const PipelineConfig& c, const Layout& out) {
  const auto g = io::read_bipartite_csv(out.verified_graph());
  const auto bicm = fit_null_model(g, c.null_model, fit_options(c));
  io::write_json(out.bicm(), to_json(bicm));

  const auto d = io::read_directed_csv(out.user_post_graph());
  BidcmOptions bo;
  bo.retweet_model = c.null_model;
  bo.fit = fit_options(c);
  io::write_json(out.bidcm(), to_json(fit_bidcm(d, bo)));
}

void stage_project(const PipelineConfig& c, const Layout& out) {
  const auto g = io::read_bipartite_csv(out.verified_graph());
  const auto bicm = bicm_from_json(io::read_json(out.bicm()));
  write_projection(validate_projection(g, bicm, validation_options(c)), out.verified_projection());

  const auto d = io::read_directed_csv(out.user_post_graph());
  const auto bidcm = bidcm_from_json(io::read_json(out.bidcm()));
  write_projection(validate_projection(d, bidcm, validation_options(c)), out.retweet_projection());
}

int restarts_for(const PipelineConfig& c, std::size_t nodes) {
  if (c.restarts > 0) return c.restarts;
  return static_cast<int>(std::clamp<std::size_t>(nodes, 1, static_cast<std::size_t>(c.max_restarts)));
}

void stage_communities(const PipelineConfig& c, const Layout& out) {
  const auto proj = read_projection(out.verified_projection(), false);
  const auto g = UndirectedGraph::from_projection(proj);
  if (g.size() == 0) throw Error(ErrorCode::empty_input, "the verified projection has no validated link");
  LouvainOptions lo;
  lo.restarts = restarts_for(c, g.size());
  lo.seed = stream_seed(c.seed, "communities");
  lo.threads = c.threads;
  const auto part = louvain_best(g, lo);
  write_partition(part, out.partition(), {{"restart_modularities", part.restart_modularities}});

  std::string sub = io::csv_line({"node_id", "community", "subcommunity"});
  nlohmann::ordered_json parents = nlohmann::ordered_json::array();
  for (int k = 0; k < part.n_communities(); ++k) {
    const auto members = part.members(k);
    if (!c.subcommunities || members.size() < 2) {
      for (auto v : members) sub += io::csv_line({g.node_ids[v], part.label(v), part.label(v)});
      continue;
    }
    LouvainOptions so = lo;
    so.restarts = restarts_for(c, members.size());
    so.seed = mix_seed(stream_seed(c.seed, "subcommunities"), static_cast<std::uint64_t>(k));
    const auto sp = subcommunities(g, part, k, so);
    for (std::size_t v = 0; v < sp.node_ids.size(); ++v)
      sub += io::csv_line({sp.node_ids[v], std::to_string(k), sp.label(static_cast<NodeIndex>(v))});
    parents.push_back({{"community", std::to_string(k)},
                       {"subcommunities", sp.n_communities()},
                       {"modularity", sp.modularity},
                       {"restarts", sp.restart_count},
                       {"seed", sp.rng_seed}});
  }
  io::write_file(out.subpartition(), sub);
  io::write_json(io::manifest_path_for(out.subpartition()),
                 {{"parents", parents}, {"checksum", "sha256:" + io::sha256_hex(sub)}});
}

std::map<std::string, std::string> partition_membership(const fs::path& csv, const char* column) {
  const auto t = io::read_csv(csv);
  const auto ni = t.column("node_id"), ci = t.column(column);
  std::map<std::string, std::string> m;
  for (const auto& r : t.rows) m[r[ni]] = r[ci];
  return m;
}

void stage_propagate(const PipelineConfig& c, const Layout& out) {
  const auto proj = read_projection(out.retweet_projection(), true);
  const auto g = UndirectedGraph::from_projection(proj);
  if (g.size() == 0) throw Error(ErrorCode::empty_input, "the retweet projection has no validated link");
  const auto candidates =
      c.seeds.empty() ? partition_membership(out.partition(), "community") : read_labels(c.seeds);
  const std::set<std::string> nodes(g.node_ids.begin(), g.node_ids.end());
  std::map<std::string, std::string> seeds;
  for (const auto& [node, label] : candidates)
    if (nodes.count(node)) seeds.emplace(node, label);
  if (seeds.empty())
    throw Error(ErrorCode::empty_input, "no seed user appears in the retweet projection");

  std::string seed_csv = io::csv_line({"node_id", "community"});
  for (const auto& [node, label] : seeds) seed_csv += io::csv_line({node, label});
  io::write_file(out.seeds(), seed_csv);

  PropagationOptions po;
  po.max_sweeps = c.max_sweeps;
  po.seed = stream_seed(c.seed, "propagate");
  write_labels(propagate_labels(g, seeds, po), out.labels());
}

void stage_hubs(const PipelineConfig&, const Layout& out) {
  const auto proj = read_projection(out.retweet_projection(), true);
  const auto g = DirectedGraph::from_projection(proj);
  const auto scores = hits_scores(g);
  write_hubs(scores, out.hubs());

  const auto labels = read_labels(out.labels());
  std::map<std::string, std::vector<std::size_t>> by_community;
  for (std::size_t v = 0; v < scores.node_ids.size(); ++v) {
    auto it = labels.find(scores.node_ids[v]);
    by_community[it == labels.end() ? "" : it->second].push_back(v);
  }
  std::string top = io::csv_line({"community", "rank", "node_id", "hub", "authority"});
  for (auto& [community, members] : by_community) {
    if (community.empty()) continue;
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return scores.hub[a] > scores.hub[b];
    });
    for (std::size_t r = 0; r < std::min<std::size_t>(10, members.size()); ++r)
      top += io::csv_line({community, std::to_string(r + 1), scores.node_ids[members[r]],
                           io::format_fixed(scores.hub[members[r]], 12),
                           io::format_fixed(scores.authority[members[r]], 12)});
  }
  io::write_file(out.top_hubs(), top);
}

PostTable posts_from_store(const TweetStore& store) {
  const ChainIndex chains(store);
  PostTable table;
  table.posts.reserve(store.records.size());
  for (const auto& t : store.records) {
    PostRecord p;
    p.post_id = t.post_id;
    p.timestamp = t.timestamp;
    p.urls = t.urls;
    if (t.is_retweet()) {
      p.retweeter_id = t.author_id;
      const auto root = chains.root(store, t);
      p.author_id = root ? store.records[*root].author_id : std::string();
    } else {
      p.author_id = t.author_id;
    }
    table.posts.push_back(std::move(p));
  }
  return table;
}

void stage_report(const PipelineConfig& c, const Layout& out) {
  const auto store = read_store(out.store());
  const auto posts = posts_from_store(store);
  const auto annotations = c.annotations.empty() ? AnnotationTable{} : read_annotations(c.annotations);
  const auto verified = partition_membership(out.partition(), "community");
  const auto labels = read_labels(out.labels());

  ReportOptions vo;
  vo.min_occurrence = c.min_occurrence_verified;
  vo.split_by_type = c.split_by_type;
  vo.keep_subdomains = c.keep_subdomains;
  ReportOptions ro = vo;
  ro.min_occurrence = c.min_occurrence_retweet;

  const auto dir = out.reports();
  io::write_file(dir / "reputability_verified.csv",
                 reputability_csv(aggregate_reputability(posts, verified, annotations, vo)));
  if (fs::exists(out.subpartition()))
    io::write_file(dir / "reputability_subcommunities.csv",
                   reputability_csv(aggregate_reputability(
                       posts, partition_membership(out.subpartition(), "subcommunity"),
                       annotations, vo)));
  const auto retweet_report = aggregate_reputability(posts, labels, annotations, ro);
  io::write_file(dir / "reputability_retweet.csv", reputability_csv(retweet_report));
  ReportOptions no = ro;
  no.split_by_type = false;
  const auto nr = nr_share_report(posts, labels, annotations, no);
  io::write_file(dir / "nr_share.csv", nr_share_csv(nr));
  const auto series = timeseries_report(posts, annotations, c.bucket_seconds, vo);
  io::write_file(dir / "timeseries.csv", timeseries_csv(series));
  io::write_file(dir / "audit.csv", audit_csv(audit_rows(posts, labels, annotations, ro)));

  // Conservation: labelled users never exceed the users of the retweet projection.
  const auto proj = read_projection(out.retweet_projection(), true);
  nlohmann::ordered_json summary;
  summary["posts"] = posts.posts.size();
  summary["annotated_domains"] = annotations.size();
  summary["verified_members"] = verified.size();
  summary["labeled_users"] = labels.size();
  summary["retweet_projection_users"] = proj.nodes().size();
  summary["conservation_ok"] = labels.size() <= proj.nodes().size();
  summary["timeseries_skipped_posts"] = series.skipped;
  nlohmann::ordered_json nr_frac = nlohmann::ordered_json::object();
  std::map<std::string, ClassCounts> totals;
  for (const auto& r : retweet_report) {
    auto& t = totals[r.community];
    t.r += r.counts.r;
    t.qr += r.counts.qr;
    t.nr += r.counts.nr;
    t.others += r.counts.others;
  }
  for (const auto& [community, t] : totals) nr_frac[community] = t.percent(LabelClass::NR);
  summary["nr_percent_by_community"] = nr_frac;
  io::write_json(dir / "summary.json", summary);
}

void dispatch(const PipelineConfig& c, const Layout& out, std::size_t stage) {
  switch (stage) {
    case 0: stage_ingest(c, out); break;
    case 1: stage_build(c, out); break;
    case 2: stage_fit(c, out); break;
    case 3: stage_project(c, out); break;
    case 4: stage_communities(c, out); break;
    case 5: stage_propagate(c, out); break;
    case 6: stage_hubs(c, out); break;
    case 7: stage_report(c, out); break;
    default: throw Error(ErrorCode::invalid_argument, "bad stage index");
  }
}

nlohmann::ordered_json file_entry(const fs::path& path, const fs::path& root) {
  return {{"path", fs::relative(path, root).generic_string()},
          {"sha256", io::sha256_file(path)},
          {"bytes", fs::file_size(path)}};
}

nlohmann::ordered_json inventory(const fs::path& root) {
  std::vector<fs::path> files;
  if (fs::exists(root))
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file() && e.path().filename() != "run_manifest.json" &&
          e.path().extension() != ".tmp")
        files.push_back(e.path());
  std::sort(files.begin(), files.end());
  auto out = nlohmann::ordered_json::array();
  for (const auto& f : files) out.push_back(file_entry(f, root));
  return out;
}

}  // namespace

void run_stage(const PipelineConfig& config, const std::string& stage) {
  config.validate();
  dispatch(config, Layout{config.output}, stage_index(stage));
}

nlohmann::ordered_json run_pipeline(const PipelineConfig& config,
                                    const std::optional<std::string>& from_stage) {
  config.validate();
  const Layout out{config.output};
  const std::size_t first = from_stage ? stage_index(*from_stage) : 0;

  nlohmann::ordered_json manifest;
  manifest["config"] = config.to_json();
  auto inputs = nlohmann::ordered_json::object();
  for (const auto& [name, path] : {std::pair{"input", config.input},
                                   std::pair{"annotations", config.annotations},
                                   std::pair{"seeds", config.seeds}})
    if (!path.empty() && fs::exists(path))
      inputs[name] = {{"path", path.generic_string()}, {"sha256", io::sha256_file(path)}};
  manifest["inputs"] = inputs;
  manifest["from_stage"] = stage_names()[first];

  auto stages = nlohmann::ordered_json::array();
  std::optional<Error> failure;
  std::string failed_stage;
  for (std::size_t s = 0; s < stage_names().size(); ++s) {
    nlohmann::ordered_json entry{{"name", stage_names()[s]}};
    if (s < first || failure) {
      entry["status"] = "skipped";
      stages.push_back(entry);
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    try {
      dispatch(config, out, s);
      entry["status"] = "ok";
    } catch (const Error& e) {
      failure.emplace(e.code(), e.what());
      failed_stage = stage_names()[s];
      entry["status"] = "failed";
      entry["error"] = e.what();
    } catch (const std::exception& e) {
      failure.emplace(ErrorCode::stage_failure, e.what());
      failed_stage = stage_names()[s];
      entry["status"] = "failed";
      entry["error"] = e.what();
    }
    entry["seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    stages.push_back(entry);
  }
  manifest["stages"] = stages;
  manifest["status"] = failure ? "failed" : "complete";
  manifest["outputs"] = inventory(out.root);
  io::write_json(out.manifest(), manifest);
  if (failure)
    throw Error(ErrorCode::stage_failure,
                "stage '" + failed_stage + "' failed: " + failure->what());
  return manifest;
}

ValidatedProjection project_file(const fs::path& input, bool directed, const PipelineConfig& config) {
  config.validate();
  if (directed) {
    const auto g = io::read_directed_csv(input);
    BidcmOptions bo;
    bo.retweet_model = config.null_model;
    bo.fit = fit_options(config);
    return validate_projection(g, fit_bidcm(g, bo), validation_options(config));
  }
  const auto g = io::read_bipartite_csv(input);
  return validate_projection(g, fit_null_model(g, config.null_model, fit_options(config)),
                             validation_options(config));
}

}  // namespace nullnet
