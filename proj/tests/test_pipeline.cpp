#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "nullnet/error.hpp"
#include "nullnet/io.hpp"
#include "nullnet/pipeline.hpp"
#include "nullnet/synth.hpp"

using namespace nullnet;
namespace fs = std::filesystem;

namespace {

std::string tweet(const std::string& id, const std::string& author, bool verified,
                  const std::string& retweet_of = "", std::int64_t ts = 1659312000) {
  TweetRecord t;
  t.post_id = id;
  t.author_id = author;
  t.author_verified = verified;
  if (!retweet_of.empty()) t.retweet_of = retweet_of;
  t.timestamp = ts;
  return tweet_to_jsonl(t);
}

TweetStore store_of(const std::string& text) { return ingest_text(text, {}); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Small synthetic run directory shared by the end-to-end cases.
fs::path synth_fixture() {
  static const fs::path dir = [] {
    auto d = testutil::scratch_dir("pipeline_synth");
    const SynthOptions o;  // the bundled 2000-user fixture
    write_synthetic(generate_synthetic(o), d, o.seed);
    return d;
  }();
  return dir;
}

PipelineConfig synth_config(const std::string& out) {
  auto c = load_config(synth_fixture() / "config.txt");
  c.output = synth_fixture() / out;
  c.restarts = 20;
  c.min_occurrence_verified = 5;
  c.min_occurrence_retweet = 5;
  return c;
}

}  // namespace

TEST_CASE("ingest counts malformed lines and duplicates") {
  const std::string text = tweet("1", "a", true) + "{not json\n" + tweet("2", "b", false, "1") +
                           tweet("1", "a", true) + "\n";
  IngestFilters f;
  f.max_malformed_fraction = 0.5;
  const auto s = ingest_text(text, f);
  CHECK(s.stats.lines == 4);
  CHECK(s.stats.malformed == 1);
  CHECK(s.stats.duplicates == 1);
  CHECK(s.records.size() == 2);
  CHECK(s.stats.per_day.at("2022-08-01") == 2);

  SUBCASE("too many malformed lines abort") {
    f.max_malformed_fraction = 0.1;
    CHECK_THROWS_AS(ingest_text(text, f), Error);
  }
  SUBCASE("date filter can empty the store with a warning") {
    f.from = 1700000000;
    const auto e = ingest_text(text, f);
    CHECK(e.records.empty());
    CHECK(e.stats.filtered_date == 2);
    CHECK_FALSE(e.stats.warnings.empty());
  }
  SUBCASE("language filter") {
    TweetRecord t;
    t.post_id = "9";
    t.author_id = "c";
    t.timestamp = 1659312000;
    t.lang = "it";
    IngestFilters lf;
    lf.lang = "en";
    const auto e = ingest_text(tweet_to_jsonl(t) + tweet("8", "d", false), lf);
    CHECK(e.stats.filtered_lang == 2);
  }
}

TEST_CASE("tweet records") {
  CHECK_THROWS_AS(parse_tweet("{\"post_id\":\"1\",\"author_id\":\"a\"}"), Error);
  CHECK_THROWS_AS(parse_tweet("{\"post_id\":\"1\",\"author_id\":\"a\",\"retweet_of\":\"1\",\"timestamp\":0}"), Error);
  const auto t = parse_tweet("{\"post_id\":\"7\",\"author_id\":\"a\",\"timestamp\":\"2022-08-01T00:00:00Z\",\"urls\":[\"https://x.com\"]}");
  CHECK(t.timestamp == 1659312000);
  CHECK(parse_tweet(tweet_to_jsonl(t)).urls == t.urls);

  const auto dir = testutil::scratch_dir("store");
  const auto s = store_of(tweet("1", "a", true) + tweet("2", "b", false, "1"));
  write_store(s, dir);
  const auto back = read_store(dir);
  CHECK(back.records.size() == 2);
  CHECK(back.stats.kept == 2);
}

TEST_CASE("verified bipartite graph") {
  SUBCASE("retweets in both directions give the same edge") {
    const auto a = build_verified_bipartite(store_of(tweet("1", "v", true) + tweet("2", "u", false, "1")));
    const auto b = build_verified_bipartite(store_of(tweet("1", "u", false) + tweet("2", "v", true, "1")));
    for (const auto* g : {&a, &b}) {
      CHECK(g->graph.n_edges() == 1);
      CHECK(g->graph.left_ids() == std::vector<std::string>{"v"});
      CHECK(g->graph.right_ids() == std::vector<std::string>{"u"});
    }
  }
  SUBCASE("same-layer retweets are skipped and counted") {
    const auto g = build_verified_bipartite(store_of(tweet("1", "v", true) + tweet("2", "w", true, "1") +
                                                     tweet("3", "u", false) + tweet("4", "x", false, "3") +
                                                     tweet("5", "x", false, "1")));
    CHECK(g.stats.verified_pairs_skipped == 1);
    CHECK(g.stats.unverified_pairs_skipped == 1);
    CHECK(g.graph.n_edges() == 1);
    CHECK(g.raw.size() == 3);
  }
  SUBCASE("chains resolve to the original author") {
    const auto g = build_verified_bipartite(store_of(tweet("1", "v", true) + tweet("2", "u", false, "1") +
                                                     tweet("3", "z", false, "2")));
    CHECK(g.graph.n_edges() == 2);
  }
  SUBCASE("no verified users") {
    CHECK_THROWS_AS(build_verified_bipartite(store_of(tweet("1", "u", false) + tweet("2", "x", false, "1"))), Error);
  }
}

TEST_CASE("user-post bipartite graph") {
  const auto g = build_user_post_bipartite(store_of(tweet("1", "a", false) + tweet("2", "b", false, "1") +
                                                    tweet("3", "c", false, "1") + tweet("4", "a", false, "1") +
                                                    tweet("5", "d", false, "ghost")));
  CHECK(g.authorship().n_edges() == 1);
  CHECK(g.retweets().n_edges() == 2);
  CHECK(g.stats().self_retweets_dropped == 1);
  CHECK(g.stats().orphan_retweets == 1);
  CHECK(g.orphans().size() == 1);
  CHECK_THROWS_AS(build_user_post_bipartite(TweetStore{}), Error);
}

TEST_CASE("configuration") {
  const auto c = parse_config(
      "# comment\n[run]\ninput = tweets.jsonl\noutput = \"out dir\"\nnull-model = chung-lu\n"
      "alpha = 0.01 # inline\nmin_occurrence = 7\nfdr-family = all-pairs\n; other comment\n");
  CHECK(c.input == "tweets.jsonl");
  CHECK(c.output == "out dir");
  CHECK(c.null_model == NullModelChoice::chung_lu);
  CHECK(c.alpha == 0.01);
  CHECK(c.min_occurrence_verified == 7);
  CHECK(c.min_occurrence_retweet == 7);
  CHECK(c.fdr_family == FdrFamily::all_pairs);
  CHECK(c.get("null_model") == "chung-lu");
  CHECK(c.get("fdr-family") == "all-pairs");

  CHECK_THROWS_AS(parse_config("bogus = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("just text\n"), Error);
  CHECK_THROWS_AS(parse_config("alpha = many\n"), Error);
  PipelineConfig bad;
  bad.input = "x";
  bad.alpha = 2.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(stage_index("nope"), Error);
  CHECK(stage_index("communities") == 4);

  const auto dir = testutil::scratch_dir("config");
  std::ofstream(dir / "c.txt") << "input = data/t.jsonl\noutput = /abs/out\n";
  const auto l = load_config(dir / "c.txt");
  CHECK(l.input == dir / "data/t.jsonl");
  CHECK(l.output == "/abs/out");
}

TEST_CASE("end-to-end run is deterministic and resumable") {
  const auto a = synth_config("run_a");
  const auto b = synth_config("run_b");
  fs::remove_all(a.output);
  fs::remove_all(b.output);
  const auto ma = run_pipeline(a);
  run_pipeline(b);
  CHECK(ma["status"] == "complete");
  for (const auto& f : {"reputability_verified.csv", "reputability_retweet.csv", "reputability_subcommunities.csv",
                        "nr_share.csv", "timeseries.csv", "audit.csv", "summary.json"}) {
    CAPTURE(f);
    CHECK(slurp(a.output / "reports" / f) == slurp(b.output / "reports" / f));
  }
  CHECK(slurp(a.output / "communities/verified.csv") == slurp(b.output / "communities/verified.csv"));

  const auto summary = io::read_json(a.output / "reports/summary.json");
  CHECK(summary["conservation_ok"] == true);

  // Found communities map to planted ones by majority; NR shares within 2 points.
  std::map<std::string, int> truth;
  for (const auto& r : io::read_csv(synth_fixture() / "ground_truth.csv").rows) truth[r[0]] = std::stoi(r[1]);
  std::map<std::string, std::map<int, int>> votes;
  for (const auto& r : io::read_csv(a.output / "communities/verified.csv").rows) ++votes[r[1]][truth.at(r[0])];
  const auto planted = io::read_json(synth_fixture() / "ground_truth.json")["nr_percent"];
  CHECK(votes.size() == planted.size());
  for (const auto& [found, v] : votes) {
    const int c = std::max_element(v.begin(), v.end(), [](auto x, auto y) { return x.second < y.second; })->first;
    CAPTURE(found);
    CHECK(std::abs(summary["nr_percent_by_community"][found].get<double>() - planted[c].get<double>()) <= 2.0);
  }

  // Resume from communities after removing later outputs.
  for (const auto& d : {"communities", "hubs", "reports"}) fs::remove_all(a.output / d);
  const auto mr = run_pipeline(a, std::string("communities"));
  CHECK(mr["from_stage"] == "communities");
  CHECK(mr["stages"][0]["status"] == "skipped");
  std::map<std::string, std::string> before, after;
  for (const auto& e : ma["outputs"]) before[e["path"]] = e["sha256"];
  for (const auto& e : mr["outputs"]) after[e["path"]] = e["sha256"];
  CHECK(before == after);
}

TEST_CASE("a failing stage leaves a partial manifest") {
  const auto dir = testutil::scratch_dir("failing_run");
  PipelineConfig c;
  c.input = dir / "missing.jsonl";
  c.output = dir / "out";
  try {
    run_pipeline(c);
    FAIL("expected a stage failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::stage_failure);
  }
  const auto m = io::read_json(dir / "out/run_manifest.json");
  CHECK(m["status"] == "failed");
  CHECK(m["stages"][0]["status"] == "failed");
  CHECK(m["stages"][1]["status"] == "skipped");
}

TEST_CASE("standalone projection of a CSV") {
  const auto dir = testutil::scratch_dir("project_file");
  std::ofstream out(dir / "g.csv");
  out << "left_id,right_id\n";
  for (int k = 0; k < 10; ++k) out << "a," << k << "\nb," << k << "\n";
  for (int i = 0; i < 10; ++i)
    for (int m = 0; m < 3; ++m) out << "x" << i << ",p" << i << "_" << m << "\n";
  out.close();
  const auto p = project_file(dir / "g.csv", false, PipelineConfig{});
  REQUIRE(p.edges.size() == 1);
  CHECK(p.node_ids[p.edges[0].source] == "a");
  CHECK(p.node_ids[p.edges[0].target] == "b");
}
