#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "nullnet/error.hpp"
#include "nullnet/io.hpp"
#include "nullnet/reputability.hpp"

using namespace nullnet;

namespace {

PostRecord post(const std::string& id, const std::string& author, std::vector<std::string> urls,
                std::optional<std::string> retweeter = std::nullopt,
                std::optional<std::int64_t> ts = std::nullopt) {
  PostRecord p;
  p.post_id = id;
  p.author_id = author;
  p.retweeter_id = std::move(retweeter);
  p.timestamp = ts;
  p.urls = std::move(urls);
  return p;
}

DomainAnnotation note(const std::string& domain, ReputabilityLabel label) {
  return {domain, label, std::nullopt, AnnotationSource::manual};
}

const CommunityReport& row(const std::vector<CommunityReport>& rows, const std::string& c,
                           const std::string& type) {
  for (const auto& r : rows)
    if (r.community == c && r.type == type) return r;
  throw std::runtime_error("missing row " + c + "/" + type);
}

const NrShareRow& nr_row(const std::vector<NrShareRow>& rows, const std::string& c) {
  for (const auto& r : rows)
    if (r.community == c) return r;
  throw std::runtime_error("missing row " + c);
}

}  // namespace

TEST_CASE("domain extraction") {
  CHECK(extract_domain("http://www.example.com/index.html") == "example.com");
  CHECK(extract_domain("https://repubblica.it/a/b?q=1") == "repubblica.it");
  CHECK(extract_domain("https://news.bbc.co.uk/story") == "bbc.co.uk");
  CHECK(extract_domain("https://m.dagospia.com/x") == "dagospia.com");
  CHECK(extract_domain("HTTPS://User:pw@WWW.Example.COM:8443/p#f") == "example.com");
  CHECK(extract_domain("https://example.com./") == "example.com");
  CHECK(extract_domain("http://192.168.0.1/x") == "192.168.0.1");
  CHECK(extract_domain("http://localhost:8080/") == "localhost");
  CHECK_THROWS_AS(extract_domain("not a url"), Error);
  CHECK_THROWS_AS(extract_domain("ftp:/missing"), Error);
  CHECK_THROWS_AS(extract_domain("https:///path"), Error);

  SUBCASE("subdomains kept on request") {
    CHECK(extract_domain("https://m.dagospia.com/x", true) == "m.dagospia.com");
    CHECK(extract_domain("https://www.dagospia.com/x", true) == "dagospia.com");
  }
  SUBCASE("idempotent on its own output") {
    for (const char* url : {"https://a.b.example.org/x", "http://www.bbc.co.uk", "https://t.co/abc"}) {
      const auto d = extract_domain(url);
      CHECK(extract_domain("https://" + d + "/") == d);
    }
  }
}

TEST_CASE("score band") {
  CHECK(score_to_label(80) == ReputabilityLabel::R);
  CHECK(score_to_label(60) == ReputabilityLabel::QR);
  CHECK(score_to_label(40) == ReputabilityLabel::NR);
  CHECK(score_to_label(55) == ReputabilityLabel::QR);
  CHECK(score_to_label(65) == ReputabilityLabel::QR);
  CHECK(score_to_label(54.999) == ReputabilityLabel::NR);
  CHECK(score_to_label(65.001) == ReputabilityLabel::R);
  CHECK_THROWS_AS(score_to_label(-1), Error);
  CHECK_THROWS_AS(score_to_label(100.5), Error);

  auto rank = [](ReputabilityLabel l) { return l == ReputabilityLabel::NR ? 0 : l == ReputabilityLabel::QR ? 1 : 2; };
  int prev = 0;
  for (int s = 0; s <= 1000; ++s) {
    const int r = rank(score_to_label(s / 10.0));
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("label names") {
  CHECK(report_name(ReputabilityLabel::QR) == "~R");
  CHECK(parse_label("~R") == ReputabilityLabel::QR);
  CHECK(parse_label("qr") == ReputabilityLabel::QR);
  CHECK(class_of(ReputabilityLabel::ST) == LabelClass::Others);
  CHECK(class_of(ReputabilityLabel::UNC) == LabelClass::Others);
  CHECK_THROWS_AS(parse_label("XX"), Error);
}

TEST_CASE("Fleiss kappa") {
  // P_i = 1, 1, 0 -> mean 2/3; p_j = 1/2, 1/2 -> Pe = 1/2.
  CHECK(fleiss_kappa({{2, 0}, {0, 2}, {1, 1}}) == doctest::Approx(1.0 / 3.0));
  CHECK(fleiss_kappa({{3, 0}, {0, 3}}) == doctest::Approx(1.0));
  CHECK(fleiss_kappa({{4, 0}, {4, 0}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(fleiss_kappa({{2, 0}, {1, 2}}), Error);
  CHECK_THROWS_AS(fleiss_kappa({{1, 0}, {0, 1}}), Error);
  CHECK_THROWS_AS(fleiss_kappa({}), Error);
}

TEST_CASE("annotation table") {
  const AnnotationTable t({note("a.com", ReputabilityLabel::R), {"b.com", ReputabilityLabel::NR, 30.0, AnnotationSource::newsguard_file}});
  CHECK(t.lookup("a.com") == ReputabilityLabel::R);
  CHECK_FALSE(t.lookup("c.com").has_value());
  CHECK_THROWS_AS(AnnotationTable({note("a.com", ReputabilityLabel::R), note("a.com", ReputabilityLabel::NR)}), Error);
  CHECK_THROWS_AS(AnnotationTable({{"b.com", ReputabilityLabel::R, 30.0, AnnotationSource::newsguard_file}}), Error);

  const auto dir = testutil::scratch_dir("annotations");
  std::ofstream(dir / "a.csv") << "domain,score,label,source\nx.com,70,,\ny.com,,NR,manual\nz.com,,~R,\n";
  const auto r = read_annotations(dir / "a.csv");
  CHECK(r.size() == 3);
  CHECK(r.lookup("x.com") == ReputabilityLabel::R);
  CHECK(r.lookup("z.com") == ReputabilityLabel::QR);
}

TEST_CASE("hand-computed ten post fixture") {
  // Community A: u1 (2 tweets), u2 (1 tweet, 1 retweet); B: u3 (3 tweets), u4 (3 retweets).
  const AnnotationTable ann({note("good.com", ReputabilityLabel::R), note("mid.com", ReputabilityLabel::QR),
                             note("bad.info", ReputabilityLabel::NR), note("social.com", ReputabilityLabel::S)});
  PostTable t;
  t.posts = {
      post("1", "u1", {"https://good.com/1", "https://bad.info/1"}),
      post("2", "u1", {"https://good.com/2"}),
      post("3", "u2", {"https://mid.com/1"}),
      post("4", "u1", {"https://good.com/1"}, "u2"),
      post("5", "u3", {"https://bad.info/2"}),
      post("6", "u3", {"https://bad.info/3", "https://social.com/1"}),
      post("7", "u3", {"https://unknown.org/1"}),
      post("8", "u3", {"https://bad.info/2"}, "u4"),
      post("9", "u3", {}, "u4"),
      post("10", "u3", {"not a url"}, "u4"),
  };
  const Membership m{{"u1", "A"}, {"u2", "A"}, {"u3", "B"}, {"u4", "B"}};

  const auto all = aggregate_reputability(t, m, ann);
  REQUIRE(all.size() == 2);
  // A: good x3, bad x1, mid x1 -> 5 urls: R 60, QR 20, NR 20, Others 0.
  const auto& a = row(all, "A", "all");
  CHECK(a.url_count() == 5);
  CHECK(a.counts.percent(LabelClass::R) == doctest::Approx(60.0));
  CHECK(a.counts.percent(LabelClass::QR) == doctest::Approx(20.0));
  CHECK(a.counts.percent(LabelClass::NR) == doctest::Approx(20.0));
  CHECK(a.counts.percent(LabelClass::Others) == doctest::Approx(0.0));
  CHECK(a.posts == 4);
  CHECK(a.users == 2);
  CHECK(a.distinct_urls == 4);
  CHECK(a.domains == 3);
  // B: bad x3, social, unknown, malformed -> 6 urls: NR 50, Others 50.
  const auto& b = row(all, "B", "all");
  CHECK(b.url_count() == 6);
  CHECK(b.counts.percent(LabelClass::NR) == doctest::Approx(50.0));
  CHECK(b.counts.percent(LabelClass::Others) == doctest::Approx(50.0));
  CHECK(b.counts.percent(LabelClass::R) == 0.0);
  CHECK(b.posts == 6);

  ReportOptions split;
  split.split_by_type = true;
  const auto rows = aggregate_reputability(t, m, ann, split);
  CHECK(rows.size() == 4);
  CHECK(row(rows, "A", "tw").url_count() == 4);
  CHECK(row(rows, "A", "rt").url_count() == 1);
  CHECK(row(rows, "B", "rt").counts.nr == 1);
  CHECK(row(rows, "B", "rt").counts.others == 1);
  for (const auto& r : rows) CHECK(r.counts.r + r.counts.qr + r.counts.nr + r.counts.others == r.url_count());

  SUBCASE("occurrence threshold leaves rare domains unresolved") {
    ReportOptions o;
    o.min_occurrence = 3;
    const auto th = aggregate_reputability(t, m, ann, o);
    // good.com (3) and bad.info (4) resolve; mid.com and social.com fall into Others.
    CHECK(row(th, "A", "all").counts.qr == 0);
    CHECK(row(th, "A", "all").counts.others == 1);
    CHECK(row(th, "A", "all").counts.r == 3);
  }
  SUBCASE("audit trail") {
    const auto audit = audit_rows(t, m, ann, {});
    CHECK(audit.size() == 11);
    CHECK(audit.back().domain.empty());
    CHECK(audit.back().label == ReputabilityLabel::UNC);
  }
  SUBCASE("csv layout") {
    const auto csv = io::parse_csv(reputability_csv(all));
    CHECK(csv.header == io::Row{"community", "type", "url_count", "R", "~R", "NR", "Others", "posts",
                                "distinct_urls", "domains", "users"});
    CHECK(csv.rows[0] == io::Row{"A", "all", "5", "60.0", "20.0", "20.0", "0.0", "4", "4", "3", "2"});
  }
}

TEST_CASE("community without urls gets an Others row") {
  PostTable t;
  t.posts = {post("1", "u1", {"https://good.com/"}), post("2", "u2", {})};
  const AnnotationTable ann({note("good.com", ReputabilityLabel::R)});
  const auto rows = aggregate_reputability(t, {{"u1", "A"}, {"u2", "B"}, {"u3", "C"}}, ann);
  REQUIRE(rows.size() == 3);
  for (const auto& c : {"B", "C"}) {
    CHECK(row(rows, c, "all").url_count() == 0);
    CHECK(row(rows, c, "all").counts.percent(LabelClass::Others) == 100.0);
  }
  CHECK_THROWS_AS(aggregate_reputability(PostTable{}, {}, ann), Error);
}

TEST_CASE("four-class fixture of 4759 urls") {
  // 2684 R, 109 QR, 609 NR, 1357 Others.
  const AnnotationTable ann({note("r.com", ReputabilityLabel::R), note("q.com", ReputabilityLabel::QR),
                             note("n.com", ReputabilityLabel::NR), note("s.com", ReputabilityLabel::S)});
  PostTable t;
  int k = 0;
  auto add = [&](const std::string& domain, int count) {
    for (int i = 0; i < count; ++i, ++k) t.posts.push_back(post(std::to_string(k), "u" + std::to_string(k % 50), {"https://" + domain + "/" + std::to_string(k)}));
  };
  add("r.com", 2684);
  add("q.com", 109);
  add("n.com", 609);
  add("s.com", 1000);
  add("other.org", 357);
  Membership m;
  for (int u = 0; u < 50; ++u) m["u" + std::to_string(u)] = "C";
  ReportOptions o;
  o.min_occurrence = 20;
  const auto rows = aggregate_reputability(t, m, ann, o);
  const auto csv = io::parse_csv(reputability_csv(rows));
  REQUIRE(csv.rows.size() == 1);
  CHECK(csv.rows[0][2] == "4759");
  CHECK(csv.rows[0][3] == "56.4");
  CHECK(csv.rows[0][4] == "2.3");
  CHECK(csv.rows[0][5] == "12.8");
  CHECK(csv.rows[0][6] == "28.5");
}

TEST_CASE("NR share") {
  const AnnotationTable ann({note("bad.info", ReputabilityLabel::NR), note("top.info", ReputabilityLabel::NR),
                             note("good.com", ReputabilityLabel::R)});
  PostTable t;
  for (int k = 0; k < 96; ++k) t.posts.push_back(post("a" + std::to_string(k), "ua" + std::to_string(k % 8), {"https://bad.info/" + std::to_string(k % 10)}));
  for (int k = 0; k < 4; ++k) t.posts.push_back(post("b" + std::to_string(k), "ub", {"https://bad.info/x"}));
  t.posts.push_back(post("c", "uc", {"https://good.com/"}));
  Membership m{{"ub", "B"}, {"uc", "C"}};
  for (int u = 0; u < 8; ++u) m["ua" + std::to_string(u)] = "A";
  const auto rows = nr_share_report(t, m, ann);
  REQUIRE(rows.size() == 3);
  CHECK(nr_row(rows, "A").share_percent == doctest::Approx(96.0));
  CHECK(nr_row(rows, "B").share_percent == doctest::Approx(4.0));
  CHECK(nr_row(rows, "A").nr_users == 8);
  CHECK(nr_row(rows, "A").mean_nr_posts_per_user == doctest::Approx(12.0));
  CHECK(nr_row(rows, "A").distinct_nr_urls == 10);
  const auto& c = nr_row(rows, "C");
  CHECK(c.share_percent == 0.0);
  CHECK(c.mean_nr_posts_per_user == 0.0);
  CHECK_FALSE(c.mean_defined);
  const auto csv = io::parse_csv(nr_share_csv(rows));
  CHECK(csv.rows[2][8] == "false");
  CHECK(csv.rows[0][9] == "96.0");

  SUBCASE("a dominant domain heads the frequency list") {
    PostTable big;
    for (int k = 0; k < 16041; ++k) big.posts.push_back(post("t" + std::to_string(k), "ua0", {"https://www.top.info/" + std::to_string(k % 300)}));
    for (int k = 0; k < 2000; ++k) big.posts.push_back(post("s" + std::to_string(k), "ua1", {"https://bad.info/" + std::to_string(k)}));
    const auto r = nr_share_report(big, m, ann);
    const auto& a = nr_row(r, "A");
    REQUIRE(a.top_domains.size() == 2);
    CHECK(a.top_domains[0] == std::pair<std::string, std::int64_t>{"top.info", 16041});
    CHECK(a.top_domains[1].second == 2000);
  }
}

TEST_CASE("timestamps") {
  CHECK(parse_timestamp(nlohmann::json(1659312000)) == 1659312000);
  CHECK(parse_timestamp(nlohmann::json("2022-08-01T00:00:00Z")) == 1659312000);
  CHECK(parse_timestamp(nlohmann::json("2022-08-01 01:00:00+00:00")) == 1659315600);
  CHECK(parse_timestamp(nlohmann::json("2022-08-01T00:00:00.250Z")) == 1659312000);
  CHECK_FALSE(parse_timestamp(nlohmann::json("yesterday")).has_value());
  CHECK_FALSE(parse_timestamp(nlohmann::json(nullptr)).has_value());
  CHECK(format_timestamp(1659312000) == "2022-08-01T00:00:00Z");

  const auto t = parse_posts(
      "{\"post_id\":\"1\",\"author_id\":\"a\",\"timestamp\":\"2022-08-01T00:00:00Z\",\"urls\":[\"https://x.com\"]}\n"
      "{\"post_id\":\"2\",\"author_id\":\"a\",\"retweeter_id\":\"b\",\"timestamp\":\"garbage\",\"urls\":[]}\n"
      "{broken\n");
  CHECK(t.posts.size() == 2);
  CHECK(t.malformed_lines == 1);
  CHECK(t.bad_timestamps == 1);
  CHECK(t.posts[1].is_retweet());
  CHECK(t.posts[1].acting_user() == "b");
  CHECK(parse_posts(post_to_jsonl(t.posts[0])).posts[0].urls == t.posts[0].urls);
}

TEST_CASE("time series") {
  const AnnotationTable ann({note("good.com", ReputabilityLabel::R), note("bad.info", ReputabilityLabel::NR)});
  const std::int64_t day = 86'400, d0 = 1659312000;

  SUBCASE("one day collapses to the totals") {
    PostTable t;
    t.posts = {post("1", "a", {"https://good.com/1"}, std::nullopt, d0 + 10),
               post("2", "a", {"https://bad.info/1", "https://x.org/"}, std::nullopt, d0 + 5000),
               post("3", "a", {}, std::nullopt, d0 + 9000)};
    const auto ts = timeseries_report(t, ann, day);
    REQUIRE(ts.buckets.size() == 1);
    CHECK(ts.buckets[0].start == d0);
    CHECK(ts.buckets[0].counts.r == 1);
    CHECK(ts.buckets[0].counts.nr == 1);
    CHECK(ts.buckets[0].counts.others == 1);
  }
  SUBCASE("empty days are zero filled") {
    PostTable t;
    t.posts = {post("1", "a", {"https://good.com/1"}, std::nullopt, d0),
               post("2", "a", {"https://good.com/2"}, std::nullopt, d0 + 2 * day + 1),
               post("3", "a", {"https://good.com/3"}, std::nullopt, std::nullopt)};
    const auto ts = timeseries_report(t, ann, day);
    REQUIRE(ts.buckets.size() == 3);
    CHECK(ts.buckets[1].counts.total() == 0);
    CHECK(ts.skipped == 1);
    const auto csv = io::parse_csv(timeseries_csv(ts));
    CHECK(csv.rows[1] == io::Row{"2022-08-02T00:00:00Z", "0", "0", "0", "0"});
  }
  SUBCASE("constant NR rate stays constant per bucket") {
    PostTable t;
    for (int d = 0; d < 7; ++d)
      for (int k = 0; k < 20; ++k)
        t.posts.push_back(post(std::to_string(d * 100 + k), "a",
                               {k % 4 == 0 ? "https://bad.info/" : "https://good.com/"}, std::nullopt,
                               d0 + d * day + k * 60));
    const auto ts = timeseries_report(t, ann, day);
    REQUIRE(ts.buckets.size() == 7);
    for (const auto& b : ts.buckets) CHECK(b.counts.percent(LabelClass::NR) == doctest::Approx(25.0));
  }
  CHECK_THROWS_AS(timeseries_report(PostTable{}, ann, 0), Error);
}
