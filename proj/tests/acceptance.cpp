// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nullnet/communities.hpp"
#include "nullnet/error.hpp"
#include "nullnet/io.hpp"
#include "nullnet/nullmodel.hpp"
#include "nullnet/pipeline.hpp"
#include "nullnet/projection.hpp"
#include "nullnet/random.hpp"
#include "nullnet/reputability.hpp"
#include "nullnet/synth.hpp"

using namespace nullnet;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances.
constexpr double kDegreeResidual = 1e-8;
constexpr int kMaxIterations = 10'000;
constexpr double kSecondsPerFit = 5.0;
constexpr double kClosedForm = 1e-12;
constexpr double kPoissonGap = 0.01;
constexpr double kEnumeration = 1e-10;
constexpr double kAlpha = 0.05;
constexpr double kAri = 0.90;
constexpr double kPropagation = 0.95;
constexpr double kEndToEndSeconds = 60.0;
constexpr double kHitsCorrelation = 0.999;

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s  %-28s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

BipartiteGraph graph_from(int nl, int nr, const std::set<std::pair<int, int>>& edges) {
  std::vector<std::string> l, r;
  for (int i = 0; i < nl; ++i) l.push_back("l" + std::to_string(i));
  for (int a = 0; a < nr; ++a) r.push_back("r" + std::to_string(a));
  std::vector<IndexEdge> idx;
  for (auto [i, a] : edges) idx.push_back({static_cast<NodeIndex>(i), static_cast<NodeIndex>(a)});
  return BipartiteGraph(l, r, idx);
}

// --- 1. degree reproduction ---------------------------------------------------

void degree_reproduction() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> size(20, 200);
  std::uniform_real_distribution<double> dens(0.01, 0.05);
  int ok = 0, tried = 0;
  double worst_res = 0, worst_time = 0;
  int worst_iter = 0;
  std::string note;
  while (tried < 30) {
    const int nl = size(rng), nr = size(rng);
    std::bernoulli_distribution coin(dens(rng));
    std::set<std::pair<int, int>> e;
    for (int i = 0; i < nl; ++i)
      for (int a = 0; a < nr; ++a)
        if (coin(rng)) e.emplace(i, a);
    if (e.size() < 2) continue;
    const auto g = graph_from(nl, nr, e);
    if (connectance(g) > 0.05) continue;
    ++tried;
    FitOptions o;
    o.tol = kDegreeResidual;
    o.max_iter = kMaxIterations;
    const auto t0 = Clock::now();
    try {
      const auto p = fit_bicm(g, o);
      const double dt = seconds_since(t0);
      const double res = max_degree_residual(p);
      worst_res = std::max(worst_res, res);
      worst_time = std::max(worst_time, dt);
      worst_iter = std::max(worst_iter, p.diagnostics.iterations);
      ok += res <= kDegreeResidual && p.diagnostics.iterations <= kMaxIterations && dt <= kSecondsPerFit;
    } catch (const Error& err) {
      note += std::string(" [") + err.what() + "]";
    }
  }
  report("degree-reproduction", ok == 30,
         fmt("%d/30 graphs; max residual %.2e (<= %.0e), max iterations %d, max %.3f s%s", ok,
             worst_res, kDegreeResidual, worst_iter, worst_time, note.c_str()));
}

// --- 2. closed-form BiDCM -------------------------------------------------------

void closed_form_bidcm() {
  std::mt19937_64 rng(202);
  double worst = 0, worst_sum = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const int users = 10 + rep * 5, posts = 30 + rep * 20;
    std::uniform_int_distribution<int> u(0, users - 1), p(0, posts - 1);
    std::vector<DirectedLink> links;
    for (int a = 0; a < posts; ++a) links.push_back({"u" + std::to_string(u(rng)), "p" + std::to_string(a), LinkKind::author});
    for (int k = 0; k < posts; ++k) links.push_back({"u" + std::to_string(u(rng)), "p" + std::to_string(p(rng)), LinkKind::retweet});
    const auto g = DirectedBipartiteGraph::from_links(links);
    const auto params = fit_bidcm(g);
    const auto kout = degrees(g, Layer::left, Direction::out).values;
    for (NodeIndex i = 0; i < g.n_users(); ++i) {
      double sum = 0;
      for (NodeIndex a = 0; a < g.n_posts(); ++a) {
        const double q = params.authorship_probability(i, a);
        worst = std::max(worst, std::abs(q - static_cast<double>(kout[i]) / static_cast<double>(g.n_posts())));
        sum += q;
      }
      worst_sum = std::max(worst_sum, std::abs(sum - static_cast<double>(kout[i])));
    }
  }
  report("closed-form-bidcm", worst <= kClosedForm && worst_sum <= 1e-9,
         fmt("20 graphs; max |q - k_out/N| %.2e (<= %.0e), max |row sum - k_out| %.2e", worst, kClosedForm, worst_sum));
}

// --- 3. oracle p-values ----------------------------------------------------------

/// P(X >= k) by visiting all 2^n outcomes.
double enumerate_tail(std::int64_t k, const std::vector<double>& p) {
  double total = 0;
  for (std::uint64_t mask = 0; mask < (1ULL << p.size()); ++mask) {
    double prob = 1;
    int ones = 0;
    for (std::size_t b = 0; b < p.size(); ++b) {
      const bool on = (mask >> b) & 1ULL;
      prob *= on ? p[b] : 1 - p[b];
      ones += on;
    }
    if (ones >= k) total += prob;
  }
  return total;
}

void oracle_p_values() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> n(1, 20);
  std::uniform_real_distribution<double> pr(0.0, 0.1);
  double worst_gap = 0;
  int within = 0;
  for (int fam = 0; fam < 1000; ++fam) {
    std::vector<double> p(static_cast<std::size_t>(n(rng)));
    for (auto& x : p) x = pr(rng);
    double gap = 0;
    for (std::int64_t k = 0; k <= static_cast<std::int64_t>(p.size()); ++k)
      gap = std::max(gap, std::abs(motif_p_value(k, p, DistributionMode::poisson) -
                                   motif_p_value(k, p, DistributionMode::poisson_binomial)));
    worst_gap = std::max(worst_gap, gap);
    within += gap <= kPoissonGap;
  }
  std::uniform_real_distribution<double> any(0.0, 1.0);
  std::uniform_int_distribution<int> small(1, 12);
  double worst_enum = 0;
  for (int fam = 0; fam < 300; ++fam) {
    std::vector<double> p(static_cast<std::size_t>(small(rng)));
    for (auto& x : p) x = any(rng);
    for (std::int64_t k = 0; k <= static_cast<std::int64_t>(p.size()); ++k)
      worst_enum = std::max(worst_enum, std::abs(poisson_binomial_upper_tail(k, p) - enumerate_tail(k, p)));
  }
  report("oracle-p-values", worst_gap <= kPoissonGap && worst_enum <= kEnumeration,
         fmt("Poisson vs exact over every count: %d/1000 families within %.2f, max gap %.4f; "
             "exact vs enumeration max %.2e (<= %.0e)",
             within, kPoissonGap, worst_gap, worst_enum, kEnumeration));
}

// --- 4. FDR control ---------------------------------------------------------------

void fdr_control() {
  std::mt19937_64 base_rng(404);
  std::bernoulli_distribution coin(0.08);
  std::set<std::pair<int, int>> e;
  for (int i = 0; i < 60; ++i)
    for (int a = 0; a < 150; ++a)
      if (coin(base_rng)) e.emplace(i, a);
  const auto base = graph_from(60, 150, e);
  const auto null = fit_bicm(base);

  std::vector<double> fractions;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    std::set<std::pair<int, int>> s;
    for (int i = 0; i < 60; ++i)
      for (int a = 0; a < 150; ++a)
        if (u(rng) < null.link_probability(static_cast<NodeIndex>(i), static_cast<NodeIndex>(a))) s.emplace(i, a);
    const auto g = graph_from(60, 150, s);
    ValidationOptions o;
    o.alpha = kAlpha;
    const auto p = validate_projection(g, fit_null_model(g, NullModelChoice::auto_select), o);
    fractions.push_back(p.family_size ? static_cast<double>(p.edges.size()) / static_cast<double>(p.family_size) : 0.0);
  }
  double mean = 0, var = 0;
  for (double f : fractions) mean += f / 50.0;
  for (double f : fractions) var += (f - mean) * (f - mean) / 49.0;
  const double se = std::sqrt(var / 50.0);
  report("fdr-control", mean <= kAlpha + 2 * se,
         fmt("50 null samples; mean validated fraction %.5f, SE %.5f, bound %.5f", mean, se, kAlpha + 2 * se));
}

// --- 5 and 8. planted recovery and determinism --------------------------------------

double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> n;
  std::map<int, double> ra, cb;
  for (std::size_t k = 0; k < a.size(); ++k) {
    n[{a[k], b[k]}] += 1;
    ra[a[k]] += 1;
    cb[b[k]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [key, v] : n) index += c2(v);
  for (const auto& [key, v] : ra) sa += c2(v);
  for (const auto& [key, v] : cb) sb += c2(v);
  const double expected = sa * sb / c2(static_cast<double>(a.size()));
  const double max_index = (sa + sb) / 2;
  return (index - expected) / (max_index - expected);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void planted_and_determinism() {
  const auto dir = fs::temp_directory_path() / "nullnet_acceptance";
  fs::remove_all(dir);
  SynthOptions so;
  const auto data = generate_synthetic(so);
  write_synthetic(data, dir, so.seed);

  auto config = load_config(dir / "config.txt");
  config.output = dir / "run_a";
  const auto t0 = Clock::now();
  std::string failure;
  try {
    run_pipeline(config);
  } catch (const Error& e) {
    failure = e.what();
  }
  const double elapsed = seconds_since(t0);
  if (!failure.empty()) {
    report("planted-recovery", false, "pipeline failed: " + failure);
    report("determinism", false, "pipeline failed");
    return;
  }

  std::map<std::string, int> truth;
  for (const auto& u : data.users) truth[u.id] = u.community;

  // Louvain-best partition of the verified projection vs ground truth.
  const auto part = io::read_csv(config.output / "communities/verified.csv");
  std::vector<int> found, expected;
  for (const auto& row : part.rows) {
    found.push_back(std::stoi(row[1]));
    expected.push_back(truth.at(row[0]));
  }
  std::size_t n_verified = 0;
  for (const auto& u : data.users) n_verified += u.verified;
  const double ari = adjusted_rand(found, expected);

  // Propagation from five ground-truth seeds per community, 20 seeded runs.
  const auto rt = read_projection(config.output / "projections/retweet.csv", true);
  const auto g = UndirectedGraph::from_projection(rt);
  std::map<int, std::vector<std::string>> by_community;
  for (const auto& id : g.node_ids) by_community[truth.at(id)].push_back(id);
  double worst_run = 1.0, mean_run = 0.0;
  std::size_t reachable = 0;
  for (std::uint64_t run = 0; run < 20; ++run) {
    std::mt19937_64 rng(mix_seed(run, 5));
    std::map<std::string, std::string> seeds;
    for (auto& [c, ids] : by_community) {
      auto pool = ids;
      std::shuffle(pool.begin(), pool.end(), rng);
      for (std::size_t k = 0; k < std::min<std::size_t>(5, pool.size()); ++k) seeds[pool[k]] = std::to_string(c);
    }
    const auto labels = propagate_labels(g, seeds, {100, run});
    std::size_t correct = 0, labeled = 0;
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (labels.is_seed[v] || !labels.label[v]) continue;
      ++labeled;
      correct += *labels.label[v] == std::to_string(truth.at(g.node_ids[v]));
    }
    const double acc = labeled ? static_cast<double>(correct) / static_cast<double>(labeled) : 0.0;
    worst_run = std::min(worst_run, acc);
    mean_run += acc / 20.0;
    reachable = std::max(reachable, labeled);
  }
  report("planted-recovery", ari >= kAri && worst_run >= kPropagation && elapsed <= kEndToEndSeconds,
         fmt("ARI %.3f on %zu of %zu verified users (>= %.2f); propagation worst %.4f, mean %.4f over 20 runs, "
             "%zu reachable non-seed users (>= %.2f); end to end %.1f s (<= %.0f)",
             ari, found.size(), n_verified, kAri, worst_run, mean_run, reachable, kPropagation, elapsed, kEndToEndSeconds));

  config.output = dir / "run_b";
  try {
    run_pipeline(config);
  } catch (const Error& e) {
    report("determinism", false, std::string("second run failed: ") + e.what());
    return;
  }
  std::size_t files = 0, same = 0;
  for (const auto& entry : fs::directory_iterator(dir / "run_a/reports")) {
    ++files;
    const auto other = dir / "run_b/reports" / entry.path().filename();
    same += fs::exists(other) && slurp(entry.path()) == slurp(other);
  }
  report("determinism", files > 0 && same == files,
         fmt("%zu/%zu report files byte-identical across two runs", same, files));
}

// --- 6. reputability goldens ---------------------------------------------------------

PostRecord url_post(int k, const std::string& user, const std::string& url) {
  PostRecord p;
  p.post_id = std::to_string(k);
  p.author_id = user;
  p.urls = {url};
  return p;
}

void reputability_goldens() {
  const DomainAnnotation r{"r.com", ReputabilityLabel::R, 80.0, AnnotationSource::newsguard_file};
  const DomainAnnotation q{"q.com", ReputabilityLabel::QR, 60.0, AnnotationSource::newsguard_file};
  const DomainAnnotation n{"n.com", ReputabilityLabel::NR, 30.0, AnnotationSource::newsguard_file};
  const DomainAnnotation s{"s.com", ReputabilityLabel::S, std::nullopt, AnnotationSource::manual};
  const AnnotationTable ann({r, q, n, s});

  PostTable t;
  int k = 0;
  for (auto [domain, count] : std::vector<std::pair<std::string, int>>{
           {"r.com", 2684}, {"q.com", 109}, {"n.com", 609}, {"s.com", 1100}, {"unlisted.org", 257}})
    for (int i = 0; i < count; ++i, ++k) t.posts.push_back(url_post(k, "u" + std::to_string(k % 40), "https://www." + domain + "/" + std::to_string(k)));
  Membership m;
  for (int u = 0; u < 40; ++u) m["u" + std::to_string(u)] = "C";
  ReportOptions o;
  o.min_occurrence = 20;
  const auto csv = io::parse_csv(reputability_csv(aggregate_reputability(t, m, ann, o)));
  const bool table_ok = csv.rows.size() == 1 && csv.rows[0][2] == "4759" && csv.rows[0][3] == "56.4" &&
                        csv.rows[0][4] == "2.3" && csv.rows[0][5] == "12.8" && csv.rows[0][6] == "28.5";

  PostTable nr;
  for (int i = 0; i < 96; ++i) nr.posts.push_back(url_post(i, "a" + std::to_string(i % 6), "https://n.com/" + std::to_string(i)));
  for (int i = 0; i < 4; ++i) nr.posts.push_back(url_post(100 + i, "b", "https://n.com/b" + std::to_string(i)));
  Membership nm{{"b", "B"}};
  for (int u = 0; u < 6; ++u) nm["a" + std::to_string(u)] = "A";
  const auto share = nr_share_report(nr, nm, ann);
  double sa = -1, sb = -1;
  for (const auto& row : share) (row.community == "A" ? sa : sb) = row.share_percent;
  const bool share_ok = std::abs(sa - 96.0) < 1e-9 && std::abs(sb - 4.0) < 1e-9;

  const bool band_ok = score_to_label(54.99) == ReputabilityLabel::NR && score_to_label(55) == ReputabilityLabel::QR &&
                       score_to_label(65) == ReputabilityLabel::QR && score_to_label(65.01) == ReputabilityLabel::R;

  report("reputability-goldens", table_ok && share_ok && band_ok,
         fmt("table row %s/%s/%s/%s of %s; NR share %.1f/%.1f; band 55/65 %s",
             csv.rows.empty() ? "-" : csv.rows[0][3].c_str(), csv.rows.empty() ? "-" : csv.rows[0][4].c_str(),
             csv.rows.empty() ? "-" : csv.rows[0][5].c_str(), csv.rows.empty() ? "-" : csv.rows[0][6].c_str(),
             csv.rows.empty() ? "-" : csv.rows[0][2].c_str(), sa, sb, band_ok ? "ok" : "wrong"));
}

// --- 7. HITS --------------------------------------------------------------------------

double pearson(const std::vector<double>& a, const Eigen::VectorXd& b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += a[k] / n;
    mb += b(static_cast<Eigen::Index>(k)) / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double x = a[k] - ma, y = b(static_cast<Eigen::Index>(k)) - mb;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  return sab / std::sqrt(saa * sbb);
}

/// Top index agrees when the library's argmax is among the oracle's maxima.
bool top_agrees(const std::vector<double>& got, const Eigen::VectorXd& want) {
  const auto top = static_cast<Eigen::Index>(std::max_element(got.begin(), got.end()) - got.begin());
  return want(top) >= want.maxCoeff() - 1e-9;
}

void hits_oracle() {
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<int> size(10, 50);
  std::uniform_real_distribution<double> dens(0.08, 0.3);
  int top_ok = 0;
  double worst_corr = 1.0;
  std::string note;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = size(rng);
    std::bernoulli_distribution coin(dens(rng));
    std::vector<NodePair> edges;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && coin(rng)) {
          edges.emplace_back(i, j);
          a(i, j) = 1;
        }
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
    HubScores s;
    try {
      s = hits_scores(DirectedGraph::from_edges(ids, edges));
    } catch (const Error& e) {
      note += std::string(" [") + e.what() + "]";
      worst_corr = 0;
      continue;
    }
    auto principal = [](const Eigen::MatrixXd& m) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
      Eigen::VectorXd v = es.eigenvectors().col(m.rows() - 1);
      return v.sum() < 0 ? Eigen::VectorXd(-v) : v;
    };
    const Eigen::VectorXd hub = principal(a * a.transpose());
    const Eigen::VectorXd auth = principal(a.transpose() * a);
    top_ok += top_agrees(s.hub, hub) && top_agrees(s.authority, auth);
    worst_corr = std::min({worst_corr, pearson(s.hub, hub), pearson(s.authority, auth)});
  }
  report("hits-oracle", top_ok == 20 && worst_corr >= kHitsCorrelation,
         fmt("top-1 agreement %d/20, min correlation %.6f (>= %.3f)%s", top_ok, worst_corr, kHitsCorrelation, note.c_str()));
}

void guarded(const std::string& name, const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(name, false, std::string("threw: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded("degree-reproduction", degree_reproduction);
  guarded("closed-form-bidcm", closed_form_bidcm);
  guarded("oracle-p-values", oracle_p_values);
  guarded("fdr-control", fdr_control);
  guarded("planted-recovery", planted_and_determinism);
  guarded("reputability-goldens", reputability_goldens);
  guarded("hits-oracle", hits_oracle);
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
