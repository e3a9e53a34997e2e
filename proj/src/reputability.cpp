#include "nullnet/reputability.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "nullnet/error.hpp"
#include "nullnet/io.hpp"

namespace nullnet {

namespace {

constexpr std::array<std::pair<ReputabilityLabel, std::string_view>, 11> kLabelNames{{
    {ReputabilityLabel::R, "R"},
    {ReputabilityLabel::QR, "QR"},
    {ReputabilityLabel::NR, "NR"},
    {ReputabilityLabel::S, "S"},
    {ReputabilityLabel::F, "F"},
    {ReputabilityLabel::M, "M"},
    {ReputabilityLabel::P, "P"},
    {ReputabilityLabel::IS, "IS"},
    {ReputabilityLabel::ST, "ST"},
    {ReputabilityLabel::SE, "SE"},
    {ReputabilityLabel::UNC, "UNC"},
}};

// Multi-label public suffixes; any other host uses its last label as suffix.
const std::unordered_set<std::string_view>& public_suffixes() {
  static const std::unordered_set<std::string_view> suffixes{
      "co.uk",  "org.uk", "ac.uk",  "gov.uk", "ltd.uk", "plc.uk", "me.uk",  "net.uk",
      "sch.uk", "nhs.uk", "com.au", "net.au", "org.au", "edu.au", "gov.au", "asn.au",
      "id.au",  "co.nz",  "net.nz", "org.nz", "govt.nz", "ac.nz", "co.jp",  "ne.jp",
      "or.jp",  "ac.jp",  "go.jp",  "gr.jp",  "com.br", "net.br", "org.br", "gov.br",
      "edu.br", "com.ar", "gob.ar", "org.ar", "com.mx", "gob.mx", "org.mx", "co.in",
      "net.in", "org.in", "gov.in", "ac.in",  "co.za",  "org.za", "gov.za", "com.cn",
      "net.cn", "org.cn", "gov.cn", "edu.cn", "com.tr", "gov.tr", "org.tr", "com.tw",
      "org.tw", "gov.tw", "com.hk", "org.hk", "gov.hk", "co.kr",  "or.kr",  "go.kr",
      "com.sg", "gov.sg", "edu.sg", "com.my", "gov.my", "co.id",  "or.id",  "go.id",
      "co.il",  "org.il", "gov.il", "ac.il",  "com.pl", "org.pl", "net.pl", "com.es",
      "org.es", "gob.es", "com.pt", "org.pt", "com.gr", "gov.gr", "com.ru", "org.ru",
      "com.ua", "gov.ua", "com.eg", "gov.eg", "com.sa", "gov.sa", "com.pk", "gov.pk",
      "com.ng", "gov.ng", "co.ke",  "go.ke",  "com.co", "gov.co", "com.pe", "gob.pe",
      "com.ve", "gob.ve", "com.ph", "gov.ph", "co.th",  "go.th",  "com.vn", "gov.vn",
  };
  return suffixes;
}

bool valid_host_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '-' || c == '_' || u >= 0x80;
}

std::vector<std::string_view> split_labels(std::string_view host) {
  std::vector<std::string_view> labels;
  std::size_t start = 0;
  while (true) {
    const auto dot = host.find('.', start);
    labels.push_back(host.substr(start, dot == std::string_view::npos ? host.npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return labels;
}

}  // namespace

std::string to_string(ReputabilityLabel label) {
  for (const auto& [l, name] : kLabelNames)
    if (l == label) return std::string(name);
  return "UNC";
}

std::string report_name(ReputabilityLabel label) {
  return label == ReputabilityLabel::QR ? "~R" : to_string(label);
}

std::string to_string(LabelClass c) {
  switch (c) {
    case LabelClass::R: return "R";
    case LabelClass::QR: return "QR";
    case LabelClass::NR: return "NR";
    case LabelClass::Others: return "Others";
  }
  return "Others";
}

ReputabilityLabel parse_label(std::string_view text) {
  std::string upper(text);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "~R") return ReputabilityLabel::QR;
  for (const auto& [l, name] : kLabelNames)
    if (upper == name) return l;
  throw Error(ErrorCode::parse, "unknown reputability label '" + std::string(text) + "'");
}

LabelClass class_of(ReputabilityLabel label) {
  switch (label) {
    case ReputabilityLabel::R: return LabelClass::R;
    case ReputabilityLabel::QR: return LabelClass::QR;
    case ReputabilityLabel::NR: return LabelClass::NR;
    default: return LabelClass::Others;
  }
}

std::string extract_domain(std::string_view url, bool keep_subdomains) {
  auto fail = [&] { return Error(ErrorCode::parse, "not a URL: '" + std::string(url) + "'"); };
  while (!url.empty() && std::isspace(static_cast<unsigned char>(url.front()))) url.remove_prefix(1);
  while (!url.empty() && std::isspace(static_cast<unsigned char>(url.back()))) url.remove_suffix(1);

  const auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) throw fail();
  const auto scheme = url.substr(0, sep);
  if (!std::isalpha(static_cast<unsigned char>(scheme[0]))) throw fail();
  for (char c : scheme)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.'))
      throw fail();

  auto authority = url.substr(sep + 3);
  authority = authority.substr(0, authority.find_first_of("/?#"));
  if (const auto at = authority.rfind('@'); at != std::string_view::npos)
    authority.remove_prefix(at + 1);

  std::string host;
  if (authority.starts_with('[')) {
    const auto close = authority.find(']');
    if (close == std::string_view::npos || close == 1) throw fail();
    host = std::string(authority.substr(0, close + 1));
  } else {
    if (const auto colon = authority.find(':'); colon != std::string_view::npos) {
      const auto port = authority.substr(colon + 1);
      if (!std::all_of(port.begin(), port.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        throw fail();
      authority = authority.substr(0, colon);
    }
    host = std::string(authority);
  }
  for (char& c : host) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (host.ends_with('.')) host.pop_back();
  if (host.empty()) throw fail();
  if (host.front() == '[') return host;

  const auto labels = split_labels(host);
  for (auto label : labels) {
    if (label.empty()) throw fail();
    if (!std::all_of(label.begin(), label.end(), valid_host_char)) throw fail();
  }
  const bool ipv4 = labels.size() == 4 && std::all_of(labels.begin(), labels.end(), [](auto l) {
    return std::all_of(l.begin(), l.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  });
  if (ipv4 || labels.size() == 1) return host;

  if (keep_subdomains) {
    if (host.starts_with("www.") && labels.size() > 2) host.erase(0, 4);
    return host;
  }

  std::size_t suffix_labels = 1;
  if (labels.size() >= 2) {
    const auto last_two = std::string_view(host).substr(
        static_cast<std::size_t>(labels[labels.size() - 2].data() - host.data()));
    if (public_suffixes().count(last_two)) suffix_labels = 2;
  }
  if (labels.size() <= suffix_labels) return host;
  const auto first = labels[labels.size() - suffix_labels - 1];
  return host.substr(static_cast<std::size_t>(first.data() - host.data()));
}

ReputabilityLabel score_to_label(double score) {
  if (!(score >= 0.0 && score <= 100.0))
    throw Error(ErrorCode::invalid_argument, "score must lie in [0, 100]");
  if (score < 55.0) return ReputabilityLabel::NR;
  if (score <= 65.0) return ReputabilityLabel::QR;
  return ReputabilityLabel::R;
}

double fleiss_kappa(const std::vector<std::vector<int>>& ratings) {
  if (ratings.empty()) throw Error(ErrorCode::empty_input, "no items to rate");
  const std::size_t categories = ratings.front().size();
  if (categories == 0) throw Error(ErrorCode::invalid_argument, "no rating categories");
  long raters = -1;
  for (const auto& row : ratings) {
    if (row.size() != categories) throw Error(ErrorCode::invalid_argument, "ragged rating matrix");
    long sum = 0;
    for (int c : row) {
      if (c < 0) throw Error(ErrorCode::invalid_argument, "negative rating count");
      sum += c;
    }
    if (raters < 0) raters = sum;
    if (sum != raters)
      throw Error(ErrorCode::invalid_argument, "every item needs the same number of raters");
  }
  if (raters < 2) throw Error(ErrorCode::invalid_argument, "at least two raters are needed");

  const auto n = static_cast<double>(raters);
  const auto items = static_cast<double>(ratings.size());
  std::vector<double> column(categories, 0.0);
  double p_bar = 0.0;
  for (const auto& row : ratings) {
    double agree = 0.0;
    for (std::size_t j = 0; j < categories; ++j) {
      agree += static_cast<double>(row[j]) * (row[j] - 1);
      column[j] += row[j];
    }
    p_bar += agree / (n * (n - 1.0));
  }
  p_bar /= items;
  double p_e = 0.0;
  for (double c : column) {
    const double pj = c / (items * n);
    p_e += pj * pj;
  }
  if (p_e >= 1.0) return 1.0;
  return (p_bar - p_e) / (1.0 - p_e);
}

AnnotationTable::AnnotationTable(std::vector<DomainAnnotation> entries) {
  for (auto& e : entries) {
    if (e.domain.empty()) throw Error(ErrorCode::invalid_argument, "annotation without domain");
    if (e.score) {
      const auto from_score = score_to_label(*e.score);
      if (class_of(e.label) != LabelClass::Others && e.label != from_score)
        throw Error(ErrorCode::invalid_argument,
                    "label of '" + e.domain + "' contradicts its score");
    }
    const std::string key = e.domain;
    if (!entries_.emplace(key, std::move(e)).second)
      throw Error(ErrorCode::invalid_argument, "duplicate annotation for '" + key + "'");
  }
}

std::optional<ReputabilityLabel> AnnotationTable::lookup(const std::string& domain) const {
  auto it = entries_.find(domain);
  if (it == entries_.end()) return std::nullopt;
  return it->second.label;
}

AnnotationTable read_annotations(const std::filesystem::path& csv_path) {
  const auto table = io::read_csv(csv_path);
  const auto di = table.column("domain"), si = table.column("score"), li = table.column("label"),
             oi = table.column("source");
  std::vector<DomainAnnotation> entries;
  for (const auto& r : table.rows) {
    DomainAnnotation a;
    a.domain = r[di];
    for (char& c : a.domain) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!r[si].empty()) {
      try {
        a.score = std::stod(r[si]);
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::parse, "bad score for '" + a.domain + "'");
      }
    }
    if (!r[li].empty()) {
      a.label = parse_label(r[li]);
    } else if (a.score) {
      a.label = score_to_label(*a.score);
    } else {
      throw Error(ErrorCode::parse, "annotation for '" + a.domain + "' has neither score nor label");
    }
    if (r[oi] == "manual") {
      a.source = AnnotationSource::manual;
    } else if (r[oi] == "newsguard_file" || (r[oi].empty() && a.score)) {
      a.source = AnnotationSource::newsguard_file;
    } else if (r[oi].empty()) {
      a.source = AnnotationSource::manual;
    } else {
      throw Error(ErrorCode::parse, "unknown annotation source '" + r[oi] + "'");
    }
    entries.push_back(std::move(a));
  }
  return AnnotationTable(std::move(entries));
}

std::optional<std::int64_t> parse_timestamp(const nlohmann::json& value) {
  using namespace std::chrono;
  if (value.is_number_integer()) return value.get<std::int64_t>();
  if (value.is_number_float()) {
    const double v = value.get<double>();
    if (!std::isfinite(v)) return std::nullopt;
    return static_cast<std::int64_t>(std::floor(v));
  }
  if (!value.is_string()) return std::nullopt;
  const auto text = value.get<std::string>();
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0, consumed = 0;
  char sep = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &s,
                  &consumed) != 7)
    return std::nullopt;
  if (sep != 'T' && sep != ' ') return std::nullopt;
  std::string_view rest(text.c_str() + consumed);
  if (rest.starts_with('.')) {
    rest.remove_prefix(1);
    while (!rest.empty() && std::isdigit(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
  }
  if (!(rest.empty() || rest == "Z" || rest == "+00:00" || rest == "+0000")) return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86'400 + h * 3'600 + mi * 60 + s;
}

std::string format_timestamp(std::int64_t seconds) {
  using namespace std::chrono;
  const auto days = static_cast<int>(std::floor(static_cast<double>(seconds) / 86'400.0));
  const std::int64_t rem = seconds - static_cast<std::int64_t>(days) * 86'400;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3'600), static_cast<int>(rem / 60 % 60),
                static_cast<int>(rem % 60));
  return buf;
}

PostTable parse_posts(std::string_view jsonl) {
  PostTable table;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PostRecord p;
      p.post_id = j.at("post_id").get<std::string>();
      p.author_id = j.at("author_id").get<std::string>();
      if (p.post_id.empty() || p.author_id.empty()) throw std::invalid_argument("empty id");
      if (j.contains("retweeter_id") && !j["retweeter_id"].is_null())
        p.retweeter_id = j["retweeter_id"].get<std::string>();
      if (j.contains("timestamp")) {
        p.timestamp = parse_timestamp(j["timestamp"]);
        if (!p.timestamp) ++table.bad_timestamps;
      } else {
        ++table.bad_timestamps;
      }
      if (j.contains("urls")) p.urls = j["urls"].get<std::vector<std::string>>();
      table.posts.push_back(std::move(p));
    } catch (const std::exception&) {
      ++table.malformed_lines;
    }
  }
  return table;
}

PostTable read_posts(const std::filesystem::path& jsonl_path) {
  return parse_posts(io::read_file(jsonl_path));
}

std::string post_to_jsonl(const PostRecord& post) {
  nlohmann::ordered_json j;
  j["post_id"] = post.post_id;
  j["author_id"] = post.author_id;
  if (post.retweeter_id) j["retweeter_id"] = *post.retweeter_id;
  if (post.timestamp) j["timestamp"] = *post.timestamp;
  j["urls"] = post.urls;
  return j.dump() + "\n";
}

void ClassCounts::add(LabelClass c) {
  switch (c) {
    case LabelClass::R: ++r; break;
    case LabelClass::QR: ++qr; break;
    case LabelClass::NR: ++nr; break;
    case LabelClass::Others: ++others; break;
  }
}

double ClassCounts::percent(LabelClass c) const {
  const auto t = total();
  if (t == 0) return c == LabelClass::Others ? 100.0 : 0.0;
  std::int64_t v = 0;
  switch (c) {
    case LabelClass::R: v = r; break;
    case LabelClass::QR: v = qr; break;
    case LabelClass::NR: v = nr; break;
    case LabelClass::Others: v = others; break;
  }
  return 100.0 * static_cast<double>(v) / static_cast<double>(t);
}

namespace {

struct ResolvedUrl {
  std::string domain;  // empty when unparseable
  ReputabilityLabel label = ReputabilityLabel::UNC;
};

/// Resolves every url of the table once; occurrence counts span the whole table.
class UrlResolver {
 public:
  UrlResolver(const PostTable& posts, const AnnotationTable& annotations,
              const ReportOptions& options) {
    if (options.min_occurrence < 1)
      throw Error(ErrorCode::invalid_argument, "min_occurrence must be >= 1");
    std::unordered_map<std::string, std::int64_t> occurrences;
    for (const auto& p : posts.posts)
      for (const auto& url : p.urls) {
        if (cache_.count(url)) {
          if (!cache_[url].domain.empty()) ++occurrences[cache_[url].domain];
          continue;
        }
        ResolvedUrl r;
        try {
          r.domain = extract_domain(url, options.keep_subdomains);
          ++occurrences[r.domain];
        } catch (const Error&) {
          ++malformed_;
        }
        cache_.emplace(url, std::move(r));
      }
    for (auto& [url, r] : cache_) {
      if (r.domain.empty()) continue;
      if (occurrences[r.domain] < options.min_occurrence) continue;
      if (auto label = annotations.lookup(r.domain)) r.label = *label;
    }
  }

  const ResolvedUrl& operator()(const std::string& url) const { return cache_.at(url); }
  std::size_t malformed() const { return malformed_; }

 private:
  std::unordered_map<std::string, ResolvedUrl> cache_;
  std::size_t malformed_ = 0;
};

std::vector<std::string> community_names(const Membership& membership) {
  std::set<std::string> names;
  for (const auto& [user, c] : membership) names.insert(c);
  return {names.begin(), names.end()};
}

std::vector<std::string> report_types(bool split) {
  return split ? std::vector<std::string>{"tw", "rt"} : std::vector<std::string>{"all"};
}

}  // namespace

std::vector<AuditRow> audit_rows(const PostTable& posts, const Membership& membership,
                                 const AnnotationTable& annotations, const ReportOptions& options) {
  const UrlResolver resolve(posts, annotations, options);
  std::vector<AuditRow> rows;
  for (const auto& p : posts.posts) {
    auto it = membership.find(p.acting_user());
    if (it == membership.end()) continue;
    for (const auto& url : p.urls) {
      const auto& r = resolve(url);
      rows.push_back({p.post_id, p.acting_user(), it->second, p.is_retweet() ? "rt" : "tw", url,
                      r.domain, r.label});
    }
  }
  return rows;
}

std::vector<CommunityReport> aggregate_reputability(const PostTable& posts,
                                                    const Membership& membership,
                                                    const AnnotationTable& annotations,
                                                    const ReportOptions& options) {
  if (posts.posts.empty()) throw Error(ErrorCode::empty_input, "empty post table");
  const UrlResolver resolve(posts, annotations, options);
  const auto types = report_types(options.split_by_type);

  struct Acc {
    CommunityReport report;
    std::set<std::string> urls, domains, users;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  for (const auto& c : community_names(membership))
    for (const auto& t : types) { auto& r = acc[{c, t}].report; r.community = c; r.type = t; }

  for (const auto& p : posts.posts) {
    auto it = membership.find(p.acting_user());
    if (it == membership.end()) continue;
    const std::string type = options.split_by_type ? (p.is_retweet() ? "rt" : "tw") : "all";
    auto& a = acc[{it->second, type}];
    ++a.report.posts;
    a.users.insert(p.acting_user());
    for (const auto& url : p.urls) {
      const auto& r = resolve(url);
      a.report.counts.add(class_of(r.label));
      a.urls.insert(url);
      if (!r.domain.empty()) a.domains.insert(r.domain);
    }
  }

  std::vector<CommunityReport> out;
  for (const auto& t : types)
    for (auto& [key, a] : acc) {
      if (key.second != t) continue;
      a.report.distinct_urls = static_cast<std::int64_t>(a.urls.size());
      a.report.domains = static_cast<std::int64_t>(a.domains.size());
      a.report.users = static_cast<std::int64_t>(a.users.size());
      out.push_back(a.report);
    }
  return out;
}

std::vector<NrShareRow> nr_share_report(const PostTable& posts, const Membership& membership,
                                        const AnnotationTable& annotations,
                                        const ReportOptions& options) {
  if (posts.posts.empty()) throw Error(ErrorCode::empty_input, "empty post table");
  const UrlResolver resolve(posts, annotations, options);
  const auto types = report_types(options.split_by_type);

  struct Acc {
    NrShareRow row;
    std::set<std::string> urls;
    std::map<std::string, std::int64_t> domains;
    std::set<std::string> users;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  for (const auto& c : community_names(membership))
    for (const auto& t : types) { auto& r = acc[{c, t}].row; r.community = c; r.type = t; }

  for (const auto& p : posts.posts) {
    auto it = membership.find(p.acting_user());
    if (it == membership.end()) continue;
    const std::string type = options.split_by_type ? (p.is_retweet() ? "rt" : "tw") : "all";
    auto& a = acc[{it->second, type}];
    bool has_nr = false;
    for (const auto& url : p.urls) {
      const auto& r = resolve(url);
      if (r.label != ReputabilityLabel::NR) continue;
      has_nr = true;
      ++a.row.nr_urls;
      a.urls.insert(url);
      ++a.domains[r.domain];
    }
    if (has_nr) {
      ++a.row.nr_posts;
      a.users.insert(p.acting_user());
    }
  }

  std::vector<NrShareRow> out;
  for (const auto& t : types) {
    std::int64_t total_nr = 0;
    for (const auto& [key, a] : acc)
      if (key.second == t) total_nr += a.row.nr_urls;
    for (auto& [key, a] : acc) {
      if (key.second != t) continue;
      auto& row = a.row;
      row.distinct_nr_urls = static_cast<std::int64_t>(a.urls.size());
      row.nr_domains = static_cast<std::int64_t>(a.domains.size());
      row.nr_users = static_cast<std::int64_t>(a.users.size());
      row.mean_defined = row.nr_users > 0;
      row.mean_nr_posts_per_user =
          row.mean_defined ? static_cast<double>(row.nr_posts) / static_cast<double>(row.nr_users)
                           : 0.0;
      row.share_percent = total_nr > 0 ? 100.0 * static_cast<double>(row.nr_urls) /
                                             static_cast<double>(total_nr)
                                       : 0.0;
      row.top_domains.assign(a.domains.begin(), a.domains.end());
      std::stable_sort(row.top_domains.begin(), row.top_domains.end(),
                       [](const auto& x, const auto& y) { return x.second > y.second; });
      out.push_back(row);
    }
  }
  return out;
}

TimeSeries timeseries_report(const PostTable& posts, const AnnotationTable& annotations,
                             std::int64_t bucket_seconds, const ReportOptions& options) {
  if (bucket_seconds <= 0) throw Error(ErrorCode::invalid_argument, "bucket must be positive");
  const UrlResolver resolve(posts, annotations, options);
  TimeSeries ts;
  ts.bucket_seconds = bucket_seconds;
  std::map<std::int64_t, ClassCounts> buckets;
  auto floor_div = [](std::int64_t a, std::int64_t b) {
    return a / b - ((a % b != 0) && ((a < 0) != (b < 0)));
  };
  for (const auto& p : posts.posts) {
    if (p.urls.empty()) continue;
    if (!p.timestamp) {
      ++ts.skipped;
      continue;
    }
    auto& counts = buckets[floor_div(*p.timestamp, bucket_seconds) * bucket_seconds];
    for (const auto& url : p.urls) counts.add(class_of(resolve(url).label));
  }
  if (buckets.empty()) return ts;
  for (std::int64_t start = buckets.begin()->first; start <= buckets.rbegin()->first;
       start += bucket_seconds) {
    auto it = buckets.find(start);
    ts.buckets.push_back({start, it == buckets.end() ? ClassCounts{} : it->second});
  }
  return ts;
}

std::string reputability_csv(const std::vector<CommunityReport>& rows) {
  std::string out = io::csv_line({"community", "type", "url_count", "R", "~R", "NR", "Others",
                                  "posts", "distinct_urls", "domains", "users"});
  for (const auto& r : rows)
    out += io::csv_line({r.community, r.type, std::to_string(r.url_count()),
                         io::format_fixed(r.counts.percent(LabelClass::R), 1),
                         io::format_fixed(r.counts.percent(LabelClass::QR), 1),
                         io::format_fixed(r.counts.percent(LabelClass::NR), 1),
                         io::format_fixed(r.counts.percent(LabelClass::Others), 1),
                         std::to_string(r.posts), std::to_string(r.distinct_urls),
                         std::to_string(r.domains), std::to_string(r.users)});
  return out;
}

std::string nr_share_csv(const std::vector<NrShareRow>& rows) {
  std::string out = io::csv_line({"community", "type", "nr_posts", "nr_urls", "distinct_nr_urls",
                                  "nr_domains", "nr_users", "mean_nr_posts_per_user",
                                  "mean_defined", "share_percent", "top_domain",
                                  "top_domain_count"});
  for (const auto& r : rows) {
    const bool any = !r.top_domains.empty();
    out += io::csv_line({r.community, r.type, std::to_string(r.nr_posts),
                         std::to_string(r.nr_urls), std::to_string(r.distinct_nr_urls),
                         std::to_string(r.nr_domains), std::to_string(r.nr_users),
                         io::format_fixed(r.mean_nr_posts_per_user, 2),
                         r.mean_defined ? "true" : "false", io::format_fixed(r.share_percent, 1),
                         any ? r.top_domains.front().first : "",
                         any ? std::to_string(r.top_domains.front().second) : "0"});
  }
  return out;
}

std::string timeseries_csv(const TimeSeries& series) {
  std::string out = io::csv_line({"bucket_start", "R", "QR", "NR", "Others"});
  for (const auto& b : series.buckets)
    out += io::csv_line({format_timestamp(b.start), std::to_string(b.counts.r),
                         std::to_string(b.counts.qr), std::to_string(b.counts.nr),
                         std::to_string(b.counts.others)});
  return out;
}

std::string audit_csv(const std::vector<AuditRow>& rows) {
  std::string out =
      io::csv_line({"post_id", "user_id", "community", "type", "url", "domain", "label"});
  for (const auto& r : rows)
    out += io::csv_line({r.post_id, r.user_id, r.community, r.type, r.url, r.domain,
                         report_name(r.label)});
  return out;
}

}  // namespace nullnet
