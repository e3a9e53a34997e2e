#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace nullnet {

/// Domain tags: reputable, quasi-reputable and not-reputable news sources,
/// then social networks, fundraisers, marketplaces, party journals,
/// institutional sites, streaming, search engines and unclassified.
enum class ReputabilityLabel { R, QR, NR, S, F, M, P, IS, ST, SE, UNC };

/// Report columns: every non-news tag and UNC fold into Others.
enum class LabelClass { R, QR, NR, Others };

std::string to_string(ReputabilityLabel label);       // "QR" for quasi-reputable
std::string report_name(ReputabilityLabel label);     // "~R" for quasi-reputable
std::string to_string(LabelClass c);                  // "R", "QR", "NR", "Others"
ReputabilityLabel parse_label(std::string_view text); // accepts "QR" and "~R"
LabelClass class_of(ReputabilityLabel label);

/// Registrable (second-level) domain of an absolute URL, lowercased, honouring
/// multi-label public suffixes such as co.uk. With `keep_subdomains` only a
/// leading "www." is removed and the full host is kept. Throws `parse` on
/// anything that is not an absolute URL with a host.
std::string extract_domain(std::string_view url, bool keep_subdomains = false);

/// < 55 -> NR, [55, 65] -> QR, > 65 -> R. Throws outside [0, 100].
ReputabilityLabel score_to_label(double score);

/// Fleiss' kappa over an items x categories matrix of rater counts. Every item
/// must be rated by the same number (>= 2) of raters. Returns 1 when every
/// rating falls in one category.
double fleiss_kappa(const std::vector<std::vector<int>>& ratings);

enum class AnnotationSource { newsguard_file, manual };

struct DomainAnnotation {
  std::string domain;
  ReputabilityLabel label = ReputabilityLabel::UNC;
  std::optional<double> score;
  AnnotationSource source = AnnotationSource::manual;
};

class AnnotationTable {
 public:
  AnnotationTable() = default;
  /// Throws `invalid_argument` on duplicates or a label inconsistent with its score.
  explicit AnnotationTable(std::vector<DomainAnnotation> entries);

  std::optional<ReputabilityLabel> lookup(const std::string& domain) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, DomainAnnotation> entries_;
};

/// `domain,score,label,source`; each row needs a score or a label.
AnnotationTable read_annotations(const std::filesystem::path& csv_path);

struct PostRecord {
  std::string post_id;
  std::string author_id;
  std::optional<std::string> retweeter_id;
  std::optional<std::int64_t> timestamp;  // UTC seconds; absent when unparseable
  std::vector<std::string> urls;

  bool is_retweet() const { return retweeter_id.has_value(); }
  /// The user whose activity the post counts toward.
  const std::string& acting_user() const { return retweeter_id ? *retweeter_id : author_id; }
};

struct PostTable {
  std::vector<PostRecord> posts;
  std::size_t malformed_lines = 0;
  std::size_t bad_timestamps = 0;
};

/// Integer seconds, or ISO-8601 "YYYY-MM-DD[T ]HH:MM:SS[Z|+00:00]".
std::optional<std::int64_t> parse_timestamp(const nlohmann::json& value);
std::string format_timestamp(std::int64_t seconds);

/// JSONL `{post_id, author_id, retweeter_id?, timestamp, urls:[...]}`.
PostTable read_posts(const std::filesystem::path& jsonl_path);
PostTable parse_posts(std::string_view jsonl);
std::string post_to_jsonl(const PostRecord& post);

struct ClassCounts {
  std::int64_t r = 0;
  std::int64_t qr = 0;
  std::int64_t nr = 0;
  std::int64_t others = 0;

  std::int64_t total() const { return r + qr + nr + others; }
  void add(LabelClass c);
  /// Percentage of `c` over the total; 100 for Others on an empty row.
  double percent(LabelClass c) const;
};

struct ReportOptions {
  /// Domains occurring fewer times across the whole table stay unresolved (UNC).
  std::int64_t min_occurrence = 1;
  bool split_by_type = false;
  bool keep_subdomains = false;
};

struct CommunityReport {
  std::string community;
  std::string type;  // "all", "tw" or "rt"
  ClassCounts counts;
  std::int64_t posts = 0;
  std::int64_t distinct_urls = 0;
  std::int64_t domains = 0;
  std::int64_t users = 0;

  std::int64_t url_count() const { return counts.total(); }
};

/// One row per url occurrence, the trail every report count is built from.
struct AuditRow {
  std::string post_id;
  std::string user_id;
  std::string community;
  std::string type;
  std::string url;
  std::string domain;  // empty when the url could not be parsed
  ReputabilityLabel label = ReputabilityLabel::UNC;
};

using Membership = std::map<std::string, std::string>;  // user id -> community

/// Url rows of posts whose acting user belongs to a community.
std::vector<AuditRow> audit_rows(const PostTable& posts, const Membership& membership,
                                 const AnnotationTable& annotations, const ReportOptions& options);

/// Percentages of R / ~R / NR / Others per community, optionally split into
/// tweets and retweets. Communities with no urls get a row with Others = 100.
/// Throws `empty_input` on an empty post table.
std::vector<CommunityReport> aggregate_reputability(const PostTable& posts,
                                                    const Membership& membership,
                                                    const AnnotationTable& annotations,
                                                    const ReportOptions& options = {});

struct NrShareRow {
  std::string community;
  std::string type;
  std::int64_t nr_posts = 0;
  std::int64_t nr_urls = 0;
  std::int64_t distinct_nr_urls = 0;
  std::int64_t nr_domains = 0;
  std::int64_t nr_users = 0;
  double mean_nr_posts_per_user = 0.0;
  bool mean_defined = false;
  double share_percent = 0.0;  // of all NR urls across reported communities
  std::vector<std::pair<std::string, std::int64_t>> top_domains;  // descending
};

std::vector<NrShareRow> nr_share_report(const PostTable& posts, const Membership& membership,
                                        const AnnotationTable& annotations,
                                        const ReportOptions& options = {});

struct TimeBucket {
  std::int64_t start = 0;
  ClassCounts counts;
};

struct TimeSeries {
  std::int64_t bucket_seconds = 86'400;
  std::vector<TimeBucket> buckets;  // dense, ascending
  std::size_t skipped = 0;          // url-bearing posts without a usable timestamp
};

/// Url counts per bucket and class (one count per url occurrence), on a dense
/// axis from the first to the last non-empty bucket. Buckets align to the epoch.
TimeSeries timeseries_report(const PostTable& posts, const AnnotationTable& annotations,
                             std::int64_t bucket_seconds, const ReportOptions& options = {});

std::string reputability_csv(const std::vector<CommunityReport>& rows);
std::string nr_share_csv(const std::vector<NrShareRow>& rows);
std::string timeseries_csv(const TimeSeries& series);
std::string audit_csv(const std::vector<AuditRow>& rows);

}  // namespace nullnet
