#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nullnet/graph.hpp"
#include "nullnet/nullmodel.hpp"
#include "nullnet/projection.hpp"

namespace nullnet {

struct TweetRecord {
  std::string post_id;
  std::string author_id;
  bool author_verified = false;
  std::optional<std::string> retweet_of;
  std::int64_t timestamp = 0;
  std::vector<std::string> urls;
  std::optional<std::string> lang;

  bool is_retweet() const { return retweet_of.has_value(); }
};

/// Parses one JSONL line. Throws `parse` on malformed input.
TweetRecord parse_tweet(std::string_view line);
std::string tweet_to_jsonl(const TweetRecord& t);

struct IngestFilters {
  std::optional<std::string> lang;
  std::optional<std::int64_t> from;  // inclusive, UTC seconds
  std::optional<std::int64_t> to;    // exclusive
  double max_malformed_fraction = 0.1;
};

struct IngestStats {
  std::size_t lines = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
  std::size_t filtered_lang = 0;
  std::size_t filtered_date = 0;
  std::size_t kept = 0;
  std::vector<std::string> warnings;
  std::map<std::string, std::size_t> per_day;  // coverage by UTC day
};

struct TweetStore {
  std::vector<TweetRecord> records;  // first occurrence of each post id, input order
  IngestStats stats;
};

/// Reads JSONL files in order. Throws `io` on unreadable paths and `parse`
/// when the malformed fraction exceeds the configured limit.
TweetStore ingest(const std::vector<std::filesystem::path>& paths, const IngestFilters& filters);
TweetStore ingest_text(std::string_view jsonl, const IngestFilters& filters);

/// Store directory: records.jsonl plus ingest.json.
void write_store(const TweetStore& store, const std::filesystem::path& dir);
TweetStore read_store(const std::filesystem::path& dir);

struct VerifiedBuildStats {
  std::size_t verified_users = 0;
  std::size_t unverified_users = 0;
  std::size_t verified_pairs_skipped = 0;
  std::size_t unverified_pairs_skipped = 0;
  std::size_t self_retweets = 0;
  std::size_t orphan_retweets = 0;
};

struct RawRetweet {
  std::string retweeter;
  std::string author;
  std::int64_t count = 0;
};

struct VerifiedBipartite {
  BipartiteGraph graph;  // L = verified, Γ = unverified
  VerifiedBuildStats stats;
  std::vector<RawRetweet> raw;  // retweet multiplicities, sorted
};

/// Throws `empty_input` when no verified user exists or no mixed pair survives.
VerifiedBipartite build_verified_bipartite(const TweetStore& store);

/// Retweet chains resolve to their root original. Throws `empty_input` on an
/// empty store.
DirectedBipartiteGraph build_user_post_bipartite(const TweetStore& store);

// --- configuration ------------------------------------------------------------

/// Flat `key = value` configuration. Lines starting with '#' or ';' and
/// `[section]` headers are ignored; values may be double-quoted.
struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path annotations;
  std::filesystem::path output = "nullnet_out";
  std::filesystem::path seeds;  // optional override of propagation seeds

  std::uint64_t seed = 42;
  double alpha = 0.05;
  double sparse_threshold = 1e-2;
  NullModelChoice null_model = NullModelChoice::auto_select;
  FdrFamily fdr_family = FdrFamily::nonzero;
  DistributionMode distribution = DistributionMode::poisson;
  std::size_t exact_cutoff = 2000;
  double fit_tol = 1e-8;
  int fit_max_iter = 10'000;

  int restarts = 0;  // 0: one per node, capped at max_restarts
  int max_restarts = 1000;
  bool subcommunities = true;
  int max_sweeps = 100;
  unsigned threads = 1;

  std::int64_t min_occurrence_verified = 20;
  std::int64_t min_occurrence_retweet = 100;
  bool keep_subdomains = false;
  bool split_by_type = true;
  std::int64_t bucket_seconds = 86'400;

  std::optional<std::string> lang;
  std::optional<std::string> date_from;  // YYYY-MM-DD, inclusive
  std::optional<std::string> date_to;    // YYYY-MM-DD, exclusive
  double max_malformed_fraction = 0.1;

  /// Throws `invalid_argument` for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  nlohmann::ordered_json to_json() const;

  IngestFilters filters() const;
  /// Checks ranges; throws `invalid_argument`.
  void validate() const;
};

PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

// --- stages -------------------------------------------------------------------

const std::vector<std::string>& stage_names();
/// Throws `invalid_argument` for an unknown stage.
std::size_t stage_index(const std::string& name);

/// Runs one stage reading only artifacts persisted by earlier stages.
/// Errors keep their original code.
void run_stage(const PipelineConfig& config, const std::string& stage);

/// Runs the stages from `from_stage` (or the first) to the end and writes
/// run_manifest.json. On failure the manifest records the failed stage and an
/// `Error(stage_failure)` is thrown carrying the cause.
nlohmann::ordered_json run_pipeline(const PipelineConfig& config,
                                    const std::optional<std::string>& from_stage = std::nullopt);

/// Standalone projection of a bipartite CSV (`left_id,right_id`) or, when
/// `directed`, a user/post CSV (`user_id,post_id,kind`).
ValidatedProjection project_file(const std::filesystem::path& input, bool directed,
                                 const PipelineConfig& config);

}  // namespace nullnet
