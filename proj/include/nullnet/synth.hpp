#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nullnet/pipeline.hpp"
#include "nullnet/reputability.hpp"

namespace nullnet {

/// Planted-partition tweet generator. Users split into communities, a share of
/// them verified; every user retweets a few favourite authors of its own
/// community and occasionally someone elsewhere. Urls of original posts are
/// drawn from a per-community mix of reputable and not-reputable domains and
/// travel with their retweets.
struct SynthOptions {
  std::uint64_t seed = 7;
  std::size_t n_users = 2000;
  std::vector<double> community_shares{0.30, 0.27, 0.23, 0.20};
  std::vector<double> nr_propensity{0.04, 0.10, 0.20, 0.45};
  double verified_fraction = 0.10;
  double favourite_fraction = 0.18;  // favourite verified authors per community
  double cross_community = 0.10;     // share of retweets leaving the community
  double url_probability = 0.8;
  std::int64_t start = 1'659'312'000;  // 2022-08-01T00:00:00Z
  int days = 30;
};

struct SynthUser {
  std::string id;
  int community = 0;
  bool verified = false;
};

struct SynthData {
  std::vector<SynthUser> users;
  std::vector<TweetRecord> tweets;
  std::vector<DomainAnnotation> annotations;
  /// Realised NR share (percent) of the urls posted or retweeted by each
  /// community's members.
  std::vector<double> nr_percent;
};

SynthData generate_synthetic(const SynthOptions& options = {});

/// Writes tweets.jsonl, annotations.csv, ground_truth.csv, ground_truth.json
/// and a ready-to-run config.txt into `dir`.
void write_synthetic(const SynthData& data, const std::filesystem::path& dir,
                     std::uint64_t seed);

}  // namespace nullnet
