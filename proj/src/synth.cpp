#include "nullnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "nullnet/error.hpp"
#include "nullnet/io.hpp"
#include "nullnet/random.hpp"

namespace nullnet {

namespace {

struct DomainPool {
  std::vector<std::string> names;
  std::discrete_distribution<std::size_t> pick;
};

// Zipf-like weights so a single domain dominates each pool.
DomainPool make_pool(const std::string& stem, const std::string& tld, int n) {
  DomainPool pool;
  std::vector<double> w;
  for (int k = 1; k <= n; ++k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%02d.%s", stem.c_str(), k, tld.c_str());
    pool.names.emplace_back(buf);
    w.push_back(1.0 / k);
  }
  pool.pick = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  return pool;
}

std::string make_id(char prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, n);
  return buf;
}

}  // namespace

SynthData generate_synthetic(const SynthOptions& o) {
  const std::size_t k = o.community_shares.size();
  if (k == 0 || o.nr_propensity.size() != k)
    throw Error(ErrorCode::invalid_argument, "need one NR propensity per community");
  if (o.n_users < 20 * k) throw Error(ErrorCode::invalid_argument, "too few users");
  if (o.days < 1) throw Error(ErrorCode::invalid_argument, "days must be >= 1");

  std::mt19937_64 rng(stream_seed(o.seed, "synth"));
  auto uniform = [&] { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); };
  auto poisson = [&](double m) { return std::poisson_distribution<int>(m)(rng); };
  auto pick_index = [&](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  };

  SynthData data;

  // Users, grouped by community; the first users of each block are verified.
  const double share_sum = std::accumulate(o.community_shares.begin(), o.community_shares.end(), 0.0);
  std::vector<std::vector<std::size_t>> members(k), verified(k), unverified(k);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const auto size = c + 1 == k ? o.n_users - assigned
                                 : static_cast<std::size_t>(std::llround(
                                       static_cast<double>(o.n_users) * o.community_shares[c] / share_sum));
    const auto n_verified = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(
                                                         o.verified_fraction * static_cast<double>(size))));
    for (std::size_t m = 0; m < size; ++m) {
      const auto u = data.users.size();
      data.users.push_back({make_id('u', u, 5), static_cast<int>(c), m < n_verified});
      members[c].push_back(u);
      (m < n_verified ? verified[c] : unverified[c]).push_back(u);
    }
    assigned += size;
  }

  // Domains: reputable, quasi-reputable, not reputable, other tags, unannotated.
  auto pool_r = make_pool("rnews", "com", 9);
  pool_r.names.push_back("rnews10.co.uk");
  auto pool_qr = make_pool("qrnews", "net", 3);
  auto pool_nr = make_pool("nrsite", "info", 6);
  auto pool_other = make_pool("social", "com", 2);
  pool_other.names.push_back("stream01.tv");
  pool_other.names.push_back("blog01.org");
  pool_other.pick = std::discrete_distribution<std::size_t>({4.0, 2.0, 1.0, 1.0});
  {
    std::uniform_real_distribution<double> r(66.0, 98.0), q(55.0, 65.0), n(5.0, 54.0);
    for (const auto& d : pool_r.names)
      data.annotations.push_back({d, ReputabilityLabel::R, std::round(r(rng)), AnnotationSource::newsguard_file});
    for (const auto& d : pool_qr.names)
      data.annotations.push_back({d, ReputabilityLabel::QR, std::round(q(rng)), AnnotationSource::newsguard_file});
    for (const auto& d : pool_nr.names)
      data.annotations.push_back({d, ReputabilityLabel::NR, std::round(n(rng)), AnnotationSource::newsguard_file});
    data.annotations.push_back({pool_other.names[0], ReputabilityLabel::S, std::nullopt, AnnotationSource::manual});
    data.annotations.push_back({pool_other.names[1], ReputabilityLabel::S, std::nullopt, AnnotationSource::manual});
    data.annotations.push_back({pool_other.names[2], ReputabilityLabel::ST, std::nullopt, AnnotationSource::manual});
  }

  const std::int64_t span = static_cast<std::int64_t>(o.days) * 86'400;
  std::vector<std::vector<std::size_t>> posts_of(data.users.size());
  std::vector<std::vector<std::size_t>> community_posts(k);
  std::vector<std::vector<bool>> nr_flags;  // per tweet, per url

  // Original posts.
  std::size_t next_post = 0;
  auto new_post_id = [&] { return make_id('p', next_post++, 7); };
  for (std::size_t u = 0; u < data.users.size(); ++u) {
    const auto& user = data.users[u];
    const int n = user.verified ? 10 + poisson(10.0) : poisson(1.5);
    for (int m = 0; m < n; ++m) {
      TweetRecord t;
      t.post_id = new_post_id();
      t.author_id = user.id;
      t.author_verified = user.verified;
      t.timestamp = o.start + static_cast<std::int64_t>(uniform() * static_cast<double>(span));
      t.lang = "it";
      std::vector<bool> flags;
      if (uniform() < o.url_probability) {
        const int n_urls = uniform() < 0.1 ? 2 : 1;
        for (int q = 0; q < n_urls; ++q) {
          std::string domain;
          bool nr = false;
          const double r = uniform();
          if (r < o.nr_propensity[user.community]) {
            domain = pool_nr.names[pool_nr.pick(rng)];
            nr = true;
          } else {
            const double s = uniform();
            if (s < 0.75) domain = pool_r.names[pool_r.pick(rng)];
            else if (s < 0.80) domain = pool_qr.names[pool_qr.pick(rng)];
            else domain = pool_other.names[pool_other.pick(rng)];
          }
          const char* host_prefix = (uniform() < 0.5) ? "www." : (uniform() < 0.3 ? "m." : "");
          t.urls.push_back("https://" + std::string(host_prefix) + domain + "/" + t.post_id +
                           "/" + std::to_string(q));
          flags.push_back(nr);
        }
      }
      posts_of[u].push_back(data.tweets.size());
      community_posts[user.community].push_back(data.tweets.size());
      data.tweets.push_back(std::move(t));
      nr_flags.push_back(std::move(flags));
    }
  }
  const std::size_t n_originals = data.tweets.size();

  // Favourite authors per user, within the own community.
  auto authors_in = [&](std::size_t c, bool want_verified) {
    std::vector<std::size_t> out;
    for (auto u : want_verified ? verified[c] : unverified[c])
      if (!posts_of[u].empty()) out.push_back(u);
    return out;
  };
  std::vector<std::vector<std::size_t>> verified_authors(k), unverified_authors(k);
  for (std::size_t c = 0; c < k; ++c) {
    verified_authors[c] = authors_in(c, true);
    unverified_authors[c] = authors_in(c, false);
  }

  std::size_t next_retweet = 0;
  auto retweet = [&](std::size_t user, std::size_t original) {
    const auto& src = data.tweets[original];
    TweetRecord t;
    t.post_id = make_id('r', next_retweet++, 7);
    t.author_id = data.users[user].id;
    t.author_verified = data.users[user].verified;
    t.retweet_of = src.post_id;
    const auto lag = static_cast<std::int64_t>(std::exponential_distribution<double>(1.0 / 43'200.0)(rng));
    t.timestamp = std::min(src.timestamp + lag, o.start + span - 1);
    t.urls = src.urls;
    t.lang = "it";
    auto flags = nr_flags[original];
    data.tweets.push_back(std::move(t));
    nr_flags.push_back(std::move(flags));
  };
  auto retweet_author = [&](std::size_t user, std::size_t author) {
    if (author == user || posts_of[author].empty()) return;
    retweet(user, posts_of[author][pick_index(posts_of[author].size())]);
  };
  auto retweet_elsewhere = [&](std::size_t user) {
    auto c = pick_index(k - 1);
    if (c >= static_cast<std::size_t>(data.users[user].community)) ++c;
    if (community_posts[c].empty()) return;
    const auto post = community_posts[c][pick_index(community_posts[c].size())];
    retweet(user, post);
  };

  for (std::size_t u = 0; u < data.users.size(); ++u) {
    const auto c = static_cast<std::size_t>(data.users[u].community);
    const auto before = data.tweets.size();
    if (data.users[u].verified) {
      const int n = poisson(3.0);
      for (int m = 0; m < n; ++m) {
        const auto& pool = community_posts[c];
        const auto post = pool[pick_index(pool.size())];
        if (data.tweets[post].author_id != data.users[u].id) retweet(u, post);
      }
    } else {
      auto fav = verified_authors[c];
      std::shuffle(fav.begin(), fav.end(), rng);
      const auto n_fav = std::max<std::size_t>(
          3, static_cast<std::size_t>(std::llround(o.favourite_fraction *
                                                   static_cast<double>(verified[c].size()))));
      fav.resize(std::min(fav.size(), n_fav));
      for (auto v : fav) {
        const int n = 2 + poisson(1.0);
        for (int m = 0; m < n; ++m) retweet_author(u, v);
      }
      auto peers = unverified_authors[c];
      std::shuffle(peers.begin(), peers.end(), rng);
      peers.resize(std::min<std::size_t>(peers.size(), 3));
      for (auto v : peers) {
        const int n = 1 + poisson(1.0);
        for (int m = 0; m < n; ++m) retweet_author(u, v);
      }
    }
    const auto own = static_cast<double>(data.tweets.size() - before);
    const int cross = poisson(own * o.cross_community / (1.0 - o.cross_community));
    for (int m = 0; m < cross; ++m) retweet_elsewhere(u);
  }

  // A few retweets of retweets, and retweets of posts outside the collection.
  const std::size_t n_retweets = data.tweets.size() - n_originals;
  for (std::size_t m = 0; m < n_retweets / 100; ++m) {
    const auto src = n_originals + pick_index(n_retweets);
    const auto user = pick_index(data.users.size());
    const auto& s = data.tweets[src];
    if (s.author_id == data.users[user].id) continue;
    TweetRecord t;
    t.post_id = make_id('r', next_retweet++, 7);
    t.author_id = data.users[user].id;
    t.author_verified = data.users[user].verified;
    t.retweet_of = s.post_id;
    t.timestamp = std::min(s.timestamp + 3'600, o.start + span - 1);
    t.urls = s.urls;
    t.lang = "it";
    auto flags = nr_flags[src];
    data.tweets.push_back(std::move(t));
    nr_flags.push_back(std::move(flags));
  }
  for (std::size_t m = 0; m < n_retweets / 400; ++m) {
    const auto user = pick_index(data.users.size());
    TweetRecord t;
    t.post_id = make_id('r', next_retweet++, 7);
    t.author_id = data.users[user].id;
    t.author_verified = data.users[user].verified;
    t.retweet_of = make_id('x', m, 7);
    t.timestamp = o.start + static_cast<std::int64_t>(uniform() * static_cast<double>(span));
    t.lang = "it";
    data.tweets.push_back(std::move(t));
    nr_flags.emplace_back();
  }

  // Realised NR share per community over the urls each community's members shared.
  std::map<std::string, int> community_of;
  for (const auto& u : data.users) community_of[u.id] = u.community;
  std::vector<double> nr(k, 0.0), total(k, 0.0);
  for (std::size_t t = 0; t < data.tweets.size(); ++t) {
    const auto c = static_cast<std::size_t>(community_of.at(data.tweets[t].author_id));
    for (bool f : nr_flags[t]) {
      total[c] += 1.0;
      nr[c] += f ? 1.0 : 0.0;
    }
  }
  for (std::size_t c = 0; c < k; ++c)
    data.nr_percent.push_back(total[c] > 0 ? 100.0 * nr[c] / total[c] : 0.0);

  // Interleave by time so the file reads like a collection log.
  std::stable_sort(data.tweets.begin(), data.tweets.end(),
                   [](const TweetRecord& a, const TweetRecord& b) { return a.timestamp < b.timestamp; });
  return data;
}

void write_synthetic(const SynthData& data, const std::filesystem::path& dir, std::uint64_t seed) {
  std::string tweets;
  for (const auto& t : data.tweets) tweets += tweet_to_jsonl(t);
  io::write_file(dir / "tweets.jsonl", tweets);

  std::string ann = io::csv_line({"domain", "score", "label", "source"});
  for (const auto& a : data.annotations)
    ann += io::csv_line({a.domain, a.score ? io::format_double(*a.score) : "", to_string(a.label),
                         a.source == AnnotationSource::manual ? "manual" : "newsguard_file"});
  io::write_file(dir / "annotations.csv", ann);

  std::string truth = io::csv_line({"user_id", "community", "verified"});
  for (const auto& u : data.users)
    truth += io::csv_line({u.id, std::to_string(u.community), u.verified ? "true" : "false"});
  io::write_file(dir / "ground_truth.csv", truth);

  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["users"] = data.users.size();
  j["tweets"] = data.tweets.size();
  j["nr_percent"] = data.nr_percent;
  io::write_json(dir / "ground_truth.json", j);

  io::write_file(dir / "config.txt", "input = tweets.jsonl\n"
                                     "annotations = annotations.csv\n"
                                     "output = run\n"
                                     "seed = " + std::to_string(seed) + "\n");
}

}  // namespace nullnet
