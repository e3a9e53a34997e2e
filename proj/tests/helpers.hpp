#pragma once

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nullnet/graph.hpp"

namespace testutil {

inline std::string id(char prefix, int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%03d", prefix, k);
  return buf;
}

/// Bipartite graph with ids l000.., r000.. and every node present.
inline nullnet::BipartiteGraph make_graph(int n_left, int n_right,
                                          const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::string> left, right;
  for (int i = 0; i < n_left; ++i) left.push_back(id('l', i));
  for (int a = 0; a < n_right; ++a) right.push_back(id('r', a));
  std::vector<nullnet::IndexEdge> idx;
  for (auto [i, a] : edges)
    idx.push_back({static_cast<nullnet::NodeIndex>(i), static_cast<nullnet::NodeIndex>(a)});
  return nullnet::BipartiteGraph(left, right, idx);
}

/// Random sparse graph; every node gets at least one edge.
inline nullnet::BipartiteGraph random_graph(std::mt19937_64& rng, int n_left, int n_right,
                                            double density) {
  std::set<std::pair<int, int>> edges;
  std::bernoulli_distribution coin(density);
  for (int i = 0; i < n_left; ++i)
    for (int a = 0; a < n_right; ++a)
      if (coin(rng)) edges.emplace(i, a);
  std::uniform_int_distribution<int> li(0, n_left - 1), ri(0, n_right - 1);
  for (int i = 0; i < n_left; ++i) edges.emplace(i, ri(rng));
  for (int a = 0; a < n_right; ++a) edges.emplace(li(rng), a);
  return make_graph(n_left, n_right, {edges.begin(), edges.end()});
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("nullnet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
