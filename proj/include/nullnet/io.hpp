#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nullnet/graph.hpp"

namespace nullnet::io {

using Row = std::vector<std::string>;

/// RFC-4180 CSV. The first row is returned as the header.
struct CsvTable {
  Row header;
  std::vector<Row> rows;

  /// Column position by name; throws `parse` when missing.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text);

/// Quotes a field only when it contains a comma, quote or line break.
std::string csv_field(std::string_view field);
std::string csv_line(const Row& fields);

/// Shortest round-trip decimal representation; stable across runs.
std::string format_double(double v);
/// Fixed-point with `digits` decimals.
std::string format_fixed(double v, int digits);

std::string read_file(const std::filesystem::path& path);
/// Writes atomically (temp file + rename) and creates parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Manifest written next to every emitted graph.
struct GraphManifest {
  std::string kind;
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  std::size_t n_edges = 0;
  std::size_t n_retweet_edges = 0;
  std::string checksum;
};

BipartiteGraph read_bipartite_csv(const std::filesystem::path& path);
DirectedBipartiteGraph read_directed_csv(const std::filesystem::path& path);

/// Writes `left_id,right_id` rows and `<stem>.json` manifest alongside.
GraphManifest write_bipartite(const BipartiteGraph& g, const std::filesystem::path& csv_path);
/// Writes `user_id,post_id,kind` rows and `<stem>.json` manifest alongside.
GraphManifest write_directed(const DirectedBipartiteGraph& g,
                             const std::filesystem::path& csv_path);

std::filesystem::path manifest_path_for(const std::filesystem::path& csv_path);

}  // namespace nullnet::io
