#include "nullnet/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nullnet/error.hpp"

namespace nullnet::io {

namespace fs = std::filesystem;

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorCode::parse, "missing CSV column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool first = true;

  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
    const bool blank = row.size() == 1 && row[0].empty();
    if (!blank) {
      if (first) {
        table.header = std::move(row);
        first = false;
      } else {
        table.rows.push_back(std::move(row));
      }
    }
    row.clear();
  };

  // Skip a UTF-8 byte order mark.
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty())
          throw Error(ErrorCode::parse, "stray quote inside unquoted CSV field");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::parse, "unterminated quoted CSV field");
  if (field_started || !row.empty()) end_row();

  for (const auto& r : table.rows)
    if (r.size() != table.header.size())
      throw Error(ErrorCode::parse, "ragged CSV row");
  return table;
}

CsvTable read_csv(const fs::path& path) { return parse_csv(read_file(path)); }

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_line(const Row& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line.push_back(',');
    line += csv_field(fields[i]);
  }
  line += "\r\n";
  return line;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string format_fixed(double v, int digits) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::fixed, digits);
  std::string s(buf.data(), ptr);
  if (s.starts_with('-') && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::io, "short write to '" + path.string() + "'");
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  write_file(path, doc.dump(2) + "\n");
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, "invalid JSON in '" + path.string() + "': " + e.what());
  }
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::io, "sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

fs::path manifest_path_for(const fs::path& csv_path) {
  fs::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

namespace {

nlohmann::json to_json(const GraphManifest& m) {
  nlohmann::json j = {{"kind", m.kind},
                      {"n_left", m.n_left},
                      {"n_right", m.n_right},
                      {"n_edges", m.n_edges},
                      {"checksum", "sha256:" + m.checksum}};
  if (m.kind == "directed") j["n_retweet_edges"] = m.n_retweet_edges;
  return j;
}

}  // namespace

BipartiteGraph read_bipartite_csv(const fs::path& path) {
  const auto table = read_csv(path);
  const auto li = table.column("left_id");
  const auto ri = table.column("right_id");
  std::vector<std::pair<std::string, std::string>> edges;
  edges.reserve(table.rows.size());
  for (const auto& r : table.rows) edges.emplace_back(r[li], r[ri]);
  return BipartiteGraph::from_edge_list(edges);
}

DirectedBipartiteGraph read_directed_csv(const fs::path& path) {
  const auto table = read_csv(path);
  const auto ui = table.column("user_id");
  const auto pi = table.column("post_id");
  const auto ki = table.column("kind");
  std::vector<DirectedLink> links;
  links.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    LinkKind kind;
    if (r[ki] == "author") {
      kind = LinkKind::author;
    } else if (r[ki] == "retweet") {
      kind = LinkKind::retweet;
    } else {
      throw Error(ErrorCode::parse, "unknown link kind '" + r[ki] + "'");
    }
    links.push_back({r[ui], r[pi], kind});
  }
  return DirectedBipartiteGraph::from_links(links);
}

GraphManifest write_bipartite(const BipartiteGraph& g, const fs::path& csv_path) {
  std::string out = csv_line({"left_id", "right_id"});
  for (const auto& e : g.edges())
    out += csv_line({g.left_ids()[e.left], g.right_ids()[e.right]});
  write_file(csv_path, out);
  GraphManifest m{"bipartite", g.n_left(), g.n_right(), g.n_edges(), 0, sha256_hex(out)};
  write_json(manifest_path_for(csv_path), to_json(m));
  return m;
}

GraphManifest write_directed(const DirectedBipartiteGraph& g, const fs::path& csv_path) {
  std::string out = csv_line({"user_id", "post_id", "kind"});
  const auto& users = g.user_ids();
  const auto& posts = g.post_ids();
  for (const auto& e : g.authorship().edges())
    out += csv_line({users[e.left], posts[e.right], "author"});
  for (const auto& e : g.retweets().edges())
    out += csv_line({users[e.left], posts[e.right], "retweet"});
  write_file(csv_path, out);
  GraphManifest m{"directed",
                  g.n_users(),
                  g.n_posts(),
                  g.authorship().n_edges(),
                  g.retweets().n_edges(),
                  sha256_hex(out)};
  write_json(manifest_path_for(csv_path), to_json(m));
  return m;
}

}  // namespace nullnet::io
