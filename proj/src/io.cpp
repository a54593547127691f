#include "twr/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace twr::io {
namespace {

NodeId node_from_json(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw Error(ErrorCode::ParseError, what + " must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < 0 || x > std::int64_t{0xFFFFFFFE}) {
    throw Error(ErrorCode::InvalidNode, what + " = " + std::to_string(x) + " is not a valid node id");
  }
  return static_cast<NodeId>(x);
}

double number_from_json(const json& v, const std::string& what) {
  if (!v.is_number()) throw Error(ErrorCode::ParseError, what + " must be a number");
  return v.get<double>();
}

std::vector<double> parse_doubles(std::string_view line, char sep, const std::string& where) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(sep, pos);
    if (end == std::string_view::npos) end = line.size();
    std::string_view tok = line.substr(pos, end - pos);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front()))) tok.remove_prefix(1);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || p != tok.data() + tok.size()) {
      throw Error(ErrorCode::ParseError, where + ": cannot parse number '" + std::string(tok) + "'");
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Tree tree_from_json(const json& j) {
  if (!j.is_object() || !j.contains("root") || !j.contains("edges") || !j["edges"].is_array()) {
    throw Error(ErrorCode::ParseError, "tree JSON needs \"root\" and an \"edges\" array");
  }
  std::vector<EdgeSpec> edges;
  edges.reserve(j["edges"].size());
  for (const auto& e : j["edges"]) {
    if (!e.is_object() || !e.contains("child") || !e.contains("parent") || !e.contains("weight")) {
      throw Error(ErrorCode::ParseError, "edge entries need child, parent and weight");
    }
    edges.push_back({node_from_json(e["child"], "child"), node_from_json(e["parent"], "parent"),
                     number_from_json(e["weight"], "weight")});
  }
  return Tree::build(edges, node_from_json(j["root"], "root"));
}

json tree_to_json(const Tree& t) {
  json edges = json::array();
  for (const auto& e : t.edges()) edges.push_back({{"child", e.child}, {"parent", e.parent}, {"weight", e.weight}});
  return {{"root", t.root()}, {"edges", std::move(edges)}};
}

Tree load_tree(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  try {
    return tree_from_json(j);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_tree(const Tree& t, const fs::path& path) { write_file(path, tree_to_json(t).dump(2) + "\n"); }

Measure parse_measure(const std::string& text, Normalization mode, const std::string& origin) {
  std::vector<Atom> atoms;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::ParseError, origin + ": " + e.what());
    }
    if (!j.contains("support") || !j["support"].is_array()) {
      throw Error(ErrorCode::ParseError, origin + ": measure JSON needs a \"support\" array");
    }
    for (const auto& a : j["support"]) {
      if (!a.is_array() || a.size() != 2) throw Error(ErrorCode::ParseError, origin + ": support entries are [node, mass]");
      atoms.push_back({node_from_json(a[0], "node"), number_from_json(a[1], "mass")});
    }
  } else {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      std::istringstream ls(line);
      std::int64_t node = 0;
      double mass = 0.0;
      if (!(ls >> node)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        throw Error(ErrorCode::ParseError, origin + ":" + std::to_string(lineno) + ": expected 'node mass'");
      }
      std::string rest;
      if (!(ls >> mass) || (ls >> rest)) {
        throw Error(ErrorCode::ParseError, origin + ":" + std::to_string(lineno) + ": expected 'node mass'");
      }
      if (node < 0) throw Error(ErrorCode::InvalidNode, origin + ":" + std::to_string(lineno) + ": negative node id");
      atoms.push_back({static_cast<NodeId>(node), mass});
    }
  }
  try {
    return Measure::from_atoms(std::move(atoms), mode);
  } catch (const Error& e) {
    throw Error(e.code(), origin + ": " + e.what());
  }
}

Measure load_measure(const fs::path& path, Normalization mode) {
  return parse_measure(read_file(path), mode, path.string());
}

MeasureSet load_measure_dir(const fs::path& dir, Normalization mode) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".json" || ext == ".txt")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  MeasureSet set;
  for (const auto& f : files) {
    set.names.push_back(f.stem().string());
    set.measures.push_back(load_measure(f, mode));
  }
  return set;
}

void save_measure(const Measure& m, const fs::path& path) {
  json sup = json::array();
  for (const auto& a : m.support()) sup.push_back({a.node, a.mass});
  write_file(path, json{{"support", std::move(sup)}}.dump() + "\n");
}

BoxSpec load_box(const fs::path& path, const Tree& t) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  auto vec = [&](const char* key) {
    std::vector<double> v;
    for (const auto& x : j[key]) v.push_back(number_from_json(x, key));
    return EdgeVector(std::move(v));
  };
  if (!j.contains("beta") || !j["beta"].is_array()) {
    throw Error(ErrorCode::ParseError, path.string() + ": needs a \"beta\" array");
  }
  BoxSpec box{j.contains("alpha") ? vec("alpha") : EdgeVector{}, vec("beta")};
  validate_box(t, box);
  return box;
}

PointCloud load_points(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<double> coords;
  std::size_t n = 0, d = 0, lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto row = parse_doubles(line, ',', path.string() + ":" + std::to_string(lineno));
    if (n == 0) d = row.size();
    if (row.size() != d) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) + ": expected " +
                                             std::to_string(d) + " columns");
    }
    coords.insert(coords.end(), row.begin(), row.end());
    ++n;
  }
  return PointCloud(n, d, std::move(coords));
}

MatrixFormat format_for(const fs::path& path) {
  return path.extension() == ".bin" ? MatrixFormat::Binary : MatrixFormat::Csv;
}

void write_matrix(const SymmetricMatrix& m, const fs::path& path) { write_matrix(m, path, format_for(path)); }

void write_matrix(const SymmetricMatrix& m, const fs::path& path, MatrixFormat fmt) {
  const std::size_t n = m.size();
  std::string out;
  if (fmt == MatrixFormat::Csv) {
    out.reserve(n * n * 20);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j) out += ',';
        out += format_double(m(i, j));
      }
      out += '\n';
    }
  } else {
    static_assert(std::endian::native == std::endian::little, "binary writer assumes a little-endian host");
    if (n > 0xFFFFFFFFu) throw Error(ErrorCode::InvalidArgument, "matrix too large for the binary header");
    const auto n32 = static_cast<std::uint32_t>(n);
    const auto kind = static_cast<std::uint32_t>(m.kind());
    out.resize(16 + n * n * sizeof(double));
    std::memcpy(out.data(), kBinaryMagic, 8);
    std::memcpy(out.data() + 8, &n32, 4);
    std::memcpy(out.data() + 12, &kind, 4);
    if (n) std::memcpy(out.data() + 16, m.data().data(), n * n * sizeof(double));
  }
  write_file(path, out);
}

SymmetricMatrix read_binary_matrix(const fs::path& path) {
  const std::string raw = read_file(path);
  if (raw.size() < 16 || std::memcmp(raw.data(), kBinaryMagic, 8) != 0) {
    throw Error(ErrorCode::ParseError, path.string() + ": missing TWGRAM01 header");
  }
  std::uint32_t n = 0, kind = 0;
  std::memcpy(&n, raw.data() + 8, 4);
  std::memcpy(&kind, raw.data() + 12, 4);
  if (kind > 1) throw Error(ErrorCode::ParseError, path.string() + ": unknown matrix kind " + std::to_string(kind));
  if (raw.size() != 16 + std::size_t{n} * n * sizeof(double)) {
    throw Error(ErrorCode::ParseError, path.string() + ": payload size does not match n = " + std::to_string(n));
  }
  SymmetricMatrix m(n, static_cast<MatrixKind>(kind));
  std::vector<double> vals(std::size_t{n} * n);
  if (n) std::memcpy(vals.data(), raw.data() + 16, vals.size() * sizeof(double));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, vals[i * n + j]);
  return m;
}

SymmetricMatrix read_csv_matrix(const fs::path& path, MatrixKind kind) {
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    rows.push_back(parse_doubles(line, ',', path.string() + ":" + std::to_string(lineno)));
  }
  const std::size_t n = rows.size();
  SymmetricMatrix m(n, kind);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw Error(ErrorCode::ParseError, path.string() + ": matrix is not square");
    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, rows[i][j]);
  }
  return m;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

}  // namespace twr::io
