#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "twr/kernel.hpp"
#include "twr/measure.hpp"
#include "twr/sampling.hpp"
#include "twr/tree.hpp"

#include <nlohmann/json.hpp>

namespace twr::io {

namespace fs = std::filesystem;
using nlohmann::json;

// {"root": int, "edges": [{"child": int, "parent": int, "weight": float}, ...]}
Tree tree_from_json(const json& j);
json tree_to_json(const Tree& t);
Tree load_tree(const fs::path& path);
void save_tree(const Tree& t, const fs::path& path);

// JSON {"support": [[node, mass], ...]} or text lines "node mass" ('#' comments).
Measure parse_measure(const std::string& text, Normalization mode, const std::string& origin = "");
Measure load_measure(const fs::path& path, Normalization mode);

struct MeasureSet {
  std::vector<std::string> names;  // file stems, sorted
  std::vector<Measure> measures;
};
// Every *.json / *.txt file in dir, ordered by filename.
MeasureSet load_measure_dir(const fs::path& dir, Normalization mode);
void save_measure(const Measure& m, const fs::path& path);

// {"beta": [...]} with optional "alpha": [...], each of length |E|, indexed by edge.
BoxSpec load_box(const fs::path& path, const Tree& t);

// One point per row, d comma-separated columns; blank lines skipped.
PointCloud load_points(const fs::path& path);

enum class MatrixFormat { Csv, Binary };
MatrixFormat format_for(const fs::path& path);  // ".bin" -> Binary, else Csv

inline constexpr char kBinaryMagic[8] = {'T', 'W', 'G', 'R', 'A', 'M', '0', '1'};

// CSV: n rows of n values at round-trip precision. Binary: 8-byte magic,
// u32 n, u32 kind, then n*n little-endian f64 row-major.
void write_matrix(const SymmetricMatrix& m, const fs::path& path, MatrixFormat fmt);
void write_matrix(const SymmetricMatrix& m, const fs::path& path);
SymmetricMatrix read_binary_matrix(const fs::path& path);
SymmetricMatrix read_csv_matrix(const fs::path& path, MatrixKind kind);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& content);

// Shortest decimal text that parses back to v.
std::string format_double(double v);

// Hex SHA-256.
std::string sha256_hex(const std::string& data);

}  // namespace twr::io
