#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "twr/measure.hpp"
#include "twr/tree.hpp"

namespace twr::fixtures {

// r = 0 -> v1 = 1 (w = 1) -> v2 = 2 (w = 2)
inline Tree chain() {
  const std::vector<EdgeSpec> e = {{1, 0, 1.0}, {2, 1, 2.0}};
  return Tree::build(e, 0);
}

// r = 0 with leaves a = 1, b = 2, unit weights
inline Tree star() {
  const std::vector<EdgeSpec> e = {{1, 0, 1.0}, {2, 0, 1.0}};
  return Tree::build(e, 0);
}

inline Measure atoms(std::vector<Atom> a) { return Measure::from_atoms(std::move(a)); }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("twr_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace twr::fixtures
