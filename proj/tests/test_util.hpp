#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "mgap/embedding.hpp"
#include "mgap/errors.hpp"
#include "mgap/linalg.hpp"
#include "mgap/rng.hpp"

namespace testutil {

// Runs fn and reports the mgap error code it threw, if any.
template <class F>
std::optional<mgap::Errc> thrown_code(F&& fn) {
  try {
    std::forward<F>(fn)();
    return std::nullopt;
  } catch (const mgap::Error& e) {
    return e.code();
  }
}

inline mgap::EmbeddingSet random_unit_set(std::size_t n, std::size_t d, std::uint64_t seed,
                                          std::string modality = "unlabeled") {
  mgap::Rng rng = mgap::Rng::seeded(seed);
  mgap::Mat m = mgap::gaussian_matrix(n, d, 1.0, rng);
  for (std::size_t i = 0; i < n; ++i) mgap::normalize_in_place(m.row(i), d);
  return mgap::EmbeddingSet::from_mat(std::move(m), std::move(modality), true);
}

// Scratch directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("mgap_test_" + tag);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline bool bitwise_equal(const mgap::Mat& a, const mgap::Mat& b) {
  return a.rows == b.rows && a.cols == b.cols && a.a == b.a;
}

}  // namespace testutil
