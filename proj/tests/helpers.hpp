#ifndef SLOTFILL_TESTS_HELPERS_HPP
#define SLOTFILL_TESTS_HELPERS_HPP

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "slotfill/types.hpp"

namespace testutil {

// Self-cleaning unique directory under the system temp root.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path = base / ("slotfill-test-" + std::to_string(::getpid()) + "-" +
                   std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

inline std::string write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  out.close();
  return path;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Central-difference derivative of a scalar function at one coordinate.
template <typename F>
double central_diff(double* x, F&& f, double eps = 1e-6) {
  const double orig = *x;
  *x = orig + eps;
  const double fp = f();
  *x = orig - eps;
  const double fm = f();
  *x = orig;
  return (fp - fm) / (2.0 * eps);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1e-4, std::abs(a) + std::abs(b));
}

}  // namespace testutil

#endif  // SLOTFILL_TESTS_HELPERS_HPP
