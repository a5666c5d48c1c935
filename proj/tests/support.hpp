#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "bvocsr/grid.hpp"

namespace testing_support {

inline bvocsr::Field random_field(std::size_t h, std::size_t w, unsigned seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  bvocsr::Field f(h, w);
  for (auto& v : f.values()) v = d(gen);
  return f;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("bvocsr_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing_support
