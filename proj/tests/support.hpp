#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "laborscape/dataset.hpp"

namespace test_support {

inline std::filesystem::path source_dir() { return LABORSCAPE_SOURCE_DIR; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("laborscape_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Employment table with codes O1..On and cities C1..Cm from a row-major grid.
inline laborscape::EmploymentTable make_emp(const std::vector<std::vector<std::int64_t>>& grid) {
  std::vector<std::string> cities;
  std::vector<laborscape::OccupationId> occs;
  std::vector<std::int64_t> counts;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    cities.push_back("C" + std::to_string(m + 1));
    counts.insert(counts.end(), grid[m].begin(), grid[m].end());
  }
  for (std::size_t j = 0; j < grid.front().size(); ++j) {
    std::string code = "O" + std::to_string(j + 1);
    occs.push_back({code, code});
  }
  return laborscape::EmploymentTable(std::move(cities), std::move(occs), std::move(counts));
}

}  // namespace test_support
