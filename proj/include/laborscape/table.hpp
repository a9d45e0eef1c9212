#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace laborscape {

using Cell = std::variant<std::monostate, std::string, std::int64_t, double>;

/// A rendered result: the unit both the report writer and single-metric
/// commands print, so the two always agree byte for byte.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  /// Trailing `# ...` lines in the text rendering.
  std::vector<std::string> notes;
  /// Replaces the default row-object rendering in to_json when set.
  std::optional<nlohmann::ordered_json> document;

  std::string to_csv() const;
  nlohmann::ordered_json to_json() const;
  std::string to_json_text() const;
};

std::string render_cell(const Cell& cell);

}  // namespace laborscape
