#include "laborscape/table.hpp"

#include <cmath>

#include "laborscape/csv.hpp"

namespace laborscape {

std::string render_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return std::isnan(v) ? std::string() : format_double(v); }
  };
  return std::visit(Visitor{}, cell);
}

std::string Table::to_csv() const {
  std::string out = csv_line(columns);
  for (const auto& row : rows) {
    std::vector<std::string> fields;
    fields.reserve(row.size());
    for (const auto& c : row) fields.push_back(render_cell(c));
    out += csv_line(fields);
  }
  for (const auto& note : notes) out += "# " + note + "\n";
  return out;
}

nlohmann::ordered_json Table::to_json() const {
  if (document) return *document;
  auto rows_json = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < columns.size() && i < row.size(); ++i) {
      const auto& c = row[i];
      if (std::holds_alternative<std::string>(c)) {
        obj[columns[i]] = std::get<std::string>(c);
      } else if (std::holds_alternative<std::int64_t>(c)) {
        obj[columns[i]] = std::get<std::int64_t>(c);
      } else if (std::holds_alternative<double>(c) && !std::isnan(std::get<double>(c))) {
        obj[columns[i]] = std::get<double>(c);
      } else {
        obj[columns[i]] = nullptr;
      }
    }
    rows_json.push_back(std::move(obj));
  }
  if (notes.empty()) return rows_json;
  nlohmann::ordered_json doc;
  doc["rows"] = std::move(rows_json);
  doc["notes"] = notes;
  return doc;
}

std::string Table::to_json_text() const { return to_json().dump(2) + "\n"; }

}  // namespace laborscape
