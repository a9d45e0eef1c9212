#include "laborscape/dataset.hpp"

#include <algorithm>
#include <set>

#include "laborscape/csv.hpp"
#include "laborscape/error.hpp"

namespace laborscape {

namespace {

std::string where(std::string_view source, std::size_t line) {
  std::string out;
  if (!source.empty()) out = std::string(source) + ":";
  return out + std::to_string(line);
}

[[noreturn]] void malformed(std::string_view source, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::MalformedRow, "line " + where(source, line) + ": " + what);
}

std::vector<std::string> trimmed(const std::vector<std::string>& fields) {
  std::vector<std::string> out;
  out.reserve(fields.size());
  for (const auto& f : fields) out.push_back(trim(f));
  return out;
}

std::int64_t parse_count(std::string_view text, std::string_view source, std::size_t line,
                         std::string_view city, std::string_view code) {
  if (trim(text).empty()) malformed(source, line, "empty count for " + std::string(code));
  std::int64_t value = 0;
  try {
    value = parse_integer(text, line, code);
  } catch (const Error&) {
    malformed(source, line, "count '" + std::string(text) + "' for " + std::string(code) +
                                " is not an integer");
  }
  if (value < 0) {
    throw Error(ErrorCode::NegativeCount, "line " + where(source, line) + ": city '" +
                                              std::string(city) + "', code '" +
                                              std::string(code) + "' has count " +
                                              std::to_string(value));
  }
  return value;
}

}  // namespace

CountTable::CountTable(std::vector<std::string> cities, std::vector<OccupationId> categories,
                       std::vector<std::int64_t> counts)
    : cities_(std::move(cities)), categories_(std::move(categories)), counts_(std::move(counts)) {
  if (cities_.empty() || categories_.empty()) {
    throw Error(ErrorCode::EmptyTable, "table needs at least one city and one category");
  }
  if (counts_.size() != cities_.size() * categories_.size()) {
    throw Error(ErrorCode::InvalidArgument, "count matrix shape does not match ids");
  }
  for (std::size_t i = 0; i < cities_.size(); ++i) {
    if (cities_[i].empty()) throw Error(ErrorCode::MalformedRow, "empty city id");
    if (!city_lookup_.emplace(cities_[i], i).second) {
      throw Error(ErrorCode::DuplicateKey, "duplicate city '" + cities_[i] + "'");
    }
  }
  for (std::size_t j = 0; j < categories_.size(); ++j) {
    auto& cat = categories_[j];
    if (cat.code.empty()) throw Error(ErrorCode::MalformedRow, "empty category code");
    if (cat.label.empty()) cat.label = cat.code;
    if (!category_lookup_.emplace(cat.code, j).second) {
      throw Error(ErrorCode::DuplicateKey, "duplicate code '" + cat.code + "'");
    }
  }
  row_totals_.assign(cities_.size(), 0);
  column_totals_.assign(categories_.size(), 0);
  for (std::size_t i = 0; i < cities_.size(); ++i) {
    for (std::size_t j = 0; j < categories_.size(); ++j) {
      auto v = counts_[i * categories_.size() + j];
      if (v < 0) {
        throw Error(ErrorCode::NegativeCount,
                    "city '" + cities_[i] + "', code '" + categories_[j].code + "'");
      }
      row_totals_[i] += v;
      column_totals_[j] += v;
    }
    if (row_totals_[i] == 0) {
      throw Error(ErrorCode::EmptyCity, "city '" + cities_[i] + "' has zero total employment");
    }
    grand_total_ += row_totals_[i];
  }
}

std::optional<std::size_t> CountTable::city_index(std::string_view city) const {
  auto it = city_lookup_.find(std::string(city));
  if (it == city_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> CountTable::category_index(std::string_view code) const {
  auto it = category_lookup_.find(std::string(code));
  if (it == category_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t CountTable::require_city(std::string_view city) const {
  auto idx = city_index(city);
  if (!idx) throw Error(ErrorCode::UnknownId, "unknown city '" + std::string(city) + "'");
  return *idx;
}

void CountTable::apply_labels(const std::map<std::string, std::string>& labels) {
  for (auto& cat : categories_) {
    if (auto it = labels.find(cat.code); it != labels.end() && !it->second.empty()) {
      cat.label = it->second;
    }
  }
}

CountTable parse_count_table(std::string_view text, TableSchema schema, std::string_view source) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw Error(ErrorCode::EmptyTable, std::string(source) + ": no header");
  auto header = trimmed(rows.front().fields);
  if (header.empty() || header.front() != "city") {
    malformed(source, rows.front().line, "header must start with 'city'");
  }

  std::vector<std::string> cities;
  std::vector<OccupationId> categories;
  std::vector<std::int64_t> counts;

  if (schema == TableSchema::Wide) {
    for (std::size_t j = 1; j < header.size(); ++j) categories.push_back({header[j], header[j]});
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.fields.size() != header.size()) {
        malformed(source, row.line,
                  "expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(row.fields.size()));
      }
      std::string city = trim(row.fields[0]);
      if (city.empty()) malformed(source, row.line, "empty city id");
      cities.push_back(city);
      for (std::size_t j = 1; j < row.fields.size(); ++j) {
        counts.push_back(parse_count(row.fields[j], source, row.line, city, header[j]));
      }
    }
  } else {
    if (header != std::vector<std::string>{"city", "code", "count"}) {
      malformed(source, rows.front().line, "long format header must be 'city,code,count'");
    }
    std::map<std::string, std::size_t> city_pos;
    std::map<std::string, std::size_t> code_pos;
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> cells;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.fields.size() != 3) malformed(source, row.line, "expected 3 fields");
      std::string city = trim(row.fields[0]);
      std::string code = trim(row.fields[1]);
      if (city.empty() || code.empty()) malformed(source, row.line, "empty city or code");
      auto count = parse_count(row.fields[2], source, row.line, city, code);
      auto [cit, city_new] = city_pos.emplace(city, cities.size());
      if (city_new) cities.push_back(city);
      auto [oit, code_new] = code_pos.emplace(code, categories.size());
      if (code_new) categories.push_back({code, code});
      if (!cells.emplace(std::pair{cit->second, oit->second}, count).second) {
        throw Error(ErrorCode::DuplicateKey, "line " + where(source, row.line) + ": pair (" +
                                                 city + ", " + code + ") repeated");
      }
    }
    counts.assign(cities.size() * categories.size(), 0);
    for (const auto& [key, value] : cells) counts[key.first * categories.size() + key.second] = value;
  }

  if (cities.empty() || categories.empty()) {
    throw Error(ErrorCode::EmptyTable, std::string(source) + ": table has no rows or no columns");
  }
  try {
    return CountTable(std::move(cities), std::move(categories), std::move(counts));
  } catch (const Error& e) {
    if (source.empty()) throw;
    throw Error(e.code(), std::string(source) + ": " + e.what());
  }
}

EmploymentTable load_employment(const std::filesystem::path& path, TableSchema schema) {
  return EmploymentTable(parse_count_table(read_file(path), schema, path.string()));
}

IndustryTable load_industry(const std::filesystem::path& path, TableSchema schema) {
  return IndustryTable(parse_count_table(read_file(path), schema, path.string()));
}

RiskTable::RiskTable(std::map<std::string, double> values) {
  for (auto& [code, p] : values) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "risk for '" + code + "' is " + format_double(p) + ", outside [0,1]");
    }
    values_.emplace(code, p);
  }
}

std::optional<double> RiskTable::find(std::string_view code) const {
  auto it = values_.find(code);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double RiskTable::at(std::string_view code) const {
  auto v = find(code);
  if (!v) throw Error(ErrorCode::MissingRisk, "no risk value for '" + std::string(code) + "'");
  return *v;
}

RiskTable parse_risk(std::string_view text, std::string_view source) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw Error(ErrorCode::EmptyTable, std::string(source) + ": no header");
  auto header = trimmed(rows.front().fields);
  if (header.size() < 2 || header[0] != "code" || header[1] != "probability") {
    malformed(source, rows.front().line, "risk header must be 'code,probability'");
  }
  std::map<std::string, double> values;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.size()) malformed(source, row.line, "wrong field count");
    std::string code = trim(row.fields[0]);
    if (code.empty()) malformed(source, row.line, "empty code");
    double p = parse_double(row.fields[1], row.line, "probability");
    if (p < 0.0 || p > 1.0) {
      malformed(source, row.line, "probability " + trim(row.fields[1]) + " outside [0,1]");
    }
    if (!values.emplace(code, p).second) {
      throw Error(ErrorCode::DuplicateKey,
                  "line " + where(source, row.line) + ": code '" + code + "' repeated");
    }
  }
  return RiskTable(std::move(values));
}

RiskTable load_risk(const std::filesystem::path& path) {
  return parse_risk(read_file(path), path.string());
}

std::vector<CityAttributes> parse_city_attributes(std::string_view text, std::string_view source) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw Error(ErrorCode::EmptyTable, std::string(source) + ": no header");
  auto header = trimmed(rows.front().fields);
  if (header.empty() || header.front() != "city") {
    malformed(source, rows.front().line, "attributes header must start with 'city'");
  }
  {
    std::set<std::string> seen;
    for (const auto& h : header) {
      if (h.empty()) malformed(source, rows.front().line, "empty column name");
      if (!seen.insert(h).second) {
        throw Error(ErrorCode::DuplicateKey, "column '" + h + "' repeated in " + std::string(source));
      }
    }
  }

  std::vector<CityAttributes> out;
  std::set<std::string> cities;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.size()) {
      malformed(source, row.line,
                "expected " + std::to_string(header.size()) + " fields, found " +
                    std::to_string(row.fields.size()));
    }
    CityAttributes a;
    a.city = trim(row.fields[0]);
    if (a.city.empty()) malformed(source, row.line, "empty city id");
    if (!cities.insert(a.city).second) {
      throw Error(ErrorCode::DuplicateKey,
                  "line " + where(source, row.line) + ": city '" + a.city + "' repeated");
    }
    for (std::size_t c = 1; c < header.size(); ++c) {
      const std::string& col = header[c];
      std::string cell = trim(row.fields[c]);
      if (cell.empty()) continue;
      if (col == "size") {
        auto v = parse_integer(cell, row.line, col);
        if (v <= 0) {
          throw Error(ErrorCode::NonPositiveSize, "line " + where(source, row.line) + ": city '" +
                                                      a.city + "' has size " + cell);
        }
        a.size = v;
      } else if (col == "elite") {
        if (cell == "1" || cell == "true" || cell == "yes") {
          a.elite = true;
        } else if (cell == "0" || cell == "false" || cell == "no") {
          a.elite = false;
        } else {
          malformed(source, row.line, "elite flag '" + cell + "' is not 0/1");
        }
      } else if (col == "universities") {
        auto v = parse_integer(cell, row.line, col);
        if (v < 0) malformed(source, row.line, "negative university count");
        a.universities = v;
      } else if (col == "bullet_trains") {
        auto v = parse_double(cell, row.line, col);
        if (v < 0) malformed(source, row.line, "negative bullet train frequency");
        a.bullet_trains = v;
      } else if (col == "lat" || col == "lon") {
        auto v = parse_double(cell, row.line, col);
        double bound = col == "lat" ? 90.0 : 180.0;
        if (v < -bound || v > bound) {
          throw Error(ErrorCode::OutOfRangeCoordinate, "line " + where(source, row.line) +
                                                           ": " + col + " = " + cell +
                                                           " for city '" + a.city + "'");
        }
        (col == "lat" ? a.latitude : a.longitude) = v;
      } else {
        a.extras[col] = parse_double(cell, row.line, col);
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<CityAttributes> load_city_attributes(const std::filesystem::path& path) {
  return parse_city_attributes(read_file(path), path.string());
}

namespace {

std::map<std::string, std::string> load_pairs(const std::filesystem::path& path,
                                              std::string_view first, std::string_view second) {
  auto rows = read_csv_file(path);
  auto source = path.string();
  if (rows.empty()) throw Error(ErrorCode::EmptyTable, source + ": no header");
  auto header = trimmed(rows.front().fields);
  if (header.size() != 2 || header[0] != first || header[1] != second) {
    malformed(source, rows.front().line,
              "header must be '" + std::string(first) + "," + std::string(second) + "'");
  }
  std::map<std::string, std::string> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 2) malformed(source, row.line, "expected 2 fields");
    auto key = trim(row.fields[0]);
    if (key.empty()) malformed(source, row.line, "empty key");
    if (!out.emplace(key, trim(row.fields[1])).second) {
      throw Error(ErrorCode::DuplicateKey, "line " + where(source, row.line) + ": '" + key + "'");
    }
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> load_labels(const std::filesystem::path& path) {
  return load_pairs(path, "code", "label");
}

std::map<std::string, std::string> load_sector_map(const std::filesystem::path& path) {
  return load_pairs(path, "subsector", "sector");
}

IndustryTable aggregate_industries(const IndustryTable& table,
                                   const std::map<std::string, std::string>& sector_of) {
  std::vector<OccupationId> sectors;
  std::map<std::string, std::size_t> sector_pos;
  std::vector<std::size_t> column_to_sector;
  for (const auto& sub : table.industries()) {
    auto it = sector_of.find(sub.code);
    if (it == sector_of.end() || it->second.empty()) {
      throw Error(ErrorCode::UnknownId, "industry '" + sub.code + "' has no sector mapping");
    }
    auto [pos, inserted] = sector_pos.emplace(it->second, sectors.size());
    if (inserted) sectors.push_back({it->second, it->second});
    column_to_sector.push_back(pos->second);
  }
  std::vector<std::int64_t> counts(table.num_cities() * sectors.size(), 0);
  for (std::size_t i = 0; i < table.num_cities(); ++i) {
    for (std::size_t j = 0; j < table.num_industries(); ++j) {
      counts[i * sectors.size() + column_to_sector[j]] += table.count(i, j);
    }
  }
  return IndustryTable(table.cities(), std::move(sectors), std::move(counts));
}

CountTable sorted_by_id(const CountTable& table) {
  std::vector<std::size_t> rows(table.num_cities());
  std::vector<std::size_t> cols(table.num_categories());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = j;
  std::sort(rows.begin(), rows.end(),
            [&](auto a, auto b) { return table.cities()[a] < table.cities()[b]; });
  std::sort(cols.begin(), cols.end(), [&](auto a, auto b) {
    return table.categories()[a].code < table.categories()[b].code;
  });
  std::vector<std::string> cities;
  std::vector<OccupationId> categories;
  std::vector<std::int64_t> counts;
  for (auto i : rows) cities.push_back(table.cities()[i]);
  for (auto j : cols) categories.push_back(table.categories()[j]);
  for (auto i : rows) {
    for (auto j : cols) counts.push_back(table.count(i, j));
  }
  return CountTable(std::move(cities), std::move(categories), std::move(counts));
}

std::string to_wide_csv(const CountTable& table) {
  std::vector<std::string> header{"city"};
  for (const auto& c : table.categories()) header.push_back(c.code);
  std::string out = csv_line(header);
  for (std::size_t i = 0; i < table.num_cities(); ++i) {
    std::vector<std::string> fields{table.cities()[i]};
    for (auto v : table.row(i)) fields.push_back(std::to_string(v));
    out += csv_line(fields);
  }
  return out;
}

std::string to_long_csv(const CountTable& table) {
  std::string out = "city,code,count\n";
  for (std::size_t i = 0; i < table.num_cities(); ++i) {
    for (std::size_t j = 0; j < table.num_categories(); ++j) {
      out += csv_line({table.cities()[i], table.categories()[j].code,
                       std::to_string(table.count(i, j))});
    }
  }
  return out;
}

std::string to_risk_csv(const RiskTable& risk) {
  std::string out = "code,probability\n";
  for (const auto& [code, p] : risk.values()) out += csv_line({code, format_double(p)});
  return out;
}

std::string to_attributes_csv(std::span<const CityAttributes> attrs) {
  std::set<std::string> extra_names;
  for (const auto& a : attrs) {
    for (const auto& [name, _] : a.extras) extra_names.insert(name);
  }
  std::vector<std::string> header{"city", "size", "elite", "universities", "bullet_trains", "lat", "lon"};
  header.insert(header.end(), extra_names.begin(), extra_names.end());
  std::string out = csv_line(header);
  auto opt = [](const auto& v, auto fmt) { return v ? fmt(*v) : std::string(); };
  auto int_fmt = [](std::int64_t v) { return std::to_string(v); };
  auto dbl_fmt = [](double v) { return format_double(v); };
  for (const auto& a : attrs) {
    std::vector<std::string> fields{
        a.city,
        opt(a.size, int_fmt),
        opt(a.elite, [](bool b) { return std::string(b ? "1" : "0"); }),
        opt(a.universities, int_fmt),
        opt(a.bullet_trains, dbl_fmt),
        opt(a.latitude, dbl_fmt),
        opt(a.longitude, dbl_fmt)};
    for (const auto& name : extra_names) {
      auto it = a.extras.find(name);
      fields.push_back(it == a.extras.end() ? std::string() : format_double(it->second));
    }
    out += csv_line(fields);
  }
  return out;
}

JoinReport validate_join(const EmploymentTable& emp, const RiskTable& risk,
                         std::span<const CityAttributes> attrs) {
  JoinReport report;
  for (const auto& occ : emp.occupations()) {
    if (!risk.contains(occ.code)) report.missing_risk.push_back(occ.code);
  }
  for (const auto& [code, _] : risk.values()) {
    if (!emp.occupation_index(code)) report.unused_risk.push_back(code);
  }
  std::set<std::string> attr_cities;
  for (const auto& a : attrs) attr_cities.insert(a.city);
  for (const auto& city : emp.cities()) {
    if (!attr_cities.contains(city)) report.cities_missing_attributes.push_back(city);
  }
  for (const auto& a : attrs) {
    if (!emp.city_index(a.city)) report.unused_attributes.push_back(a.city);
  }
  return report;
}

RiskTable with_default_risk(const RiskTable& risk, const EmploymentTable& emp, double default_value) {
  std::map<std::string, double> values(risk.values().begin(), risk.values().end());
  for (const auto& occ : emp.occupations()) values.emplace(occ.code, default_value);
  return RiskTable(std::move(values));
}

const CityAttributes* find_attributes(std::span<const CityAttributes> attrs, std::string_view city) {
  auto it = std::find_if(attrs.begin(), attrs.end(), [&](const auto& a) { return a.city == city; });
  return it == attrs.end() ? nullptr : &*it;
}

std::vector<double> city_sizes(const EmploymentTable& emp, std::span<const CityAttributes> attrs) {
  std::vector<double> sizes;
  sizes.reserve(emp.num_cities());
  for (std::size_t i = 0; i < emp.num_cities(); ++i) {
    const auto* a = find_attributes(attrs, emp.cities()[i]);
    sizes.push_back(a && a->size ? static_cast<double>(*a->size)
                                 : static_cast<double>(emp.row_total(i)));
  }
  return sizes;
}

AttributeSummary summarize_attributes(std::span<const CityAttributes> attrs,
                                      std::string_view extra_column) {
  AttributeSummary s;
  s.cities = attrs.size();
  double sum = 0.0;
  for (const auto& a : attrs) {
    if (a.elite.value_or(false)) {
      ++s.elite;
    } else if (a.elite) {
      ++s.non_elite;
    }
    if (auto it = a.extras.find(std::string(extra_column)); it != a.extras.end()) {
      sum += it->second;
      ++s.with_value;
    }
  }
  if (s.with_value > 0) s.mean = sum / static_cast<double>(s.with_value);
  return s;
}

}  // namespace laborscape
