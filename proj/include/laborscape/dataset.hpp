#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace laborscape {

/// Taxonomy entry. Codes are opaque; the label defaults to the code.
struct OccupationId {
  std::string code;
  std::string label;

  friend bool operator==(const OccupationId&, const OccupationId&) = default;
};

/// Dense city x category matrix of non-negative worker counts.
///
/// Invariants (checked on construction): no duplicate city or category ids,
/// non-empty codes, every count >= 0, every city row sums to > 0.
class CountTable {
 public:
  CountTable() = default;
  CountTable(std::vector<std::string> cities, std::vector<OccupationId> categories,
             std::vector<std::int64_t> counts);

  std::size_t num_cities() const noexcept { return cities_.size(); }
  std::size_t num_categories() const noexcept { return categories_.size(); }

  const std::vector<std::string>& cities() const noexcept { return cities_; }
  const std::vector<OccupationId>& categories() const noexcept { return categories_; }

  std::int64_t count(std::size_t city, std::size_t category) const {
    return counts_[city * categories_.size() + category];
  }
  std::span<const std::int64_t> row(std::size_t city) const {
    return {counts_.data() + city * categories_.size(), categories_.size()};
  }
  std::int64_t row_total(std::size_t city) const { return row_totals_[city]; }
  std::int64_t column_total(std::size_t category) const { return column_totals_[category]; }
  std::int64_t grand_total() const noexcept { return grand_total_; }

  std::optional<std::size_t> city_index(std::string_view city) const;
  std::optional<std::size_t> category_index(std::string_view code) const;
  /// Throws UnknownId.
  std::size_t require_city(std::string_view city) const;

  /// Replaces labels for codes present in `labels`; other labels are kept.
  void apply_labels(const std::map<std::string, std::string>& labels);

  friend bool operator==(const CountTable& a, const CountTable& b) {
    return a.cities_ == b.cities_ && a.categories_ == b.categories_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<std::string> cities_;
  std::vector<OccupationId> categories_;
  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> row_totals_;
  std::vector<std::int64_t> column_totals_;
  std::int64_t grand_total_ = 0;
  std::unordered_map<std::string, std::size_t> city_lookup_;
  std::unordered_map<std::string, std::size_t> category_lookup_;
};

/// Houses f_m(j): workers in city m holding occupation j.
class EmploymentTable : public CountTable {
 public:
  using CountTable::CountTable;
  EmploymentTable() = default;
  explicit EmploymentTable(CountTable base) : CountTable(std::move(base)) {}

  const std::vector<OccupationId>& occupations() const noexcept { return categories(); }
  std::size_t num_occupations() const noexcept { return num_categories(); }
  std::optional<std::size_t> occupation_index(std::string_view code) const {
    return category_index(code);
  }
};

/// Houses p_m(k): workers in city m employed in industry k.
class IndustryTable : public CountTable {
 public:
  using CountTable::CountTable;
  IndustryTable() = default;
  explicit IndustryTable(CountTable base) : CountTable(std::move(base)) {}

  const std::vector<OccupationId>& industries() const noexcept { return categories(); }
  std::size_t num_industries() const noexcept { return num_categories(); }
};

/// Per-occupation computerization probability in [0, 1].
class RiskTable {
 public:
  RiskTable() = default;
  explicit RiskTable(std::map<std::string, double> values);

  std::optional<double> find(std::string_view code) const;
  /// Throws MissingRisk.
  double at(std::string_view code) const;
  bool contains(std::string_view code) const { return find(code).has_value(); }
  std::size_t size() const noexcept { return values_.size(); }
  const std::map<std::string, double, std::less<>>& values() const noexcept { return values_; }

  friend bool operator==(const RiskTable&, const RiskTable&) = default;

 private:
  std::map<std::string, double, std::less<>> values_;
};

struct CityAttributes {
  std::string city;
  std::optional<std::int64_t> size;
  std::optional<bool> elite;
  std::optional<std::int64_t> universities;
  std::optional<double> bullet_trains;
  std::optional<double> latitude;
  std::optional<double> longitude;
  std::map<std::string, double> extras;

  friend bool operator==(const CityAttributes&, const CityAttributes&) = default;
};

enum class TableSchema { Wide, Long };

EmploymentTable load_employment(const std::filesystem::path& path, TableSchema schema);
IndustryTable load_industry(const std::filesystem::path& path, TableSchema schema);
CountTable parse_count_table(std::string_view text, TableSchema schema, std::string_view source = "");

RiskTable load_risk(const std::filesystem::path& path);
RiskTable parse_risk(std::string_view text, std::string_view source = "");

std::vector<CityAttributes> load_city_attributes(const std::filesystem::path& path);
std::vector<CityAttributes> parse_city_attributes(std::string_view text, std::string_view source = "");

/// `code,label` file.
std::map<std::string, std::string> load_labels(const std::filesystem::path& path);

/// `subsector,sector` file mapping fine industry codes onto coarse sectors.
std::map<std::string, std::string> load_sector_map(const std::filesystem::path& path);

/// Sums subsector columns into sector columns; sectors appear in first-seen
/// order of the table's columns. Throws UnknownId for unmapped subsectors.
IndustryTable aggregate_industries(const IndustryTable& table,
                                   const std::map<std::string, std::string>& sector_of);

/// Copy with cities sorted by id and categories by code.
CountTable sorted_by_id(const CountTable& table);

// Canonical serialization. Loading the output reproduces the input table.
std::string to_wide_csv(const CountTable& table);
std::string to_long_csv(const CountTable& table);
std::string to_risk_csv(const RiskTable& risk);
std::string to_attributes_csv(std::span<const CityAttributes> attrs);

struct JoinReport {
  std::vector<std::string> missing_risk;           // occupations in emp without a risk value
  std::vector<std::string> unused_risk;            // risk codes not in emp
  std::vector<std::string> cities_missing_attributes;
  std::vector<std::string> unused_attributes;      // attribute rows for cities absent from emp

  bool empty() const noexcept {
    return missing_risk.empty() && unused_risk.empty() && cities_missing_attributes.empty() &&
           unused_attributes.empty();
  }
  friend bool operator==(const JoinReport&, const JoinReport&) = default;
};

JoinReport validate_join(const EmploymentTable& emp, const RiskTable& risk,
                         std::span<const CityAttributes> attrs);

/// Fills codes missing from `risk` with `default_value` (explicit missing-risk policy).
RiskTable with_default_risk(const RiskTable& risk, const EmploymentTable& emp, double default_value);

/// City size: the attribute when present, otherwise the employment row total.
std::vector<double> city_sizes(const EmploymentTable& emp, std::span<const CityAttributes> attrs);

const CityAttributes* find_attributes(std::span<const CityAttributes> attrs, std::string_view city);

struct AttributeSummary {
  std::size_t cities = 0;
  std::size_t elite = 0;
  std::size_t non_elite = 0;
  std::optional<double> mean;  // of the requested extra column, over rows that carry it
  std::size_t with_value = 0;
};

AttributeSummary summarize_attributes(std::span<const CityAttributes> attrs,
                                      std::string_view extra_column);

}  // namespace laborscape
