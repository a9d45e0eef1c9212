#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "laborscape/dataset.hpp"

namespace laborscape::crosswalk {

/// Annotator votes: rows are target occupations, columns source occupations,
/// each entry counts how many of `annotators` matched the pair.
class VoteMatrix {
 public:
  VoteMatrix(std::vector<std::string> targets, std::vector<std::string> sources,
             std::vector<int> votes, int annotators = 3);

  const std::vector<std::string>& targets() const noexcept { return targets_; }
  const std::vector<std::string>& sources() const noexcept { return sources_; }
  int annotators() const noexcept { return annotators_; }
  int votes(std::size_t target, std::size_t source) const {
    return votes_[target * sources_.size() + source];
  }

 private:
  std::vector<std::string> targets_;
  std::vector<std::string> sources_;
  std::vector<int> votes_;
  int annotators_;
};

enum class RowTag { Pending, Consensus, Adjudicated, Override };

std::string_view to_string(RowTag tag) noexcept;

/// Binary target x source correspondence with per-row provenance.
class CrosswalkMatrix {
 public:
  CrosswalkMatrix(std::vector<std::string> targets, std::vector<std::string> sources);

  const std::vector<std::string>& targets() const noexcept { return targets_; }
  const std::vector<std::string>& sources() const noexcept { return sources_; }

  bool matched(std::size_t target, std::size_t source) const {
    return cells_[target * sources_.size() + source] != 0;
  }
  RowTag tag(std::size_t target) const { return tags_[target]; }
  std::vector<std::size_t> matches(std::size_t target) const;
  /// Target codes still awaiting adjudication, in row order.
  std::vector<std::string> pending() const;

  std::size_t target_index(std::string_view code) const;  // throws UnknownId
  std::optional<std::size_t> source_index(std::string_view code) const;

  void set_row(std::size_t target, const std::vector<std::size_t>& sources, RowTag tag);

 private:
  std::vector<std::string> targets_;
  std::vector<std::string> sources_;
  std::vector<unsigned char> cells_;
  std::vector<RowTag> tags_;
};

struct Aggregation {
  CrosswalkMatrix matrix;
  std::vector<std::string> adjudication_queue;
};

/// Keeps entries with votes >= threshold. Rows with no such entry stay
/// all-zero, tagged Pending, and are queued for adjudication.
Aggregation aggregate_votes(const VoteMatrix& votes, int threshold = 2);

/// Settles a pending row on `chosen` source codes (tag Adjudicated).
CrosswalkMatrix resolve(const CrosswalkMatrix& crosswalk, std::string_view target,
                        const std::set<std::string>& chosen);

/// Tags the listed targets Override; their risk is pinned to zero by transfer_risk.
CrosswalkMatrix apply_overrides(const CrosswalkMatrix& crosswalk,
                                const std::set<std::string>& zero_override);

/// Target risk = unweighted mean of source risk over matched sources; 0 for
/// rows in `zero_override`.
RiskTable transfer_risk(const CrosswalkMatrix& crosswalk, const RiskTable& source_risk,
                        const std::set<std::string>& zero_override);

// File formats
VoteMatrix load_votes(const std::filesystem::path& path, int annotators = 3);
VoteMatrix parse_votes(std::string_view text, int annotators = 3, std::string_view source = "");
/// `target_code,source_code`; several lines per target allowed.
std::map<std::string, std::set<std::string>> load_adjudications(const std::filesystem::path& path);
/// One target code per line; blank lines and '#' comments ignored.
std::set<std::string> load_code_list(const std::filesystem::path& path);

std::string to_crosswalk_csv(const CrosswalkMatrix& crosswalk);
std::string to_provenance_csv(const CrosswalkMatrix& crosswalk);

}  // namespace laborscape::crosswalk
