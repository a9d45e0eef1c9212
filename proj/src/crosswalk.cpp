#include "laborscape/crosswalk.hpp"

#include <algorithm>

#include "laborscape/csv.hpp"
#include "laborscape/error.hpp"

namespace laborscape::crosswalk {

VoteMatrix::VoteMatrix(std::vector<std::string> targets, std::vector<std::string> sources,
                       std::vector<int> votes, int annotators)
    : targets_(std::move(targets)),
      sources_(std::move(sources)),
      votes_(std::move(votes)),
      annotators_(annotators) {
  if (annotators_ < 1) throw Error(ErrorCode::InvalidArgument, "need at least one annotator");
  if (votes_.size() != targets_.size() * sources_.size()) {
    throw Error(ErrorCode::InvalidArgument, "vote matrix shape does not match ids");
  }
  for (std::size_t i = 0; i < votes_.size(); ++i) {
    if (votes_[i] < 0 || votes_[i] > annotators_) {
      throw Error(ErrorCode::InvalidArgument,
                  "vote for (" + targets_[i / sources_.size()] + ", " +
                      sources_[i % sources_.size()] + ") is " + std::to_string(votes_[i]) +
                      ", outside 0.." + std::to_string(annotators_));
    }
  }
}

std::string_view to_string(RowTag tag) noexcept {
  switch (tag) {
    case RowTag::Pending: return "pending";
    case RowTag::Consensus: return "consensus";
    case RowTag::Adjudicated: return "adjudicated";
    case RowTag::Override: return "override";
  }
  return "unknown";
}

CrosswalkMatrix::CrosswalkMatrix(std::vector<std::string> targets, std::vector<std::string> sources)
    : targets_(std::move(targets)),
      sources_(std::move(sources)),
      cells_(targets_.size() * sources_.size(), 0),
      tags_(targets_.size(), RowTag::Pending) {}

std::vector<std::size_t> CrosswalkMatrix::matches(std::size_t target) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < sources_.size(); ++k) {
    if (matched(target, k)) out.push_back(k);
  }
  return out;
}

std::vector<std::string> CrosswalkMatrix::pending() const {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < targets_.size(); ++j) {
    if (tags_[j] == RowTag::Pending) out.push_back(targets_[j]);
  }
  return out;
}

std::size_t CrosswalkMatrix::target_index(std::string_view code) const {
  auto it = std::find(targets_.begin(), targets_.end(), code);
  if (it == targets_.end()) {
    throw Error(ErrorCode::UnknownId, "unknown target occupation '" + std::string(code) + "'");
  }
  return static_cast<std::size_t>(it - targets_.begin());
}

std::optional<std::size_t> CrosswalkMatrix::source_index(std::string_view code) const {
  auto it = std::find(sources_.begin(), sources_.end(), code);
  if (it == sources_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - sources_.begin());
}

void CrosswalkMatrix::set_row(std::size_t target, const std::vector<std::size_t>& sources,
                              RowTag tag) {
  auto* row = cells_.data() + target * sources_.size();
  std::fill(row, row + sources_.size(), 0);
  for (auto k : sources) row[k] = 1;
  tags_[target] = tag;
}

Aggregation aggregate_votes(const VoteMatrix& votes, int threshold) {
  if (threshold < 1) throw Error(ErrorCode::InvalidArgument, "threshold must be >= 1");
  Aggregation out{CrosswalkMatrix(votes.targets(), votes.sources()), {}};
  for (std::size_t j = 0; j < votes.targets().size(); ++j) {
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < votes.sources().size(); ++k) {
      if (votes.votes(j, k) >= threshold) kept.push_back(k);
    }
    if (kept.empty()) {
      out.adjudication_queue.push_back(votes.targets()[j]);
    } else {
      out.matrix.set_row(j, kept, RowTag::Consensus);
    }
  }
  return out;
}

CrosswalkMatrix resolve(const CrosswalkMatrix& crosswalk, std::string_view target,
                        const std::set<std::string>& chosen) {
  auto row = crosswalk.target_index(target);
  if (crosswalk.tag(row) != RowTag::Pending) {
    throw Error(ErrorCode::RowNotPending, "row '" + std::string(target) + "' is " +
                                              std::string(to_string(crosswalk.tag(row))));
  }
  if (chosen.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "adjudication of '" + std::string(target) + "' chose no source occupation");
  }
  std::vector<std::size_t> cols;
  for (const auto& code : chosen) {
    auto k = crosswalk.source_index(code);
    if (!k) throw Error(ErrorCode::UnknownSourceId, "unknown source occupation '" + code + "'");
    cols.push_back(*k);
  }
  CrosswalkMatrix out = crosswalk;
  out.set_row(row, cols, RowTag::Adjudicated);
  return out;
}

CrosswalkMatrix apply_overrides(const CrosswalkMatrix& crosswalk,
                                const std::set<std::string>& zero_override) {
  CrosswalkMatrix out = crosswalk;
  for (const auto& code : zero_override) {
    auto row = out.target_index(code);
    out.set_row(row, out.matches(row), RowTag::Override);
  }
  return out;
}

RiskTable transfer_risk(const CrosswalkMatrix& crosswalk, const RiskTable& source_risk,
                        const std::set<std::string>& zero_override) {
  std::map<std::string, double> values;
  for (std::size_t j = 0; j < crosswalk.targets().size(); ++j) {
    const auto& code = crosswalk.targets()[j];
    if (zero_override.contains(code) || crosswalk.tag(j) == RowTag::Override) {
      values[code] = 0.0;
      continue;
    }
    auto cols = crosswalk.matches(j);
    if (cols.empty()) {
      throw Error(ErrorCode::UnresolvedRow, "target occupation '" + code + "' has no match");
    }
    double sum = 0.0;
    for (auto k : cols) {
      const auto& src = crosswalk.sources()[k];
      auto p = source_risk.find(src);
      if (!p) {
        throw Error(ErrorCode::MissingSourceRisk,
                    "source occupation '" + src + "' (matched by '" + code + "') has no risk");
      }
      sum += *p;
    }
    values[code] = sum / static_cast<double>(cols.size());
  }
  return RiskTable(std::move(values));
}

VoteMatrix parse_votes(std::string_view text, int annotators, std::string_view source) {
  auto rows = parse_csv(text);
  std::string src(source);
  if (rows.empty()) throw Error(ErrorCode::EmptyTable, src + ": no header");
  if (rows[0].fields.size() != 3 || trim(rows[0].fields[0]) != "target_code" ||
      trim(rows[0].fields[1]) != "source_code" || trim(rows[0].fields[2]) != "votes") {
    throw Error(ErrorCode::MalformedRow, src + ": header must be 'target_code,source_code,votes'");
  }
  std::vector<std::string> targets;
  std::vector<std::string> sources;
  std::map<std::string, std::size_t> tpos;
  std::map<std::string, std::size_t> spos;
  std::map<std::pair<std::size_t, std::size_t>, int> cells;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 3) {
      throw Error(ErrorCode::MalformedRow, src + ": line " + std::to_string(row.line) +
                                               ": expected 3 fields");
    }
    auto t = trim(row.fields[0]);
    auto s = trim(row.fields[1]);
    auto v = parse_integer(row.fields[2], row.line, "votes");
    if (t.empty()) {
      throw Error(ErrorCode::MalformedRow, src + ": line " + std::to_string(row.line) + ": empty target");
    }
    auto [ti, tnew] = tpos.emplace(t, targets.size());
    if (tnew) targets.push_back(t);
    // A row with an empty source code declares a target with no candidates.
    if (s.empty()) continue;
    auto [si, snew] = spos.emplace(s, sources.size());
    if (snew) sources.push_back(s);
    if (!cells.emplace(std::pair{ti->second, si->second}, static_cast<int>(v)).second) {
      throw Error(ErrorCode::DuplicateKey, src + ": line " + std::to_string(row.line) + ": (" +
                                               t + ", " + s + ") repeated");
    }
  }
  std::vector<int> votes(targets.size() * sources.size(), 0);
  for (const auto& [key, v] : cells) votes[key.first * sources.size() + key.second] = v;
  return VoteMatrix(std::move(targets), std::move(sources), std::move(votes), annotators);
}

VoteMatrix load_votes(const std::filesystem::path& path, int annotators) {
  return parse_votes(read_file(path), annotators, path.string());
}

std::map<std::string, std::set<std::string>> load_adjudications(const std::filesystem::path& path) {
  auto rows = read_csv_file(path);
  if (rows.empty() || rows[0].fields.size() != 2 || trim(rows[0].fields[0]) != "target_code" ||
      trim(rows[0].fields[1]) != "source_code") {
    throw Error(ErrorCode::MalformedRow, path.string() + ": header must be 'target_code,source_code'");
  }
  std::map<std::string, std::set<std::string>> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].fields.size() != 2) {
      throw Error(ErrorCode::MalformedRow,
                  path.string() + ": line " + std::to_string(rows[r].line) + ": expected 2 fields");
    }
    out[trim(rows[r].fields[0])].insert(trim(rows[r].fields[1]));
  }
  return out;
}

std::set<std::string> load_code_list(const std::filesystem::path& path) {
  std::set<std::string> out;
  auto text = read_file(path);
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    auto line = trim(std::string_view(text).substr(start, end - start));
    if (!line.empty() && line.front() != '#') out.insert(line);
    start = end + 1;
  }
  return out;
}

std::string to_crosswalk_csv(const CrosswalkMatrix& crosswalk) {
  std::string out = "target_code,source_code\n";
  for (std::size_t j = 0; j < crosswalk.targets().size(); ++j) {
    for (auto k : crosswalk.matches(j)) {
      out += csv_line({crosswalk.targets()[j], crosswalk.sources()[k]});
    }
  }
  return out;
}

std::string to_provenance_csv(const CrosswalkMatrix& crosswalk) {
  std::string out = "target_code,tag\n";
  for (std::size_t j = 0; j < crosswalk.targets().size(); ++j) {
    out += csv_line({crosswalk.targets()[j], std::string(to_string(crosswalk.tag(j)))});
  }
  return out;
}

}  // namespace laborscape::crosswalk
