#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace laborscape {

enum class ErrorCode {
  // input / config
  Io,
  Config,
  MalformedRow,
  NegativeCount,
  DuplicateKey,
  EmptyCity,
  EmptyTable,
  OutOfRangeCoordinate,
  NonPositiveSize,
  UnknownId,
  MissingRisk,
  MissingMetric,
  MissingFeature,
  MissingFlag,
  MissingCoordinates,
  UnknownMetric,
  InvalidArgument,
  // computation
  RowNotPending,
  UnknownSourceId,
  UnresolvedRow,
  MissingSourceRisk,
  NoAdvantagedOccupations,
  DegenerateData,
  DegenerateClustering,
  TooFewPoints,
  ZeroVariance,
  NonPositiveUnderLog,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for errors caused by bad inputs or configuration (CLI exit code 2);
/// everything else is a computation error (exit code 1).
bool is_input_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 protected:
  struct Verbatim {};
  Error(Verbatim, ErrorCode code, const std::string& text) : std::runtime_error(text), code_(code) {}

 private:
  ErrorCode code_;
};

}  // namespace laborscape
