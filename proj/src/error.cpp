#include "laborscape/error.hpp"

namespace laborscape {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NegativeCount: return "NegativeCount";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::EmptyCity: return "EmptyCity";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::OutOfRangeCoordinate: return "OutOfRangeCoordinate";
    case ErrorCode::NonPositiveSize: return "NonPositiveSize";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::MissingRisk: return "MissingRisk";
    case ErrorCode::MissingMetric: return "MissingMetric";
    case ErrorCode::MissingFeature: return "MissingFeature";
    case ErrorCode::MissingFlag: return "MissingFlag";
    case ErrorCode::MissingCoordinates: return "MissingCoordinates";
    case ErrorCode::UnknownMetric: return "UnknownMetric";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RowNotPending: return "RowNotPending";
    case ErrorCode::UnknownSourceId: return "UnknownSourceId";
    case ErrorCode::UnresolvedRow: return "UnresolvedRow";
    case ErrorCode::MissingSourceRisk: return "MissingSourceRisk";
    case ErrorCode::NoAdvantagedOccupations: return "NoAdvantagedOccupations";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::DegenerateClustering: return "DegenerateClustering";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::NonPositiveUnderLog: return "NonPositiveUnderLog";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::Config:
    case ErrorCode::MalformedRow:
    case ErrorCode::NegativeCount:
    case ErrorCode::DuplicateKey:
    case ErrorCode::EmptyCity:
    case ErrorCode::EmptyTable:
    case ErrorCode::OutOfRangeCoordinate:
    case ErrorCode::NonPositiveSize:
    case ErrorCode::UnknownId:
    case ErrorCode::MissingRisk:
    case ErrorCode::MissingMetric:
    case ErrorCode::MissingFeature:
    case ErrorCode::MissingFlag:
    case ErrorCode::MissingCoordinates:
    case ErrorCode::UnknownMetric:
    case ErrorCode::InvalidArgument:
      return true;
    default:
      return false;
  }
}

}  // namespace laborscape
