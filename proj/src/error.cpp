#include "glucolens/error.hpp"

namespace glucolens {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::UnknownActivityKind: return "UnknownActivityKind";
    case ErrorCode::OverlappingEvents: return "OverlappingEvents";
    case ErrorCode::NegativeMacro: return "NegativeMacro";
    case ErrorCode::NetCarbExceedsTotal: return "NetCarbExceedsTotal";
    case ErrorCode::PercentSumExceeded: return "PercentSumExceeded";
    case ErrorCode::StartAfterEnd: return "StartAfterEnd";
    case ErrorCode::IdMismatch: return "IdMismatch";
    case ErrorCode::BmiOutOfRange: return "BmiOutOfRange";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::GapTooLarge: return "GapTooLarge";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonPositiveBaseline: return "NonPositiveBaseline";
    case ErrorCode::NoMorningSamples: return "NoMorningSamples";
    case ErrorCode::NoOvernightSamples: return "NoOvernightSamples";
    case ErrorCode::InvalidWindow: return "InvalidWindow";
    case ErrorCode::NoPriorDays: return "NoPriorDays";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::MissingUpstreamFeature: return "MissingUpstreamFeature";
    case ErrorCode::HeterogeneousSets: return "HeterogeneousSets";
    case ErrorCode::UnscaledData: return "UnscaledData";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::InvalidHyperparameter: return "InvalidHyperparameter";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::AuthFailure: return "AuthFailure";
    case ErrorCode::RefusedPrediction: return "RefusedPrediction";
    case ErrorCode::NoNumberFound: return "NoNumberFound";
    case ErrorCode::ImplausibleValue: return "ImplausibleValue";
    case ErrorCode::TransientFailure: return "TransientFailure";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::MissingProvider: return "MissingProvider";
    case ErrorCode::NoCounterfactualFound: return "NoCounterfactualFound";
    case ErrorCode::InsufficientClassCount: return "InsufficientClassCount";
    case ErrorCode::ZeroMeanTarget: return "ZeroMeanTarget";
    case ErrorCode::NonPositiveTruth: return "NonPositiveTruth";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRow:
    case ErrorCode::OutOfRange:
    case ErrorCode::EmptyTrace:
    case ErrorCode::UnknownActivityKind:
    case ErrorCode::OverlappingEvents:
    case ErrorCode::NegativeMacro:
    case ErrorCode::NetCarbExceedsTotal:
    case ErrorCode::PercentSumExceeded:
    case ErrorCode::StartAfterEnd:
    case ErrorCode::IdMismatch:
    case ErrorCode::BmiOutOfRange:
    case ErrorCode::InvalidRecord:
    case ErrorCode::IoError:
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidHyperparameter:
    case ErrorCode::HeterogeneousSets:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace glucolens
