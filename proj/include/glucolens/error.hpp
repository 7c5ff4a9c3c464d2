#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace glucolens {

// Every failure the library reports. Codes are grouped by the module that
// raises them; the CLI maps each group onto an exit code.
enum class ErrorCode {
  // ingest
  MalformedRow,
  OutOfRange,
  EmptyTrace,
  UnknownActivityKind,
  OverlappingEvents,
  NegativeMacro,
  NetCarbExceedsTotal,
  PercentSumExceeded,
  StartAfterEnd,
  IdMismatch,
  BmiOutOfRange,
  InvalidRecord,
  // glycemic core
  GapTooLarge,
  InsufficientData,
  NonPositiveBaseline,
  NoMorningSamples,
  NoOvernightSamples,
  InvalidWindow,
  // features
  NoPriorDays,
  EmptyLog,
  MissingUpstreamFeature,
  HeterogeneousSets,
  // resampling
  UnscaledData,
  SingleClass,
  EmptyDataset,
  // models
  SingularSystem,
  EmptyData,
  DimensionMismatch,
  DivergedLoss,
  InvalidHyperparameter,
  // llm bridge
  Timeout,
  AuthFailure,
  RefusedPrediction,
  NoNumberFound,
  ImplausibleValue,
  TransientFailure,
  // ensemble
  SchemaMismatch,
  MissingProvider,
  // counterfactuals
  NoCounterfactualFound,
  // evaluation
  InsufficientClassCount,
  ZeroMeanTarget,
  NonPositiveTruth,
  // io / config
  IoError,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

// True for errors caused by bad input files or configuration (as opposed to
// failures of a computation on valid input).
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace glucolens
