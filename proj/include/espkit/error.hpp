#pragma once

#include <stdexcept>
#include <string>

namespace espkit {

enum class errc {
  // tabular
  missing_target,
  non_binary_target,
  malformed_csv,
  empty_dataset,
  insufficient_numeric_columns,
  class_too_small,
  // corrupt
  feature_not_found,
  outlier_on_categorical,
  predicate_selects_no_rows,
  level_not_in_schedule,
  empty_feature_list,
  invalid_spec,
  // learn
  degenerate_training,
  singular_covariance,
  schema_mismatch,
  empty_test,
  // esp
  too_few_points,
  zero_baseline,
  mixed_schedules,
  too_few_runs,
  schema_violation,
  // stats
  too_few_pairs,
  empty_input,
  p_value_out_of_range,
  // runner / cli
  scenario_not_found,
  incomplete_repetition,
  empty_store,
  integrity_error,
  validation_failure,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::missing_target: return "MissingTarget";
    case errc::non_binary_target: return "NonBinaryTarget";
    case errc::malformed_csv: return "MalformedCsv";
    case errc::empty_dataset: return "EmptyDataset";
    case errc::insufficient_numeric_columns: return "InsufficientNumericColumns";
    case errc::class_too_small: return "ClassTooSmall";
    case errc::feature_not_found: return "FeatureNotFound";
    case errc::outlier_on_categorical: return "OutlierOnCategorical";
    case errc::predicate_selects_no_rows: return "PredicateSelectsNoRows";
    case errc::level_not_in_schedule: return "LevelNotInSchedule";
    case errc::empty_feature_list: return "EmptyFeatureList";
    case errc::invalid_spec: return "InvalidSpec";
    case errc::degenerate_training: return "DegenerateTraining";
    case errc::singular_covariance: return "SingularCovariance";
    case errc::schema_mismatch: return "SchemaMismatch";
    case errc::empty_test: return "EmptyTest";
    case errc::too_few_points: return "TooFewPoints";
    case errc::zero_baseline: return "ZeroBaseline";
    case errc::mixed_schedules: return "MixedSchedules";
    case errc::too_few_runs: return "TooFewRuns";
    case errc::schema_violation: return "SchemaViolation";
    case errc::too_few_pairs: return "TooFewPairs";
    case errc::empty_input: return "EmptyInput";
    case errc::p_value_out_of_range: return "PValueOutOfRange";
    case errc::scenario_not_found: return "ScenarioNotFound";
    case errc::incomplete_repetition: return "IncompleteRepetition";
    case errc::empty_store: return "EmptyStore";
    case errc::integrity_error: return "IntegrityError";
    case errc::validation_failure: return "ValidationFailure";
    case errc::io_error: return "IoError";
  }
  return "Unknown";
}

/// Library-wide exception carrying a stable error code plus a human message.
class error : public std::runtime_error {
 public:
  error(errc code, std::string message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
  throw error(code, message);
}

}  // namespace espkit
