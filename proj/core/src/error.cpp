#include "milo/error.hpp"

namespace milo {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kUnsupportedVersion: return "unsupported_version";
    case ErrorCode::kTruncatedFile: return "truncated_file";
    case ErrorCode::kNonFiniteValue: return "non_finite_value";
    case ErrorCode::kNonDenseClassIds: return "non_dense_class_ids";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kZeroNormEmbedding: return "zero_norm_embedding";
    case ErrorCode::kEmptyIndexList: return "empty_index_list";
    case ErrorCode::kBudgetExceedsDataset: return "budget_exceeds_dataset";
    case ErrorCode::kInvalidMetric: return "invalid_metric";
    case ErrorCode::kIndexOutOfRange: return "index_out_of_range";
    case ErrorCode::kAlreadySelected: return "already_selected";
    case ErrorCode::kBudgetTooLarge: return "budget_too_large";
    case ErrorCode::kInvalidEpsilon: return "invalid_epsilon";
    case ErrorCode::kInstanceTooLarge: return "instance_too_large";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kNonFiniteGain: return "non_finite_gain";
    case ErrorCode::kInvalidDistribution: return "invalid_distribution";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kEpochOutOfRange: return "epoch_out_of_range";
    case ErrorCode::kIoError: return "io_error";
    case ErrorCode::kDirectoryNotEmpty: return "directory_not_empty";
    case ErrorCode::kNotPreprocessed: return "not_preprocessed";
    case ErrorCode::kChecksumMismatch: return "checksum_mismatch";
    case ErrorCode::kVersionUnsupported: return "version_unsupported";
    case ErrorCode::kCorruptMetadata: return "corrupt_metadata";
  }
  return "unknown";
}

}  // namespace milo
