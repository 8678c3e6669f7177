#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace milo {

enum class ErrorCode {
  // ingestion
  kBadMagic,
  kUnsupportedVersion,
  kTruncatedFile,
  kNonFiniteValue,
  kNonDenseClassIds,
  kLengthMismatch,
  // kernels and budgets
  kZeroNormEmbedding,
  kEmptyIndexList,
  kBudgetExceedsDataset,
  kInvalidMetric,
  // set functions and maximizers
  kIndexOutOfRange,
  kAlreadySelected,
  kBudgetTooLarge,
  kInvalidEpsilon,
  kInstanceTooLarge,
  // exploration
  kEmptyInput,
  kNonFiniteGain,
  kInvalidDistribution,
  // curriculum
  kInvalidConfig,
  kEpochOutOfRange,
  // metadata
  kIoError,
  kDirectoryNotEmpty,
  kNotPreprocessed,
  kChecksumMismatch,
  kVersionUnsupported,
  kCorruptMetadata,
};

/// Stable snake_case identifier, used as the greppable prefix of CLI errors.
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace milo
