#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace permstab {

enum class ErrorCode {
  InvalidArgument,
  ZeroNormRow,
  NonPositiveSigma,
  IsolatedNode,
  NotSymmetric,
  NoConvergence,
  TooFewEigenvalues,
  KTooLarge,
  BundleTooSmall,
  MismatchedPartition,
  DegenerateInput,
  NoIncorrectCandidate,
  MissingRepresentativeAnswer,
  PositionMismatch,
  MissingFullAnswers,
  EmptyBatch,
  NonPositiveBeta,
  InfeasibleSpec,
  LengthMismatch,
  TooLargeForBruteForce,
  IoFailure,
  BundleInvalid,
  BadMagic,
  UnsupportedVersion,
  CorruptPayload,
  InvalidPermutation,
  NonFiniteState,
  MalformedInput,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
/// The what() string is "<CodeName>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace permstab
