#include "permstab/error.hpp"

namespace permstab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroNormRow: return "ZeroNormRow";
    case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::IsolatedNode: return "IsolatedNode";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::TooFewEigenvalues: return "TooFewEigenvalues";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::BundleTooSmall: return "BundleTooSmall";
    case ErrorCode::MismatchedPartition: return "MismatchedPartition";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NoIncorrectCandidate: return "NoIncorrectCandidate";
    case ErrorCode::MissingRepresentativeAnswer: return "MissingRepresentativeAnswer";
    case ErrorCode::PositionMismatch: return "PositionMismatch";
    case ErrorCode::MissingFullAnswers: return "MissingFullAnswers";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::NonPositiveBeta: return "NonPositiveBeta";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooLargeForBruteForce: return "TooLargeForBruteForce";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BundleInvalid: return "BundleInvalid";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::CorruptPayload: return "CorruptPayload";
    case ErrorCode::InvalidPermutation: return "InvalidPermutation";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::MalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace permstab
