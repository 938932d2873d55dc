/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "boxmend/error.hpp"

namespace boxmend {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kGammaOutOfRange: return "GammaOutOfRange";
    case ErrorCode::kRleLengthMismatch: return "RleLengthMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kInvalidBox: return "InvalidBox";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kLevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::kPlacementFailure: return "PlacementFailure";
    case ErrorCode::kUnknownClass: return "UnknownClass";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kProtocolError: return "ProtocolError";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kChannelClosed: return "ChannelClosed";
    case ErrorCode::kEmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::kArityMismatch: return "ArityMismatch";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kCorrespondenceError: return "CorrespondenceError";
    case ErrorCode::kNoEvaluableClasses: return "NoEvaluableClasses";
    case ErrorCode::kEmptyLevels: return "EmptyLevels";
  }
  return "Unknown";
}

bool is_provider_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::kProtocolError:
    case ErrorCode::kProviderError:
    case ErrorCode::kTimeout:
    case ErrorCode::kChannelClosed:
    case ErrorCode::kArityMismatch:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace boxmend
