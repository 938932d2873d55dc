/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace boxmend {

enum class ErrorCode {
  // geometry
  kEmptyMask,
  kGammaOutOfRange,
  kRleLengthMismatch,
  // annotation io
  kParseError,
  kSchemaError,
  kDanglingReference,
  kInvalidBox,
  kIoError,
  // noise / synth
  kLevelOutOfRange,
  kPlacementFailure,
  kUnknownClass,
  kInvalidArgument,
  // provider protocol
  kProtocolError,
  kProviderError,
  kTimeout,
  kChannelClosed,
  // fmc
  kEmptyCandidateSet,
  kArityMismatch,
  // interpolation
  kNonFiniteInput,
  kInsufficientData,
  kCorrespondenceError,
  // evaluation
  kNoEvaluableClasses,
  kEmptyLevels,
};

std::string_view to_string(ErrorCode code);

/// True for errors raised by a mask provider or its transport.
bool is_provider_failure(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace boxmend
