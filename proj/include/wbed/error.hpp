/**
 * Copyright 2026 The wbed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef WBED_ERROR_HPP_
#define WBED_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <utility>

namespace wbed {

/// Every failure the library can produce, so callers can branch on the
/// condition instead of parsing message text.
enum class ErrorCode {
  kDimensionMismatch,
  kClassCountMismatch,
  kLengthMismatch,
  kValueOutOfRange,
  kNonFinite,
  kThresholdOutOfRange,
  kNotBinarized,
  kNoValidClasses,
  kBadMagic,
  kBadVersion,
  kTruncatedFile,
  kTrailingData,
  kUnsupportedPngFormat,
  kInvalidLabelValue,
  kParseError,
  kDuplicateId,
  kLabelOutOfRange,
  kMissingFile,
  kIoError,
  kInvalidArgument,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch:   return "DimensionMismatch";
    case ErrorCode::kClassCountMismatch:  return "ClassCountMismatch";
    case ErrorCode::kLengthMismatch:      return "LengthMismatch";
    case ErrorCode::kValueOutOfRange:     return "ValueOutOfRange";
    case ErrorCode::kNonFinite:           return "NonFinite";
    case ErrorCode::kThresholdOutOfRange: return "ThresholdOutOfRange";
    case ErrorCode::kNotBinarized:        return "NotBinarized";
    case ErrorCode::kNoValidClasses:      return "NoValidClasses";
    case ErrorCode::kBadMagic:            return "BadMagic";
    case ErrorCode::kBadVersion:          return "BadVersion";
    case ErrorCode::kTruncatedFile:       return "TruncatedFile";
    case ErrorCode::kTrailingData:        return "TrailingData";
    case ErrorCode::kUnsupportedPngFormat: return "UnsupportedPngFormat";
    case ErrorCode::kInvalidLabelValue:   return "InvalidLabelValue";
    case ErrorCode::kParseError:          return "ParseError";
    case ErrorCode::kDuplicateId:         return "DuplicateId";
    case ErrorCode::kLabelOutOfRange:     return "LabelOutOfRange";
    case ErrorCode::kMissingFile:         return "MissingFile";
    case ErrorCode::kIoError:             return "IoError";
    case ErrorCode::kInvalidArgument:     return "InvalidArgument";
  }
  return "UnknownError";
}

/// Typed runtime error. what() carries "<Code>: <message>"; message() is the
/// bare text so wrappers can re-prefix it with an image id.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(std::move(message)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace wbed

#endif  // WBED_ERROR_HPP_
