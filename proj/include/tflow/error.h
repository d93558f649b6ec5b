//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_ERROR_H_
#define TFLOW_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace tflow {

enum class Errc {
  kSyntax,
  kVocab,
  kAromatic,
  kTooLarge,
  kDisconnected,
  kIo,
  kFormat,
  kRange,
  kNotInitialized,
  kZeroScale,
  kSingular,
  kShape,
  kNoCache,
  kAlphabet,
  kEmpty,
  kNotNormalized,
  kBatchTooSmall,
  kNonFinite,
  kNonFiniteLoss,
  kVersion,
  kUntrained,
  kWidthMismatch,
  kEmptyTrain,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
  case Errc::kSyntax:
    return "E_SYNTAX";
  case Errc::kVocab:
    return "E_VOCAB";
  case Errc::kAromatic:
    return "E_AROMATIC";
  case Errc::kTooLarge:
    return "E_TOO_LARGE";
  case Errc::kDisconnected:
    return "E_DISCONNECTED";
  case Errc::kIo:
    return "E_IO";
  case Errc::kFormat:
    return "E_FORMAT";
  case Errc::kRange:
    return "E_RANGE";
  case Errc::kNotInitialized:
    return "E_NOT_INITIALIZED";
  case Errc::kZeroScale:
    return "E_ZERO_SCALE";
  case Errc::kSingular:
    return "E_SINGULAR";
  case Errc::kShape:
    return "E_SHAPE";
  case Errc::kNoCache:
    return "E_NO_CACHE";
  case Errc::kAlphabet:
    return "E_ALPHABET";
  case Errc::kEmpty:
    return "E_EMPTY";
  case Errc::kNotNormalized:
    return "E_NOT_NORMALIZED";
  case Errc::kBatchTooSmall:
    return "E_BATCH_TOO_SMALL";
  case Errc::kNonFinite:
    return "E_NONFINITE";
  case Errc::kNonFiniteLoss:
    return "E_NONFINITE_LOSS";
  case Errc::kVersion:
    return "E_VERSION";
  case Errc::kUntrained:
    return "E_UNTRAINED";
  case Errc::kWidthMismatch:
    return "E_WIDTH_MISMATCH";
  case Errc::kEmptyTrain:
    return "E_EMPTY_TRAIN";
  }
  return "E_UNKNOWN";
}

// All library failures surface as this exception; code() identifies the
// failure class, what() carries the human-readable diagnostics.
class Error: public std::runtime_error {
public:
  Error(Errc code, const std::string &msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code) { }

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

}  // namespace tflow

#endif  // TFLOW_ERROR_H_
