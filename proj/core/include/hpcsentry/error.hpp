// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hpcsentry {

enum class ErrorCode : std::uint8_t {
  // telemetry
  MalformedLine,
  UnsupportedEvent,
  IncompleteGroup,
  NonMonotonicTime,
  EmptyCorpus,
  UnknownProfile,
  // seqae
  ShapeMismatch,
  EmptyTrainingSet,
  DivergedTraining,
  InsufficientSamples,
  // spectral
  NotPowerOfTwo,
  WindowTooLong,
  // corrmod
  TraceTooShort,
  TooShort,
  BadPolicy,
  // detector
  TerminalState,
  NotAwaiting,
  BadIndex,
  // recovery
  BadRate,
  // persistence / app
  BadFormat,
  Io,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hpcsentry
