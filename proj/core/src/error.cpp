// SPDX-License-Identifier: Apache-2.0
#include "hpcsentry/error.hpp"

namespace hpcsentry {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::UnsupportedEvent: return "UnsupportedEvent";
    case ErrorCode::IncompleteGroup: return "IncompleteGroup";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::UnknownProfile: return "UnknownProfile";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::DivergedTraining: return "DivergedTraining";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::NotPowerOfTwo: return "NotPowerOfTwo";
    case ErrorCode::WindowTooLong: return "WindowTooLong";
    case ErrorCode::TraceTooShort: return "TraceTooShort";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::BadPolicy: return "BadPolicy";
    case ErrorCode::TerminalState: return "TerminalState";
    case ErrorCode::NotAwaiting: return "NotAwaiting";
    case ErrorCode::BadIndex: return "BadIndex";
    case ErrorCode::BadRate: return "BadRate";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace hpcsentry
