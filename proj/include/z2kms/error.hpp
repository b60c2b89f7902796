#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace z2kms {

enum class ErrorCode {
  NotHermitian,
  NoConvergence,
  DimensionMismatch,
  NotUnitary,
  DegenerateSpectrum,
  IndexOutOfRange,
  NotDominated,
  NotGammaInvariant,
  NotFaithful,
  GradingNotInvariant,
  NotInTwistedCenter,
  NotAnAlgebra,
  CapExceeded,
  InvalidInput,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NotDominated: return "NotDominated";
    case ErrorCode::NotGammaInvariant: return "NotGammaInvariant";
    case ErrorCode::NotFaithful: return "NotFaithful";
    case ErrorCode::GradingNotInvariant: return "GradingNotInvariant";
    case ErrorCode::NotInTwistedCenter: return "NotInTwistedCenter";
    case ErrorCode::NotAnAlgebra: return "NotAnAlgebra";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace z2kms
