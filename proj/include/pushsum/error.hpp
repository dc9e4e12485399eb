#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pushsum {

enum class Errc {
  InvalidArgument,
  SelfLoop,
  DuplicateEdge,
  NotStronglyConnected,
  EndpointOutOfRange,
  IncompleteTable,
  NeverReliableLink,
  ScheduleTooShort,
  NegativeInput,
  ZeroWeight,
  IterationOutOfRange,
  WindowTooShort,
  NotRowStochastic,
  HorizonTooShort,
  DimensionMismatch,
  DimensionTooLarge,
  ConfigInvalid,
  IOFailure,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::SelfLoop: return "SelfLoop";
    case Errc::DuplicateEdge: return "DuplicateEdge";
    case Errc::NotStronglyConnected: return "NotStronglyConnected";
    case Errc::EndpointOutOfRange: return "EndpointOutOfRange";
    case Errc::IncompleteTable: return "IncompleteTable";
    case Errc::NeverReliableLink: return "NeverReliableLink";
    case Errc::ScheduleTooShort: return "ScheduleTooShort";
    case Errc::NegativeInput: return "NegativeInput";
    case Errc::ZeroWeight: return "ZeroWeight";
    case Errc::IterationOutOfRange: return "IterationOutOfRange";
    case Errc::WindowTooShort: return "WindowTooShort";
    case Errc::NotRowStochastic: return "NotRowStochastic";
    case Errc::HorizonTooShort: return "HorizonTooShort";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DimensionTooLarge: return "DimensionTooLarge";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::IOFailure: return "IOFailure";
  }
  return "Unknown";
}

/// Exception type thrown by every module. The code identifies the failure
/// class; what() carries a human-readable message with context.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace pushsum
