#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qnet {

enum class Errc {
  kOverlappingModes,
  kNonUnitary,
  kUnknownMode,
  kNonPositiveWidth,
  kSameMode,
  kZeroProbabilityHerald,
  kMissingLink,
  kEmptyHistogram,
  kConfigInvalid,
  kInvalidArgument,
  kUnsupported,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kOverlappingModes: return "OverlappingModes";
    case Errc::kNonUnitary: return "NonUnitary";
    case Errc::kUnknownMode: return "UnknownMode";
    case Errc::kNonPositiveWidth: return "NonPositiveWidth";
    case Errc::kSameMode: return "SameMode";
    case Errc::kZeroProbabilityHerald: return "ZeroProbabilityHerald";
    case Errc::kMissingLink: return "MissingLink";
    case Errc::kEmptyHistogram: return "EmptyHistogram";
    case Errc::kConfigInvalid: return "ConfigInvalid";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kUnsupported: return "Unsupported";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above so
// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace qnet
