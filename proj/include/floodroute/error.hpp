#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace floodroute {

enum class Errc {
  invalid_argument,
  invalid_measurement,
  out_of_bounds,
  parse_error,
  validation_error,
  io_error,
  not_covered,
  provider_unavailable,
  protocol_error,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::invalid_measurement: return "invalid_measurement";
    case Errc::out_of_bounds: return "out_of_bounds";
    case Errc::parse_error: return "parse_error";
    case Errc::validation_error: return "validation_error";
    case Errc::io_error: return "io_error";
    case Errc::not_covered: return "not_covered";
    case Errc::provider_unavailable: return "provider_unavailable";
    case Errc::protocol_error: return "protocol_error";
  }
  return "unknown";
}

// Every failure the library reports carries a machine-readable code. Loaders
// that validate many rows attach one diagnostic per offending row.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message,
        std::vector<std::string> details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  Errc code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  Errc code_;
  std::vector<std::string> details_;
};

}  // namespace floodroute
