#pragma once

#include <stdexcept>
#include <string>

namespace evhar {

// Error codes are shared with the C API (see include/evhar.h); keep the
// numeric values in sync.
enum class ErrorCode : int {
  ok = 0,
  io = 1,
  config = 2,
  unsupported_format = 3,
  truncated_record = 4,
  monotonicity_violation = 5,
  address_out_of_range = 6,
  malformed_line = 7,
  unencodable_event = 8,
  degenerate_video = 9,
  empty_stream = 10,
  geometry_mismatch = 11,
  map_too_small = 12,
  dimension_mismatch = 13,
  too_few_samples = 14,
  no_features = 15,
  single_class = 16,
  degenerate_features = 17,
  empty_train_set = 18,
  missing_group = 19,
  manifest = 20,
  invalid_argument = 21,
  internal = 22,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::io: return "io_error";
    case ErrorCode::config: return "config_error";
    case ErrorCode::unsupported_format: return "unsupported_format";
    case ErrorCode::truncated_record: return "truncated_record";
    case ErrorCode::monotonicity_violation: return "monotonicity_violation";
    case ErrorCode::address_out_of_range: return "address_out_of_range";
    case ErrorCode::malformed_line: return "malformed_line";
    case ErrorCode::unencodable_event: return "unencodable_event";
    case ErrorCode::degenerate_video: return "degenerate_video";
    case ErrorCode::empty_stream: return "empty_stream";
    case ErrorCode::geometry_mismatch: return "geometry_mismatch";
    case ErrorCode::map_too_small: return "map_too_small";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::too_few_samples: return "too_few_samples";
    case ErrorCode::no_features: return "no_features";
    case ErrorCode::single_class: return "single_class";
    case ErrorCode::degenerate_features: return "degenerate_features";
    case ErrorCode::empty_train_set: return "empty_train_set";
    case ErrorCode::missing_group: return "missing_group";
    case ErrorCode::manifest: return "manifest_error";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::internal: return "internal_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace evhar
