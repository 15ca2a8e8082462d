#pragma once

#include <stdexcept>
#include <string>

namespace rsgda {

enum class ErrorCategory {
  domain,
  dimension,
  enumeration_limit,
  schedule_validity,
  infeasible,
  plan,
  format,
  io,
  config,
  internal,
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::dimension: return "dimension";
    case ErrorCategory::enumeration_limit: return "enumeration_limit";
    case ErrorCategory::schedule_validity: return "schedule_validity";
    case ErrorCategory::infeasible: return "infeasible";
    case ErrorCategory::plan: return "plan";
    case ErrorCategory::format: return "format";
    case ErrorCategory::io: return "io";
    case ErrorCategory::config: return "config";
    case ErrorCategory::internal: return "internal";
  }
  return "internal";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory c, const std::string& msg) {
  throw Error(c, msg);
}

}  // namespace rsgda
