#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pivotmodel {

enum class ErrorCode {
  parse,       // malformed formula or document
  bind,        // name resolution failed
  validation,  // structurally valid input that violates a model invariant
  not_found,   // unknown model, dimension, member or rule
  data,        // rejected data file
  conflict,    // stale model version
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace pivotmodel
