#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qfourier {

/// Error categories shared by the C++ core and the C API status codes.
enum class ErrorCode : int {
  InvalidArgument = 1,
  WindowTooShort = 2,
  PastTooShallow = 3,
  InternalMismatch = 4,
  SearchBudgetExhausted = 5,
  DegenerateInput = 6,
  Io = 7,
  Parse = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// An innovation index outside the window was requested.
class WindowTooShort : public Error {
 public:
  explicit WindowTooShort(std::int64_t missing_index)
      : Error(ErrorCode::WindowTooShort,
              "innovation window does not cover index " + std::to_string(missing_index)),
        missing_index_(missing_index) {}

  std::int64_t missing_index() const noexcept { return missing_index_; }

 private:
  std::int64_t missing_index_;
};

class PastTooShallow : public Error {
 public:
  PastTooShallow(std::size_t have, std::size_t required)
      : Error(ErrorCode::PastTooShallow, "frozen past has depth " + std::to_string(have) +
                                             ", required depth " + std::to_string(required)),
        required_(required) {}

  std::size_t required_depth() const noexcept { return required_; }

 private:
  std::size_t required_;
};

}  // namespace qfourier
