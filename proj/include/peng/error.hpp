#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace peng {

enum class ErrorCode {
  invalid_argument,
  too_few_points,
  non_finite_input,
  evaluation_overflow,
  out_of_order_epoch,
  first_epoch_mismatch,
  duplicate_model,
  unknown_model,
  session_finished,
  parse_error,
  invariant_violation,
  missing_train_loss,
  empty_outcomes,
  invalid_spec,
  io_error,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI and the streaming protocol) can map it without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for errors caused by bad input (flags, files, call order) rather
  /// than the environment.
  bool is_validation() const noexcept {
    return code_ != ErrorCode::io_error && code_ != ErrorCode::evaluation_overflow;
  }

 private:
  ErrorCode code_;
};

}  // namespace peng
